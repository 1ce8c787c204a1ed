#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <utility>
#include <vector>

#include "asymnet/msg/fragment.hpp"

namespace asymnet::backend {

inline constexpr std::size_t kFeFifoBytes = 2048;

struct PumpStats {
  std::uint64_t requests = 0;
  std::uint64_t packets = 0;
  std::uint64_t bytes = 0;
  std::uint64_t max_fill = 0;
};

// Per-link request token holder. A request is posted only when the FE-FIFO has room
// for a maximum-size packet and none is outstanding.
class DataPump {
 public:
  explicit DataPump(unsigned link_id = 0, std::size_t fifo_bytes = kFeFifoBytes)
      : link_id_(link_id), capacity_(fifo_bytes) {}

  unsigned link_id() const { return link_id_; }
  bool enabled() const { return enabled_; }
  void set_enabled(bool e) { enabled_ = e; }
  bool faulted() const { return !fault_.empty(); }
  const std::string& fault() const { return fault_; }
  bool request_outstanding() const { return outstanding_; }
  std::size_t fill() const { return fill_; }
  std::size_t free_space() const { return capacity_ - fill_; }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return fifo_.empty(); }
  std::size_t packets_queued() const { return fifo_.size(); }

  bool ready_for_request() const {
    return enabled_ && !outstanding_ && free_space() >= msg::kMaxPacketBytes;
  }

  // Takes the token; the link bit goes into the next aggregated request.
  bool post_request() {
    if (!ready_for_request()) return false;
    outstanding_ = true;
    ++stats_.requests;
    return true;
  }

  // A complete serialized packet arrived from the front-end.
  void on_packet(std::vector<std::uint8_t> bytes) {
    if (!enabled_) return;
    if (bytes.size() > msg::kMaxPacketBytes || bytes.size() > free_space()) {
      link_fault("packet of " + std::to_string(bytes.size()) + " bytes exceeds FE-FIFO space");
      return;
    }
    fill_ += bytes.size();
    if (fill_ > stats_.max_fill) stats_.max_fill = fill_;
    ++stats_.packets;
    stats_.bytes += bytes.size();
    fifo_.push_back(std::move(bytes));
    outstanding_ = false;
  }

  // Header announced more than 2048 bytes; the frame parser has discarded it.
  void on_oversize() { link_fault("oversize packet header"); }

  const std::vector<std::uint8_t>* head() const { return fifo_.empty() ? nullptr : &fifo_.front(); }

  std::vector<std::uint8_t> pop() {
    auto p = std::move(fifo_.front());
    fifo_.pop_front();
    fill_ -= p.size();
    return p;
  }

  const PumpStats& stats() const { return stats_; }

 private:
  void link_fault(std::string why) {
    fault_ = std::move(why);
    enabled_ = false;
  }

  unsigned link_id_;
  std::size_t capacity_;
  std::deque<std::vector<std::uint8_t>> fifo_;
  std::size_t fill_ = 0;
  bool outstanding_ = false;
  bool enabled_ = true;
  std::string fault_;
  PumpStats stats_;
};

// Collects link tokens into one SEND_NEXT_PACKET mask.
class RequestAggregator {
 public:
  void add(unsigned link) { mask_ |= std::uint32_t{1} << link; }
  bool pending() const { return mask_ != 0; }
  std::uint32_t take() {
    auto m = mask_;
    mask_ = 0;
    return m;
  }
  std::uint32_t mask() const { return mask_; }

 private:
  std::uint32_t mask_ = 0;
};

}  // namespace asymnet::backend
