#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "asymnet/backend/buffer_pool.hpp"
#include "asymnet/transport/frame.hpp"

namespace asymnet::transport {

struct ServerStats {
  std::uint64_t frames = 0;
  std::uint64_t content_bytes = 0;
  std::uint64_t grants = 0;
  std::uint64_t max_frames_per_grant = 0;
};

// A frame ready to go out: the header was written in place into the buffer's reserve,
// so `bytes` views pooled memory directly.
struct OutgoingFrame {
  backend::BufferDescriptor descriptor;
  std::span<const std::uint8_t> bytes;  // transport header + content
};

// Sends filled buffers while credit remains. One frame may be outstanding (taken but
// not yet completed) at a time.
class TransportServer {
 public:
  explicit TransportServer(backend::BufferPool& pool) : pool_(pool) {
    if (pool.config().header_reserve < kTransportHeaderBytes) throw ConfigError("header reserve too small for transport header");
  }

  void on_grant(const CreditGrant& g) {
    credit_ = g.frames;
    grant_id_ = g.grant_id;
    sent_since_grant_ = 0;
    ++stats_.grants;
  }

  bool can_send() const { return credit_ > 0 && !outgoing_ && !pool_.filled_fifo().empty(); }
  std::uint32_t credit() const { return credit_; }
  bool busy() const { return outgoing_.has_value(); }
  std::size_t held_descriptors() const { return outgoing_ ? 1 : 0; }

  std::optional<OutgoingFrame> take_frame() {
    if (!can_send()) return std::nullopt;
    auto d = *pool_.filled_fifo().pop();
    TransportHeader h;
    h.sequence = sequence_++;
    h.flags = static_cast<std::uint8_t>((d.flags.incomplete_event ? kFlagIncompleteEvent : 0) |
                                        (d.flags.last_of_event ? kFlagLastOfEvent : 0));
    h.grant_id = grant_id_;
    auto* start = pool_.content(d.buffer_id) - kTransportHeaderBytes;
    write_header(start, h);
    --credit_;
    ++sent_since_grant_;
    if (sent_since_grant_ > stats_.max_frames_per_grant) stats_.max_frames_per_grant = sent_since_grant_;
    ++stats_.frames;
    stats_.content_bytes += d.fill_level;
    outgoing_ = d;
    return OutgoingFrame{d, std::span<const std::uint8_t>(start, kTransportHeaderBytes + d.fill_level)};
  }

  // The frame left the wire; its descriptor returns to the free pool.
  void frame_done() {
    if (!outgoing_) return;
    pool_.release(*outgoing_);
    outgoing_.reset();
  }

  std::uint32_t next_sequence() const { return sequence_; }
  std::uint64_t sent_since_grant() const { return sent_since_grant_; }
  const ServerStats& stats() const { return stats_; }

 private:
  backend::BufferPool& pool_;
  std::uint32_t credit_ = 0;
  std::uint8_t grant_id_ = 0;
  std::uint32_t sequence_ = 0;
  std::uint64_t sent_since_grant_ = 0;
  std::optional<backend::BufferDescriptor> outgoing_;
  ServerStats stats_;
};

}  // namespace asymnet::transport
