#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "asymnet/core/time.hpp"
#include "asymnet/frontend/registers.hpp"
#include "asymnet/msg/channel_b.hpp"

namespace asymnet::backend {

struct BootstrapResult {
  std::array<std::optional<std::uint64_t>, 32> serial_by_port{};
  std::uint32_t present_mask = 0;
  std::uint32_t verified_mask = 0;

  unsigned present() const { return static_cast<unsigned>(__builtin_popcount(present_mask)); }
  unsigned verified() const { return static_cast<unsigned>(__builtin_popcount(verified_mask)); }
  bool complete() const { return present_mask == verified_mask; }
};

// Channel B bootstrap: broadcast-read the serial registers (each card answers on its own
// link, so the reply port identifies it), broadcast the serial to port mapping, then read
// back every assigned-ID register with targeted requests.
class BootstrapSequencer {
 public:
  enum class Step { ReadSerialLow, ReadSerialHigh, Map, Verify, Done, Failed };

  explicit BootstrapSequencer(unsigned num_ports, Time response_timeout = 100 * kPicosPerMicro)
      : ports_(num_ports), timeout_(response_timeout) {
    if (num_ports == 0 || num_ports > 32) throw ConfigError("bootstrap: port count must be 1..32");
    begin_read(frontend::reg::kSerialLow);
  }

  Step step() const { return step_; }
  bool done() const { return step_ == Step::Done || step_ == Step::Failed; }
  bool failed() const { return step_ == Step::Failed; }
  const std::string& error() const { return error_; }
  const BootstrapResult& result() const { return result_; }

  // Next request to transmit; each is handed out once.
  std::optional<msg::ChannelBTransaction> next_request(Time now) {
    if (done() || sent_ || !request_) return std::nullopt;
    sent_ = true;
    sent_at_ = now;
    return request_;
  }

  std::optional<Time> deadline() const {
    if (done() || !sent_) return std::nullopt;
    return sent_at_ + timeout_;
  }

  void on_response(unsigned port, const msg::ChannelBTransaction& r) {
    if (done() || !sent_ || port >= ports_ || !((expect_ >> port) & 1u)) return;
    if (r.address != request_->address || r.read != request_->read) return;
    if (r.parity_error || r.bus_error) return;
    got_ |= std::uint32_t{1} << port;
    data_[port] = r.data;
    if (got_ == expect_) advance();
  }

  void poll(Time now) {
    if (auto d = deadline(); d && now >= *d) advance();
  }

 private:
  void begin_read(std::uint16_t addr) {
    request_ = msg::ChannelBTransaction::broadcast_read(addr);
    expect_ = ports_ >= 32 ? 0xFFFFFFFFu : ((std::uint32_t{1} << ports_) - 1);
    begin_request();
  }

  void begin_request() {
    got_ = 0;
    sent_ = false;
    data_.fill(0);
  }

  void advance() {
    switch (step_) {
      case Step::ReadSerialLow:
        result_.present_mask = got_;
        low_ = data_;
        step_ = Step::ReadSerialHigh;
        begin_read(frontend::reg::kSerialHigh);
        expect_ = result_.present_mask;
        if (expect_ == 0) return finish();
        return;
      case Step::ReadSerialHigh: {
        result_.present_mask &= got_;
        std::map<std::uint64_t, unsigned> seen;
        for (unsigned p = 0; p < ports_; ++p) {
          if (!((result_.present_mask >> p) & 1u)) continue;
          std::uint64_t s = ((std::uint64_t{data_[p]} << 32) | low_[p]) & frontend::kSerialMask;
          result_.serial_by_port[p] = s;
          if (auto [it, fresh] = seen.emplace(s, p); !fresh) {
            error_ = "duplicate serial " + std::to_string(s) + " on ports " + std::to_string(it->second) + " and " +
                     std::to_string(p);
            step_ = Step::Failed;
            return;
          }
        }
        step_ = Step::Map;
        map_port_ = 0;
        map_phase_ = 0;
        return next_map_request();
      }
      case Step::Map:
        if (++map_phase_ == 3) {
          map_phase_ = 0;
          ++map_port_;
        }
        return next_map_request();
      case Step::Verify:
        if ((got_ >> verify_port_) & 1u && data_[verify_port_] == verify_port_)
          result_.verified_mask |= std::uint32_t{1} << verify_port_;
        ++verify_port_;
        return next_verify_request();
      default:
        return;
    }
  }

  void next_map_request() {
    while (map_port_ < ports_ && !((result_.present_mask >> map_port_) & 1u)) ++map_port_;
    if (map_port_ >= ports_) {
      step_ = Step::Verify;
      verify_port_ = 0;
      return next_verify_request();
    }
    auto s = *result_.serial_by_port[map_port_];
    switch (map_phase_) {
      case 0: request_ = msg::ChannelBTransaction::broadcast_write(frontend::reg::kMapSerialHigh,
                                                                   static_cast<std::uint32_t>(s >> 32)); break;
      case 1: request_ = msg::ChannelBTransaction::broadcast_write(frontend::reg::kMapSerialLow,
                                                                   static_cast<std::uint32_t>(s)); break;
      default: request_ = msg::ChannelBTransaction::broadcast_write(frontend::reg::kMapPortId, map_port_); break;
    }
    expect_ = result_.present_mask;
    begin_request();
  }

  void next_verify_request() {
    while (verify_port_ < ports_ && !((result_.present_mask >> verify_port_) & 1u)) ++verify_port_;
    if (verify_port_ >= ports_) return finish();
    request_ = msg::ChannelBTransaction::read_request(static_cast<std::uint8_t>(verify_port_),
                                                      frontend::reg::kAssignedId);
    expect_ = std::uint32_t{1} << verify_port_;
    begin_request();
  }

  void finish() {
    step_ = Step::Done;
    request_.reset();
  }

  unsigned ports_;
  Time timeout_;
  Step step_ = Step::ReadSerialLow;
  std::optional<msg::ChannelBTransaction> request_;
  bool sent_ = false;
  Time sent_at_ = 0;
  std::uint32_t expect_ = 0;
  std::uint32_t got_ = 0;
  std::array<std::uint32_t, 32> data_{};
  std::array<std::uint32_t, 32> low_{};
  unsigned map_port_ = 0;
  unsigned map_phase_ = 0;
  unsigned verify_port_ = 0;
  std::string error_;
  BootstrapResult result_;
};

}  // namespace asymnet::backend
