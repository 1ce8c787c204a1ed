#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <utility>
#include <vector>

#include "asymnet/core/time.hpp"
#include "asymnet/frontend/event_generator.hpp"
#include "asymnet/frontend/registers.hpp"
#include "asymnet/msg/channel_a.hpp"
#include "asymnet/msg/channel_b.hpp"
#include "asymnet/msg/channel_c.hpp"
#include "asymnet/msg/fragment.hpp"
#include "asymnet/wire/chains.hpp"
#include "asymnet/wire/tdm.hpp"

namespace asymnet::frontend {

struct CardConfig {
  std::uint64_t serial = 1;
  std::size_t buffer_depth = 4;  // events held for readout
  EventGeneratorConfig generator;
  // false: CLEAR_BUSY once the event is queued; true: once its last packet is sent.
  bool clear_busy_on_readout = false;
  std::size_t training_bits = wire::kDefaultTrainingBits;
};

struct CardCounters {
  std::uint64_t triggers_accepted = 0;
  std::uint64_t packets_sent = 0;
  std::uint64_t packets_rewound = 0;
  std::uint64_t parity_errors = 0;
  std::uint64_t b_responses = 0;
  std::uint64_t malformed_b = 0;
  std::uint64_t c_requests = 0;
  std::uint64_t link_resets = 0;
};

// Emulated front-end card. Inputs are decoded downstream frames; outputs are queued
// upstream frames per virtual channel, drained by the link layer.
class FrontEndCard {
 public:
  explicit FrontEndCard(CardConfig cfg) : cfg_(std::move(cfg)), regs_(cfg_.serial) {
    cfg_.generator.validate();
    if (cfg_.buffer_depth == 0) throw ConfigError("buffer_depth must be at least 1");
  }

  // --- typed handlers ---

  std::vector<msg::ChannelAMessageUp> on_channel_a(const msg::ChannelAMessageDown& m, Time now) {
    std::vector<msg::ChannelAMessageUp> out;
    if (m.clear_event_counter) event_counter_ = 0;
    if (m.clear_timestamp) t_clear_ = now;
    if (m.sampling_start) sampling_ = true;
    if (m.sampling_stop) {
      if (busy_ || !sampling_) {
        ++counters_.lost_triggers;
      } else {
        sampling_ = false;
        busy_ = true;
        ++stats_.triggers_accepted;
        EventId ev;
        ev.card_id = card_id();
        ev.event_number = event_counter_++;
        ev.timestamp = static_cast<std::uint64_t>((now - t_clear_) / kTimestampTick) & 0xFFFFFFFFFFFFull;
        held_ = ev;
        out.push_back(set_busy_msg());
        try_queue_held(out);
      }
    }
    for (auto& u : out) up_a_.push_back(msg::encode_channel_a(u));
    return out;
  }

  // Returns the response if this card is addressed. A parity error yields a PE
  // response with no side effect.
  std::optional<msg::ChannelBTransaction> on_channel_b(const msg::ChannelBTransaction& t, bool parity_ok = true) {
    if (!t.broadcast && (!regs_.assigned_id() || *regs_.assigned_id() != t.target_id)) return std::nullopt;
    // Neither or both of RD/WR: no valid response exists, so none is sent.
    if (t.read == t.write) {
      ++stats_.malformed_b;
      return std::nullopt;
    }
    msg::ChannelBTransaction r = t;
    r.parity_error = false;
    r.bus_error = false;
    if (!parity_ok) {
      r.parity_error = true;
    } else if (t.read) {
      auto a = regs_.read(t.address, counters_);
      r.data = a.data;
      r.bus_error = a.bus_error;
    } else {
      auto a = regs_.write(t.address, t.data, t.byte_enable);
      r.data = a.data;
      r.bus_error = a.bus_error;
    }
    ++stats_.b_responses;
    up_b_.push_back(msg::encode_channel_b(r, wire::Direction::Upstream));
    return r;
  }

  // Registers one packet request. Returns false if not addressed or the opcode is unknown.
  bool on_channel_c(const msg::ChannelCRequest& r) {
    auto id = regs_.assigned_id();
    if (!id || !r.targets(*id)) return false;
    if (r.opcode != msg::kOpSendNextPacket) {
      ++counters_.unknown_opcodes;
      return false;
    }
    ++pending_requests_;
    ++stats_.c_requests;
    return true;
  }

  // Emits the next packet if a request is pending and event data exists. The packet
  // counts as in flight until upstream_c_done().
  std::optional<msg::FragmentPacket> next_packet() {
    if (pending_requests_ == 0 || in_flight_ || queue_.empty()) return std::nullopt;
    auto& ev = queue_.front();
    auto p = generate_packet(cfg_.generator, ev.id, ev.next_channel);
    --pending_requests_;
    in_flight_ = true;
    return p;
  }

  void upstream_c_done() {
    if (!in_flight_) return;
    in_flight_ = false;
    ++stats_.packets_sent;
    auto& ev = queue_.front();
    if (++ev.next_channel < cfg_.generator.channels_per_event) return;
    queue_.pop_front();
    std::vector<msg::ChannelAMessageUp> out;
    if (cfg_.clear_busy_on_readout && busy_ && !held_) {
      busy_ = false;
      out.push_back(clear_busy_msg());
    }
    try_queue_held(out);
    for (auto& u : out) up_a_.push_back(msg::encode_channel_a(u));
  }

  // Upstream link reset: the in-flight packet is rewound and re-sent after training,
  // pending A/B frames are dropped, and the busy state is re-announced.
  BitStream link_reset_training() {
    ++stats_.link_resets;
    if (in_flight_) {
      in_flight_ = false;
      ++pending_requests_;
      ++stats_.packets_rewound;
    }
    up_a_.clear();
    up_b_.clear();
    msg::ChannelAMessageUp u;
    u.set_busy = busy_;
    u.clear_busy = !busy_;
    up_a_.push_back(msg::encode_channel_a(u));
    return wire::training_pattern(cfg_.training_bits);
  }

  // --- frame-level entry points ---

  void receive_frame(wire::Channel ch, BitView frame, Time now) {
    switch (ch) {
      case wire::Channel::A: {
        auto d = msg::decode_channel_a_down(frame);
        if (!d.parity_ok) {
          ++stats_.parity_errors;
          return;
        }
        on_channel_a(d.msg, now);
        return;
      }
      case wire::Channel::B: {
        auto d = msg::decode_channel_b(frame, wire::Direction::Downstream);
        if (!d.parity_ok) ++stats_.parity_errors;
        on_channel_b(d.msg, d.parity_ok);
        return;
      }
      case wire::Channel::C: {
        auto d = msg::decode_channel_c_request(frame);
        if (!d.parity_ok) {
          ++stats_.parity_errors;
          return;
        }
        on_channel_c(d.msg);
        return;
      }
    }
  }

  // Next upstream frame for `ch`, or nothing. For C this emits a packet (see next_packet).
  std::optional<BitStream> pop_upstream(wire::Channel ch) {
    if (ch == wire::Channel::C) {
      auto p = next_packet();
      if (!p) return std::nullopt;
      return msg::encode_fragment_frame(msg::serialize(*p));
    }
    auto& q = ch == wire::Channel::A ? up_a_ : up_b_;
    if (q.empty()) return std::nullopt;
    auto f = std::move(q.front());
    q.pop_front();
    return f;
  }

  bool has_upstream(wire::Channel ch) const {
    if (ch == wire::Channel::A) return !up_a_.empty();
    if (ch == wire::Channel::B) return !up_b_.empty();
    return pending_requests_ > 0 && !in_flight_ && !queue_.empty();
  }

  // Fault hook: shifts all later event numbers.
  void inject_event_number_skew(std::int64_t delta) {
    event_counter_ = static_cast<std::uint32_t>(static_cast<std::int64_t>(event_counter_) + delta);
  }

  // --- observers ---
  const CardConfig& config() const { return cfg_; }
  std::uint64_t serial() const { return regs_.serial(); }
  std::optional<std::uint8_t> assigned_id() const { return regs_.assigned_id(); }
  bool busy() const { return busy_; }
  bool sampling() const { return sampling_; }
  std::uint32_t event_counter() const { return event_counter_; }
  std::size_t queued_events() const { return queue_.size(); }
  std::uint32_t pending_requests() const { return pending_requests_; }
  bool packet_in_flight() const { return in_flight_; }
  std::uint32_t lost_triggers() const { return counters_.lost_triggers; }
  std::uint32_t unknown_opcodes() const { return counters_.unknown_opcodes; }
  const CardCounters& stats() const { return stats_; }
  std::vector<EventId> queued_event_ids() const {
    std::vector<EventId> ids;
    for (auto& e : queue_) ids.push_back(e.id);
    return ids;
  }

 private:
  struct QueuedEvent {
    EventId id;
    unsigned next_channel = 0;
  };

  std::uint8_t card_id() const { return regs_.assigned_id().value_or(0); }

  static msg::ChannelAMessageUp set_busy_msg() {
    msg::ChannelAMessageUp u;
    u.set_busy = true;
    return u;
  }
  static msg::ChannelAMessageUp clear_busy_msg() {
    msg::ChannelAMessageUp u;
    u.clear_busy = true;
    return u;
  }

  void try_queue_held(std::vector<msg::ChannelAMessageUp>& out) {
    if (!held_ || queue_.size() >= cfg_.buffer_depth) return;
    queue_.push_back({*held_, 0});
    held_.reset();
    if (!cfg_.clear_busy_on_readout) {
      busy_ = false;
      out.push_back(clear_busy_msg());
    }
  }

  CardConfig cfg_;
  RegisterFile regs_;
  RegisterFile::Counters counters_;
  CardCounters stats_;

  bool sampling_ = false;
  bool busy_ = false;
  std::uint32_t event_counter_ = 0;
  Time t_clear_ = 0;
  std::optional<EventId> held_;  // captured but not yet queued
  std::deque<QueuedEvent> queue_;
  std::uint32_t pending_requests_ = 0;
  bool in_flight_ = false;

  std::deque<BitStream> up_a_;
  std::deque<BitStream> up_b_;
};

}  // namespace asymnet::frontend
