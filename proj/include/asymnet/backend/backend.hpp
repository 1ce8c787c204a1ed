#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "asymnet/backend/bootstrap.hpp"
#include "asymnet/backend/buffer_pool.hpp"
#include "asymnet/backend/data_pump.hpp"
#include "asymnet/backend/event_builder.hpp"
#include "asymnet/backend/fanout.hpp"
#include "asymnet/backend/packet_mover.hpp"
#include "asymnet/backend/trigger_unit.hpp"
#include "asymnet/msg/channel_a.hpp"
#include "asymnet/msg/channel_b.hpp"
#include "asymnet/msg/channel_c.hpp"
#include "asymnet/msg/fragment.hpp"

namespace asymnet::backend {

struct BackendConfig {
  unsigned num_links = 32;
  std::uint32_t enabled_mask = 0xFFFFFFFFu;  // links allowed to take part after bootstrap
  PoolConfig pool;
  TriggerConfig trigger;
  Time bootstrap_timeout = 100 * kPicosPerMicro;
  std::size_t fifo_bytes = kFeFifoBytes;
  FlushPolicy flush_policy = FlushPolicy::EachEvent;
};

struct LinkCounters {
  std::uint64_t a_frames = 0;
  std::uint64_t b_frames = 0;
  std::uint64_t c_frames = 0;
  std::uint64_t oversize = 0;
  std::uint64_t a_parity_errors = 0;
  std::uint64_t b_parity_errors = 0;
};

struct RegisterResponse {
  unsigned link;
  msg::ChannelBTransaction txn;
  bool parity_ok;
  Time at;
};

// Back-end node: fanout queues, 32 upstream endpoints, DataPumps, builder, mover,
// trigger unit and bootstrap sequencer. Link layers call the frame entry points;
// the scheduler calls step().
class Backend {
 public:
  enum class Phase { Bootstrap, Running, Failed };

  explicit Backend(BackendConfig cfg)
      : cfg_(cfg),
        pool_(cfg.pool),
        mover_(pool_),
        trigger_(cfg.trigger),
        boot_(cfg.num_links, cfg.bootstrap_timeout),
        counters_(cfg.num_links) {
    if (cfg.num_links == 0 || cfg.num_links > kMaxLinks) throw ConfigError("backend: num_links must be 1..32");
    pumps_.reserve(cfg.num_links);
    for (unsigned l = 0; l < cfg.num_links; ++l) {
      pumps_.emplace_back(l, cfg.fifo_bytes);
      pumps_.back().set_enabled(false);
    }
    builder_.emplace(std::span<DataPump>(pumps_), mover_, 0);
    builder_->set_flush_policy(cfg.flush_policy);
  }

  Phase phase() const { return phase_; }
  const BackendConfig& config() const { return cfg_; }

  // --- downstream ---

  std::optional<BitStream> pop_downstream(wire::Channel ch, Time now) {
    (void)now;
    if (ch == wire::Channel::C) {
      if (!aggregator_.pending()) return std::nullopt;
      msg::ChannelCRequest r{msg::kOpSendNextPacket, aggregator_.take()};
      ++requests_sent_;
      return msg::encode_channel_c_request(r);
    }
    return fanout_.pop(ch);
  }

  bool has_downstream(wire::Channel ch) const {
    if (ch == wire::Channel::C) return aggregator_.pending();
    return !fanout_.empty(ch);
  }

  // Operator register access; responses land in register_log().
  bool submit_register_request(const msg::ChannelBTransaction& t) {
    return fanout_.submit(wire::Channel::B, msg::encode_channel_b(t, wire::Direction::Downstream));
  }
  void software_trigger() { trigger_.software_trigger(); }

  // --- upstream ---

  void on_upstream_frame(unsigned link, wire::Channel ch, BitView frame, Time now) {
    if (link >= cfg_.num_links) return;
    auto& c = counters_[link];
    switch (ch) {
      case wire::Channel::A: {
        ++c.a_frames;
        auto d = msg::decode_channel_a_up(frame);
        if (!d.parity_ok) {
          ++c.a_parity_errors;
          return;
        }
        trigger_.on_upstream(link, d.msg);
        return;
      }
      case wire::Channel::B: {
        ++c.b_frames;
        auto d = msg::decode_channel_b(frame, wire::Direction::Upstream);
        if (!d.parity_ok) ++c.b_parity_errors;
        if (phase_ == Phase::Bootstrap && d.parity_ok) boot_.on_response(link, d.msg);
        else register_log_.push_back({link, d.msg, d.parity_ok, now});
        return;
      }
      case wire::Channel::C:
        ++c.c_frames;
        pumps_[link].on_packet(msg::decode_fragment_frame(frame));
        return;
    }
  }

  void on_upstream_oversize(unsigned link) {
    if (link >= cfg_.num_links) return;
    ++counters_[link].oversize;
    pumps_[link].on_oversize();
  }

  // --- scheduling ---

  // Advances every state machine at `now`. Returns true if anything changed that a
  // link layer may need to act on.
  bool step(Time now) {
    bool changed = false;
    if (phase_ == Phase::Bootstrap) {
      boot_.poll(now);
      if (auto r = boot_.next_request(now)) {
        fanout_.submit(wire::Channel::B, msg::encode_channel_b(*r, wire::Direction::Downstream));
        changed = true;
      }
      if (boot_.done()) {
        finish_bootstrap();
        changed = true;
      }
    }
    if (phase_ != Phase::Running) return changed;
    if (!fanout_.full(wire::Channel::A)) {
      if (auto m = trigger_.poll(now)) {
        fanout_.submit(wire::Channel::A, msg::encode_channel_a(*m));
        changed = true;
      }
    }
    for (auto& p : pumps_) {
      if (p.post_request()) {
        aggregator_.add(p.link_id());
        changed = true;
      }
    }
    while (builder_->step()) changed = true;
    // The builder may have freed FE-FIFO space.
    for (auto& p : pumps_) {
      if (p.post_request()) {
        aggregator_.add(p.link_id());
        changed = true;
      }
    }
    return changed;
  }

  // Earliest future time at which step() has timed work to do.
  std::optional<Time> next_wakeup() const {
    std::optional<Time> t;
    auto take = [&](std::optional<Time> c) {
      if (c && (!t || *c < *t)) t = c;
    };
    if (phase_ == Phase::Bootstrap) take(boot_.deadline());
    if (phase_ == Phase::Running) {
      take(trigger_.next_due());
      take(trigger_.ack_deadline());
    }
    return t;
  }

  // Transport side returns descriptors here.
  BufferPool& pool() { return pool_; }
  const BufferPool& pool() const { return pool_; }

  // --- observers ---
  const std::vector<DataPump>& pumps() const { return pumps_; }
  std::vector<DataPump>& pumps() { return pumps_; }
  const EventBuilder& builder() const { return *builder_; }
  EventBuilder& builder() { return *builder_; }
  const PacketMover& mover() const { return mover_; }
  const TriggerUnit& trigger() const { return trigger_; }
  const BootstrapSequencer& bootstrap() const { return boot_; }
  const std::vector<LinkCounters>& link_counters() const { return counters_; }
  const std::vector<RegisterResponse>& register_log() const { return register_log_; }
  std::uint64_t requests_sent() const { return requests_sent_; }
  std::uint32_t active_mask() const { return active_; }
  const std::string& failure() const { return failure_; }

  // Descriptors outside both FIFOs: at most the mover's current one plus any held by
  // the transport (passed in by the caller).
  bool descriptors_conserved(std::size_t held_by_transport) const {
    return pool_.free_fifo().size() + pool_.filled_fifo().size() + (mover_.holding() ? 1 : 0) + held_by_transport ==
           pool_.config().pool_size;
  }

 private:
  void finish_bootstrap() {
    if (boot_.failed()) {
      phase_ = Phase::Failed;
      failure_ = boot_.error();
      return;
    }
    active_ = boot_.result().verified_mask & cfg_.enabled_mask;
    for (auto& p : pumps_) p.set_enabled((active_ >> p.link_id()) & 1u);
    builder_->set_active_mask(active_);
    trigger_.set_links(active_);
    fanout_.submit(wire::Channel::A, msg::encode_channel_a(trigger_.start_message()));
    phase_ = Phase::Running;
  }

  BackendConfig cfg_;
  Phase phase_ = Phase::Bootstrap;
  BufferPool pool_;
  PacketMover mover_;
  std::vector<DataPump> pumps_;
  std::optional<EventBuilder> builder_;
  RequestAggregator aggregator_;
  FanoutQueues fanout_;
  TriggerUnit trigger_;
  BootstrapSequencer boot_;
  std::vector<LinkCounters> counters_;
  std::vector<RegisterResponse> register_log_;
  std::uint64_t requests_sent_ = 0;
  std::uint32_t active_ = 0;
  std::string failure_;
};

}  // namespace asymnet::backend
