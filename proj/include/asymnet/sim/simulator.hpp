#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "asymnet/backend/backend.hpp"
#include "asymnet/frontend/card.hpp"
#include "asymnet/msg/frame_parser.hpp"
#include "asymnet/sim/config.hpp"
#include "asymnet/sim/link_timing.hpp"
#include "asymnet/sim/metrics.hpp"
#include "asymnet/sim/scheduler.hpp"
#include "asymnet/transport/client.hpp"
#include "asymnet/transport/server.hpp"
#include "asymnet/wire/chains.hpp"

namespace asymnet::sim {

// One delivered link frame.
struct MessageRecord {
  Time at;
  unsigned link;
  wire::Direction direction;
  wire::Channel channel;
  std::string bits;  // bits_to_hex form

  bool operator==(const MessageRecord&) const = default;
};

inline std::string to_string(const MessageRecord& m) {
  static constexpr const char* ch = "ABC";
  return std::to_string(m.at) + " " + std::to_string(m.link) + " " +
         (m.direction == wire::Direction::Downstream ? "down" : "up") + " " + ch[static_cast<int>(m.channel)] + " " +
         m.bits;
}

namespace detail {
inline std::uint64_t splitmix(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Bernoulli bit errors by geometric gap sampling.
class ErrorSource {
 public:
  ErrorSource(double p, std::uint64_t seed) : p_(p), rng_(seed) { draw(); }
  bool enabled() const { return p_ > 0; }
  // True if the next symbol is hit.
  bool next() {
    if (p_ <= 0) return false;
    if (gap_ > 0) {
      --gap_;
      return false;
    }
    draw();
    return true;
  }
  void apply(BitStream& bits) {
    if (p_ <= 0) return;
    for (auto& b : bits)
      if (next()) b ^= 1u;
  }

 private:
  void draw() {
    if (p_ <= 0) return;
    double u = (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53;
    gap_ = static_cast<std::uint64_t>(std::floor(std::log(u) / std::log1p(-p_)));
  }
  double p_;
  std::mt19937_64 rng_;
  std::uint64_t gap_ = 0;
};
}  // namespace detail

// Deterministic simulation of one back-end, up to 32 front-end cards, their links, and
// the datagram path to a DAQ client. Message level moves whole frames with slot-exact
// timing; symbol level runs every line symbol through the encoders and receivers.
class Simulation {
 public:
  explicit Simulation(SimConfig cfg) : cfg_(std::move(cfg)), backend_(make_backend_config(cfg_)) {
    std::uint64_t sm = cfg_.seed;
    auto serials = cfg_.serials;
    if (serials.empty()) {
      for (unsigned i = 0; i < cfg_.num_frontends; ++i) serials.push_back(detail::splitmix(sm) & frontend::kSerialMask);
    }
    for (unsigned l = 0; l < cfg_.num_frontends; ++l) {
      bool absent = std::find(cfg_.absent_ports.begin(), cfg_.absent_ports.end(), l) != cfg_.absent_ports.end();
      links_.emplace_back(l, cfg_.training_bits);
      auto& L = links_.back();
      L.present = !absent;
      if (L.present) {
        frontend::CardConfig cc;
        cc.serial = serials[l];
        cc.buffer_depth = cfg_.buffer_depth;
        cc.generator = cfg_.generator;
        cc.clear_busy_on_readout = cfg_.clear_busy_on_readout;
        cc.training_bits = cfg_.training_bits;
        L.card.emplace(cc);
        truth_[l] = cfg_.generator;
      }
      L.up_clock.set_origin(static_cast<Time>(cfg_.training_bits) * kUpstreamSlot);
      L.down_errors = detail::ErrorSource(cfg_.ber, detail::splitmix(sm));
      L.up_errors = detail::ErrorSource(cfg_.ber, detail::splitmix(sm));
      L.symbol_skip = static_cast<unsigned>(detail::splitmix(sm) % 8);
      L.down_rx = wire::DownstreamReceiver(cfg_.lock_threshold);
    }
    client_.emplace(cfg_.transport.enabled ? cfg_.transport.credit : 1u, truth_, cfg_.keep_events);
    server_.emplace(backend_.pool());
    for (std::size_t i = 0; i < cfg_.faults.size(); ++i) schedule_fault(i);
  }

  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  const SimConfig& config() const { return cfg_; }

  // Runs to the configured duration and returns the metrics.
  Metrics run() {
    if (ran_) throw Error("simulation already run");
    ran_ = true;
    sched_.schedule(cfg_.warmup, Priority::Node, 0, [this] { poke_backend(sched_.now()); });
    if (cfg_.transport.enabled) {
      auto g = client_->initial_grant();
      sched_.schedule(cfg_.transport.rtt / 2, Priority::Transport, 0, [this, g] { on_grant(g); });
    } else {
      server_->on_grant({0xFFFFFFFFu, 0});
    }
    if (cfg_.measure_after > 0)
      sched_.schedule(cfg_.measure_after, Priority::Node, 1, [this] { snapshot_window_start(); });
    else
      snapshot_window_start();
    if (cfg_.abstraction == Abstraction::SymbolLevel) sched_.schedule(0, Priority::Sample, 0, [this] { tick(); });
    sched_.run_until(cfg_.duration, [this] { audit(); });
    return collect();
  }

  // --- observers ---
  const backend::Backend& backend() const { return backend_; }
  backend::Backend& backend() { return backend_; }
  const frontend::FrontEndCard* card(unsigned l) const { return links_.at(l).card ? &*links_.at(l).card : nullptr; }
  const transport::TransportClient& client() const { return *client_; }
  const transport::TransportServer& server() const { return *server_; }
  const std::vector<MessageRecord>& messages() const { return messages_; }
  const Scheduler& scheduler() const { return sched_; }

 private:
  struct InFlight {
    bool cancelled = false;
  };

  struct Pipe {
    bool pull_scheduled = false;
    std::int64_t next_free = 0;  // first slot index not taken by the previous frame
    std::uint64_t epoch = 0;
    std::shared_ptr<InFlight> current;
    Time current_end = 0;
    std::uint64_t window_bits = 0;  // frame bits sent inside the metrics window
    // symbol level
    BitStream bits;
    std::size_t pos = 0;
  };

  struct Link {
    Link(unsigned id_, std::size_t training)
        : id(id_), up_clock(wire::Direction::Upstream, kUpstreamSlot), up_tx(training), up_rx(training) {}
    unsigned id;
    bool present = false;
    std::optional<frontend::FrontEndCard> card;
    SlotClock up_clock;
    std::array<Pipe, 3> up{};
    std::uint64_t c_frames_sent = 0;
    std::uint64_t link_resets = 0;
    detail::ErrorSource down_errors{0, 0};
    detail::ErrorSource up_errors{0, 0};
    // message-level line flips pending, per direction
    unsigned pending_flips_down = 0;
    unsigned pending_flips_up = 0;
    // symbol level
    unsigned symbol_skip = 0;
    wire::DownstreamReceiver down_rx;
    std::array<msg::FrameParser, 3> down_parsers{msg::FrameParser::fixed(msg::kChannelAFrameBits),
                                                 msg::FrameParser::fixed(msg::kChannelBFrameBits),
                                                 msg::FrameParser::fixed(msg::kChannelCRequestBits)};
    wire::UpstreamTransmitter up_tx;
    wire::UpstreamReceiver up_rx;
    std::array<msg::FrameParser, 3> up_parsers{msg::FrameParser::fixed(msg::kChannelAFrameBits),
                                               msg::FrameParser::fixed(msg::kChannelBFrameBits),
                                               msg::FrameParser::fragments()};
    std::uint64_t line_symbol_errors = 0;
  };

  static backend::BackendConfig make_backend_config(const SimConfig& c) {
    c.validate();
    backend::BackendConfig b;
    b.num_links = c.num_frontends;
    b.enabled_mask = c.enabled_mask;
    b.pool = c.pool_config();
    b.trigger = c.trigger;
    b.bootstrap_timeout = c.bootstrap_timeout;
    b.fifo_bytes = c.fifo_bytes;
    b.flush_policy = c.flush_policy;
    return b;
  }

  static std::size_t idx(wire::Channel ch) { return static_cast<std::size_t>(ch); }
  static std::uint64_t key(unsigned link, wire::Direction d, wire::Channel ch) {
    return (std::uint64_t{link} << 3) | (d == wire::Direction::Upstream ? 4u : 0u) | idx(ch);
  }
  bool message_level() const { return cfg_.abstraction == Abstraction::MessageLevel; }
  bool in_window(Time t) const { return t >= cfg_.measure_after; }

  void record(Time t, unsigned link, wire::Direction d, wire::Channel ch, BitView bits) {
    if (cfg_.record_messages) messages_.push_back({t, link, d, ch, bits_to_hex(bits)});
    msg_digest_ = mix(msg_digest_, static_cast<std::uint64_t>(t));
    msg_digest_ = mix(msg_digest_, key(link, d, ch));
    for (auto b : bits) msg_digest_ = mix(msg_digest_, b);
    ++messages_delivered_;
  }
  static std::uint64_t mix(std::uint64_t h, std::uint64_t v) { return (h ^ v) * 0x100000001B3ull; }

  // ----------------------------------------------------------------- back-end side

  void poke_backend(Time now) {
    if (now < cfg_.warmup) return;
    backend_.step(now);
    if (message_level()) schedule_down_pulls(now);
    if (auto w = backend_.next_wakeup(); w && (!wakeup_ || *w < *wakeup_ || *wakeup_ <= now)) {
      if (*w > now) {
        wakeup_ = *w;
        sched_.schedule(*w, Priority::Node, 2, [this, w] {
          if (wakeup_ == w) wakeup_.reset();
          poke_backend(sched_.now());
        });
      }
    }
    transport_try_send(now);
  }

  void schedule_down_pulls(Time now) {
    for (auto ch : {wire::Channel::A, wire::Channel::B, wire::Channel::C}) {
      auto& p = down_[idx(ch)];
      if (p.pull_scheduled || !backend_.has_downstream(ch)) continue;
      Time t0 = std::max({now, cfg_.warmup, down_clock_.start(p.next_free)});
      auto k = down_clock_.next_slot(ch, t0);
      p.pull_scheduled = true;
      sched_.schedule(down_clock_.start(k), Priority::Sample, key(0, wire::Direction::Downstream, ch),
                      [this, ch, k] { down_pull(ch, k); });
    }
  }

  void down_pull(wire::Channel ch, std::int64_t k) {
    auto& p = down_[idx(ch)];
    p.pull_scheduled = false;
    Time now = sched_.now();
    auto frame = backend_.pop_downstream(ch, now);
    if (!frame) return;
    auto n = static_cast<std::int64_t>(frame->size());
    auto last = down_clock_.advance(ch, k, n - 1);
    Time end = down_clock_.end(last);
    p.next_free = last + 1;
    if (in_window(now)) p.window_bits += static_cast<std::uint64_t>(n);
    for (auto& L : links_) {
      if (!L.present) continue;
      BitStream copy = *frame;
      if (L.pending_flips_down > 0 && !copy.empty()) {
        --L.pending_flips_down;
        copy[copy.size() / 2] ^= 1u;
      }
      L.down_errors.apply(copy);
      unsigned l = L.id;
      sched_.schedule(end + cfg_.latency, Priority::Delivery, key(l, wire::Direction::Downstream, ch),
                      [this, l, ch, f = std::move(copy)] { deliver_down(l, ch, f); });
    }
    schedule_down_pulls(now);
  }

  void deliver_down(unsigned l, wire::Channel ch, const BitStream& f) {
    auto& L = links_[l];
    Time now = sched_.now();
    record(now, l, wire::Direction::Downstream, ch, f);
    L.card->receive_frame(ch, f, now);
    poke_card(l, now);
  }

  // ------------------------------------------------------------------- card side

  void poke_card(unsigned l, Time now) {
    if (!message_level()) return;
    auto& L = links_[l];
    if (!L.present) return;
    for (auto ch : {wire::Channel::A, wire::Channel::B, wire::Channel::C}) {
      auto& p = L.up[idx(ch)];
      if (p.pull_scheduled || !L.card->has_upstream(ch)) continue;
      Time t0 = std::max({now, cfg_.warmup, L.up_clock.start(p.next_free)});
      auto k = L.up_clock.next_slot(ch, t0);
      p.pull_scheduled = true;
      auto epoch = p.epoch;
      sched_.schedule(L.up_clock.start(k), Priority::Sample, key(l, wire::Direction::Upstream, ch),
                      [this, l, ch, k, epoch] { up_pull(l, ch, k, epoch); });
    }
  }

  std::optional<BitStream> pop_card_frame(Link& L, wire::Channel ch) {
    auto f = L.card->pop_upstream(ch);
    if (!f || ch != wire::Channel::C) return f;
    auto index = L.c_frames_sent++;
    for (auto& fs : cfg_.faults) {
      if (fs.type == FaultType::CrcCorrupt && fs.link == L.id && fs.index == index) {
        // inside the payload if there is one, else inside the CRC
        std::size_t bit = f->size() > 1 + 16 + 32 + 8 ? 1 + 16 + 5 : f->size() - 3;
        (*f)[bit] ^= 1u;
        ++crc_faults_applied_;
      }
    }
    return f;
  }

  void up_pull(unsigned l, wire::Channel ch, std::int64_t k, std::uint64_t epoch) {
    auto& L = links_[l];
    auto& p = L.up[idx(ch)];
    if (epoch != p.epoch) return;  // stale after a link reset
    p.pull_scheduled = false;
    Time now = sched_.now();
    auto frame = pop_card_frame(L, ch);
    if (!frame) return;
    auto n = static_cast<std::int64_t>(frame->size());
    auto last = L.up_clock.advance(ch, k, n - 1);
    Time end = L.up_clock.end(last);
    p.next_free = last + 1;
    if (in_window(now)) p.window_bits += static_cast<std::uint64_t>(n);
    if (L.pending_flips_up > 0 && !frame->empty()) {
      --L.pending_flips_up;
      (*frame)[frame->size() / 2] ^= 1u;
    }
    L.up_errors.apply(*frame);
    auto token = std::make_shared<InFlight>();
    p.current = token;
    p.current_end = end;
    sched_.schedule(end + cfg_.latency, Priority::Delivery, key(l, wire::Direction::Upstream, ch),
                    [this, l, ch, token, f = std::move(*frame)] {
                      if (!token->cancelled) deliver_up(l, ch, f);
                    });
    if (ch == wire::Channel::C) {
      sched_.schedule(end, Priority::Delivery, key(l, wire::Direction::Upstream, ch) | 0x100, [this, l, token] {
        if (token->cancelled) return;
        links_[l].card->upstream_c_done();
        poke_card(l, sched_.now());
      });
    }
    poke_card(l, now);
  }

  void deliver_up(unsigned l, wire::Channel ch, const BitStream& f) {
    Time now = sched_.now();
    record(now, l, wire::Direction::Upstream, ch, f);
    if (ch == wire::Channel::C) {
      // A damaged size field no longer matches the frame length; the line parser would
      // have consumed a different number of bits.
      std::size_t pos = 1;
      auto header = static_cast<std::uint16_t>(read_bits(f, pos, 16));
      auto total = msg::serialized_size_from_header(header);
      if (total > msg::kMaxPacketBytes) {
        backend_.on_upstream_oversize(l);
        poke_backend(now);
        return;
      }
      if (1 + total * 8 != f.size()) {
        ++framing_errors_;
        poke_backend(now);
        return;
      }
    }
    backend_.on_upstream_frame(l, ch, f, now);
    poke_backend(now);
  }

  // ---------------------------------------------------------------- symbol level

  void tick() {
    Time s = sched_.now();
    for (auto& L : links_) {
      if (L.present) up_symbol(L, s);
    }
    if (s % kDownstreamSlot == 0) down_slot(s);
    sched_.schedule(s + kUpstreamSlot, Priority::Sample, 0, [this] { tick(); });
  }

  void up_symbol(Link& L, Time s) {
    Bit data = 0;
    std::optional<wire::Channel> ch;
    bool frame_ends = false;
    if (!L.up_tx.training()) {
      ch = L.up_tx.next_channel();
      auto& p = L.up[idx(*ch)];
      if (p.pos >= p.bits.size() && s >= cfg_.warmup && L.card->has_upstream(*ch)) {
        if (auto f = pop_card_frame(L, *ch)) {
          p.bits = std::move(*f);
          p.pos = 0;
        }
      }
      if (p.pos < p.bits.size()) {
        data = p.bits[p.pos++];
        if (in_window(s)) ++p.window_bits;
        frame_ends = p.pos == p.bits.size();
        if (frame_ends) {
          p.bits.clear();
          p.pos = 0;
        }
      }
    }
    Bit line = L.up_tx.step(data);
    if (frame_ends && *ch == wire::Channel::C) {
      unsigned l = L.id;
      auto epoch = L.up[idx(*ch)].epoch;
      sched_.schedule(s + kUpstreamSlot, Priority::Delivery, key(l, wire::Direction::Upstream, *ch) | 0x100,
                      [this, l, epoch] {
                        if (links_[l].up[idx(wire::Channel::C)].epoch != epoch) return;
                        links_[l].card->upstream_c_done();
                      });
    }
    if (L.up_errors.next()) line ^= 1u;
    if (L.pending_flips_up > 0) {
      --L.pending_flips_up;
      line ^= 1u;
    }
    auto sb = L.up_rx.push(line);
    if (!sb) return;
    auto& parser = L.up_parsers[idx(sb->channel)];
    auto f = parser.push(sb->bit);
    if (!f) return;
    unsigned l = L.id;
    auto c = sb->channel;
    if (f->oversize) {
      sched_.schedule(s + kUpstreamSlot + cfg_.latency, Priority::Delivery, key(l, wire::Direction::Upstream, c),
                      [this, l] {
                        backend_.on_upstream_oversize(l);
                        poke_backend(sched_.now());
                      });
      return;
    }
    sched_.schedule(s + kUpstreamSlot + cfg_.latency, Priority::Delivery, key(l, wire::Direction::Upstream, c),
                    [this, l, c, bits = std::move(f->bits)] { deliver_up(l, c, bits); });
  }

  void down_slot(Time s) {
    auto k = s / kDownstreamSlot;
    auto ch = down_clock_.schedule().slot(static_cast<std::size_t>(k));
    auto& p = down_[idx(ch)];
    if (p.pos >= p.bits.size() && s >= cfg_.warmup && backend_.has_downstream(ch)) {
      if (auto f = backend_.pop_downstream(ch, s)) {
        p.bits = std::move(*f);
        p.pos = 0;
      }
    }
    Bit data = 0;
    if (p.pos < p.bits.size()) {
      data = p.bits[p.pos++];
      if (in_window(s)) ++p.window_bits;
      if (p.pos == p.bits.size()) {
        p.bits.clear();
        p.pos = 0;
      }
    }
    Bit line = ch == wire::Channel::B ? static_cast<Bit>(data ^ 1u) : data;
    std::array<Bit, 2> sym{line, static_cast<Bit>(line ^ 1u)};
    for (auto& L : links_) {
      if (!L.present) continue;
      for (auto y : sym) {
        if (L.symbol_skip > 0) {
          --L.symbol_skip;
          continue;
        }
        if (L.down_errors.next()) y ^= 1u;
        if (L.pending_flips_down > 0) {
          --L.pending_flips_down;
          y ^= 1u;
        }
        auto sb = L.down_rx.push(y);
        if (!sb) continue;
        auto f = L.down_parsers[idx(sb->channel)].push(sb->bit);
        if (!f) continue;
        unsigned l = L.id;
        auto c = sb->channel;
        sched_.schedule(s + kDownstreamSlot + cfg_.latency, Priority::Delivery, key(l, wire::Direction::Downstream, c),
                        [this, l, c, bits = std::move(f->bits)] { deliver_down(l, c, bits); });
      }
    }
  }

  // -------------------------------------------------------------------- faults

  void schedule_fault(std::size_t i) {
    const auto& f = cfg_.faults[i];
    switch (f.type) {
      case FaultType::CrcCorrupt:
      case FaultType::DropTransportFrame:
        return;  // applied by index as frames pass
      case FaultType::LineFlip:
        sched_.schedule(f.at, Priority::Node, 10 + i, [this, i] {
          auto& fs = cfg_.faults[i];
          auto& L = links_[fs.link];
          if (fs.direction == wire::Direction::Upstream) ++L.pending_flips_up;
          else ++L.pending_flips_down;
        });
        return;
      case FaultType::SoeSkew:
        sched_.schedule(f.at, Priority::Node, 10 + i, [this, i] {
          auto& fs = cfg_.faults[i];
          auto& L = links_[fs.link];
          if (L.card) L.card->inject_event_number_skew(fs.delta);
        });
        return;
      case FaultType::LinkReset:
        sched_.schedule(f.at, Priority::Node, 10 + i, [this, i] { link_reset(cfg_.faults[i].link); });
        return;
    }
  }

  void link_reset(unsigned l) {
    auto& L = links_[l];
    if (!L.present) return;
    Time now = sched_.now();
    ++L.link_resets;
    Time first_tick = (now + kUpstreamSlot - 1) / kUpstreamSlot * kUpstreamSlot;
    for (auto& p : L.up) {
      if (p.current && p.current_end > now) p.current->cancelled = true;
      p.current.reset();
      p.pull_scheduled = false;
      ++p.epoch;
      p.next_free = 0;
      p.bits.clear();
      p.pos = 0;
    }
    L.card->link_reset_training();
    L.up_clock.set_origin(first_tick + static_cast<Time>(cfg_.training_bits) * kUpstreamSlot);
    L.up_tx.reset();
    L.up_rx.reset();
    for (auto& pr : L.up_parsers) pr.reset();
    poke_card(l, now);
  }

  // ----------------------------------------------------------------- transport

  void on_grant(const transport::CreditGrant& g) {
    server_->on_grant(g);
    grant_limit_ = g.frames;
    transport_try_send(sched_.now());
  }

  void transport_try_send(Time now) {
    if (!cfg_.transport.enabled) {
      bool any = false;
      while (server_->can_send()) {
        auto f = server_->take_frame();
        std::vector<std::uint8_t> bytes(f->bytes.begin(), f->bytes.end());
        server_->frame_done();
        server_->on_grant({0xFFFFFFFFu, 0});
        client_receive(now, bytes);
        any = true;
      }
      if (any && !in_poke_) {
        in_poke_ = true;
        poke_backend(now);
        in_poke_ = false;
      }
      return;
    }
    if (server_->busy() || !server_->can_send()) return;
    auto f = server_->take_frame();
    std::vector<std::uint8_t> bytes(f->bytes.begin(), f->bytes.end());
    auto wire_bits = static_cast<double>(bytes.size() + cfg_.transport.overhead) * 8.0;
    Time wire = static_cast<Time>(std::llround(wire_bits / cfg_.transport.link_rate_bps * 1e12));
    auto index = transport_frames_++;
    bool drop = false;
    for (auto& fs : cfg_.faults)
      if (fs.type == FaultType::DropTransportFrame && fs.index == index) drop = true;
    if (in_window(now)) transport_busy_ += wire;
    sched_.schedule(now + wire, Priority::Transport, 1, [this] {
      server_->frame_done();
      poke_backend(sched_.now());
      transport_try_send(sched_.now());
    });
    if (drop) {
      ++transport_dropped_;
      return;
    }
    sched_.schedule(now + wire + cfg_.transport.rtt / 2, Priority::Transport, 2,
                    [this, b = std::move(bytes)] { client_receive(sched_.now(), b); });
  }

  void client_receive(Time now, const std::vector<std::uint8_t>& bytes) {
    auto g = client_->on_frame(bytes);
    if (in_window(now)) {
      window_payload_bytes_ += bytes.size();
      last_client_frame_ = now;
    }
    if (g && cfg_.transport.enabled)
      sched_.schedule(now + cfg_.transport.rtt / 2, Priority::Transport, 0, [this, g = *g] { on_grant(g); });
  }

  // ------------------------------------------------------------------- metrics

  void snapshot_window_start() {
    window_start_stats_ = client_->stats();
    window_start_events_ = backend_.builder().stats().events;
    window_start_forwarded_ = backend_.builder().stats().forwarded;
  }

  void audit() {
    ++audits_;
    if (!backend_.descriptors_conserved(server_->held_descriptors())) ++violations_.descriptor_conservation;
    if (cfg_.transport.enabled && server_->sent_since_grant() > grant_limit_) ++violations_.credit_exceeded;
    for (auto& p : backend_.pumps())
      if (p.fill() > p.capacity()) ++violations_.fifo_overflow;
  }

  Metrics collect() const {
    Metrics m;
    m.seed = cfg_.seed;
    m.abstraction = to_string(cfg_.abstraction);
    m.num_frontends = cfg_.num_frontends;
    m.duration_s = to_seconds(cfg_.duration);
    Time window = cfg_.duration - cfg_.measure_after;
    m.window_s = to_seconds(window);
    m.backend_phase = backend_.phase() == backend::Backend::Phase::Running ? "running"
                      : backend_.phase() == backend::Backend::Phase::Failed ? "failed" : "bootstrap";
    m.bootstrap_error = backend_.failure();
    auto& br = backend_.bootstrap().result();
    m.bootstrap_present = br.present();
    m.bootstrap_verified = br.verified();
    m.active_mask = backend_.active_mask();
    auto& b = backend_.builder();
    m.builder_phase = backend::to_string(b.phase());
    if (b.halt()) m.halt_reason = b.halt()->describe();
    m.events_built = b.stats().events;
    m.events_incomplete = b.stats().incomplete_events;
    m.event_rate_hz = static_cast<double>(b.stats().events - window_start_events_) / to_seconds(window);
    m.triggers_issued = backend_.trigger().stats().issued;
    m.trigger_ack_timeouts = backend_.trigger().stats().ack_timeouts;
    m.mover_bytes = backend_.mover().stats().bytes;
    m.mover_stalls = backend_.mover().stats().stalls;
    m.buffers_filled = backend_.mover().stats().buffers_filled;
    m.requests_sent = backend_.requests_sent();

    auto& cs = client_->stats();
    m.client = cs;
    m.client_MB_per_s = static_cast<double>(window_payload_bytes_) / to_seconds(window) / 1e6;
    m.transport_frames = transport_frames_;
    m.transport_dropped = transport_dropped_;
    m.transport_utilization = static_cast<double>(transport_busy_) / static_cast<double>(window);
    m.server_max_frames_per_grant = server_->stats().max_frames_per_grant;
    m.credit = cfg_.transport.credit;
    m.mtu = cfg_.transport.mtu;

    double c_slots_down = static_cast<double>(window) / static_cast<double>(kDownstreamSlot) / 4.0;
    m.downstream_c_utilization = static_cast<double>(down_[2].window_bits) / c_slots_down;
    for (auto& L : links_) {
      LinkMetrics lm;
      lm.link = L.id;
      lm.present = L.present;
      lm.active = (backend_.active_mask() >> L.id) & 1u;
      double c_slots = static_cast<double>(window) / static_cast<double>(kUpstreamSlot) / 2.0;
      lm.c_utilization = std::min(1.0, static_cast<double>(L.up[2].window_bits) / c_slots);
      auto& pump = backend_.pumps()[L.id];
      lm.packets = pump.stats().packets;
      lm.bytes = pump.stats().bytes;
      lm.pump_fault = pump.fault();
      lm.forwarded = b.stats().forwarded[L.id];
      lm.crc_drops = b.stats().crc_drops[L.id];
      lm.payload_MB_per_s = static_cast<double>(cs.fragment_bytes_by_card[L.id] - window_start_stats_.fragment_bytes_by_card[L.id]) /
                            to_seconds(window) / 1e6;
      lm.link_resets = L.link_resets;
      if (L.card) {
        lm.lost_triggers = L.card->lost_triggers();
        lm.card_packets_sent = L.card->stats().packets_sent;
        lm.card_parity_errors = L.card->stats().parity_errors;
        lm.assigned_id = L.card->assigned_id() ? static_cast<int>(*L.card->assigned_id()) : -1;
      }
      auto& lc = backend_.link_counters()[L.id];
      lm.oversize = lc.oversize;
      lm.backend_parity_errors = lc.a_parity_errors + lc.b_parity_errors;
      m.links.push_back(lm);
    }
    m.crc_faults_applied = crc_faults_applied_;
    m.framing_errors = framing_errors_;
    m.messages_delivered = messages_delivered_;
    m.message_digest = msg_digest_;
    m.violations = violations_;
    m.audits = audits_;
    m.sim_events = sched_.executed();
    return m;
  }

  SimConfig cfg_;
  Scheduler sched_;
  backend::Backend backend_;
  std::vector<Link> links_;
  transport::GeneratorTruth truth_{};
  SlotClock down_clock_{wire::Direction::Downstream, kDownstreamSlot};
  std::array<Pipe, 3> down_{};
  std::optional<transport::TransportClient> client_;
  std::optional<transport::TransportServer> server_;
  std::optional<Time> wakeup_;
  bool ran_ = false;
  bool in_poke_ = false;

  std::uint32_t grant_limit_ = 0;
  std::uint64_t transport_frames_ = 0;
  std::uint64_t transport_dropped_ = 0;
  Time transport_busy_ = 0;
  std::uint64_t window_payload_bytes_ = 0;
  Time last_client_frame_ = 0;
  transport::ClientStats window_start_stats_{};
  std::uint64_t window_start_events_ = 0;
  std::array<std::uint64_t, backend::kMaxLinks> window_start_forwarded_{};

  std::uint64_t crc_faults_applied_ = 0;
  std::uint64_t framing_errors_ = 0;
  std::uint64_t messages_delivered_ = 0;
  std::uint64_t msg_digest_ = 0xCBF29CE484222325ull;
  std::vector<MessageRecord> messages_;
  Violations violations_;
  std::uint64_t audits_ = 0;
};

inline Metrics run_scenario(const SimConfig& cfg) {
  Simulation s(cfg);
  return s.run();
}

}  // namespace asymnet::sim
