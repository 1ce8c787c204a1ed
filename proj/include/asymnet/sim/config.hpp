#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "asymnet/backend/buffer_pool.hpp"
#include "asymnet/backend/event_builder.hpp"
#include "asymnet/backend/trigger_unit.hpp"
#include "asymnet/core/errors.hpp"
#include "asymnet/core/time.hpp"
#include "asymnet/frontend/event_generator.hpp"
#include "asymnet/transport/frame.hpp"
#include "asymnet/transport/model.hpp"
#include "asymnet/wire/chains.hpp"
#include "asymnet/wire/line_sync.hpp"

namespace asymnet::sim {

enum class Abstraction { MessageLevel, SymbolLevel };

inline Abstraction parse_abstraction(std::string_view s) {
  if (s == "message_level") return Abstraction::MessageLevel;
  if (s == "symbol_level") return Abstraction::SymbolLevel;
  throw ConfigError("unknown abstraction: " + std::string(s));
}
inline const char* to_string(Abstraction a) { return a == Abstraction::MessageLevel ? "message_level" : "symbol_level"; }

enum class FaultType { LineFlip, CrcCorrupt, SoeSkew, LinkReset, DropTransportFrame };

inline FaultType parse_fault_type(std::string_view s) {
  if (s == "line_flip") return FaultType::LineFlip;
  if (s == "crc_corrupt") return FaultType::CrcCorrupt;
  if (s == "soe_skew") return FaultType::SoeSkew;
  if (s == "link_reset") return FaultType::LinkReset;
  if (s == "drop_transport_frame") return FaultType::DropTransportFrame;
  throw ConfigError("unknown fault type: " + std::string(s));
}

inline const char* to_string(FaultType f) {
  switch (f) {
    case FaultType::LineFlip: return "line_flip";
    case FaultType::CrcCorrupt: return "crc_corrupt";
    case FaultType::SoeSkew: return "soe_skew";
    case FaultType::LinkReset: return "link_reset";
    case FaultType::DropTransportFrame: return "drop_transport_frame";
  }
  return "?";
}

// line_flip: one line symbol (symbol level) or the next frame bit (message level) on
//   `link` in `direction` at time `at`, channel C upstream frames only in message level.
// crc_corrupt: flip a payload bit of the `index`-th channel C frame sent by card `link`.
// soe_skew: from time `at`, card `link` numbers its events off by `delta`.
// link_reset: upstream link `link` retrains at time `at`.
// drop_transport_frame: the `index`-th transport frame never reaches the client.
struct FaultSpec {
  FaultType type = FaultType::CrcCorrupt;
  unsigned link = 0;
  Time at = 0;
  std::uint64_t index = 0;
  std::int64_t delta = 1;
  wire::Direction direction = wire::Direction::Upstream;
};

struct TransportSimConfig {
  bool enabled = true;
  std::uint32_t credit = 8;
  std::size_t mtu = 8192;
  double link_rate_bps = transport::kDefaultLinkRateBps;
  Time rtt = 300 * kPicosPerMicro;
  std::size_t overhead = transport::kDefaultFrameOverhead;

  // Buffer content that exactly fills one MTU-sized frame on the wire.
  std::size_t content_bytes() const { return mtu - overhead - transport::kTransportHeaderBytes; }
};

struct SimConfig {
  unsigned num_frontends = 4;
  std::uint64_t seed = 1;
  Abstraction abstraction = Abstraction::MessageLevel;
  Time duration = 10 * kPicosPerMilli;
  Time measure_after = 0;  // start of the throughput window
  Time latency = 0;        // per direction, added to frame completion
  double ber = 0.0;        // per line symbol
  unsigned lock_threshold = wire::kDefaultLockThreshold;
  std::size_t training_bits = wire::kDefaultTrainingBits;
  Time warmup = 4 * kPicosPerMicro;  // link lock time before any frame is sent
  std::vector<unsigned> absent_ports;
  std::vector<std::uint64_t> serials;  // empty: random from seed
  std::uint32_t enabled_mask = 0xFFFFFFFFu;

  frontend::EventGeneratorConfig generator{16, 30, frontend::FillPattern::Prbs, 0xA5A5};
  std::size_t buffer_depth = 4;
  bool clear_busy_on_readout = false;

  backend::TriggerConfig trigger{backend::TriggerSource::Periodic, 100 * kPicosPerMicro, 0, 0, true,
                                 1 * kPicosPerMilli, 0};
  std::size_t pool_size = 64;
  std::size_t header_reserve = 64;
  std::size_t fifo_bytes = 2048;
  backend::FlushPolicy flush_policy = backend::FlushPolicy::EachEvent;
  Time bootstrap_timeout = 100 * kPicosPerMicro;

  TransportSimConfig transport;
  std::vector<FaultSpec> faults;

  bool record_messages = false;  // keep a log of every delivered link frame
  bool keep_events = true;       // keep per-event client records

  void validate() const {
    if (num_frontends == 0 || num_frontends > 32) throw ConfigError("num_frontends must be 1..32");
    if (duration <= 0) throw ConfigError("duration must be positive");
    if (measure_after < 0 || measure_after >= duration) throw ConfigError("measure_after must lie inside the run");
    if (latency < 0) throw ConfigError("latency must be non-negative");
    if (!(ber >= 0.0 && ber < 0.5)) throw ConfigError("ber must be in [0, 0.5)");
    if (lock_threshold == 0) throw ConfigError("lock_threshold must be positive");
    if (training_bits < 2) throw ConfigError("training_bits must be at least 2");
    if (warmup < static_cast<Time>(training_bits) * 2500) throw ConfigError("warmup shorter than upstream training");
    generator.validate();
    if (buffer_depth == 0) throw ConfigError("buffer_depth must be positive");
    if (pool_size == 0) throw ConfigError("pool_size must be positive");
    if (header_reserve < transport::kTransportHeaderBytes) throw ConfigError("header_reserve below transport header size");
    if (fifo_bytes < msg::kMaxPacketBytes) throw ConfigError("fifo_bytes below the maximum packet size");
    if (trigger.source == backend::TriggerSource::Periodic && trigger.period <= 0)
      throw ConfigError("trigger period must be positive");
    if (transport.credit == 0) throw ConfigError("credit must be at least 1");
    if (transport.mtu <= transport.overhead + transport::kTransportHeaderBytes ||
        transport.content_bytes() < generator.packet_bytes(0))
      throw ConfigError("mtu too small for the largest generated packet");
    if (transport.link_rate_bps <= 0 || transport.rtt < 0) throw ConfigError("transport rate/rtt out of range");
    if (!serials.empty() && serials.size() != num_frontends) throw ConfigError("serials must list one per front-end");
    for (auto p : absent_ports)
      if (p >= num_frontends) throw ConfigError("absent port out of range");
    for (auto& f : faults) {
      if (f.type != FaultType::DropTransportFrame && f.link >= num_frontends) throw ConfigError("fault link out of range");
      if (f.at < 0) throw ConfigError("fault time must be non-negative");
    }
  }

  backend::PoolConfig pool_config() const {
    return backend::PoolConfig{.buffer_bytes = header_reserve + transport.content_bytes(), .header_reserve = header_reserve, .pool_size = pool_size};
  }
};

// Saturated generators on a few cards: 32 channels of 1012 words each, triggered every
// 10 us so every FE buffer is always full.
inline SimConfig saturated_link_scenario(unsigned cards = 2) {
  SimConfig c;
  c.num_frontends = cards;
  c.duration = 50 * kPicosPerMilli;
  c.measure_after = 5 * kPicosPerMilli;
  c.generator.words_per_channel = 1012;
  c.generator.channels_per_event = 32;
  c.trigger.period = 10 * kPicosPerMicro;
  c.keep_events = false;
  return c;
}

// Transport-limited run: many small-event cards feeding one credit-controlled client.
inline SimConfig credit_sweep_scenario(std::uint32_t credit, std::size_t mtu, unsigned cards = 32) {
  SimConfig c;
  c.num_frontends = cards;
  c.duration = 30 * kPicosPerMilli;
  c.measure_after = 5 * kPicosPerMilli;
  c.generator.words_per_channel = 30;
  c.generator.channels_per_event = 16;
  c.trigger.period = 10 * kPicosPerMicro;
  c.keep_events = false;
  c.flush_policy = backend::FlushPolicy::FullBuffers;
  c.transport.credit = credit;
  c.transport.mtu = mtu;
  return c;
}

// ---- JSON mapping: times are given in microseconds (keys ending in _us) ----

namespace detail {
inline Time us(double v) { return static_cast<Time>(std::llround(v * static_cast<double>(kPicosPerMicro))); }
inline double to_us(Time t) { return static_cast<double>(t) / static_cast<double>(kPicosPerMicro); }

inline void check_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (auto& [k, v] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok |= (k == a);
    if (!ok) throw ConfigError(std::string(where) + ": unknown key '" + k + "'");
  }
}

template <class T>
void get(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}
inline void get_us(const nlohmann::json& j, const char* key, Time& out) {
  double v = 0;
  if (!j.contains(key)) return;
  get(j, key, v);
  out = us(v);
}
}  // namespace detail

inline SimConfig sim_config_from_json(const nlohmann::json& j) {
  using detail::get;
  using detail::get_us;
  detail::check_keys(j,
                     {"num_frontends", "seed", "abstraction", "duration_us", "measure_after_us", "latency_ns", "ber",
                      "lock_threshold", "training_bits", "warmup_us", "absent_ports", "serials", "enabled_mask",
                      "generator", "card", "trigger", "backend", "transport", "faults", "record_messages", "keep_events"},
                     "config");
  SimConfig c;
  get(j, "num_frontends", c.num_frontends);
  get(j, "seed", c.seed);
  if (j.contains("abstraction")) c.abstraction = parse_abstraction(j.at("abstraction").get<std::string>());
  get_us(j, "duration_us", c.duration);
  get_us(j, "measure_after_us", c.measure_after);
  if (j.contains("latency_ns")) c.latency = static_cast<Time>(std::llround(j.at("latency_ns").get<double>() * 1000.0));
  get(j, "ber", c.ber);
  get(j, "lock_threshold", c.lock_threshold);
  get(j, "training_bits", c.training_bits);
  get_us(j, "warmup_us", c.warmup);
  get(j, "absent_ports", c.absent_ports);
  get(j, "serials", c.serials);
  get(j, "enabled_mask", c.enabled_mask);
  get(j, "record_messages", c.record_messages);
  get(j, "keep_events", c.keep_events);

  if (j.contains("generator")) {
    auto& g = j.at("generator");
    detail::check_keys(g, {"channels_per_event", "words_per_channel", "fill_pattern", "constant_value"}, "generator");
    get(g, "channels_per_event", c.generator.channels_per_event);
    get(g, "words_per_channel", c.generator.words_per_channel);
    if (g.contains("fill_pattern")) c.generator.fill_pattern = frontend::parse_fill_pattern(g.at("fill_pattern").get<std::string>());
    get(g, "constant_value", c.generator.constant_value);
  }
  if (j.contains("card")) {
    auto& g = j.at("card");
    detail::check_keys(g, {"buffer_depth", "clear_busy_on_readout"}, "card");
    get(g, "buffer_depth", c.buffer_depth);
    get(g, "clear_busy_on_readout", c.clear_busy_on_readout);
  }
  if (j.contains("trigger")) {
    auto& g = j.at("trigger");
    detail::check_keys(g, {"source", "period_us", "first_at_us", "event_type", "busy_throttle", "ack_timeout_us", "max_triggers"},
                       "trigger");
    if (g.contains("source")) c.trigger.source = backend::parse_trigger_source(g.at("source").get<std::string>());
    get_us(g, "period_us", c.trigger.period);
    get_us(g, "first_at_us", c.trigger.first_at);
    get(g, "event_type", c.trigger.event_type);
    get(g, "busy_throttle", c.trigger.busy_throttle);
    get_us(g, "ack_timeout_us", c.trigger.ack_timeout);
    get(g, "max_triggers", c.trigger.max_triggers);
  }
  if (j.contains("backend")) {
    auto& g = j.at("backend");
    detail::check_keys(g, {"pool_size", "header_reserve", "fifo_bytes", "flush_policy", "bootstrap_timeout_us"}, "backend");
    if (g.contains("flush_policy")) {
      auto v = g.at("flush_policy").get<std::string>();
      if (v == "each_event") c.flush_policy = backend::FlushPolicy::EachEvent;
      else if (v == "full_buffers") c.flush_policy = backend::FlushPolicy::FullBuffers;
      else throw ConfigError("flush_policy must be 'each_event' or 'full_buffers'");
    }
    get(g, "pool_size", c.pool_size);
    get(g, "header_reserve", c.header_reserve);
    get(g, "fifo_bytes", c.fifo_bytes);
    get_us(g, "bootstrap_timeout_us", c.bootstrap_timeout);
  }
  if (j.contains("transport")) {
    auto& g = j.at("transport");
    detail::check_keys(g, {"enabled", "credit", "mtu", "link_rate_bps", "rtt_us", "overhead"}, "transport");
    get(g, "enabled", c.transport.enabled);
    get(g, "credit", c.transport.credit);
    get(g, "mtu", c.transport.mtu);
    get(g, "link_rate_bps", c.transport.link_rate_bps);
    get_us(g, "rtt_us", c.transport.rtt);
    get(g, "overhead", c.transport.overhead);
  }
  if (j.contains("faults")) {
    for (auto& f : j.at("faults")) {
      detail::check_keys(f, {"type", "link", "at_us", "index", "delta", "direction"}, "fault");
      FaultSpec s;
      if (!f.contains("type")) throw ConfigError("fault: missing type");
      s.type = parse_fault_type(f.at("type").get<std::string>());
      get(f, "link", s.link);
      get_us(f, "at_us", s.at);
      get(f, "index", s.index);
      get(f, "delta", s.delta);
      if (f.contains("direction")) {
        auto d = f.at("direction").get<std::string>();
        if (d == "up") s.direction = wire::Direction::Upstream;
        else if (d == "down") s.direction = wire::Direction::Downstream;
        else throw ConfigError("fault: direction must be 'up' or 'down'");
      }
      c.faults.push_back(s);
    }
  }
  c.validate();
  return c;
}

inline nlohmann::json to_json(const SimConfig& c) {
  using detail::to_us;
  nlohmann::json faults = nlohmann::json::array();
  for (auto& f : c.faults)
    faults.push_back({{"type", to_string(f.type)}, {"link", f.link}, {"at_us", to_us(f.at)}, {"index", f.index},
                      {"delta", f.delta}, {"direction", f.direction == wire::Direction::Upstream ? "up" : "down"}});
  const char* src = c.trigger.source == backend::TriggerSource::Periodic ? "periodic"
                    : c.trigger.source == backend::TriggerSource::Software ? "software" : "external";
  return nlohmann::json{
      {"num_frontends", c.num_frontends},
      {"seed", c.seed},
      {"abstraction", to_string(c.abstraction)},
      {"duration_us", to_us(c.duration)},
      {"measure_after_us", to_us(c.measure_after)},
      {"latency_ns", static_cast<double>(c.latency) / 1000.0},
      {"ber", c.ber},
      {"lock_threshold", c.lock_threshold},
      {"training_bits", c.training_bits},
      {"warmup_us", to_us(c.warmup)},
      {"absent_ports", c.absent_ports},
      {"serials", c.serials},
      {"enabled_mask", c.enabled_mask},
      {"record_messages", c.record_messages},
      {"keep_events", c.keep_events},
      {"generator", {{"channels_per_event", c.generator.channels_per_event},
                     {"words_per_channel", c.generator.words_per_channel},
                     {"fill_pattern", frontend::to_string(c.generator.fill_pattern)},
                     {"constant_value", c.generator.constant_value}}},
      {"card", {{"buffer_depth", c.buffer_depth}, {"clear_busy_on_readout", c.clear_busy_on_readout}}},
      {"trigger", {{"source", src},
                   {"period_us", to_us(c.trigger.period)},
                   {"first_at_us", to_us(c.trigger.first_at)},
                   {"event_type", c.trigger.event_type},
                   {"busy_throttle", c.trigger.busy_throttle},
                   {"ack_timeout_us", to_us(c.trigger.ack_timeout)},
                   {"max_triggers", c.trigger.max_triggers}}},
      {"backend", {{"pool_size", c.pool_size},
                   {"header_reserve", c.header_reserve},
                   {"fifo_bytes", c.fifo_bytes},
                   {"flush_policy", c.flush_policy == backend::FlushPolicy::EachEvent ? "each_event" : "full_buffers"},
                   {"bootstrap_timeout_us", to_us(c.bootstrap_timeout)}}},
      {"transport", {{"enabled", c.transport.enabled},
                     {"credit", c.transport.credit},
                     {"mtu", c.transport.mtu},
                     {"link_rate_bps", c.transport.link_rate_bps},
                     {"rtt_us", to_us(c.transport.rtt)},
                     {"overhead", c.transport.overhead}}},
      {"faults", faults},
  };
}

}  // namespace asymnet::sim
