#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "asymnet/core/bits.hpp"
#include "asymnet/core/errors.hpp"
#include "asymnet/msg/channel_a.hpp"
#include "asymnet/msg/channel_b.hpp"
#include "asymnet/msg/channel_c.hpp"
#include "asymnet/msg/fragment.hpp"
#include "asymnet/wire/manchester.hpp"
#include "asymnet/wire/scrambler.hpp"
#include "asymnet/wire/tdm.hpp"

namespace asymnet::sim {

// One golden vector line: `direction hex-input hex-output op [key=value ...]`.
// Bit strings use the "<nbits>:<hex>" form, MSB first.
struct GoldenVector {
  std::string direction;  // "down" | "up"
  BitStream input;
  BitStream output;
  std::string op;
  std::vector<std::pair<std::string, std::string>> fields;

  std::string field(const std::string& k) const {
    for (auto& [a, b] : fields)
      if (a == k) return b;
    throw MalformedInput("vector: missing field '" + k + "'");
  }
};

inline std::string format_vector(const GoldenVector& v) {
  std::string s = v.direction + " " + bits_to_hex(v.input) + " " + bits_to_hex(v.output) + " " + v.op;
  for (auto& [k, val] : v.fields) s += " " + k + "=" + val;
  return s;
}

inline GoldenVector parse_vector_line(std::string_view line) {
  std::istringstream is{std::string(line)};
  GoldenVector v;
  std::string in, out, tok;
  if (!(is >> v.direction >> in >> out >> v.op)) throw MalformedInput("vector: expected direction, input, output, op");
  if (v.direction != "down" && v.direction != "up") throw MalformedInput("vector: direction must be down or up");
  v.input = bits_from_hex(in);
  v.output = bits_from_hex(out);
  while (is >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) throw MalformedInput("vector: field without '=': " + tok);
    v.fields.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
  }
  return v;
}

namespace detail {

inline std::string num(std::uint64_t v) { return std::to_string(v); }
inline std::string hexnum(std::uint64_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}
inline std::uint64_t field_u(const GoldenVector& v, const std::string& k) { return std::stoull(v.field(k), nullptr, 0); }

inline BitStream fanout_line(BitView slots) {
  auto sched = wire::TdmSchedule::downstream();
  return wire::manchester_encode(wire::invert_b_slots(sched, slots));
}
inline BitStream uplink_line(BitView slots) {
  auto sched = wire::TdmSchedule::upstream();
  wire::ScramblerState st;
  return wire::scramble(st, wire::invert_b_slots(sched, slots));
}

inline GoldenVector message_vector(std::string dir, std::string op, const BitStream& frame,
                                   std::vector<std::pair<std::string, std::string>> fields) {
  return GoldenVector{std::move(dir), BitStream(frame.begin() + 1, frame.end() - 1), frame, std::move(op), std::move(fields)};
}

inline std::vector<std::pair<std::string, std::string>> b_fields(const msg::ChannelBTransaction& t) {
  return {{"bc", num(t.broadcast)},   {"tid", num(t.target_id)},     {"rd", num(t.read)},
          {"wr", num(t.write)},       {"be", hexnum(t.byte_enable)}, {"pe", num(t.parity_error)},
          {"fe", num(t.bus_error)},   {"addr", hexnum(t.address)},   {"data", hexnum(t.data)}};
}

}  // namespace detail

// The shipped vector set: idle and example fanout cycles, uplink scrambling, scrambler
// recurrences, and frames of every message type.
inline std::vector<GoldenVector> golden_vectors() {
  using detail::hexnum;
  using detail::num;
  std::vector<GoldenVector> out;
  auto bits = [](std::string_view s) { return bits_from_string(s); };

  out.push_back({"down", bits("0000"), detail::fanout_line(bits("0000")), "fanout", {}});
  out.push_back({"down", bits("0100"), wire::manchester_encode(bits("0100")), "manchester", {}});
  for (auto s : {"1000", "0010", "0001", "1111", "1010", "0000000011110000"})
    out.push_back({"down", bits(s), detail::fanout_line(bits(s)), "fanout", {}});
  for (auto s : {"0000", "1011", "0100000000000000"})
    out.push_back({"up", bits(s), detail::uplink_line(bits(s)), "uplink", {}});

  // Impulse responses: scrambler output repeats every 43 bits, descrambler echoes once.
  BitStream impulse(130, 0);
  impulse[0] = 1;
  {
    wire::ScramblerState st;
    out.push_back({"up", impulse, wire::scramble(st, impulse), "scramble", {}});
  }
  {
    wire::ScramblerState st;
    out.push_back({"up", impulse, wire::descramble(st, impulse), "descramble", {}});
  }
  std::mt19937_64 rng(20260101);
  {
    BitStream r(256);
    for (auto& b : r) b = static_cast<Bit>(rng() & 1u);
    wire::ScramblerState st;
    out.push_back({"up", r, wire::scramble(st, r), "scramble", {}});
  }

  auto a_down = [&](const msg::ChannelAMessageDown& m) {
    out.push_back(detail::message_vector("down", "chA", msg::encode_channel_a(m),
                                         {{"stop", num(m.sampling_stop)},
                                          {"type", num(m.event_type)},
                                          {"start", num(m.sampling_start)},
                                          {"clr_cnt", num(m.clear_event_counter)},
                                          {"clr_ts", num(m.clear_timestamp)},
                                          {"sync", num(m.sync_sampling_clock)}}));
  };
  a_down(msg::ChannelAMessageDown::trigger(0));
  a_down(msg::ChannelAMessageDown::trigger(3));
  {
    msg::ChannelAMessageDown m;
    m.sampling_start = m.clear_event_counter = m.clear_timestamp = m.sync_sampling_clock = true;
    a_down(m);
  }
  auto a_up = [&](const msg::ChannelAMessageUp& m) {
    out.push_back(detail::message_vector("up", "chA", msg::encode_channel_a(m),
                                         {{"set_busy", num(m.set_busy)},
                                          {"clear_busy", num(m.clear_busy)},
                                          {"tp", hexnum(m.trigger_primitives)}}));
  };
  a_up({true, false, 0});
  a_up({false, true, 0});
  a_up({false, false, 0xA});

  auto b = [&](const msg::ChannelBTransaction& t, wire::Direction d) {
    bool down = d == wire::Direction::Downstream;
    out.push_back(detail::message_vector(down ? "down" : "up", "chB", msg::encode_channel_b(t, d), detail::b_fields(t)));
  };
  b(msg::ChannelBTransaction::broadcast_read(0x0000), wire::Direction::Downstream);
  b(msg::ChannelBTransaction::write_request(5, 0x0010, 0xDEADBEEF), wire::Direction::Downstream);
  b(msg::ChannelBTransaction::write_request(31, 0x0022, 0x12345678, 0x3), wire::Direction::Downstream);
  {
    auto t = msg::ChannelBTransaction::read_request(7, 0x0004);
    t.data = 0x00C0FFEE;
    b(t, wire::Direction::Upstream);
    t.parity_error = true;
    b(t, wire::Direction::Upstream);
    t.parity_error = false;
    t.bus_error = true;
    b(t, wire::Direction::Upstream);
  }

  for (std::uint32_t mask : {0xFFFFFFFFu, 0x00000001u, 0x80000000u, 0x0000A5A5u}) {
    msg::ChannelCRequest r{msg::kOpSendNextPacket, mask};
    out.push_back(detail::message_vector("down", "chC", msg::encode_channel_c_request(r),
                                         {{"op", hexnum(r.opcode)}, {"mask", hexnum(r.target_mask)}}));
  }

  auto frag = [&](const msg::FragmentPacket& p) {
    auto bytes = msg::serialize(p);
    BitStream in;
    for (auto x : bytes) append_bits(in, x, 8);
    out.push_back({"up", in, msg::encode_fragment_frame(bytes), "fragment",
                   {{"soe", num(p.soe)}, {"eoe", num(p.eoe)}, {"size", num(p.size_bytes())}, {"crc", hexnum(p.crc)}}});
  };
  frag(msg::build_fragment_packet(false, true, {}));
  frag(msg::build_fragment_packet(true, false, {0x1234}, msg::EventStamp{42, 0x0000ABCDEF01ull}));
  frag(msg::build_fragment_packet(false, false, {0x0001, 0x0203, 0x0405, 0x0607}));
  frag(msg::build_fragment_packet(true, true, {0xFFFF}, msg::EventStamp{0, 0}));
  return out;
}

// Recomputes a vector's output and decoded fields; returns a description of the first
// disagreement.
inline std::optional<std::string> check_vector(const GoldenVector& v) {
  using detail::field_u;
  auto mismatch = [](const std::string& what) { return std::optional<std::string>(what); };
  try {
    bool down = v.direction == "down";
    auto dir = down ? wire::Direction::Downstream : wire::Direction::Upstream;
    if (v.op == "fanout" || v.op == "uplink" || v.op == "manchester" || v.op == "scramble" || v.op == "descramble") {
      BitStream got;
      if (v.op == "fanout") got = detail::fanout_line(v.input);
      else if (v.op == "uplink") got = detail::uplink_line(v.input);
      else if (v.op == "manchester") got = wire::manchester_encode(v.input);
      else {
        wire::ScramblerState st;
        got = v.op == "scramble" ? wire::scramble(st, v.input) : wire::descramble(st, v.input);
      }
      if (got != v.output) return mismatch(v.op + ": output differs, got " + bits_to_hex(got));
      return std::nullopt;
    }
    if (v.op == "chA" || v.op == "chB" || v.op == "chC") {
      BitStream frame{1};
      frame.insert(frame.end(), v.input.begin(), v.input.end());
      frame.push_back(even_parity(v.input));
      if (frame != v.output) return mismatch(v.op + ": framing of the payload differs");
    }
    if (v.op == "chA" && down) {
      auto d = msg::decode_channel_a_down(v.output);
      msg::ChannelAMessageDown e;
      e.sampling_stop = field_u(v, "stop");
      e.event_type = static_cast<std::uint8_t>(field_u(v, "type"));
      e.sampling_start = field_u(v, "start");
      e.clear_event_counter = field_u(v, "clr_cnt");
      e.clear_timestamp = field_u(v, "clr_ts");
      e.sync_sampling_clock = field_u(v, "sync");
      if (!d.parity_ok || !(d.msg == e) || msg::encode_channel_a(e) != v.output) return mismatch("chA down: fields differ");
      return std::nullopt;
    }
    if (v.op == "chA") {
      auto d = msg::decode_channel_a_up(v.output);
      msg::ChannelAMessageUp e{field_u(v, "set_busy") != 0, field_u(v, "clear_busy") != 0,
                               static_cast<std::uint8_t>(field_u(v, "tp"))};
      if (!d.parity_ok || !(d.msg == e) || msg::encode_channel_a(e) != v.output) return mismatch("chA up: fields differ");
      return std::nullopt;
    }
    if (v.op == "chB") {
      auto d = msg::decode_channel_b(v.output, dir);
      msg::ChannelBTransaction e;
      e.broadcast = field_u(v, "bc");
      e.target_id = static_cast<std::uint8_t>(field_u(v, "tid"));
      e.read = field_u(v, "rd");
      e.write = field_u(v, "wr");
      e.byte_enable = static_cast<std::uint8_t>(field_u(v, "be"));
      e.parity_error = field_u(v, "pe");
      e.bus_error = field_u(v, "fe");
      e.address = static_cast<std::uint16_t>(field_u(v, "addr"));
      e.data = static_cast<std::uint32_t>(field_u(v, "data"));
      if (!d.parity_ok || !(d.msg == e) || msg::encode_channel_b(e, dir) != v.output) return mismatch("chB: fields differ");
      return std::nullopt;
    }
    if (v.op == "chC") {
      auto d = msg::decode_channel_c_request(v.output);
      msg::ChannelCRequest e{static_cast<std::uint8_t>(field_u(v, "op")), static_cast<std::uint32_t>(field_u(v, "mask"))};
      if (!d.parity_ok || !(d.msg == e) || msg::encode_channel_c_request(e) != v.output) return mismatch("chC: fields differ");
      return std::nullopt;
    }
    if (v.op == "fragment") {
      auto bytes = bits_to_bytes(v.input);
      auto d = msg::deserialize(bytes);
      if (!d.crc_ok) return mismatch("fragment: CRC does not check");
      if (d.packet.soe != (field_u(v, "soe") != 0) || d.packet.eoe != (field_u(v, "eoe") != 0) ||
          d.packet.size_bytes() != field_u(v, "size") || d.packet.crc != field_u(v, "crc"))
        return mismatch("fragment: fields differ");
      if (msg::encode_fragment_frame(bytes) != v.output) return mismatch("fragment: line frame differs");
      if (msg::decode_fragment_frame(v.output) != bytes) return mismatch("fragment: frame does not decode back");
      return std::nullopt;
    }
    return mismatch("unknown op '" + v.op + "'");
  } catch (const std::exception& e) {
    return mismatch(v.op + ": " + e.what());
  }
}

struct VectorReport {
  std::size_t total = 0;
  std::vector<std::string> failures;  // "line N: reason"
  bool ok() const { return total > 0 && failures.empty(); }
};

// Reads a vector file; blank lines and lines starting with '#' are skipped.
inline VectorReport verify_vectors(std::istream& in) {
  VectorReport r;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    ++r.total;
    try {
      if (auto err = check_vector(parse_vector_line(line))) r.failures.push_back("line " + std::to_string(n) + ": " + *err);
    } catch (const std::exception& e) {
      r.failures.push_back("line " + std::to_string(n) + ": " + e.what());
    }
  }
  return r;
}

inline std::string emit_vectors() {
  std::string s =
      "# direction hex-input hex-output op [field=value ...]\n"
      "# bit strings are <nbits>:<hex>, MSB first, last nibble left-aligned\n";
  for (auto& v : golden_vectors()) s += format_vector(v) + "\n";
  return s;
}

}  // namespace asymnet::sim
