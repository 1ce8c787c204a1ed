#pragma once

#include <cstdint>

#include "asymnet/msg/framing.hpp"
#include "asymnet/wire/tdm.hpp"

namespace asymnet::msg {

inline constexpr std::size_t kChannelBFrameBits = 64;
inline constexpr unsigned kChannelBPayloadBits = 62;

// Register-bus transaction. Payload order, MSB first:
// BC(1) TID(5) RD(1) WR(1) BE(4) PE(1) FE(1) ADDR(16) DATA(32) = 62 bits.
struct ChannelBTransaction {
  bool broadcast = false;
  std::uint8_t target_id = 0;
  bool read = false;
  bool write = false;
  std::uint8_t byte_enable = 0xF;
  std::uint16_t address = 0;
  std::uint32_t data = 0;
  bool parity_error = false;  // responses only
  bool bus_error = false;     // responses only

  bool operator==(const ChannelBTransaction&) const = default;

  static ChannelBTransaction read_request(std::uint8_t target, std::uint16_t addr) {
    ChannelBTransaction t;
    t.target_id = target;
    t.read = true;
    t.address = addr;
    return t;
  }
  static ChannelBTransaction broadcast_read(std::uint16_t addr) {
    auto t = read_request(0, addr);
    t.broadcast = true;
    return t;
  }
  static ChannelBTransaction write_request(std::uint8_t target, std::uint16_t addr, std::uint32_t value,
                                           std::uint8_t be = 0xF) {
    ChannelBTransaction t;
    t.target_id = target;
    t.write = true;
    t.address = addr;
    t.data = value;
    t.byte_enable = be;
    return t;
  }
  static ChannelBTransaction broadcast_write(std::uint16_t addr, std::uint32_t value) {
    auto t = write_request(0, addr, value);
    t.broadcast = true;
    return t;
  }
};

// Downstream frames carry PE and FE as 0. Requests must set exactly one of RD/WR.
inline BitStream encode_channel_b(const ChannelBTransaction& t, wire::Direction dir) {
  if (t.target_id > 31) throw MalformedInput("channel B: target id is 5 bits");
  if (t.byte_enable > 0xF) throw MalformedInput("channel B: byte enable is 4 bits");
  if (t.read == t.write) throw MalformedInput("channel B: exactly one of read/write must be set");
  bool up = dir == wire::Direction::Upstream;
  std::uint64_t p = 0;
  p |= std::uint64_t{t.broadcast} << 61;
  p |= std::uint64_t{t.target_id} << 56;
  p |= std::uint64_t{t.read} << 55;
  p |= std::uint64_t{t.write} << 54;
  p |= std::uint64_t{t.byte_enable} << 50;
  p |= std::uint64_t{up && t.parity_error} << 49;
  p |= std::uint64_t{up && t.bus_error} << 48;
  p |= std::uint64_t{t.address} << 32;
  p |= std::uint64_t{t.data};
  return detail::frame_payload(p, kChannelBPayloadBits);
}

inline Decoded<ChannelBTransaction> decode_channel_b(BitView bits, wire::Direction dir) {
  Decoded<ChannelBTransaction> d;
  auto p = detail::unframe_payload(bits, kChannelBPayloadBits, d.parity_ok);
  auto& t = d.msg;
  t.broadcast = (p >> 61) & 1u;
  t.target_id = static_cast<std::uint8_t>((p >> 56) & 0x1Fu);
  t.read = (p >> 55) & 1u;
  t.write = (p >> 54) & 1u;
  t.byte_enable = static_cast<std::uint8_t>((p >> 50) & 0xFu);
  if (dir == wire::Direction::Upstream) {
    t.parity_error = (p >> 49) & 1u;
    t.bus_error = (p >> 48) & 1u;
  }
  t.address = static_cast<std::uint16_t>((p >> 32) & 0xFFFFu);
  t.data = static_cast<std::uint32_t>(p & 0xFFFFFFFFu);
  return d;
}

}  // namespace asymnet::msg
