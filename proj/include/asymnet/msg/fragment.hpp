#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "asymnet/core/bits.hpp"
#include "asymnet/msg/crc32.hpp"

namespace asymnet::msg {

inline constexpr std::size_t kMaxPacketBytes = 2048;
inline constexpr std::size_t kPacketOverheadBytes = 6;  // header word + CRC-32
inline constexpr std::size_t kMaxPayloadBytes = 2040;   // largest even word count within 2048
inline constexpr std::size_t kSoeHeaderWords = 5;       // event_number (2) + timestamp (3)

inline constexpr std::uint16_t kSoeBit = 0x8000;
inline constexpr std::uint16_t kEoeBit = 0x4000;
inline constexpr std::uint16_t kSizeMask = 0x3FFF;

struct EventStamp {
  std::uint32_t event_number = 0;
  std::uint64_t timestamp = 0;  // 48 bits
  bool operator==(const EventStamp&) const = default;
};

// Event fragment: header word (SOE bit 15, EOE bit 14, size_bytes in 13..0), payload
// words sent MSB first, and CRC-32 over header + payload as two words, high first.
struct FragmentPacket {
  bool soe = false;
  bool eoe = false;
  std::vector<std::uint16_t> payload;
  std::uint32_t crc = 0;

  std::size_t size_bytes() const { return payload.size() * 2; }
  std::size_t serialized_bytes() const { return kPacketOverheadBytes + size_bytes(); }
  std::uint16_t header_word() const {
    return static_cast<std::uint16_t>((soe ? kSoeBit : 0) | (eoe ? kEoeBit : 0) | (size_bytes() & kSizeMask));
  }

  // Meaningful only for SOE packets.
  std::optional<EventStamp> stamp() const {
    if (!soe || payload.size() < kSoeHeaderWords) return std::nullopt;
    EventStamp s;
    s.event_number = (std::uint32_t{payload[0]} << 16) | payload[1];
    s.timestamp = (std::uint64_t{payload[2]} << 32) | (std::uint64_t{payload[3]} << 16) | payload[4];
    return s;
  }

  bool operator==(const FragmentPacket&) const = default;
};

namespace detail {
inline void put_word(std::vector<std::uint8_t>& out, std::uint16_t w) {
  out.push_back(static_cast<std::uint8_t>(w >> 8));
  out.push_back(static_cast<std::uint8_t>(w & 0xFFu));
}

inline std::uint32_t fragment_crc(std::uint16_t header, std::span<const std::uint16_t> payload) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(2 + payload.size() * 2);
  put_word(bytes, header);
  for (auto w : payload) put_word(bytes, w);
  return crc32(bytes);
}
}  // namespace detail

// Rejects odd word counts and payloads that would exceed 2048 serialized bytes.
inline FragmentPacket build_fragment_packet(bool soe, bool eoe, std::vector<std::uint16_t> payload_words,
                                            std::optional<EventStamp> event_header = std::nullopt) {
  FragmentPacket p;
  p.soe = soe;
  p.eoe = eoe;
  if (event_header) {
    if (!soe) throw MalformedInput("fragment: event header on a non-SOE packet");
    auto& e = *event_header;
    if (e.timestamp >> 48) throw MalformedInput("fragment: timestamp exceeds 48 bits");
    p.payload = {static_cast<std::uint16_t>(e.event_number >> 16), static_cast<std::uint16_t>(e.event_number),
                 static_cast<std::uint16_t>(e.timestamp >> 32), static_cast<std::uint16_t>(e.timestamp >> 16),
                 static_cast<std::uint16_t>(e.timestamp)};
  }
  p.payload.insert(p.payload.end(), payload_words.begin(), payload_words.end());
  if (p.payload.size() % 2 != 0) throw MalformedInput("fragment: payload word count must be even");
  if (p.size_bytes() > kMaxPayloadBytes) throw MalformedInput("fragment: packet exceeds 2048 bytes");
  p.crc = detail::fragment_crc(p.header_word(), p.payload);
  return p;
}

inline std::vector<std::uint8_t> serialize(const FragmentPacket& p) {
  std::vector<std::uint8_t> out;
  out.reserve(p.serialized_bytes());
  detail::put_word(out, p.header_word());
  for (auto w : p.payload) detail::put_word(out, w);
  detail::put_word(out, static_cast<std::uint16_t>(p.crc >> 16));
  detail::put_word(out, static_cast<std::uint16_t>(p.crc & 0xFFFFu));
  return out;
}

struct DeserializedPacket {
  FragmentPacket packet;
  bool crc_ok = false;
};

inline std::uint16_t peek_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2) throw MalformedInput("fragment: shorter than a header word");
  return static_cast<std::uint16_t>((bytes[0] << 8) | bytes[1]);
}

inline std::size_t serialized_size_from_header(std::uint16_t header) {
  return kPacketOverheadBytes + (header & kSizeMask);
}

// Throws if the byte count disagrees with the header's size field.
inline DeserializedPacket deserialize(std::span<const std::uint8_t> bytes) {
  auto header = peek_header(bytes);
  std::size_t size = header & kSizeMask;
  if (size % 2 != 0) throw MalformedInput("fragment: odd byte size");
  if (bytes.size() != kPacketOverheadBytes + size) throw MalformedInput("fragment: length disagrees with header");
  DeserializedPacket d;
  d.packet.soe = header & kSoeBit;
  d.packet.eoe = header & kEoeBit;
  d.packet.payload.resize(size / 2);
  for (std::size_t i = 0; i < size / 2; ++i)
    d.packet.payload[i] = static_cast<std::uint16_t>((bytes[2 + 2 * i] << 8) | bytes[3 + 2 * i]);
  std::size_t c = 2 + size;
  d.packet.crc = (std::uint32_t{bytes[c]} << 24) | (std::uint32_t{bytes[c + 1]} << 16) |
                 (std::uint32_t{bytes[c + 2]} << 8) | bytes[c + 3];
  d.crc_ok = crc32(bytes.subspan(0, 2 + size)) == d.packet.crc;
  return d;
}

// Line framing on upstream channel C: a start bit, then the serialized packet MSB first.
inline BitStream encode_fragment_frame(std::span<const std::uint8_t> serialized) {
  BitStream f;
  f.reserve(1 + serialized.size() * 8);
  f.push_back(1);
  for (auto b : serialized) append_bits(f, b, 8);
  return f;
}

inline std::vector<std::uint8_t> decode_fragment_frame(BitView frame) {
  if (frame.empty() || frame[0] != 1) throw MalformedInput("fragment frame: missing start bit");
  if ((frame.size() - 1) % 8 != 0) throw MalformedInput("fragment frame: not a whole number of bytes");
  return bits_to_bytes(frame.subspan(1));
}

}  // namespace asymnet::msg
