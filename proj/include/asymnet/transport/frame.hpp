#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "asymnet/core/errors.hpp"

namespace asymnet::transport {

inline constexpr std::uint16_t kTransportMagic = 0xAA55;
inline constexpr std::size_t kTransportHeaderBytes = 8;
inline constexpr std::size_t kDefaultFrameOverhead = 66;  // Ethernet + IP + UDP equivalent

inline constexpr std::uint8_t kFlagIncompleteEvent = 0x01;
inline constexpr std::uint8_t kFlagLastOfEvent = 0x02;

// Big-endian: magic(2) sequence(4) flags(1) grant_id(1).
struct TransportHeader {
  std::uint16_t magic = kTransportMagic;
  std::uint32_t sequence = 0;
  std::uint8_t flags = 0;
  std::uint8_t grant_id = 0;

  bool incomplete_event() const { return flags & kFlagIncompleteEvent; }
  bool last_of_event() const { return flags & kFlagLastOfEvent; }
  bool operator==(const TransportHeader&) const = default;
};

inline void write_header(std::uint8_t* dst, const TransportHeader& h) {
  dst[0] = static_cast<std::uint8_t>(h.magic >> 8);
  dst[1] = static_cast<std::uint8_t>(h.magic);
  dst[2] = static_cast<std::uint8_t>(h.sequence >> 24);
  dst[3] = static_cast<std::uint8_t>(h.sequence >> 16);
  dst[4] = static_cast<std::uint8_t>(h.sequence >> 8);
  dst[5] = static_cast<std::uint8_t>(h.sequence);
  dst[6] = h.flags;
  dst[7] = h.grant_id;
}

inline TransportHeader read_header(std::span<const std::uint8_t> frame) {
  if (frame.size() < kTransportHeaderBytes) throw MalformedInput("transport frame shorter than its header");
  TransportHeader h;
  h.magic = static_cast<std::uint16_t>((frame[0] << 8) | frame[1]);
  h.sequence = (std::uint32_t{frame[2]} << 24) | (std::uint32_t{frame[3]} << 16) | (std::uint32_t{frame[4]} << 8) |
               frame[5];
  h.flags = frame[6];
  h.grant_id = frame[7];
  return h;
}

// Client to server: absolute allowance of `frames` frames, replacing any remainder.
struct CreditGrant {
  std::uint32_t frames = 1;
  std::uint8_t grant_id = 0;
};

inline constexpr std::size_t kGrantBytes = 7;

inline void write_grant(std::uint8_t* dst, const CreditGrant& g) {
  dst[0] = static_cast<std::uint8_t>(kTransportMagic >> 8);
  dst[1] = static_cast<std::uint8_t>(kTransportMagic);
  dst[2] = static_cast<std::uint8_t>(g.frames >> 24);
  dst[3] = static_cast<std::uint8_t>(g.frames >> 16);
  dst[4] = static_cast<std::uint8_t>(g.frames >> 8);
  dst[5] = static_cast<std::uint8_t>(g.frames);
  dst[6] = g.grant_id;
}

inline std::optional<CreditGrant> read_grant(std::span<const std::uint8_t> b) {
  if (b.size() != kGrantBytes || ((b[0] << 8) | b[1]) != kTransportMagic) return std::nullopt;
  CreditGrant g;
  g.frames = (std::uint32_t{b[2]} << 24) | (std::uint32_t{b[3]} << 16) | (std::uint32_t{b[4]} << 8) | b[5];
  g.grant_id = b[6];
  if (g.frames == 0) return std::nullopt;
  return g;
}

}  // namespace asymnet::transport
