#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "asymnet/core/errors.hpp"

namespace asymnet {

// One element per line or logical bit, in transmission order. Elements are 0 or 1.
using Bit = std::uint8_t;
using BitStream = std::vector<Bit>;
using BitView = std::span<const Bit>;

inline BitStream bits_from_string(std::string_view s) {
  BitStream out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '0') out.push_back(0);
    else if (c == '1') out.push_back(1);
    else if (c == ' ' || c == '_') continue;
    else throw MalformedInput("bits_from_string: unexpected character");
  }
  return out;
}

inline std::string bits_to_string(BitView bits) {
  std::string s;
  s.reserve(bits.size());
  for (Bit b : bits) s.push_back(b ? '1' : '0');
  return s;
}

// Append the low `width` bits of `value`, most significant first.
inline void append_bits(BitStream& out, std::uint64_t value, unsigned width) {
  for (unsigned i = width; i-- > 0;) out.push_back(static_cast<Bit>((value >> i) & 1u));
}

// Read `width` bits MSB-first starting at `pos`; advances `pos`.
inline std::uint64_t read_bits(BitView bits, std::size_t& pos, unsigned width) {
  if (pos + width > bits.size()) throw MalformedInput("read_bits: stream too short");
  std::uint64_t v = 0;
  for (unsigned i = 0; i < width; ++i) v = (v << 1) | (bits[pos + i] & 1u);
  pos += width;
  return v;
}

inline BitStream bytes_to_bits(std::span<const std::uint8_t> bytes) {
  BitStream out;
  out.reserve(bytes.size() * 8);
  for (auto byte : bytes) append_bits(out, byte, 8);
  return out;
}

// Packs MSB-first; a trailing partial byte is left-aligned.
inline std::vector<std::uint8_t> bits_to_bytes(BitView bits) {
  std::vector<std::uint8_t> out((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) out[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  return out;
}

inline unsigned popcount(BitView bits) {
  unsigned n = 0;
  for (Bit b : bits) n += b;
  return n;
}

// Even parity: the bit that makes the total number of ones (payload + parity) even.
inline Bit even_parity(BitView bits) { return static_cast<Bit>(popcount(bits) & 1u); }

// Hex encoding used by golden vectors: "<nbits>:<hex>" with bits packed MSB-first in
// nibbles; the last nibble is left-aligned when nbits is not a multiple of 4.
inline std::string bits_to_hex(BitView bits) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s = std::to_string(bits.size()) + ":";
  for (std::size_t i = 0; i < bits.size(); i += 4) {
    unsigned nib = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      nib <<= 1;
      if (i + k < bits.size()) nib |= bits[i + k];
    }
    s.push_back(digits[nib]);
  }
  if (bits.empty()) s.push_back('-');
  return s;
}

inline BitStream bits_from_hex(std::string_view token) {
  auto colon = token.find(':');
  if (colon == std::string_view::npos) throw MalformedInput("hex bitstream: missing length prefix");
  std::size_t nbits = std::stoull(std::string(token.substr(0, colon)));
  auto hex = token.substr(colon + 1);
  BitStream out;
  out.reserve(nbits);
  if (nbits == 0) return out;
  if (hex.size() != (nbits + 3) / 4) throw MalformedInput("hex bitstream: length mismatch");
  for (char c : hex) {
    unsigned nib;
    if (c >= '0' && c <= '9') nib = static_cast<unsigned>(c - '0');
    else if (c >= 'a' && c <= 'f') nib = static_cast<unsigned>(c - 'a' + 10);
    else if (c >= 'A' && c <= 'F') nib = static_cast<unsigned>(c - 'A' + 10);
    else throw MalformedInput("hex bitstream: bad digit");
    for (int k = 3; k >= 0 && out.size() < nbits; --k) out.push_back(static_cast<Bit>((nib >> k) & 1u));
  }
  return out;
}

}  // namespace asymnet
