#pragma once

#include <cstdint>

#include "asymnet/core/bits.hpp"

namespace asymnet::msg {

// Virtual-channel frames: start bit (1), payload MSB first, even parity over the payload.
template <class T>
struct Decoded {
  T msg;
  bool parity_ok = true;
};

namespace detail {
inline BitStream frame_payload(std::uint64_t payload, unsigned width) {
  BitStream f;
  f.reserve(width + 2);
  f.push_back(1);
  append_bits(f, payload, width);
  f.push_back(even_parity(BitView(f).subspan(1, width)));
  return f;
}

// Returns the payload and whether parity holds; throws on framing errors.
inline std::uint64_t unframe_payload(BitView bits, unsigned width, bool& parity_ok) {
  if (bits.size() != width + 2) throw MalformedInput("frame has wrong length");
  if (bits[0] != 1) throw MalformedInput("frame does not begin with a start bit");
  std::size_t pos = 1;
  auto payload = read_bits(bits, pos, width);
  parity_ok = even_parity(bits.subspan(1, width)) == bits[width + 1];
  return payload;
}
}  // namespace detail

}  // namespace asymnet::msg
