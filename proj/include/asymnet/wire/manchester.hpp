#pragma once

#include "asymnet/core/bits.hpp"

namespace asymnet::wire {

// b -> (b, !b). Checked against the idle cross-check: 0100 encodes to 01100101.
inline BitStream manchester_encode(BitView bits) {
  BitStream out;
  out.reserve(bits.size() * 2);
  for (Bit b : bits) {
    out.push_back(b);
    out.push_back(static_cast<Bit>(b ^ 1u));
  }
  return out;
}

// Strict decoder: pairs start at symbol `half_bit_phase` (0 or 1). A pair that is not
// (b, !b) throws CodingViolation with the pair index. An odd trailing symbol is ignored.
inline BitStream manchester_decode(BitView symbols, unsigned half_bit_phase = 0) {
  if (half_bit_phase > 1) throw MalformedInput("manchester_decode: phase must be 0 or 1");
  BitStream out;
  if (symbols.size() <= half_bit_phase) return out;
  std::size_t pairs = (symbols.size() - half_bit_phase) / 2;
  out.reserve(pairs);
  for (std::size_t i = 0; i < pairs; ++i) {
    Bit first = symbols[half_bit_phase + 2 * i];
    Bit second = symbols[half_bit_phase + 2 * i + 1];
    if (first == second) throw CodingViolation(i);
    out.push_back(first);
  }
  return out;
}

// What a receiver clocked at half the symbol rate captures: one symbol per bit period,
// taken from the first (phase 0) or second (phase 1) half. No coding check; the wrong
// clock yields the complemented stream.
inline BitStream manchester_sample(BitView symbols, unsigned half_bit_phase) {
  BitStream out;
  for (std::size_t i = half_bit_phase; i < symbols.size(); i += 2) out.push_back(symbols[i]);
  return out;
}

}  // namespace asymnet::wire
