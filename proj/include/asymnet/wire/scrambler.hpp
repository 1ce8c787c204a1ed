#pragma once

#include <cstdint>

#include "asymnet/core/bits.hpp"

namespace asymnet::wire {

inline constexpr unsigned kScramblerDelay = 43;
inline constexpr std::uint64_t kScramblerMask = (std::uint64_t{1} << kScramblerDelay) - 1;

// History of the last 43 line bits; bit 0 is the most recent, bit 42 the one emitted
// (or received) 43 steps ago.
struct ScramblerState {
  std::uint64_t history = 0;

  Bit delayed() const { return static_cast<Bit>((history >> (kScramblerDelay - 1)) & 1u); }
  void shift_in(Bit b) { history = ((history << 1) | b) & kScramblerMask; }
  bool operator==(const ScramblerState&) const = default;
};

// x^43 + 1 self-synchronizing scrambler: out[i] = in[i] ^ out[i-43].
class Scrambler {
 public:
  Scrambler() = default;
  explicit Scrambler(ScramblerState s) : state_(s) {}

  Bit step(Bit in) {
    Bit out = static_cast<Bit>(in ^ state_.delayed());
    state_.shift_in(out);
    return out;
  }

  BitStream process(BitView in) {
    BitStream out;
    out.reserve(in.size());
    for (Bit b : in) out.push_back(step(b));
    return out;
  }

  const ScramblerState& state() const { return state_; }

 private:
  ScramblerState state_;
};

// out[i] = in[i] ^ in[i-43]; correct output from the 44th received bit onward whatever
// the initial state.
class Descrambler {
 public:
  Descrambler() = default;
  explicit Descrambler(ScramblerState s) : state_(s) {}

  Bit step(Bit in) {
    Bit out = static_cast<Bit>(in ^ state_.delayed());
    state_.shift_in(in);
    return out;
  }

  BitStream process(BitView in) {
    BitStream out;
    out.reserve(in.size());
    for (Bit b : in) out.push_back(step(b));
    return out;
  }

  const ScramblerState& state() const { return state_; }

 private:
  ScramblerState state_;
};

inline BitStream scramble(ScramblerState& state, BitView bits) {
  Scrambler s(state);
  auto out = s.process(bits);
  state = s.state();
  return out;
}

inline BitStream descramble(ScramblerState& state, BitView bits) {
  Descrambler d(state);
  auto out = d.process(bits);
  state = d.state();
  return out;
}

}  // namespace asymnet::wire
