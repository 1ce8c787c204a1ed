#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "asymnet/core/bits.hpp"
#include "asymnet/wire/gf2.hpp"

namespace asymnet::wire {

enum class PrbsOrder : unsigned { Prbs7 = 7, Prbs15 = 15, Prbs23 = 23, Prbs31 = 31 };

// ITU-T O.150 feedback taps: x^7+x^6+1, x^15+x^14+1, x^23+x^18+1, x^31+x^28+1.
inline constexpr unsigned prbs_tap(PrbsOrder o) {
  switch (o) {
    case PrbsOrder::Prbs7: return 6;
    case PrbsOrder::Prbs15: return 14;
    case PrbsOrder::Prbs23: return 18;
    case PrbsOrder::Prbs31: return 28;
  }
  return 0;
}

inline constexpr unsigned prbs_width(PrbsOrder o) { return static_cast<unsigned>(o); }
inline constexpr std::uint64_t prbs_period(PrbsOrder o) { return (std::uint64_t{1} << prbs_width(o)) - 1; }

inline PrbsOrder parse_prbs_order(std::string_view name) {
  if (name == "PRBS7" || name == "prbs7" || name == "7") return PrbsOrder::Prbs7;
  if (name == "PRBS15" || name == "prbs15" || name == "15") return PrbsOrder::Prbs15;
  if (name == "PRBS23" || name == "prbs23" || name == "23") return PrbsOrder::Prbs23;
  if (name == "PRBS31" || name == "prbs31" || name == "31") return PrbsOrder::Prbs31;
  throw MalformedInput("unknown PRBS pattern: " + std::string(name));
}

// Fibonacci LFSR. State bit k holds the output emitted k+1 steps ago; each step emits
// b[n] = b[n-order] ^ b[n-tap].
class PrbsGenerator {
 public:
  explicit PrbsGenerator(PrbsOrder order, std::uint64_t seed = 1) : order_(order), mask_(prbs_period(order)) {
    state_ = seed & mask_;
    if (state_ == 0) throw MalformedInput("PrbsGenerator: all-zero seed");
  }

  Bit next() {
    Bit b = feedback(state_);
    state_ = ((state_ << 1) | b) & mask_;
    return b;
  }

  BitStream generate(std::size_t n) {
    BitStream out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(next());
    return out;
  }

  PrbsOrder order() const { return order_; }
  std::uint64_t state() const { return state_; }

  // Linear one-step update of the state register, usable for jump-ahead matrices.
  static Gf2Word step_linear(PrbsOrder order, Gf2Word s) {
    auto w = prbs_width(order);
    Gf2Word mask = (Gf2Word{1} << w) - 1;
    Gf2Word b = ((s >> (w - 1)) ^ (s >> (prbs_tap(order) - 1))) & 1u;
    return ((s << 1) | b) & mask;
  }

  static Gf2Matrix step_matrix(PrbsOrder order) {
    return Gf2Matrix::from_linear_map(prbs_width(order), [order](Gf2Word s) { return step_linear(order, s); });
  }

  void jump(std::uint64_t steps) {
    state_ = static_cast<std::uint64_t>(gf2_jump(step_matrix(order_), state_, steps));
  }

 private:
  Bit feedback(std::uint64_t s) const {
    auto w = prbs_width(order_);
    return static_cast<Bit>(((s >> (w - 1)) ^ (s >> (prbs_tap(order_) - 1))) & 1u);
  }

  PrbsOrder order_;
  std::uint64_t mask_;
  std::uint64_t state_;
};

inline BitStream prbs_stream(PrbsGenerator& gen, std::size_t n) { return gen.generate(n); }

// Seeds a local generator from the first `order` received bits, then compares every
// later bit against the local prediction. Returns the positions of mismatches.
inline std::vector<std::size_t> prbs_verify(PrbsOrder order, BitView received) {
  auto w = prbs_width(order);
  if (received.size() < w) throw MalformedInput("prbs_verify: fewer bits than the pattern order");
  std::uint64_t seed = 0;
  for (unsigned i = 0; i < w; ++i) seed = (seed << 1) | received[i];
  // After shifting in b[0..w-1] MSB-first, bit k of `seed` is b[w-1-k]: the output k+1 steps ago.
  if (seed == 0) throw NoLock("prbs_verify: all-zero seed window");
  PrbsGenerator local(order, seed);
  std::vector<std::size_t> errors;
  for (std::size_t i = w; i < received.size(); ++i)
    if (local.next() != received[i]) errors.push_back(i);
  return errors;
}

inline void inject_bit_error(BitStream& bits, std::size_t position) {
  if (position >= bits.size()) throw MalformedInput("inject_bit_error: position out of range");
  bits[position] ^= 1u;
}

}  // namespace asymnet::wire
