#pragma once

#include <array>
#include <cstddef>
#include <optional>

#include "asymnet/core/bits.hpp"
#include "asymnet/wire/manchester.hpp"
#include "asymnet/wire/tdm.hpp"

namespace asymnet::wire {

// Logical idle cycle after B inversion, and its Manchester image on the fanout line.
inline constexpr std::array<Bit, 4> kIdleCycle{0, 1, 0, 0};
inline constexpr std::array<Bit, 8> kIdleSymbols{0, 1, 1, 0, 0, 1, 0, 1};
inline constexpr unsigned kDefaultLockThreshold = 4;

struct LineSyncState {
  bool locked = false;
  unsigned bit_slip_offset = 0;  // idle-pattern position of the first received symbol
  unsigned half_bit_phase = 0;
  unsigned consecutive_matches = 0;
  std::size_t symbols_consumed = 0;  // symbols seen when lock was declared (or total if not locked)

  // Received symbols to drop so that the next one is the first symbol of slot 0.
  unsigned symbols_to_cycle_start() const { return (8u - bit_slip_offset) % 8u; }
};

namespace detail {
inline bool is_idle_rotation(BitView sampled) {
  if (sampled.size() < kCycleLength) return false;
  for (std::size_t r = 0; r < kCycleLength; ++r) {
    bool ok = true;
    for (std::size_t i = 0; i < sampled.size() && ok; ++i) ok = sampled[i] == kIdleCycle[(r + i) % kCycleLength];
    if (ok) return true;
  }
  return false;
}
}  // namespace detail

// Selects the half-bit clock that captures the nominal idle cycle 0100 (in some
// rotation); the other clock captures the complement 1011 and is rejected.
inline unsigned resolve_phase(BitView idle_window) {
  for (unsigned phase = 0; phase < 2; ++phase) {
    auto sampled = manchester_sample(idle_window, phase);
    if (detail::is_idle_rotation(sampled)) return phase;
  }
  throw NoLock("resolve_phase: window matches neither idle phase");
}

// Word-aligned receiver that bit-slips until received 8-symbol words match the idle
// pattern. On a mismatch it slips directly to the rotation matching the current word
// (if any) and restarts the match count.
class IdleLockReceiver {
 public:
  explicit IdleLockReceiver(unsigned lock_threshold = kDefaultLockThreshold) : threshold_(lock_threshold) {}

  // Returns true once locked. Symbols after lock are not inspected.
  bool push(Bit symbol) {
    ++state_.symbols_consumed;
    if (state_.locked) return true;
    word_[fill_++] = symbol;
    if (fill_ < 8) return false;
    fill_ = 0;
    if (hypothesis_ && matches_rotation(*hypothesis_)) {
      ++state_.consecutive_matches;
    } else {
      hypothesis_.reset();
      state_.consecutive_matches = 0;
      for (unsigned h = 0; h < 8; ++h) {
        if (matches_rotation(h)) {
          hypothesis_ = h;
          state_.consecutive_matches = 1;
          break;
        }
      }
    }
    if (hypothesis_ && state_.consecutive_matches >= threshold_) {
      state_.locked = true;
      state_.bit_slip_offset = *hypothesis_;
      state_.half_bit_phase = resolve_phase(BitView(word_.data(), word_.size()));
    }
    return state_.locked;
  }

  const LineSyncState& state() const { return state_; }
  bool locked() const { return state_.locked; }

 private:
  bool matches_rotation(unsigned h) const {
    for (unsigned i = 0; i < 8; ++i)
      if (word_[i] != kIdleSymbols[(h + i) % 8]) return false;
    return true;
  }

  unsigned threshold_;
  std::array<Bit, 8> word_{};
  unsigned fill_ = 0;
  std::optional<unsigned> hypothesis_;
  LineSyncState state_;
};

inline LineSyncState bit_slip_sync(BitView line, unsigned lock_threshold = kDefaultLockThreshold) {
  IdleLockReceiver rx(lock_threshold);
  for (Bit s : line)
    if (rx.push(s)) break;
  return rx.state();
}

}  // namespace asymnet::wire
