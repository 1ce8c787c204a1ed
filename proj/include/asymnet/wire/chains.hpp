#pragma once

#include <cstddef>
#include <optional>
#include <utility>

#include "asymnet/core/bits.hpp"
#include "asymnet/wire/line_sync.hpp"
#include "asymnet/wire/manchester.hpp"
#include "asymnet/wire/scrambler.hpp"
#include "asymnet/wire/tdm.hpp"

namespace asymnet::wire {

inline constexpr std::size_t kDefaultTrainingBits = 1000;

// Batch form of the fanout transmit chain: interleave, invert B, Manchester.
inline BitStream downstream_tx(const ChannelStreams& streams) {
  auto sched = TdmSchedule::downstream();
  return manchester_encode(invert_b_slots(sched, tdm_interleave(sched, streams)));
}

// Batch receive with a known sync state; `symbols` must start where the sync state was
// measured.
inline ChannelStreams downstream_rx(BitView symbols, const LineSyncState& sync) {
  auto skip = sync.symbols_to_cycle_start();
  if (symbols.size() < skip) return {};
  auto bits = manchester_decode(symbols.subspan(skip), 0);
  auto sched = TdmSchedule::downstream();
  return tdm_deinterleave(sched, invert_b_slots(sched, bits)).channels;
}

inline BitStream upstream_tx(const ChannelStreams& streams, ScramblerState& state) {
  auto sched = TdmSchedule::upstream();
  return scramble(state, invert_b_slots(sched, tdm_interleave(sched, streams)));
}

inline ChannelStreams upstream_rx(BitView line, ScramblerState& state) {
  auto sched = TdmSchedule::upstream();
  return tdm_deinterleave(sched, invert_b_slots(sched, descramble(state, line))).channels;
}

inline BitStream training_pattern(std::size_t nbits) {
  BitStream out(nbits);
  for (std::size_t i = 0; i < nbits; ++i) out[i] = static_cast<Bit>((i + 1) & 1u);
  return out;
}

struct SlotBit {
  Channel channel;
  Bit bit;
  std::size_t slot;  // slot index since the receiver's cycle origin
};

// Streaming fanout receiver: idle lock by bit slip, then Manchester decode, B
// re-inversion and slot delineation.
class DownstreamReceiver {
 public:
  explicit DownstreamReceiver(unsigned lock_threshold = kDefaultLockThreshold) : lock_(lock_threshold) {}

  std::optional<SlotBit> push(Bit symbol) {
    if (!lock_.locked()) {
      if (lock_.push(symbol)) skip_ = lock_.state().symbols_to_cycle_start();
      return std::nullopt;
    }
    if (skip_ > 0) {
      --skip_;
      return std::nullopt;
    }
    if (!have_first_) {
      first_ = symbol;
      have_first_ = true;
      return std::nullopt;
    }
    have_first_ = false;
    if (first_ == symbol) ++violations_;
    auto sched = TdmSchedule::downstream();
    auto ch = sched.slot(slot_);
    Bit b = ch == Channel::B ? static_cast<Bit>(first_ ^ 1u) : first_;
    return SlotBit{ch, b, slot_++};
  }

  bool locked() const { return lock_.locked(); }
  const LineSyncState& sync() const { return lock_.state(); }
  std::size_t coding_violations() const { return violations_; }

 private:
  IdleLockReceiver lock_;
  unsigned skip_ = 0;
  bool have_first_ = false;
  Bit first_ = 0;
  std::size_t slot_ = 0;
  std::size_t violations_ = 0;
};

// Streaming front-end transmitter: alternating training after reset, then
// interleave + B inversion + scrambling. The caller supplies the bit for each slot.
class UpstreamTransmitter {
 public:
  explicit UpstreamTransmitter(std::size_t training_bits = kDefaultTrainingBits) : training_bits_(training_bits) {}

  void reset() {
    sent_ = 0;
    slot_ = 0;
    scrambler_ = Scrambler{};
  }

  bool training() const { return sent_ < training_bits_; }
  // Channel owning the next data slot; meaningful only once training is over.
  Channel next_channel() const { return TdmSchedule::upstream().slot(slot_); }

  // `data_bit` is ignored during training.
  Bit step(Bit data_bit) {
    if (sent_ < training_bits_) return static_cast<Bit>((++sent_) & 1u);
    auto ch = TdmSchedule::upstream().slot(slot_++);
    Bit b = ch == Channel::B ? static_cast<Bit>(data_bit ^ 1u) : data_bit;
    return scrambler_.step(b);
  }

 private:
  std::size_t training_bits_;
  std::size_t sent_ = 0;
  std::size_t slot_ = 0;
  Scrambler scrambler_;
};

// Back-end receiver of one return link. Waits for the first 1 of the training pattern,
// checks the alternation, and delineates slots by counting from the end of training.
class UpstreamReceiver {
 public:
  explicit UpstreamReceiver(std::size_t training_bits = kDefaultTrainingBits) : training_bits_(training_bits) {}

  void reset() {
    phase_ = Phase::WaitTraining;
    count_ = 0;
    slot_ = 0;
    descrambler_ = Descrambler{};
  }

  std::optional<SlotBit> push(Bit bit) {
    switch (phase_) {
      case Phase::WaitTraining:
        if (bit == 1) {
          phase_ = Phase::Training;
          count_ = 1;
          if (count_ == training_bits_) phase_ = Phase::Data;
        }
        return std::nullopt;
      case Phase::Training: {
        Bit expected = static_cast<Bit>((count_ + 1) & 1u);
        if (bit != expected) {
          ++training_errors_;
          phase_ = Phase::WaitTraining;
          count_ = 0;
          return std::nullopt;
        }
        if (++count_ == training_bits_) phase_ = Phase::Data;
        return std::nullopt;
      }
      case Phase::Data: {
        Bit d = descrambler_.step(bit);
        auto ch = TdmSchedule::upstream().slot(slot_);
        if (ch == Channel::B) d ^= 1u;
        return SlotBit{ch, d, slot_++};
      }
    }
    return std::nullopt;
  }

  bool trained() const { return phase_ == Phase::Data; }
  std::size_t training_errors() const { return training_errors_; }

 private:
  enum class Phase { WaitTraining, Training, Data };
  std::size_t training_bits_;
  Phase phase_ = Phase::WaitTraining;
  std::size_t count_ = 0;
  std::size_t slot_ = 0;
  std::size_t training_errors_ = 0;
  Descrambler descrambler_;
};

}  // namespace asymnet::wire
