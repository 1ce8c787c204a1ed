#pragma once

#include <algorithm>
#include <array>
#include <cstddef>

#include "asymnet/core/bits.hpp"

namespace asymnet::wire {

enum class Channel : std::uint8_t { A = 0, B = 1, C = 2 };
enum class Direction : std::uint8_t { Downstream, Upstream };

inline constexpr std::size_t kCycleLength = 4;

// Fixed cyclic slot pattern of one link direction.
class TdmSchedule {
 public:
  static constexpr TdmSchedule downstream() { return TdmSchedule{Direction::Downstream, {Channel::A, Channel::B, Channel::A, Channel::C}}; }
  static constexpr TdmSchedule upstream() { return TdmSchedule{Direction::Upstream, {Channel::A, Channel::B, Channel::C, Channel::C}}; }
  static constexpr TdmSchedule for_direction(Direction d) { return d == Direction::Downstream ? downstream() : upstream(); }

  constexpr Direction direction() const { return direction_; }
  constexpr Channel slot(std::size_t n) const { return slots_[n % kCycleLength]; }
  constexpr const std::array<Channel, kCycleLength>& slots() const { return slots_; }

  constexpr std::size_t slots_per_cycle(Channel ch) const {
    std::size_t n = 0;
    for (auto s : slots_) n += (s == ch);
    return n;
  }

 private:
  constexpr TdmSchedule(Direction d, std::array<Channel, kCycleLength> s) : direction_(d), slots_(s) {}
  Direction direction_;
  std::array<Channel, kCycleLength> slots_;
};

struct ChannelStreams {
  BitStream a, b, c;

  BitStream& operator[](Channel ch) { return ch == Channel::A ? a : ch == Channel::B ? b : c; }
  const BitStream& operator[](Channel ch) const { return ch == Channel::A ? a : ch == Channel::B ? b : c; }
  bool operator==(const ChannelStreams&) const = default;
};

// Multiplexes whole cycles. Each channel stream must supply exactly its slot share
// for the number of cycles implied by the longest stream.
inline BitStream tdm_interleave(const TdmSchedule& schedule, BitView a, BitView b, BitView c) {
  const std::array<BitView, 3> in{a, b, c};
  std::size_t cycles = 0;
  for (auto ch : {Channel::A, Channel::B, Channel::C}) {
    auto per = schedule.slots_per_cycle(ch);
    auto len = in[static_cast<std::size_t>(ch)].size();
    cycles = std::max(cycles, (len + per - 1) / per);
  }
  for (auto ch : {Channel::A, Channel::B, Channel::C}) {
    if (in[static_cast<std::size_t>(ch)].size() != cycles * schedule.slots_per_cycle(ch))
      throw MalformedInput("tdm_interleave: channel stream exhausted mid-cycle");
  }
  BitStream out;
  out.reserve(cycles * kCycleLength);
  std::array<std::size_t, 3> cursor{};
  for (std::size_t n = 0; n < cycles * kCycleLength; ++n) {
    auto idx = static_cast<std::size_t>(schedule.slot(n));
    out.push_back(in[idx][cursor[idx]++]);
  }
  return out;
}

inline BitStream tdm_interleave(const TdmSchedule& schedule, const ChannelStreams& s) {
  return tdm_interleave(schedule, s.a, s.b, s.c);
}

struct Deinterleaved {
  ChannelStreams channels;
  std::size_t trailing = 0;  // line bits of an incomplete final cycle, not demultiplexed
};

// `offset` is the slot index (0..3) carried by line[0].
inline Deinterleaved tdm_deinterleave(const TdmSchedule& schedule, BitView line, std::size_t offset = 0) {
  Deinterleaved out;
  std::size_t usable = line.size() - (line.size() % kCycleLength);
  out.trailing = line.size() - usable;
  for (std::size_t n = 0; n < usable; ++n) out.channels[schedule.slot(n + offset)].push_back(line[n]);
  return out;
}

inline BitStream invert_channel_b(BitView bits) {
  BitStream out(bits.begin(), bits.end());
  for (auto& b : out) b ^= 1u;
  return out;
}

// Complements the bits that occupy channel B slots of an interleaved line.
inline BitStream invert_b_slots(const TdmSchedule& schedule, BitView line, std::size_t offset = 0) {
  BitStream out(line.begin(), line.end());
  for (std::size_t n = 0; n < out.size(); ++n)
    if (schedule.slot(n + offset) == Channel::B) out[n] ^= 1u;
  return out;
}

}  // namespace asymnet::wire
