#pragma once

#include <array>
#include <cstdint>

#include "asymnet/core/errors.hpp"
#include "asymnet/core/time.hpp"
#include "asymnet/wire/tdm.hpp"

namespace asymnet::sim {

// Downstream: 100 Mbps logical, one slot per 10 ns (two Manchester symbols).
inline constexpr Time kDownstreamSlot = 10 * kPicosPerNano;
// Upstream: 400 Mbps, one slot per 2.5 ns.
inline constexpr Time kUpstreamSlot = 2500;

// Slot clock of one link direction. Slot k occupies [origin + k*period, origin + (k+1)*period).
class SlotClock {
 public:
  SlotClock(wire::Direction d, Time period, Time origin = 0)
      : sched_(wire::TdmSchedule::for_direction(d)), period_(period), origin_(origin) {
    for (auto ch : {wire::Channel::A, wire::Channel::B, wire::Channel::C}) {
      auto& pos = pos_[idx(ch)];
      unsigned n = 0;
      for (unsigned s = 0; s < wire::kCycleLength; ++s)
        if (sched_.slot(s) == ch) pos[n++] = s;
      count_[idx(ch)] = n;
    }
  }

  Time period() const { return period_; }
  Time origin() const { return origin_; }
  void set_origin(Time t) { origin_ = t; }
  const wire::TdmSchedule& schedule() const { return sched_; }

  Time start(std::int64_t k) const { return origin_ + k * period_; }
  Time end(std::int64_t k) const { return start(k) + period_; }

  // First slot of `ch` that starts at or after t.
  std::int64_t next_slot(wire::Channel ch, Time t) const {
    std::int64_t k = t <= origin_ ? 0 : (t - origin_ + period_ - 1) / period_;
    while (sched_.slot(static_cast<std::size_t>(k)) != ch) ++k;
    return k;
  }

  // The slot carrying the n-th bit of `ch` counted from slot k (which must belong to ch).
  std::int64_t advance(wire::Channel ch, std::int64_t k, std::int64_t n) const {
    auto m = count_[idx(ch)];
    auto& pos = pos_[idx(ch)];
    std::int64_t cyc = k / 4;
    unsigned r = 0;
    while (pos[r] != k % 4) ++r;
    std::int64_t j = cyc * m + r + n;
    return (j / m) * 4 + pos[static_cast<std::size_t>(j % m)];
  }

  // Effective bit period of a channel.
  Time channel_bit_time(wire::Channel ch) const { return period_ * 4 / count_[idx(ch)]; }

 private:
  static std::size_t idx(wire::Channel ch) { return static_cast<std::size_t>(ch); }
  wire::TdmSchedule sched_;
  Time period_;
  Time origin_;
  std::array<std::array<unsigned, 4>, 3> pos_{};
  std::array<unsigned, 3> count_{};
};

}  // namespace asymnet::sim
