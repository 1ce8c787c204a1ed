#pragma once

#include <cstdint>

namespace asymnet {

// Simulation time in picoseconds.
using Time = std::int64_t;

inline constexpr Time kPicosPerNano = 1000;
inline constexpr Time kPicosPerMicro = 1000 * kPicosPerNano;
inline constexpr Time kPicosPerMilli = 1000 * kPicosPerMicro;
inline constexpr Time kPicosPerSecond = 1000 * kPicosPerMilli;

// Front-end timestamp counter tick (100 MHz sampling clock).
inline constexpr Time kTimestampTick = 10 * kPicosPerNano;

inline constexpr double to_seconds(Time t) { return static_cast<double>(t) / static_cast<double>(kPicosPerSecond); }

}  // namespace asymnet
