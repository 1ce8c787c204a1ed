#pragma once

#include <algorithm>

#include "asymnet/core/errors.hpp"
#include "asymnet/transport/frame.hpp"

namespace asymnet::transport {

inline constexpr double kDefaultLinkRateBps = 1e9;
inline constexpr double kDefaultRequestRttSeconds = 300e-6;

struct ModelParams {
  double link_rate_bps = kDefaultLinkRateBps;
  double mtu_bytes = 8192;
  double credit = 1;
  double request_rtt_s = kDefaultRequestRttSeconds;
  double overhead_bytes = static_cast<double>(kDefaultFrameOverhead);
};

// Frames-per-request flow control: `credit` frames of (mtu - overhead) payload per
// cycle; a cycle lasts the longer of the burst's serialization and one frame plus the
// grant round trip. Result in MB/s (10^6 bytes per second).
inline double throughput_model(const ModelParams& p) {
  if (p.link_rate_bps <= 0 || p.mtu_bytes <= p.overhead_bytes || p.credit < 1 || p.request_rtt_s < 0)
    throw ConfigError("throughput_model: parameters out of range");
  double t_frame = p.mtu_bytes * 8.0 / p.link_rate_bps;
  double cycle = std::max(p.credit * t_frame, p.request_rtt_s + t_frame);
  return p.credit * (p.mtu_bytes - p.overhead_bytes) / cycle / 1e6;
}

inline double throughput_model(double link_rate_bps, double mtu, double credit, double request_rtt_s) {
  return throughput_model(ModelParams{link_rate_bps, mtu, credit, request_rtt_s, static_cast<double>(kDefaultFrameOverhead)});
}

// Payload ceiling of the link for a given MTU.
inline double saturation_throughput(double link_rate_bps, double mtu, double overhead = kDefaultFrameOverhead) {
  return link_rate_bps / 8.0 * (mtu - overhead) / mtu / 1e6;
}

}  // namespace asymnet::transport
