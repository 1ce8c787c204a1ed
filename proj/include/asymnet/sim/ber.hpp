#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "asymnet/core/errors.hpp"
#include "asymnet/wire/gf2.hpp"
#include "asymnet/wire/prbs.hpp"
#include "asymnet/wire/scrambler.hpp"

namespace asymnet::sim {

// Where an injected error enters the chain: into the PRBS data before scrambling, or
// onto the scrambled line.
enum class InjectionPoint { Payload, Line };

struct BerConfig {
  wire::PrbsOrder order = wire::PrbsOrder::Prbs31;
  std::uint64_t total_bits = 10'000'000;
  bool fast_forward = false;
  // fast forward: number of windows actually materialised, and their length
  std::uint64_t windows = 64;
  std::uint64_t window_bits = 1u << 14;
  double channel_ber = 0.0;  // per line bit; materialised mode only
  std::vector<std::uint64_t> injections;  // absolute bit positions
  InjectionPoint injection_point = InjectionPoint::Payload;
  std::uint64_t seed = 1;
  std::uint64_t prbs_seed = 1;
  double confidence = 0.95;
};

struct BerResult {
  std::uint64_t bits = 0;              // effective bits covered
  std::uint64_t materialised_bits = 0;
  std::uint64_t bit_errors = 0;        // mismatches at the PRBS checker
  std::uint64_t line_errors = 0;       // checker errors mapped back through the descrambler
  std::uint64_t errors = 0;            // the count behind the estimate: line errors for line-side faults
  std::uint64_t injected = 0;
  std::uint64_t injections_detected = 0;
  std::vector<std::uint64_t> error_positions;  // checker mismatch positions (capped)
  bool state_check_ok = true;          // jump-ahead agreement of generator and checker
  double ber_estimate = 0;
  double upper_bound = 0;              // at the configured confidence
};

// Upper confidence limit on a Poisson mean given k observed events: the lambda with
// P(X <= k; lambda) = 1 - confidence. For k = 0 this is -ln(1 - confidence).
inline double poisson_upper_limit(std::uint64_t k, double confidence) {
  if (!(confidence > 0 && confidence < 1)) throw ConfigError("confidence must be in (0, 1)");
  double alpha = 1.0 - confidence;
  if (k == 0) return -std::log(alpha);
  auto cdf = [k](double lam) {
    double term = std::exp(-lam), sum = term;
    for (std::uint64_t i = 1; i <= k; ++i) {
      term *= lam / static_cast<double>(i);
      sum += term;
    }
    return sum;
  };
  double lo = 0, hi = static_cast<double>(k) + 10.0 * std::sqrt(static_cast<double>(k) + 1.0) + 10.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (cdf(mid) > alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Two-sided central Poisson interval for a mean `lambda`: smallest [lo, hi] with
// P(lo <= X <= hi) >= level, splitting the tails evenly.
inline std::pair<std::uint64_t, std::uint64_t> poisson_band(double lambda, double level) {
  double tail = (1.0 - level) / 2.0;
  double p = std::exp(-lambda), cdf = p;
  std::uint64_t k = 0, lo = 0;
  bool have_lo = cdf > tail;
  while (!have_lo) {
    ++k;
    p *= lambda / static_cast<double>(k);
    cdf += p;
    if (cdf > tail) {
      lo = k;
      have_lo = true;
    }
  }
  while (1.0 - cdf > tail) {
    ++k;
    p *= lambda / static_cast<double>(k);
    cdf += p;
  }
  return {lo, k};
}

namespace detail {

// Tracks the checker against a locally regenerated reference and folds mismatches back
// through the scrambler to recover the line error pattern.
struct WindowCheck {
  std::uint64_t bit_errors = 0;
  std::uint64_t line_errors = 0;
  std::vector<std::uint64_t> positions;
};

inline WindowCheck run_window(wire::PrbsOrder order, std::uint64_t gen_state, std::uint64_t scr_state,
                              std::uint64_t start, std::uint64_t n, const std::vector<std::uint64_t>& payload_inj,
                              const std::vector<std::uint64_t>& line_inj, double ber, std::mt19937_64* rng) {
  wire::PrbsGenerator tx(order, gen_state), ref(order, gen_state);
  wire::Scrambler scr(wire::ScramblerState{scr_state});
  wire::Descrambler des(wire::ScramblerState{scr_state});
  wire::Scrambler fold;  // maps checker error pattern back to line errors
  WindowCheck r;
  auto pi = std::lower_bound(payload_inj.begin(), payload_inj.end(), start);
  auto li = std::lower_bound(line_inj.begin(), line_inj.end(), start);
  std::uint64_t gap = 0;
  auto draw = [&] {
    double u = (static_cast<double>((*rng)() >> 11) + 0.5) * 0x1.0p-53;
    gap = static_cast<std::uint64_t>(std::floor(std::log(u) / std::log1p(-ber)));
  };
  if (ber > 0) draw();
  for (std::uint64_t i = 0; i < n; ++i) {
    auto pos = start + i;
    Bit d = tx.next();
    if (pi != payload_inj.end() && *pi == pos) {
      d ^= 1u;
      ++pi;
    }
    Bit line = scr.step(d);
    if (li != line_inj.end() && *li == pos) {
      line ^= 1u;
      ++li;
    }
    if (ber > 0) {
      if (gap == 0) {
        line ^= 1u;
        draw();
      } else {
        --gap;
      }
    }
    Bit e = static_cast<Bit>(des.step(line) ^ ref.next());
    if (e) {
      ++r.bit_errors;
      if (r.positions.size() < 1024) r.positions.push_back(pos);
    }
    r.line_errors += fold.step(e);
  }
  return r;
}

}  // namespace detail

// Embedded BER test over a scrambled return link. Materialised mode runs every bit.
// Fast-forward mode materialises a sample of windows at jump-ahead states plus one
// window around every injection; over the rest of the range the error-free chain is
// linear and its checker state is verified algebraically against the generator.
inline BerResult ber_test(const BerConfig& cfg) {
  if (cfg.total_bits == 0) throw ConfigError("ber_test: total_bits must be positive");
  if (cfg.fast_forward && cfg.channel_ber > 0) throw ConfigError("ber_test: fast forward requires an error-free channel");
  auto inj = cfg.injections;
  std::sort(inj.begin(), inj.end());
  inj.erase(std::unique(inj.begin(), inj.end()), inj.end());
  for (auto p : inj)
    if (p >= cfg.total_bits) throw ConfigError("ber_test: injection position beyond the run");
  std::vector<std::uint64_t> none;
  const auto& payload_inj = cfg.injection_point == InjectionPoint::Payload ? inj : none;
  const auto& line_inj = cfg.injection_point == InjectionPoint::Line ? inj : none;

  BerResult r;
  r.bits = cfg.total_bits;
  r.injected = inj.size();
  std::mt19937_64 rng(cfg.seed);
  auto gm = wire::PrbsGenerator::step_matrix(cfg.order);
  wire::PrbsGenerator base(cfg.order, cfg.prbs_seed);
  auto state_at = [&](std::uint64_t pos) {
    return static_cast<std::uint64_t>(wire::gf2_jump(gm, base.state(), pos));
  };

  auto absorb = [&](const detail::WindowCheck& w) {
    r.bit_errors += w.bit_errors;
    r.line_errors += w.line_errors;
    for (auto p : w.positions)
      if (r.error_positions.size() < 1024) r.error_positions.push_back(p);
  };

  // Windows: [window start, length]
  std::vector<std::pair<std::uint64_t, std::uint64_t>> windows;
  if (!cfg.fast_forward) {
    windows.push_back({0, cfg.total_bits});
  } else {
    std::uint64_t wlen = std::min(cfg.window_bits, cfg.total_bits);
    for (std::uint64_t w = 0; w < cfg.windows; ++w) {
      std::uint64_t start = cfg.windows == 1 ? 0 : (cfg.total_bits - wlen) / (cfg.windows - 1) * w;
      windows.push_back({start, wlen});
    }
    for (auto p : inj) {
      std::uint64_t start = p > 256 ? p - 256 : 0;
      std::uint64_t len = std::min<std::uint64_t>(1024, cfg.total_bits - start);
      windows.push_back({start, len});
    }
    std::sort(windows.begin(), windows.end());
    // merge overlaps so no bit is counted twice
    std::vector<std::pair<std::uint64_t, std::uint64_t>> merged;
    for (auto& w : windows) {
      if (!merged.empty() && w.first <= merged.back().first + merged.back().second) {
        auto end = std::max(merged.back().first + merged.back().second, w.first + w.second);
        merged.back().second = end - merged.back().first;
      } else {
        merged.push_back(w);
      }
    }
    windows = std::move(merged);
  }

  for (auto& [start, len] : windows) {
    // The scrambler state at `start` depends on the whole history; with matching states
    // at both ends the cascade is the identity regardless, so any state is valid.
    std::uint64_t scr = cfg.fast_forward ? (rng() & wire::kScramblerMask) : 0;
    absorb(detail::run_window(cfg.order, state_at(start), scr, start, len, payload_inj, line_inj, cfg.channel_ber, &rng));
    r.materialised_bits += len;
  }

  if (cfg.fast_forward) {
    // Checker and generator must agree on the state after the full run, reached by two
    // different jump decompositions.
    auto direct = state_at(cfg.total_bits);
    auto half = cfg.total_bits / 2;
    auto split = static_cast<std::uint64_t>(wire::gf2_jump(gm, state_at(half), cfg.total_bits - half));
    r.state_check_ok = direct == split && direct != 0;
  }

  for (auto p : inj) {
    bool hit = std::any_of(r.error_positions.begin(), r.error_positions.end(),
                           [p](std::uint64_t e) { return e >= p && e <= p + wire::kScramblerDelay; });
    if (hit) ++r.injections_detected;
  }
  auto counted = cfg.injection_point == InjectionPoint::Line || cfg.channel_ber > 0 ? r.line_errors : r.bit_errors;
  r.errors = counted;
  r.ber_estimate = static_cast<double>(counted) / static_cast<double>(r.bits);
  r.upper_bound = poisson_upper_limit(counted, cfg.confidence) / static_cast<double>(r.bits);
  return r;
}

}  // namespace asymnet::sim
