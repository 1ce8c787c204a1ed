#include <gtest/gtest.h>

#include <cmath>

#include "asymnet/sim/ber.hpp"

using namespace asymnet;
using namespace asymnet::sim;

namespace {

// Direct Poisson CDF, summed term by term.
double poisson_cdf(std::uint64_t k, double lam) {
  double sum = 0;
  for (std::uint64_t i = 0; i <= k; ++i) sum += std::exp(-lam + static_cast<double>(i) * std::log(lam) - std::lgamma(static_cast<double>(i) + 1));
  return sum;
}

}  // namespace

TEST(PoissonLimit, ZeroEventsIsMinusLogAlpha) {
  EXPECT_NEAR(poisson_upper_limit(0, 0.95), 2.995732273553991, 1e-12);
  EXPECT_NEAR(poisson_upper_limit(0, 0.99), 4.605170185988091, 1e-12);
}

TEST(PoissonLimit, MatchesChiSquareTable) {
  // half the chi-square quantile with 2(k+1) degrees of freedom
  EXPECT_NEAR(poisson_upper_limit(1, 0.95), 4.743864518, 1e-6);
  EXPECT_NEAR(poisson_upper_limit(2, 0.95), 6.295793622, 1e-6);
  EXPECT_NEAR(poisson_upper_limit(10, 0.95), 16.96221924, 1e-6);
  for (std::uint64_t k : {1u, 3u, 20u}) EXPECT_NEAR(poisson_cdf(k, poisson_upper_limit(k, 0.9)), 0.1, 1e-9);
}

TEST(PoissonLimit, RejectsBadConfidence) {
  EXPECT_THROW(poisson_upper_limit(0, 1.0), ConfigError);
  EXPECT_THROW(poisson_upper_limit(0, 0.0), ConfigError);
}

TEST(PoissonBand, CentralTailsBelowHalfAlpha) {
  auto [lo, hi] = poisson_band(10.0, 0.99);
  EXPECT_EQ(lo, 3u);
  EXPECT_EQ(hi, 19u);
  EXPECT_LE(poisson_cdf(lo - 1, 10.0), 0.005);
  EXPECT_GT(poisson_cdf(lo, 10.0), 0.005);
  EXPECT_LE(1 - poisson_cdf(hi, 10.0), 0.005);
  EXPECT_GT(1 - poisson_cdf(hi - 1, 10.0), 0.005);
}

TEST(BerTest, MaterialisedErrorFreeAllOrders) {
  for (auto o : {wire::PrbsOrder::Prbs7, wire::PrbsOrder::Prbs15, wire::PrbsOrder::Prbs23, wire::PrbsOrder::Prbs31}) {
    BerConfig c;
    c.order = o;
    c.total_bits = 200'000;
    auto r = ber_test(c);
    EXPECT_EQ(r.bit_errors, 0u);
    EXPECT_EQ(r.materialised_bits, c.total_bits);
    EXPECT_NEAR(r.upper_bound, 2.995732273553991 / 200'000.0, 1e-15);
  }
}

TEST(BerTest, FastForwardBoundAtFullScale) {
  BerConfig c;
  c.total_bits = 13'100'000'000'000ull;
  c.fast_forward = true;
  auto r = ber_test(c);
  EXPECT_EQ(r.bits, c.total_bits);
  EXPECT_EQ(r.bit_errors, 0u);
  EXPECT_TRUE(r.state_check_ok);
  EXPECT_LT(r.materialised_bits, 10'000'000u);
  EXPECT_NEAR(r.upper_bound, 2.2868e-13, 1e-17);
  EXPECT_LE(r.upper_bound, 2.3e-13);
}

TEST(BerTest, PayloadInjectionCountsOnePerFlip) {
  for (bool ff : {false, true}) {
    BerConfig c;
    c.total_bits = ff ? 1'000'000'000'000ull : 1'000'000;
    c.fast_forward = ff;
    c.injections = {5, 777, 999'000};
    auto r = ber_test(c);
    EXPECT_EQ(r.injected, 3u);
    EXPECT_EQ(r.injections_detected, 3u);
    EXPECT_EQ(r.bit_errors, 3u);
    EXPECT_EQ(r.errors, 3u);
    ASSERT_EQ(r.error_positions.size(), 3u);
    EXPECT_EQ(r.error_positions[1], 777u);
  }
}

TEST(BerTest, LineInjectionGivesPairFoldedToOne) {
  for (bool ff : {false, true}) {
    BerConfig c;
    c.total_bits = ff ? 1'000'000'000'000ull : 1'000'000;
    c.fast_forward = ff;
    c.injection_point = InjectionPoint::Line;
    c.injections = {123'456};
    auto r = ber_test(c);
    EXPECT_EQ(r.bit_errors, 2u);
    EXPECT_EQ(r.line_errors, 1u);
    EXPECT_EQ(r.errors, 1u);
    EXPECT_EQ(r.injections_detected, 1u);
    ASSERT_EQ(r.error_positions.size(), 2u);
    EXPECT_EQ(r.error_positions[1] - r.error_positions[0], wire::kScramblerDelay);
  }
}

TEST(BerTest, ConfiguredRateLandsInPoissonBand) {
  auto [lo, hi] = poisson_band(10.0, 0.99);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    BerConfig c;
    c.total_bits = 10'000'000;
    c.channel_ber = 1e-6;
    c.seed = seed;
    auto r = ber_test(c);
    EXPECT_GE(r.line_errors, lo) << seed;
    EXPECT_LE(r.line_errors, hi) << seed;
    EXPECT_NEAR(r.ber_estimate, static_cast<double>(r.line_errors) / 1e7, 1e-18);
  }
}

TEST(BerTest, RejectsInvalid) {
  BerConfig c;
  c.total_bits = 0;
  EXPECT_THROW(ber_test(c), ConfigError);
  c.total_bits = 100;
  c.injections = {100};
  EXPECT_THROW(ber_test(c), ConfigError);
  c.injections.clear();
  c.fast_forward = true;
  c.channel_ber = 1e-6;
  EXPECT_THROW(ber_test(c), ConfigError);
}
