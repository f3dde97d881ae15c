#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nlint/fringe.hpp"

using namespace nlint;
using namespace nlint::fringe;

namespace {

FringeScanConfig config_with_ratio(double r, double counts = 1000.0, int steps = 100, double periods = 3.0,
                                   std::uint64_t seed = 1) {
  FringeScanConfig cfg;
  cfg.sensor.alpha = r;  // evaluated at T = 1
  cfg.lambda_idler = 3.221;
  cfg.scan_length = periods * cfg.lambda_idler;
  cfg.steps = steps;
  cfg.counts_scale = counts;
  cfg.rng_seed = seed;
  return cfg;
}

double true_visibility(double r) { return 2.0 * std::sqrt(r) / (1.0 + r); }

}  // namespace

TEST(ExpectedFringe, NoReturnIsFlat) {
  const auto scan = expected_fringe(config_with_ratio(0.0), 1.0);
  ASSERT_EQ(scan.positions.size(), 100u);
  EXPECT_TRUE(scan.sampled.empty());
  for (double e : scan.expected) EXPECT_DOUBLE_EQ(e, 1000.0);
}

TEST(ExpectedFringe, PeriodIsIdlerWavelength) {
  auto cfg = config_with_ratio(0.3, 1000.0, 3001, 3.0);
  const auto scan = expected_fringe(cfg, 1.0);
  std::vector<double> maxima;
  for (std::size_t i = 1; i + 1 < scan.expected.size(); ++i) {
    if (scan.expected[i] > scan.expected[i - 1] && scan.expected[i] >= scan.expected[i + 1])
      maxima.push_back(scan.positions[i]);
  }
  ASSERT_GE(maxima.size(), 2u);
  const double step = cfg.scan_length / (cfg.steps - 1);
  for (std::size_t i = 1; i < maxima.size(); ++i) EXPECT_NEAR(maxima[i] - maxima[i - 1], cfg.lambda_idler, step);
}

TEST(ExpectedFringe, PerfectVisibilityNull) {
  auto cfg = config_with_ratio(1.0, 500.0, 101, 1.0);  // z_50 = lambda/2
  const auto scan = expected_fringe(cfg, 1.0);
  EXPECT_NEAR(scan.positions[50], cfg.lambda_idler / 2, 1e-12);
  EXPECT_NEAR(scan.expected[50], 0.0, 1e-9);
  EXPECT_NEAR(*std::max_element(scan.expected.begin(), scan.expected.end()), 1000.0, 1e-9);
}

TEST(ExpectedFringe, RejectsBadInput) {
  auto cfg = config_with_ratio(0.4);
  EXPECT_THROW(expected_fringe(cfg, 1.2), DomainError);
  cfg.steps = 4;
  EXPECT_THROW(expected_fringe(cfg, 1.0), DomainError);
}

TEST(SimulateScan, ZeroCountsScale) {
  const auto scan = simulate_scan(config_with_ratio(0.4, 0.0), 1.0);
  for (auto s : scan.sampled) EXPECT_EQ(s, 0);
}

TEST(SimulateScan, DeterministicForSeed) {
  const auto cfg = config_with_ratio(0.437, 1000.0, 100, 3.0, 1234);
  const auto a = simulate_scan(cfg, 0.9);
  const auto b = simulate_scan(cfg, 0.9);
  EXPECT_EQ(a.sampled, b.sampled);
  EXPECT_EQ(a.expected, b.expected);
  auto other = cfg;
  other.rng_seed = 1235;
  EXPECT_NE(simulate_scan(other, 0.9).sampled, a.sampled);
}

// Mean of 10^4 draws at each position lies within 4 standard errors of the expectation.
TEST(SimulateScan, PoissonMeanAtFixedPosition) {
  auto cfg = config_with_ratio(0.437, 50.0, 8, 1.0);
  const auto expected = expected_fringe(cfg, 1.0).expected;
  std::vector<double> sums(expected.size(), 0.0), sq(expected.size(), 0.0);
  constexpr int kDraws = 10000;
  for (int k = 0; k < kDraws; ++k) {
    cfg.rng_seed = stream_seed(777, static_cast<std::uint64_t>(k));
    const auto scan = simulate_scan(cfg, 1.0);
    for (std::size_t i = 0; i < expected.size(); ++i) {
      sums[i] += static_cast<double>(scan.sampled[i]);
      sq[i] += static_cast<double>(scan.sampled[i] * scan.sampled[i]);
    }
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const double mean = sums[i] / kDraws;
    const double var = sq[i] / kDraws - mean * mean;
    EXPECT_NEAR(mean, expected[i], 4.0 * std::sqrt(expected[i] / kDraws)) << "position " << i;
    EXPECT_NEAR(var / expected[i], 1.0, 0.1) << "position " << i;  // Poisson: variance = mean
  }
}

TEST(SimulateScan, LargeMeansUseGaussianBranch) {
  auto cfg = config_with_ratio(0.2, 5e7, 16, 2.0);
  const auto scan = simulate_scan(cfg, 1.0);
  for (std::size_t i = 0; i < scan.sampled.size(); ++i)
    EXPECT_NEAR(static_cast<double>(scan.sampled[i]), scan.expected[i], 6.0 * std::sqrt(scan.expected[i]));
}

TEST(EstimateVisibility, NoiselessRecovery) {
  // r = 0.071796... gives V = 0.5 exactly: 2s/(1+s^2) = 0.5 -> s = 2 - sqrt(3).
  const double s = 2.0 - std::sqrt(3.0);
  auto cfg = config_with_ratio(s * s);
  cfg.phase_offset = 0.7;
  const auto est = estimate_visibility(expected_fringe(cfg, 1.0));
  EXPECT_NEAR(est.visibility, 0.5, 1e-6);
  EXPECT_NEAR(est.period, cfg.lambda_idler, 1e-6);
  EXPECT_NEAR(est.mean_level, 1000.0, 1e-6);
}

TEST(EstimateVisibility, NoiselessRecoveryAcrossRatios) {
  for (int i = 0; i <= 20; ++i) {
    const double r = i / 20.0;
    auto cfg = config_with_ratio(r, 1000.0, 64, 2.5);
    cfg.phase_offset = 0.3 * i;
    const auto est = estimate_visibility(expected_fringe(cfg, 1.0), cfg.lambda_idler);
    EXPECT_NEAR(est.visibility, true_visibility(r), 1e-6) << "r = " << r;
  }
}

TEST(EstimateVisibility, NoisyReferenceRegime) {
  const auto cfg = config_with_ratio(0.437, 1000.0, 100, 3.0, 2024);
  const auto est = estimate_visibility(simulate_scan(cfg, 1.0));
  EXPECT_GT(est.visibility_std, 0.0);
  EXPECT_LT(std::abs(est.visibility - 0.92), 3.0 * est.visibility_std);
  EXPECT_NEAR(est.period, cfg.lambda_idler, 0.01 * cfg.lambda_idler);
}

TEST(EstimateVisibility, CoverageOverSeeds) {
  int covered = 0;
  constexpr int kSeeds = 200;
  for (int k = 0; k < kSeeds; ++k) {
    const auto cfg = config_with_ratio(0.437, 1000.0, 100, 3.0, stream_seed(9, k));
    const auto est = estimate_visibility(simulate_scan(cfg, 1.0), cfg.lambda_idler);
    covered += std::abs(est.visibility - true_visibility(0.437)) < 3.0 * est.visibility_std;
  }
  EXPECT_GE(covered, 0.97 * kSeeds);
}

TEST(EstimateVisibility, ErrorBarsAreCalibrated) {
  constexpr int kSeeds = 300;
  for (double r : {0.05, 0.437}) {
    std::vector<double> v;
    double reported = 0.0;
    for (int k = 0; k < kSeeds; ++k) {
      const auto cfg = config_with_ratio(r, 1000.0, 100, 3.0, stream_seed(31, k));
      const auto est = estimate_visibility(simulate_scan(cfg, 1.0), cfg.lambda_idler);
      v.push_back(est.visibility);
      reported += est.visibility_std / kSeeds;
    }
    double mean = 0.0;
    for (double x : v) mean += x / kSeeds;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean) / (kSeeds - 1);
    EXPECT_NEAR(std::sqrt(var) / reported, 1.0, 0.25) << "r = " << r;
  }
}

TEST(EstimateVisibility, FlatScanIsConsistentWithZero) {
  const auto cfg = config_with_ratio(0.0, 1000.0, 100, 3.0, 55);
  const auto est = estimate_visibility(simulate_scan(cfg, 1.0), cfg.lambda_idler);
  EXPECT_LT(est.visibility, 3.0 * est.visibility_std);
  EXPECT_EQ(est.period, cfg.lambda_idler);
}

TEST(EstimateVisibility, TooFewPoints) {
  FringeScan scan;
  scan.positions = {0, 1, 2};
  scan.expected = {1, 2, 1};
  EXPECT_THROW(estimate_visibility(scan), FitError);
}

TEST(EstimateVisibility, AllZeroCountsFail) {
  const auto scan = simulate_scan(config_with_ratio(0.3, 0.0), 1.0);
  EXPECT_THROW(estimate_visibility(scan, 3.221), FitError);
}

TEST(TransmittanceFromVisibilities, EqualVisibilities) {
  VisibilityEstimate v{0.6, 0.01, 3.221, 0.0, 1000.0};
  const auto t = transmittance_from_visibilities(v, v);
  EXPECT_DOUBLE_EQ(t.ratio, 1.0);
  EXPECT_DOUBLE_EQ(t.daod, 0.0);
}

TEST(TransmittanceFromVisibilities, AlgebraicExample) {
  VisibilityEstimate on{true_visibility(0.0025), 0.001, 3.221, 0.0, 1000.0};
  VisibilityEstimate off{true_visibility(0.01), 0.001, 3.221, 0.0, 1000.0};
  const auto t = transmittance_from_visibilities(on, off);
  EXPECT_NEAR(t.ratio, 0.5, 1e-12);
  EXPECT_NEAR(t.daod, std::log(2.0), 1e-12);
  EXPECT_NEAR(t.r_on, 0.0025, 1e-14);
  EXPECT_NEAR(t.r_off, 0.01, 1e-14);
  EXPECT_TRUE(t.warnings.empty());
  EXPECT_GT(t.daod_std, 0.0);
}

TEST(TransmittanceFromVisibilities, ZeroVisibilityAndAmbiguity) {
  VisibilityEstimate zero{0.0, 0.01, 3.221, 0.0, 1000.0};
  VisibilityEstimate strong{true_visibility(0.8), 0.01, 3.221, 0.0, 1000.0};
  EXPECT_THROW(transmittance_from_visibilities(zero, strong), DomainError);
  EXPECT_EQ(transmittance_from_visibilities(strong, strong).warnings.size(), 2u);
}

TEST(TransmittanceFromVisibilities, DaodDecreasesWithOnVisibility) {
  VisibilityEstimate off{0.7, 0.01, 3.221, 0.0, 1000.0};
  double previous = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= 100; ++i) {
    VisibilityEstimate on{i / 100.0, 0.01, 3.221, 0.0, 1000.0};
    const double daod = transmittance_from_visibilities(on, off).daod;
    EXPECT_LT(daod, previous);
    previous = daod;
  }
}

// Simulated on/off scans of a plume with known X, inverted back to X.
TEST(TransmittanceFromVisibilities, EndToEndPlumeRecovery) {
  const physics::PlumeState plume{1.0, 75e-6, 2.53e25};
  const physics::CrossSectionPair sigma{1.18e-22, 0.0, 3.221, 3.221};
  const double t_on = physics::transmittance(plume, sigma.sigma_on);
  const double t_off = physics::transmittance(plume, sigma.sigma_off);
  int covered = 0;
  constexpr int kRuns = 60;
  for (int k = 0; k < kRuns; ++k) {
    auto cfg = config_with_ratio(0.2, 2e4, 200, 4.0, stream_seed(404, 2 * k));
    const auto on = estimate_visibility(simulate_scan(cfg, t_on), cfg.lambda_idler);
    cfg.rng_seed = stream_seed(404, 2 * k + 1);
    const auto off = estimate_visibility(simulate_scan(cfg, t_off), cfg.lambda_idler);
    const auto t = transmittance_from_visibilities(on, off);
    const double x = physics::mixing_ratio_from_daod(t.daod, plume.depth, plume.n_air, sigma);
    const double x_std = t.daod_std / (plume.depth * plume.n_air * sigma.differential());
    covered += std::abs(x - plume.mixing_ratio) < 3.0 * x_std;
    if (k == 0) {
      EXPECT_NEAR(x, plume.mixing_ratio, 3.0 * x_std);
    }
  }
  EXPECT_GE(covered, 0.93 * kRuns);
}

TEST(ScanCsv, RoundTripIsExact) {
  const auto scan = simulate_scan(config_with_ratio(0.437, 1000.0, 37, 2.0, 8), 0.93);
  std::stringstream buf;
  const auto bytes = write_scan_csv(buf, scan);
  EXPECT_EQ(bytes, buf.str().size());
  EXPECT_EQ(buf.str().rfind("position_um,expected,sampled\n", 0), 0u);
  const auto back = read_scan_csv(buf);
  EXPECT_EQ(back.positions, scan.positions);
  EXPECT_EQ(back.expected, scan.expected);
  EXPECT_EQ(back.sampled, scan.sampled);
}

TEST(ScanCsv, NoiselessScanHasBlankSampled) {
  const auto scan = expected_fringe(config_with_ratio(0.1, 10.0, 8, 1.5), 1.0);
  std::stringstream buf;
  write_scan_csv(buf, scan);
  const auto back = read_scan_csv(buf);
  EXPECT_TRUE(back.sampled.empty());
  EXPECT_EQ(back.expected, scan.expected);
}
