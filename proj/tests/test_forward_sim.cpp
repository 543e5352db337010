#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "sqz/errors.hpp"
#include "sqz/forward_sim.hpp"

namespace sqz {
namespace {

ExperimentConfig reference_config(double eta) {
  ExperimentConfig c;
  c.eta_apd = eta;
  return c;
}

TEST(SimulateRun, VacuumNeverClicks) {
  ExperimentConfig c = reference_config(0.5);
  c.t_uncertainty = 0.005;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (const ClickRecord& r : simulate_run(2.0, 1.0, c, seed)) {
      EXPECT_EQ(r.clicks, 0);
      EXPECT_EQ(r.trials, 78040000);
      EXPECT_FALSE(r.dark_subtracted);
    }
  }
}

TEST(SimulateRun, MeanClicksMatchAnalyticRate) {
  ExperimentConfig c = reference_config(0.0084);
  c.transmittances = {1.0};
  const double n = static_cast<double>(c.trials());
  const double q = 1.0 - no_click_from_invariants(2.321, 1.156, 0.0084);
  double sum = 0.0;
  constexpr int kSeeds = 100;
  for (int s = 0; s < kSeeds; ++s) {
    sum += static_cast<double>(simulate_run(2.321, 1.156, c, s)[0].clicks);
  }
  const double mean = sum / kSeeds;
  const double standard_error = std::sqrt(n * q * (1.0 - q) / kSeeds);
  EXPECT_LT(std::abs(mean - n * q), 3.0 * standard_error);
}

TEST(SimulateRun, BlindDetectorSeesOnlyDarkCounts) {
  ExperimentConfig c = reference_config(0.0);
  c.dark_rate = 20.0;
  double sum = 0.0;
  int count = 0;
  for (int s = 0; s < 50; ++s) {
    for (const ClickRecord& r : simulate_run(2.321, 1.156, c, s)) {
      sum += static_cast<double>(r.clicks);
      ++count;
    }
  }
  const double mean = sum / count;
  EXPECT_LT(std::abs(mean - 2000.0), 3.0 * std::sqrt(2000.0 / count));
}

TEST(SimulateRun, ReproducibleForFixedSeed) {
  ExperimentConfig c = reference_config(0.3);
  c.t_uncertainty = 0.005;
  c.dark_rate = 20.0;
  const auto a = simulate_run_detailed(2.321, 1.156, c, 99);
  const auto b = simulate_run_detailed(2.321, 1.156, c, 99);
  EXPECT_EQ(a.records, b.records);
  EXPECT_EQ(a.true_transmittances, b.true_transmittances);
  const auto other = simulate_run(2.321, 1.156, c, 100);
  EXPECT_NE(a.records, other);
}

TEST(SimulateRun, TransmittancePerturbationIsClippedAndRecorded) {
  ExperimentConfig c = reference_config(0.5);
  c.t_uncertainty = 0.05;
  const auto run = simulate_run_detailed(2.321, 1.156, c, 3);
  ASSERT_EQ(run.true_transmittances.size(), 4u);
  for (double t : run.true_transmittances) {
    EXPECT_GE(t, 0.0);
    EXPECT_LE(t, 1.0);
  }
  EXPECT_LE(run.true_transmittances[0], 1.0);
}

TEST(SimulateRun, StatisticalSoundnessPerSetting) {
  ExperimentConfig c = reference_config(0.2);
  c.rep_rate = 1e4;
  c.duration = 1.0;
  const double n = static_cast<double>(c.trials());
  constexpr int kSeeds = 1000;
  std::vector<double> sums(c.transmittances.size(), 0.0);
  for (int s = 0; s < kSeeds; ++s) {
    const auto recs = simulate_run(2.321, 1.156, c, s);
    for (std::size_t j = 0; j < recs.size(); ++j) {
      sums[j] += static_cast<double>(recs[j].clicks) / n;
    }
  }
  for (std::size_t j = 0; j < sums.size(); ++j) {
    const double q = click_from_invariants(2.321, 1.156, 0.2 * c.transmittances[j]);
    const double se = std::sqrt(q * (1.0 - q) / (n * kSeeds));
    EXPECT_LT(std::abs(sums[j] / kSeeds - q), 5.0 * se) << "setting " << j;
  }
}

TEST(SimulateRun, MeanClicksMonotoneInTransmittanceAndEta) {
  ExperimentConfig c = reference_config(0.1);
  c.transmittances = {0.25, 0.5, 0.75, 1.0};
  c.rep_rate = 1e5;
  c.duration = 1.0;
  double prev_eta_mean = -1.0;
  for (double eta : {0.05, 0.1, 0.2, 0.4}) {
    c.eta_apd = eta;
    std::vector<double> mean(4, 0.0);
    for (int s = 0; s < 200; ++s) {
      const auto recs = simulate_run(2.321, 1.156, c, s);
      for (std::size_t j = 0; j < 4; ++j) mean[j] += static_cast<double>(recs[j].clicks) / 200;
    }
    for (std::size_t j = 1; j < 4; ++j) EXPECT_GE(mean[j], mean[j - 1]);
    EXPECT_GE(mean[3], prev_eta_mean);
    prev_eta_mean = mean[3];
  }
}

TEST(SimulateRun, RejectsInvalidInput) {
  ExperimentConfig c = reference_config(0.5);
  EXPECT_THROW((void)simulate_run(2.321, 0.9, c, 1), UnphysicalError);
  c.transmittances = {};
  EXPECT_THROW((void)simulate_run(2.321, 1.156, c, 1), DomainError);
  c = reference_config(0.5);
  c.transmittances = {1.2};
  EXPECT_THROW((void)simulate_run(2.321, 1.156, c, 1), DomainError);
  c = reference_config(0.5);
  c.rep_rate = 0.0;
  EXPECT_THROW((void)simulate_run(2.321, 1.156, c, 1), DomainError);
  c = reference_config(1.5);
  EXPECT_THROW((void)simulate_run(2.321, 1.156, c, 1), DomainError);
}

TEST(SampleClicks, NormalApproximationMatchesBinomialMoments) {
  // trials q (1 - q) just above the switch-over variance.
  constexpr std::int64_t kTrials = 1000;
  const double q = 0.5 * (1.0 - std::sqrt(1.0 - 4.0 * 101.0 / kTrials));
  ASSERT_GT(kTrials * q * (1 - q), kNormalApproxVariance);
  std::mt19937_64 rng(5);
  constexpr int kDraws = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    const double x = static_cast<double>(sample_clicks(kTrials, q, rng));
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / kDraws;
  const double var = sum_sq / kDraws - mean * mean;
  EXPECT_NEAR(mean / (kTrials * q), 1.0, 0.01);
  EXPECT_NEAR(var / (kTrials * q * (1 - q)), 1.0, 0.01);
}

TEST(SampleClicks, ExactBranchAndEdges) {
  std::mt19937_64 rng(11);
  EXPECT_EQ(sample_clicks(100, 0.0, rng), 0);
  EXPECT_EQ(sample_clicks(100, 1.0, rng), 100);
  EXPECT_EQ(sample_clicks(0, 0.5, rng), 0);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const auto x = sample_clicks(50, 0.1, rng);
    ASSERT_GE(x, 0);
    ASSERT_LE(x, 50);
    sum += static_cast<double>(x);
  }
  EXPECT_NEAR(sum / 20000, 5.0, 0.1);
}

TEST(ExpectedClickRate, Examples) {
  EXPECT_DOUBLE_EQ(expected_click_rate({1.0, 1.0}, 0.01, 780400), 0.0);
  EXPECT_NEAR(expected_click_rate({2.0, 1.0}, 0.01, 780400), 975.5, 1e-9);
  const double exact = exact_click_rate({2.0, 1.0}, 0.01, 780400);
  EXPECT_LT(std::abs(exact / 975.5 - 1.0), 0.02);
}

TEST(ExpectedClickRate, ReferenceOrderOfMagnitude) {
  // Reference efficiency and gains of the order measured around 1 mW pump.
  const double rate = expected_click_rate({1.75, 1.02}, 0.84e-2, 780.4e3);
  EXPECT_GT(rate, 100.0);
  EXPECT_LT(rate, 1e4);
}

TEST(SubtractDark, Examples) {
  EXPECT_EQ(subtract_dark({1.0, 78040000, 5000, false}, 20.0, 100.0).clicks, 3000);
  EXPECT_EQ(subtract_dark({1.0, 78040000, 1500, false}, 20.0, 100.0).clicks, 0);
  const auto r = subtract_dark({1.0, 78040000, 2000, false}, 0.0, 100.0);
  EXPECT_EQ(r.clicks, 2000);
  EXPECT_TRUE(r.dark_subtracted);
  EXPECT_THROW((void)subtract_dark(r, 20.0, 100.0), DomainError);
}

TEST(PerturbedEta, ZeroUncertaintyIsExact) {
  ExperimentConfig c = reference_config(0.0084);
  EXPECT_EQ(perturbed_eta(c, 1), 0.0084);
}

TEST(PerturbedEta, SpreadMatchesRelativeUncertainty) {
  ExperimentConfig c = reference_config(0.5);
  c.eta_rel_uncertainty = 0.01;
  constexpr int kSeeds = 10000;
  double sum = 0.0, sum_sq = 0.0;
  for (int s = 0; s < kSeeds; ++s) {
    const double e = perturbed_eta(c, s);
    sum += e;
    sum_sq += e * e;
  }
  const double mean = sum / kSeeds;
  const double sd = std::sqrt(sum_sq / kSeeds - mean * mean);
  EXPECT_NEAR(sd, 0.005, 0.0005);
}

TEST(PerturbedEta, AlwaysInUnitInterval) {
  ExperimentConfig c = reference_config(0.0084);
  c.eta_rel_uncertainty = 0.01;
  for (int s = 0; s < 1000; ++s) {
    const double e = perturbed_eta(c, s);
    EXPECT_GT(e, 0.0);
    EXPECT_LE(e, 1.0);
  }
  c.eta_apd = 1.0;
  c.eta_rel_uncertainty = 0.5;
  for (int s = 0; s < 1000; ++s) {
    const double e = perturbed_eta(c, s);
    EXPECT_GT(e, 0.0);
    EXPECT_LE(e, 1.0);
  }
}

TEST(ExperimentConfig, TrialsRoundToNearestPulse) {
  ExperimentConfig c;
  EXPECT_EQ(c.trials(), 78040000);
  c.rep_rate = 10.4;
  c.duration = 1.0;
  EXPECT_EQ(c.trials(), 10);
}

}  // namespace
}  // namespace sqz
