// Copyright 2026 The specrl Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "specrl/analytic/models.hpp"
#include "specrl/cost/roofline.hpp"
#include "specrl/rollout/lengths.hpp"
#include "specrl/rollout/simulator.hpp"

namespace specrl::rollout {
namespace {

// Batch-independent costs: partitioning cannot matter.
struct FlatCost {
  double step = 1e-3;
  double verify_step = 1e-3;
  double prefill_per_prompt = 0.0;
  [[nodiscard]] double decode(std::size_t) const { return step; }
  [[nodiscard]] double verify(std::size_t, std::size_t k) const { return k == 0 ? step : verify_step; }
  [[nodiscard]] double prefill(std::size_t n) const { return prefill_per_prompt * static_cast<double>(n); }
};

cost::RooflineCost toy_roofline(std::size_t gpus = 1) {
  // Ridge at a local batch of 100 sequences.
  return cost::RooflineCost({"toy", 1e12, 1e14, 80e9, 1e11, 1e-5}, {"toy-1b", 1e9, 1e9, 16, 2048, 2, 0.1},
                            cost::ShardingPlan::make(gpus, 1, 1, 0.0), 256);
}

SpeculationConfig iid(double beta, std::size_t k) { return {k, analytic::IidAcceptance{beta}, 0.0, 0.0}; }

TEST(LengthsTest, ConstantIsExact) {
  Philox rng(3);
  const auto v = sample_lengths({ConstantLengths{100}, 4096}, 5, rng);
  EXPECT_EQ(v, std::vector<std::uint32_t>(5, 100));
}

TEST(LengthsTest, TruncationCapsHeavyTails) {
  Philox rng(3);
  const auto v = sample_lengths({LognormalLengths{8.0, 6.0}, 4096}, 20000, rng);
  EXPECT_LE(*std::max_element(v.begin(), v.end()), 4096u);
  EXPECT_GE(*std::min_element(v.begin(), v.end()), 1u);
  EXPECT_GT(std::count(v.begin(), v.end(), 4096u), 1000);
}

TEST(LengthsTest, InvalidParametersAreRejected) {
  Philox rng(3);
  EXPECT_THROW(sample_lengths({LognormalLengths{1.0, 0.0}, 4096}, 3, rng), std::invalid_argument);
  EXPECT_THROW(sample_lengths({EmpiricalLengths{}, 4096}, 3, rng), std::invalid_argument);
  EXPECT_THROW(sample_lengths({ConstantLengths{10}, 4096}, 0, rng), std::invalid_argument);
}

// The median of a lognormal is exp(mu); its 99th percentile is
// exp(mu + z99 sigma). Truncation at 32768 is far above the p99 and does
// not move either quantile.
TEST(LengthsTest, LognormalQuantileFit) {
  const auto law = lognormal_from_quantiles(2000.0, 12000.0);
  EXPECT_NEAR(std::exp(law.mu), 2000.0, 1e-9);
  EXPECT_NEAR(std::exp(law.mu + 2.3263478740408408 * law.sigma), 12000.0, 1e-6);
  Philox rng(11);
  auto v = sample_lengths({law, 32768}, 100000, rng);
  std::sort(v.begin(), v.end());
  const double median = v[50000];
  const double p99 = v[99000];
  EXPECT_NEAR(median / 2000.0, 1.0, 0.05);
  EXPECT_NEAR(p99 / 12000.0, 1.0, 0.05);
}

TEST(LengthsTest, SameSeedSameSample) {
  Philox a(5), b(5);
  const LengthDistribution d{lognormal_from_quantiles(500, 4000), 32768};
  EXPECT_EQ(sample_lengths(d, 1000, a), sample_lengths(d, 1000, b));
}

TEST(LengthsTest, EmpiricalFileRoundTrip) {
  const std::string path = ::testing::TempDir() + "/lengths.txt";
  {
    std::ofstream out(path);
    out << "12\n\n# comment\n7\n300\n";
  }
  const auto e = read_length_file(path);
  EXPECT_EQ(e.samples, (std::vector<std::uint32_t>{12, 7, 300}));
  Philox rng(1);
  for (auto l : sample_lengths({e, 100}, 50, rng)) EXPECT_TRUE(l == 12 || l == 7 || l == 100);
  {
    std::ofstream out(path);
    out << "12\nabc\n";
  }
  EXPECT_THROW(read_length_file(path), std::invalid_argument);
  std::remove(path.c_str());
}

TEST(SimulateInstanceTest, AutoregressiveTakesOneCyclePerToken) {
  const FlatCost cost{2e-3, 2e-3, 1e-2};
  const std::vector<std::uint32_t> one{777};
  const auto r = simulate_instance(one, cost, std::nullopt, Philox(1));
  EXPECT_EQ(r.cycles, 777u);
  EXPECT_EQ(r.emitted_tokens, 777u);
  EXPECT_NEAR(r.latency_s, 1e-2 + 777 * 2e-3, 1e-12);
}

TEST(SimulateInstanceTest, FullAcceptanceTakesCeilCycles) {
  const FlatCost cost;
  for (std::uint32_t len : {1u, 4u, 5u, 999u, 1000u}) {
    for (std::size_t k : {1u, 3u, 7u}) {
      const SpeculationConfig spec{k, analytic::FixedAcceptance{static_cast<double>(k + 1)}, 0.0, 0.0};
      const std::vector<std::uint32_t> one{len};
      const auto r = simulate_instance(one, cost, spec, Philox(1));
      EXPECT_EQ(r.cycles, (len + k) / (k + 1)) << len << " " << k;
      EXPECT_EQ(r.emitted_tokens, len);
    }
  }
}

TEST(SimulateInstanceTest, IidAcceptanceMatchesClosedForm) {
  Philox len_rng(8);
  const auto lengths = sample_lengths({lognormal_from_quantiles(20000, 60000), 200000}, 8, len_rng);
  const auto r = simulate_instance(lengths, FlatCost{}, iid(0.7, 3), Philox(99));
  EXPECT_NEAR(r.mean_alpha() / analytic::expected_alpha_iid(0.7, 3), 1.0, 0.02);
}

TEST(SimulateInstanceTest, PrefillIsChargedOnceUpFront) {
  const FlatCost cost{1e-3, 1e-3, 0.5};
  const std::vector<std::uint32_t> lens{3, 3};
  const auto r = simulate_instance(lens, cost, std::nullopt, Philox(1));
  EXPECT_NEAR(r.prefill_s, 1.0, 1e-15);
  EXPECT_NEAR(r.latency_s, 1.0 + 3e-3, 1e-15);
}

TEST(SimulateInstanceTest, PartialFinalCycleStillCostsFullVerify) {
  const FlatCost cost{1e-3, 3e-3, 0.0};
  const SpeculationConfig spec{3, analytic::FixedAcceptance{4.0}, 0.0, 1e-4};
  const std::vector<std::uint32_t> one{5};
  const auto r = simulate_instance(one, cost, spec, Philox(1));
  EXPECT_EQ(r.cycles, 2u);
  EXPECT_NEAR(r.latency_s, 2 * (3e-3 + 1e-4), 1e-15);
}

TEST(SimulateRolloutTest, TokenConservationWithAndWithoutSpeculation) {
  const auto cost = toy_roofline();
  const LengthDistribution d{lognormal_from_quantiles(300, 3000), 8192};
  RolloutPlan plan{512, 8, iid(0.6, 4)};
  const auto cmp = compare_rollout(plan, d, cost, Philox(21));
  EXPECT_EQ(cmp.baseline.total_emitted, cmp.baseline.total_length);
  EXPECT_EQ(cmp.speculative.total_emitted, cmp.speculative.total_length);
  EXPECT_EQ(cmp.baseline.total_length, cmp.speculative.total_length);
  EXPECT_DOUBLE_EQ(cmp.baseline.mean_alpha, 1.0);
  EXPECT_GE(cmp.speculative.mean_alpha, 1.0);
  EXPECT_LE(cmp.speculative.mean_alpha, 5.0);
  EXPECT_DOUBLE_EQ(cmp.speculative.rollout_latency,
                   *std::max_element(cmp.speculative.per_instance_latency.begin(),
                                     cmp.speculative.per_instance_latency.end()));
}

TEST(SimulateRolloutTest, PartitionIsRoundRobinAndBalanced) {
  RolloutPlan plan{10, 4, std::nullopt};
  std::vector<std::uint32_t> lens{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  const auto parts = plan.partition(lens);
  ASSERT_EQ(parts.size(), 4u);
  EXPECT_EQ(parts[1], (std::vector<std::uint32_t>{1, 5, 9}));
  EXPECT_EQ(parts[3], (std::vector<std::uint32_t>{3, 7}));
}

TEST(SimulateRolloutTest, BatchFlatCostMakesPartitionIrrelevant) {
  const FlatCost cost;
  const LengthDistribution d{ConstantLengths{250}, 4096};
  for (std::size_t instances : {1u, 4u}) {
    const auto r = simulate_rollout(RolloutPlan{64, instances, std::nullopt}, d, cost, Philox(2));
    EXPECT_NEAR(r.rollout_latency, 250 * 1e-3, 1e-12);
    for (double l : r.per_instance_latency) EXPECT_DOUBLE_EQ(l, r.rollout_latency);
    EXPECT_NEAR(r.utilization, 1.0, 1e-12);
  }
}

TEST(SimulateRolloutTest, SpeedupFieldMatchesCycleIdentity) {
  // Constant lengths and batch-flat costs: each instance is a single cost
  // per cycle, so latency = cycles * cycle cost on the slowest instance.
  const FlatCost cost{1e-3, 1.5e-3, 0.0};
  const SpeculationConfig spec{3, analytic::IidAcceptance{0.75}, 0.1, 2e-4};
  const LengthDistribution d{ConstantLengths{400}, 4096};
  const RolloutPlan plan{1, 1, spec};
  const auto cmp = compare_rollout(plan, d, cost, Philox(4));
  const double cycle_cost = 1.5e-3 + 3 * 0.1 * 1e-3 + 2e-4;
  const double identity = (static_cast<double>(cmp.baseline.total_decode_cycles) * 1e-3) /
                          (static_cast<double>(cmp.speculative.total_decode_cycles) * cycle_cost);
  EXPECT_NEAR(cmp.speedup, identity, 1e-9);
}

TEST(SimulateRolloutTest, MoreInstancesMeansMoreTailIdle) {
  const auto cost = toy_roofline();
  const LengthDistribution d{lognormal_from_quantiles(2000, 12000), 32768};
  const auto few = simulate_rollout(RolloutPlan{4096, 4, std::nullopt}, d, cost, Philox(17));
  const auto many = simulate_rollout(RolloutPlan{4096, 32, std::nullopt}, d, cost, Philox(17));
  EXPECT_EQ(few.total_length, many.total_length);
  EXPECT_LT(many.utilization, few.utilization);
}

TEST(SimulateRolloutTest, LatencyNonincreasingInBeta) {
  const auto cost = toy_roofline();
  const LengthDistribution d{lognormal_from_quantiles(300, 2000), 8192};
  double last = std::numeric_limits<double>::infinity();
  for (double beta : {0.0, 0.2, 0.4, 0.5, 0.6, 0.75, 0.9, 1.0}) {
    const auto r = simulate_rollout(RolloutPlan{256, 4, iid(beta, 4)}, d, cost, Philox(5));
    EXPECT_LE(r.rollout_latency, last) << beta;
    last = r.rollout_latency;
  }
}

TEST(SimulateRolloutTest, ResultsDoNotDependOnThreadCount) {
  const auto cost = toy_roofline();
  const LengthDistribution d{lognormal_from_quantiles(300, 3000), 8192};
  const RolloutPlan plan{512, 16, iid(0.7, 3)};
  const auto a = compare_rollout(plan, d, cost, Philox(77), 1);
  const auto b = compare_rollout(plan, d, cost, Philox(77), 8);
  EXPECT_EQ(a.speculative.per_instance_latency, b.speculative.per_instance_latency);
  EXPECT_EQ(a.speculative.total_decode_cycles, b.speculative.total_decode_cycles);
  EXPECT_EQ(a.speculative.utilization, b.speculative.utilization);
  EXPECT_EQ(a.speedup, b.speedup);
  ASSERT_EQ(a.speculative.occupancy_curve.size(), b.speculative.occupancy_curve.size());
  for (std::size_t i = 0; i < a.speculative.occupancy_curve.size(); ++i) {
    EXPECT_EQ(a.speculative.occupancy_curve[i].time_s, b.speculative.occupancy_curve[i].time_s);
    EXPECT_EQ(a.speculative.occupancy_curve[i].live, b.speculative.occupancy_curve[i].live);
  }
}

TEST(SimulateRolloutTest, OccupancyCurveStartsFullAndDrains) {
  const FlatCost cost;
  const auto r = simulate_rollout(RolloutPlan{100, 3, std::nullopt}, {LognormalLengths{4.0, 0.8}, 4096}, cost, Philox(9));
  ASSERT_FALSE(r.occupancy_curve.empty());
  EXPECT_EQ(r.occupancy_curve.front().live, 100u);
  EXPECT_EQ(r.occupancy_curve.back().live, 0u);
  for (std::size_t i = 1; i < r.occupancy_curve.size(); ++i) {
    EXPECT_LT(r.occupancy_curve[i].live, r.occupancy_curve[i - 1].live);
    EXPECT_GT(r.occupancy_curve[i].time_s, r.occupancy_curve[i - 1].time_s);
  }
}

}  // namespace
}  // namespace specrl::rollout
