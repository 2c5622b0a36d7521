// Copyright 2026 The specrl Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "published_data.hpp"
#include "specrl/analytic/models.hpp"
#include "specrl/core/random.hpp"

namespace specrl::analytic {
namespace {

using namespace specrl::testing;

TEST(GenerationShareTest, PublishedStageTimes) {
  EXPECT_NEAR(kThinkAr.total(), 185.3, 1e-9);
  EXPECT_NEAR(generation_share(kThinkAr), 0.721, 0.0005);
  EXPECT_NEAR(generation_share(kZeroAr), 0.661, 0.0005);
  EXPECT_DOUBLE_EQ(generation_share(StageTimes{1.0, 1.0, 0.0, 1.0, 1.0}), 0.0);
  EXPECT_THROW(generation_share(StageTimes{}), std::invalid_argument);
  EXPECT_THROW(generation_share(StageTimes{-1.0, 0, 2, 0, 0}), std::invalid_argument);
}

TEST(StepSpeedupTest, PublishedStageTimes) {
  EXPECT_NEAR(step_speedup(kThinkAr, kThinkSpec), 185.3 / 137.4, 1e-12);
  EXPECT_NEAR(step_speedup(kThinkAr, kThinkSpec), 1.349, 0.0005);
  EXPECT_NEAR(step_speedup(kZeroAr, kZeroSpec), 1.407, 0.0005);
  EXPECT_DOUBLE_EQ(step_speedup(kZeroAr, kZeroAr), 1.0);
  EXPECT_THROW(step_speedup(kZeroAr, StageTimes{}), std::invalid_argument);
}

TEST(AmdahlBoundTest, ValuesAndLimits) {
  // 1 / (0.721 / 2.77 + 0.279) = 1.854
  EXPECT_NEAR(amdahl_step_bound(0.721, 2.77), 1.854, 0.0005);
  EXPECT_DOUBLE_EQ(amdahl_step_bound(0.4, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(amdahl_step_bound(0.0, 3.0), 1.0);
  EXPECT_NEAR(amdahl_step_bound(1.0, 3.32), 3.32, 1e-12);
  EXPECT_THROW(amdahl_step_bound(1.1, 2.0), std::invalid_argument);
  EXPECT_THROW(amdahl_step_bound(0.5, 0.5), std::invalid_argument);
}

TEST(AmdahlBoundTest, RealizedSpeedupsStayUnderTheBound) {
  EXPECT_LE(step_speedup(kThinkAr, kThinkSpec), amdahl_step_bound(generation_share(kThinkAr), kThinkEagleAlpha));
  EXPECT_LE(step_speedup(kZeroAr, kZeroSpec), amdahl_step_bound(generation_share(kZeroAr), kZeroEagleAlpha));
}

TEST(AmdahlBoundTest, MonotoneInAlphaAndShare) {
  Philox rng(1);
  for (int i = 0; i < 2000; ++i) {
    const double r = rng.uniform();
    const double a = 1.0 + 7.0 * rng.uniform();
    const double dr = 0.1 * rng.uniform();
    const double da = rng.uniform();
    EXPECT_LE(amdahl_step_bound(r, a), amdahl_step_bound(r, a + da) + 1e-15);
    EXPECT_LE(amdahl_step_bound(r, a), amdahl_step_bound(std::min(1.0, r + dr), a) + 1e-15);
  }
}

TEST(ExpectedAlphaTest, ClosedForm) {
  EXPECT_DOUBLE_EQ(expected_alpha_iid(0.0, 5), 1.0);
  EXPECT_DOUBLE_EQ(expected_alpha_iid(1.0, 3), 4.0);
  EXPECT_NEAR(expected_alpha_iid(0.8, 3), 2.952, 1e-12);
  EXPECT_NEAR(expected_alpha_iid(0.5, 2), (1 - 0.125) / 0.5, 1e-15);
  EXPECT_THROW(expected_alpha_iid(1.5, 3), std::invalid_argument);
  EXPECT_THROW(expected_alpha_iid(0.5, 0), std::invalid_argument);
}

TEST(ExpectedAlphaTest, StrictlyIncreasingInBetaAndK) {
  for (std::size_t k = 1; k <= 8; ++k) {
    double prev = 0.0;
    for (int i = 0; i <= 100; ++i) {
      const double a = expected_alpha_iid(i / 100.0, k);
      EXPECT_GT(a, prev);
      prev = a;
      // beta^(k+1) drops below double resolution for tiny beta.
      if (i >= 10) {
        EXPECT_GT(expected_alpha_iid(i / 100.0, k + 1), a);
      }
    }
  }
}

TEST(InvertAlphaTest, EndpointsAndRoundTrip) {
  EXPECT_DOUBLE_EQ(invert_alpha_to_beta(1.0, 4), 0.0);
  EXPECT_DOUBLE_EQ(invert_alpha_to_beta(4.0, 3), 1.0);
  EXPECT_NEAR(invert_alpha_to_beta(2.952, 3), 0.8, 1e-9);
  EXPECT_THROW(invert_alpha_to_beta(0.9, 3), std::invalid_argument);
  EXPECT_THROW(invert_alpha_to_beta(4.5, 3), std::invalid_argument);
  Philox rng(4);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t k = 1 + static_cast<std::size_t>(rng.uniform() * 8);
    const double alpha = 1.0 + rng.uniform() * static_cast<double>(k);
    EXPECT_NEAR(expected_alpha_iid(invert_alpha_to_beta(alpha, k), k), alpha, 1e-8);
  }
}

TEST(AcceptanceModelTest, SampledMeansMatchModelMeans) {
  const std::size_t k = 5;
  const std::vector<AcceptanceModel> models{IidAcceptance{0.7}, FixedAcceptance{3.4},
                                            EmpiricalAcceptance{{0, 1, 5, 5, 2}}};
  for (const auto& m : models) {
    Philox rng(6);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const auto e = sample_emitted(m, k, rng);
      ASSERT_GE(e, 1u);
      ASSERT_LE(e, k + 1);
      sum += e;
    }
    EXPECT_NEAR(sum / n, mean_alpha(m, k), 0.01);
  }
  EXPECT_THROW(validate(FixedAcceptance{6.5}, k), std::invalid_argument);
  EXPECT_THROW(validate(EmpiricalAcceptance{{6}}, k), std::invalid_argument);
  EXPECT_THROW(validate(IidAcceptance{-0.1}, k), std::invalid_argument);
}

}  // namespace
}  // namespace specrl::analytic
