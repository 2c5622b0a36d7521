// Copyright 2026 The specrl Authors.
// SPDX-License-Identifier: Apache-2.0

// Shared helpers for the test suites: random distribution generators and a
// chi-square goodness-of-fit test.

#pragma once

#include <boost/math/distributions/chi_squared.hpp>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "specrl/core/random.hpp"
#include "specrl/specdec/categorical.hpp"

namespace specrl::testing {

/// Random categorical distribution; each entry is zeroed with probability
/// `zero_prob`, keeping at least one positive entry.
inline specdec::CategoricalDist random_dist(Philox& rng, std::size_t vocab, double zero_prob = 0.15) {
  std::vector<double> w(vocab);
  bool any = false;
  for (auto& x : w) {
    x = rng.uniform() < zero_prob ? 0.0 : rng.uniform() + 1e-3;
    any = any || x > 0.0;
  }
  if (!any) w[static_cast<std::size_t>(rng.uniform() * static_cast<double>(vocab))] = 1.0;
  return specdec::CategoricalDist::from_weights(w);
}

struct GoodnessOfFit {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t dof = 0;
  bool impossible_cell = false;  // observed count where the expected mass is zero
};

/// Pearson chi-square test of observed counts against expected probabilities.
inline GoodnessOfFit chi_square(std::span<const std::uint64_t> observed, std::span<const double> expected) {
  GoodnessOfFit out;
  std::uint64_t n = 0;
  for (auto o : observed) n += o;
  std::size_t cells = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = expected[i] * static_cast<double>(n);
    if (expected[i] <= 0.0) {
      out.impossible_cell = out.impossible_cell || observed[i] > 0;
      continue;
    }
    const double d = static_cast<double>(observed[i]) - e;
    out.statistic += d * d / e;
    ++cells;
  }
  if (cells < 2) return out;
  out.dof = cells - 1;
  const boost::math::chi_squared_distribution<double> law(static_cast<double>(out.dof));
  out.p_value = boost::math::cdf(boost::math::complement(law, out.statistic));
  return out;
}

}  // namespace specrl::testing
