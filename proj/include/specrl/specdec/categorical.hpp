// Copyright 2026 The specrl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "specrl/core/random.hpp"

namespace specrl::specdec {

using Token = std::uint32_t;

inline constexpr std::size_t kMinVocab = 2;
inline constexpr std::size_t kMaxVocab = 1024;
inline constexpr double kSumTolerance = 1e-12;

/// Explicit probability vector over a small token vocabulary.
class CategoricalDist {
 public:
  explicit CategoricalDist(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.size() < kMinVocab || probs_.size() > kMaxVocab) {
      throw std::invalid_argument("CategoricalDist: vocab size " + std::to_string(probs_.size()) +
                                  " outside [2, 1024]");
    }
    double sum = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument("CategoricalDist: negative or non-finite entry");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
      throw std::invalid_argument("CategoricalDist: entries sum to " + std::to_string(sum));
    }
  }

  /// Normalizes nonnegative weights; throws if they are all zero.
  static CategoricalDist from_weights(std::span<const double> weights) {
    std::vector<double> p(weights.begin(), weights.end());
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    if (!(total > 0.0)) throw std::invalid_argument("CategoricalDist: weights sum to zero");
    for (double& x : p) x /= total;
    return CategoricalDist(renormalized(std::move(p)));
  }

  static CategoricalDist uniform(std::size_t vocab) {
    return CategoricalDist(std::vector<double>(vocab, 1.0 / static_cast<double>(vocab)));
  }

  static CategoricalDist one_hot(std::size_t vocab, Token t) {
    std::vector<double> p(vocab, 0.0);
    p.at(t) = 1.0;
    return CategoricalDist(std::move(p));
  }

  [[nodiscard]] std::size_t vocab_size() const noexcept { return probs_.size(); }
  [[nodiscard]] std::span<const double> probs() const noexcept { return probs_; }
  [[nodiscard]] double operator[](Token t) const { return probs_.at(t); }

  /// Inverse-CDF sample given u in [0, 1). Never returns a zero-mass token.
  [[nodiscard]] Token sample(double u) const noexcept {
    double acc = 0.0;
    Token last = 0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
      if (probs_[i] <= 0.0) continue;
      last = static_cast<Token>(i);
      acc += probs_[i];
      if (u < acc) return last;
    }
    return last;
  }

  [[nodiscard]] Token sample(Philox& rng) const noexcept { return sample(rng.uniform()); }

  [[nodiscard]] Token argmax() const noexcept {
    return static_cast<Token>(std::max_element(probs_.begin(), probs_.end()) - probs_.begin());
  }

 private:
  // Pushes rounding residue onto the largest entry so the sum check holds.
  static std::vector<double> renormalized(std::vector<double> p) {
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    *std::max_element(p.begin(), p.end()) += 1.0 - total;
    return p;
  }

  std::vector<double> probs_;
};

inline double total_variation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("total_variation: size mismatch");
  double tv = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) tv += std::abs(a[i] - b[i]);
  return 0.5 * tv;
}

inline double total_variation(const CategoricalDist& a, const CategoricalDist& b) {
  return total_variation(a.probs(), b.probs());
}

}  // namespace specrl::specdec
