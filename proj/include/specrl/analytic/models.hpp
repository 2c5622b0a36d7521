// Copyright 2026 The specrl Authors.
// SPDX-License-Identifier: Apache-2.0

// Closed-form step accounting: stage decomposition, generation share, the
// Amdahl ceiling on step speedup, and the i.i.d. acceptance-length law.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "specrl/core/random.hpp"

namespace specrl::analytic {

/// Durations (seconds) of the five stages of one synchronous RL step.
struct StageTimes {
  double data_s = 0.0;
  double prepare_s = 0.0;
  double gen_s = 0.0;
  double logprob_s = 0.0;
  double train_s = 0.0;

  static constexpr std::array<std::string_view, 5> kStageNames{"data", "prepare", "gen", "logprob", "train"};

  [[nodiscard]] constexpr double total() const noexcept { return data_s + prepare_s + gen_s + logprob_s + train_s; }
  [[nodiscard]] constexpr double non_gen() const noexcept { return data_s + prepare_s + logprob_s + train_s; }

  [[nodiscard]] constexpr std::array<double, 5> as_array() const noexcept {
    return {data_s, prepare_s, gen_s, logprob_s, train_s};
  }

  void validate() const {
    for (double t : as_array())
      if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("StageTimes: stage durations must be >= 0");
  }

  friend constexpr bool operator==(const StageTimes&, const StageTimes&) = default;
};

inline double generation_share(const StageTimes& times) {
  times.validate();
  const double total = times.total();
  if (!(total > 0.0)) throw std::invalid_argument("generation_share: zero step time");
  return times.gen_s / total;
}

/// Upper bound on step speedup when generation is sped up by alpha and every
/// speculation cycle costs one autoregressive forward pass.
inline double amdahl_step_bound(double r_gen, double alpha) {
  if (!(r_gen >= 0.0 && r_gen <= 1.0)) throw std::invalid_argument("amdahl_step_bound: r_gen outside [0, 1]");
  if (!(alpha >= 1.0)) throw std::invalid_argument("amdahl_step_bound: alpha must be >= 1");
  return 1.0 / (r_gen / alpha + (1.0 - r_gen));
}

inline double step_speedup(const StageTimes& baseline, const StageTimes& accelerated) {
  baseline.validate();
  accelerated.validate();
  if (!(accelerated.total() > 0.0)) throw std::invalid_argument("step_speedup: zero accelerated step time");
  return baseline.total() / accelerated.total();
}

/// Expected tokens per cycle when each drafted position is accepted
/// independently with probability beta: (1 - beta^(k+1)) / (1 - beta).
inline double expected_alpha_iid(double beta, std::size_t k) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("expected_alpha_iid: beta outside [0, 1]");
  if (k < 1) throw std::invalid_argument("expected_alpha_iid: k must be >= 1");
  if (beta == 1.0) return static_cast<double>(k + 1);
  // Horner form of 1 + beta + ... + beta^k; avoids cancellation near beta = 1.
  double sum = 1.0;
  for (std::size_t i = 0; i < k; ++i) sum = 1.0 + beta * sum;
  return sum;
}

/// Inverse of expected_alpha_iid in beta, by bisection to |delta alpha| < 1e-10.
inline double invert_alpha_to_beta(double alpha, std::size_t k) {
  if (k < 1) throw std::invalid_argument("invert_alpha_to_beta: k must be >= 1");
  const double hi_alpha = static_cast<double>(k + 1);
  if (!(alpha >= 1.0 && alpha <= hi_alpha)) {
    throw std::invalid_argument("invert_alpha_to_beta: alpha " + std::to_string(alpha) + " outside [1, k+1]");
  }
  if (alpha == 1.0) return 0.0;
  if (alpha == hi_alpha) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double a = expected_alpha_iid(mid, k);
    if (std::abs(a - alpha) < 1e-12) return mid;
    (a < alpha ? lo : hi) = mid;
    if (hi - lo < 1e-15) break;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Acceptance processes

struct IidAcceptance {
  double beta = 0.0;
};

/// Accepted-count trace (values in [0, k]) replayed by uniform resampling.
struct EmpiricalAcceptance {
  std::vector<std::uint32_t> accepted_counts;
};

/// Mean tokens per cycle; realized as a two-point law on floor/ceil(alpha).
struct FixedAcceptance {
  double alpha = 1.0;
};

using AcceptanceModel = std::variant<IidAcceptance, EmpiricalAcceptance, FixedAcceptance>;

inline void validate(const AcceptanceModel& model, std::size_t k) {
  std::visit(
      [k](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, IidAcceptance>) {
          if (!(m.beta >= 0.0 && m.beta <= 1.0)) throw std::invalid_argument("iid acceptance: beta outside [0, 1]");
        } else if constexpr (std::is_same_v<M, EmpiricalAcceptance>) {
          if (m.accepted_counts.empty()) throw std::invalid_argument("empirical acceptance: empty trace");
          for (auto a : m.accepted_counts)
            if (a > k) throw std::invalid_argument("empirical acceptance: accepted count exceeds k");
        } else {
          if (!(m.alpha >= 1.0 && m.alpha <= static_cast<double>(k + 1)))
            throw std::invalid_argument("fixed acceptance: alpha outside [1, k+1]");
        }
      },
      model);
}

/// Expected emitted tokens per cycle for draft length k.
inline double mean_alpha(const AcceptanceModel& model, std::size_t k) {
  validate(model, k);
  return std::visit(
      [k](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, IidAcceptance>) {
          return expected_alpha_iid(m.beta, k);
        } else if constexpr (std::is_same_v<M, EmpiricalAcceptance>) {
          double s = 0.0;
          for (auto a : m.accepted_counts) s += static_cast<double>(a) + 1.0;
          return s / static_cast<double>(m.accepted_counts.size());
        } else {
          return m.alpha;
        }
      },
      model);
}

/// Draws the number of tokens emitted by one cycle, in [1, k+1], from
/// exactly one uniform. The iid law is inverted through its tail,
/// P(accepted >= j) = beta^j, so a larger beta never emits fewer tokens
/// for the same draw. Callers are expected to have validated `model`.
inline std::uint32_t sample_emitted(const AcceptanceModel& model, std::size_t k, Philox& rng) {
  return std::visit(
      [k, &rng](const auto& m) -> std::uint32_t {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, IidAcceptance>) {
          const double u = rng.uniform();
          std::uint32_t accepted = 0;
          double tail = m.beta;
          while (accepted < k && u < tail) {
            ++accepted;
            tail *= m.beta;
          }
          return accepted + 1;
        } else if constexpr (std::is_same_v<M, EmpiricalAcceptance>) {
          const auto n = m.accepted_counts.size();
          const auto idx = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
          return m.accepted_counts[std::min(idx, n - 1)] + 1;
        } else {
          const double lo = std::floor(m.alpha);
          const double frac = m.alpha - lo;
          const auto base = static_cast<std::uint32_t>(lo);
          return rng.uniform() < frac ? base + 1 : base;
        }
      },
      model);
}

}  // namespace specrl::analytic
