// Copyright 2026 The specrl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "specrl/core/random.hpp"

namespace specrl::rollout {

struct LognormalLengths {
  double mu = 0.0;
  double sigma = 1.0;
};

struct EmpiricalLengths {
  std::vector<std::uint32_t> samples;
};

struct ConstantLengths {
  std::uint32_t length = 1;
};

/// Response-length law, truncated to [1, max_tokens] after sampling.
struct LengthDistribution {
  std::variant<LognormalLengths, EmpiricalLengths, ConstantLengths> kind;
  std::uint32_t max_tokens = 32768;

  void validate() const {
    if (max_tokens < 1) throw std::invalid_argument("length distribution: max_tokens must be >= 1");
    std::visit(
        [](const auto& k) {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, LognormalLengths>) {
            if (!(k.sigma > 0) || !std::isfinite(k.sigma))
              throw std::invalid_argument("lognormal lengths: sigma must be > 0");
            if (!std::isfinite(k.mu)) throw std::invalid_argument("lognormal lengths: mu must be finite");
          } else if constexpr (std::is_same_v<K, EmpiricalLengths>) {
            if (k.samples.empty()) throw std::invalid_argument("empirical lengths: no samples");
          } else {
            if (k.length < 1) throw std::invalid_argument("constant lengths: length must be >= 1");
          }
        },
        kind);
  }
};

inline constexpr double kNormalQuantile99 = 2.3263478740408408;

/// Lognormal parameters with the given median and 99th percentile.
inline LognormalLengths lognormal_from_quantiles(double median, double p99) {
  if (!(median > 0 && p99 > median)) throw std::invalid_argument("lognormal_from_quantiles: need 0 < median < p99");
  return {std::log(median), std::log(p99 / median) / kNormalQuantile99};
}

inline std::vector<std::uint32_t> sample_lengths(const LengthDistribution& dist, std::size_t n, Philox& rng) {
  dist.validate();
  if (n < 1) throw std::invalid_argument("sample_lengths: n must be >= 1");
  const auto clamp = [&](double x) {
    const double r = std::clamp(std::round(x), 1.0, static_cast<double>(dist.max_tokens));
    return static_cast<std::uint32_t>(r);
  };
  std::vector<std::uint32_t> out(n);
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, LognormalLengths>) {
          std::lognormal_distribution<double> law(k.mu, k.sigma);
          for (auto& x : out) x = clamp(law(rng));
        } else if constexpr (std::is_same_v<K, EmpiricalLengths>) {
          for (auto& x : out) {
            const auto idx = static_cast<std::size_t>(rng.uniform() * static_cast<double>(k.samples.size()));
            x = clamp(k.samples[std::min(idx, k.samples.size() - 1)]);
          }
        } else {
          std::fill(out.begin(), out.end(), clamp(k.length));
        }
      },
      dist.kind);
  return out;
}

/// Reads one positive integer length per line; blank lines and lines
/// starting with '#' are skipped.
inline EmpiricalLengths read_length_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open length file: " + path);
  EmpiricalLengths out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(line.substr(first), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || v < 1) throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected a positive integer");
    out.samples.push_back(static_cast<std::uint32_t>(v));
  }
  if (out.samples.empty()) throw std::invalid_argument(path + ": no lengths");
  return out;
}

}  // namespace specrl::rollout
