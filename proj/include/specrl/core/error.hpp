// Copyright 2026 The specrl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace specrl {

/// Raised when model weights do not fit in the memory of one instance.
/// Kept distinct from std::invalid_argument so sweeps can mark the cell
/// infeasible instead of aborting.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Aggregated configuration violations, one entry per offending path.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations)
      : std::runtime_error(join(violations)), violations_(std::move(violations)) {}

  [[nodiscard]] const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = std::to_string(v.size()) + " configuration error(s)";
    for (const auto& s : v) out += "\n  " + s;
    return out;
  }

  std::vector<std::string> violations_;
};

}  // namespace specrl
