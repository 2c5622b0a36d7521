// Copyright 2026 The specrl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace specrl {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace specrl
