// Copyright 2026 The dofsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace dofsplat {

inline constexpr const char* kToolVersion = "0.3.0";

}  // namespace dofsplat
