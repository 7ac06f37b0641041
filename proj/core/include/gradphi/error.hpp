// Copyright 2026 The gradphi Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace gradphi {

// Malformed or incomplete configuration; the CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Stability violations, non-finite values and similar numerical failures.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace gradphi
