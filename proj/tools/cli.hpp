// Copyright 2026 The gradphi Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace gradphi {

// Exit codes: 0 success, 1 a check failed or runtime error, 2 bad usage/config.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace gradphi
