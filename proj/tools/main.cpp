// Copyright 2026 The gradphi Authors
// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return gradphi::run_cli(argc, argv, std::cout, std::cerr); }
