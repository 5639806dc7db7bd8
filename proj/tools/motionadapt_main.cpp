// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "motionadapt/cli.hpp"

int main(int argc, char** argv) { return motionadapt::run_cli(argc, argv, std::cout, std::cerr); }
