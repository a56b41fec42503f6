// Copyright 2026 The aerotrack Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "aerotrack/cli.hpp"

int main(int argc, char** argv) {
  return aerotrack::cli::dispatch(argc, argv, std::cout, std::cerr);
}
