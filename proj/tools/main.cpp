// ecchain: erasure-coded ledger and state storage engine
// Copyright 2026 The ecchain Authors.
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return ecchain::cli::main(argc, argv, std::cout, std::cerr); }
