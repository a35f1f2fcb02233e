// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace omniemb {

/// Parses and executes one command invocation (args exclude the program
/// name). Never throws; failures map to the documented exit codes:
/// 0 success, 1 validation, 2 I/O, 3 internal.
int run_cli(const std::vector<std::string>& args);

}  // namespace omniemb
