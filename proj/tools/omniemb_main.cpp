// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#include <string>
#include <vector>

#include "omniemb/cli.hpp"

int main(int argc, char** argv) {
    return omniemb::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
