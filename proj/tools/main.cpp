// Copyright 2026 The isocollapse Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line driver. Exit status: 0 pass or inconclusive, 1 failed band,
// 2 usage error.

#include <exception>
#include <iostream>

#include "isocollapse/cli.hpp"

int main(int argc, char** argv) {
    using namespace isocollapse::cli;
    try {
        const RunConfig config = parse_config(argc, argv);
        return run(config, std::cout);
    } catch (const HelpRequested& help) {
        std::cout << help.what();
        return 0;
    } catch (const UsageError& e) {
        std::cerr << "isocollapse: " << e.what() << " [key: " << e.key() << "]\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "isocollapse: internal error: " << e.what() << '\n';
        return 3;
    }
}
