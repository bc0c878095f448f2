// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace moebudget {

/// Malformed or out-of-domain input (exit code 2 at the CLI).
struct invalid_input_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Loss-oracle failure; carries the configuration that triggered it
/// (exit code 3 at the CLI).
struct oracle_error : std::runtime_error {
    oracle_error(const std::string& msg, std::vector<int> config)
        : std::runtime_error(msg), failing_config(std::move(config)) {}
    std::vector<int> failing_config;
};

/// Budget out of range or infeasible (exit code 4 at the CLI).
struct budget_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace moebudget
