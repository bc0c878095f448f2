// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "moebudget/budget.hpp"
#include "moebudget/sensitivity.hpp"

namespace moebudget {

struct AllocationResult {
    AllocationVector alloc;
    double objective = 0.0; // sum_i S[i, K_i]
};

/// Exact grouped-knapsack DP minimizing sum_i S[i,K_i] subject to
/// sum K_i <= B and 1 <= K_i <= k_orig. Tie-break among equal objectives:
/// smaller total budget, then lexicographically smallest allocation.
/// `inner_loop_count`, when non-null, receives the number of DP transition
/// evaluations (bounded by L*B*k_orig).
AllocationResult optimal_allocation(const SensitivityMatrix& s, const BudgetSpec& spec,
                                    long long* inner_loop_count = nullptr);

/// Exhaustive enumeration oracle with the same tie-breaking. Guarded:
/// k_orig^L must not exceed 1e7.
AllocationResult brute_force_allocation(const SensitivityMatrix& s,
                                        const BudgetSpec& spec);

/// Upper bound on DP transition evaluations: L * B * k_orig.
long long dp_complexity_estimate(const BudgetSpec& spec);

}  // namespace moebudget
