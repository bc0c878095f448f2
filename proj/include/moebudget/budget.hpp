// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "moebudget/errors.hpp"

namespace moebudget {

/// Round half-to-even, independent of the FPU rounding mode.
long long round_half_even(double x);

/// Global activation budget for an L-layer model whose router originally
/// activates k_orig experts per token per layer.
struct BudgetSpec {
    int num_layers = 0;    // L
    int k_orig = 0;        // original Top-K of the model
    int global_budget = 0; // B

    /// Throws budget_error unless L >= 1, k_orig >= 1 and L <= B <= L*k_orig.
    void validate() const;
};

/// Integer expert budget per layer.
struct AllocationVector {
    std::vector<int> per_layer;

    int sum() const { return std::accumulate(per_layer.begin(), per_layer.end(), 0); }
    std::size_t size() const { return per_layer.size(); }
    int operator[](std::size_t i) const { return per_layer[i]; }
    bool operator==(const AllocationVector&) const = default;
};

/// Average per-token budget for one layer, realized as an integer slot total
/// round(T * avg) redistributable across the layer's T tokens.
struct LayerTokenBudget {
    int layer = 0;
    double avg_per_token = 0.0; // K_l, may be fractional
    int k_base = 0;
    std::size_t token_count = 0; // T

    long long total_slots() const {
        return round_half_even(static_cast<double>(token_count) * avg_per_token);
    }
};

/// B = round(L * avg_k). avg_k must lie in [1, k_orig].
BudgetSpec budget_from_avg(int num_layers, int k_orig, double avg_k);

struct BudgetViolation {
    int layer; // -1 for the global-sum constraint
    std::string message;
};

/// Checks 1 <= K_i <= k_orig per layer and sum K_i <= B. Empty result means ok.
std::vector<BudgetViolation> validate_allocation(const AllocationVector& alloc,
                                                 const BudgetSpec& spec);

}  // namespace moebudget
