// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "moebudget/budget.hpp"
#include "moebudget/routing.hpp"

namespace moebudget {

/// Result of token-level activation redistribution within one layer.
struct RedistributionPlan {
    ActivationMask mask;
    long long slots_used = 0;
    int k_base = 0;
    long long total_slots = 0;

    /// Canonical total of retained weights (fixed row-major summation order).
    double total_weight() const;
};

struct Candidate {
    std::size_t token;
    std::size_t expert;
    double score;
};

/// Per token, its k_orig highest scores in descending order (ties to the
/// lower expert index), concatenated token by token.
std::vector<Candidate> candidate_set(const RoutingScoreMatrix& probs, int k_orig);

/// Budgeted token-level selection: every token keeps its top-k_base experts,
/// then the remaining per-token candidates (ranks k_base+1..k_orig) compete
/// globally for the leftover total_slots - T*k_base slots, largest scores
/// first (ties: lower token index, then lower expert index).
/// With k_base = 0 a token can end up empty; it then swaps its top-1 expert
/// in for the globally smallest selected score so no token is dropped.
RedistributionPlan redistribute(const RoutingScoreMatrix& probs,
                                const LayerTokenBudget& budget, int k_orig);

struct BruteForceRedistribution {
    double total_weight = 0.0;
    ActivationMask mask;
};

/// Exhaustive 0/1 oracle over the candidate set: maximizes retained weight
/// subject to the slot total and a per-token floor of max(k_base, 1).
/// Guarded: T*k_orig must not exceed 24.
BruteForceRedistribution brute_force_redistribute(const RoutingScoreMatrix& probs,
                                                  const LayerTokenBudget& budget,
                                                  int k_orig);

}  // namespace moebudget
