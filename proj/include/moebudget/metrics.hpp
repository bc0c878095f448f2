// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "moebudget/budget.hpp"
#include "moebudget/routing.hpp"

namespace moebudget {

/// Per-expert activation counts and summed routing weights over a batch.
struct ExpertLoad {
    std::vector<long long> counts;
    std::vector<double> weighted;

    /// weighted vector normalized to a distribution (sum 1).
    std::vector<double> weighted_distribution() const;
};

ExpertLoad expert_load(const ActivationMask& mask);

/// Spearman rank correlation with average ranks for ties; empty when either
/// side has zero rank variance (undefined).
std::optional<double> spearman(std::span<const double> a, std::span<const double> b);

/// H(p) / ln N in [0,1]; requires N >= 2 and sum(p) = 1 +/- 1e-9.
double normalized_entropy(std::span<const double> p);

/// Jensen-Shannon divergence in nats, in [0, ln 2].
double js_divergence(std::span<const double> p, std::span<const double> q);

/// Linear activation-count cost: cost(K) = sum_i (fixed + per_activation * K_i).
/// A stand-in for hardware timing, which is out of scope here.
struct CostModel {
    double fixed_cost = 0.0;
    double per_activation_cost = 1.0;
};

/// cost(alloc_a) / cost(alloc_b) under the linear model.
double speedup_estimate(const AllocationVector& alloc_a, const AllocationVector& alloc_b,
                        const CostModel& model);

}  // namespace moebudget
