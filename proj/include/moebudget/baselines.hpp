// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "moebudget/budget.hpp"
#include "moebudget/routing.hpp"

namespace moebudget {

/// Identical per-layer budget. Without `spread_remainder` an indivisible B is
/// an error; with it the first B mod L layers take the extra slot.
AllocationVector uniform_allocation(const BudgetSpec& spec,
                                    bool spread_remainder = false);

/// Depth-increasing schedule: rounded linear interpolation k_min..k_max,
/// clamped to monotone steps of at most one, then greedy +/-1 adjustments
/// (left-to-right increments, right-to-left decrements) until the sum is
/// exactly B.
AllocationVector ascending_allocation(const BudgetSpec& spec, int k_min, int k_max);

/// Reverse of ascending_allocation on the same inputs.
AllocationVector descending_allocation(const BudgetSpec& spec, int k_min, int k_max);

/// Per token, the minimal descending-score prefix with cumulative score >= p;
/// always at least one expert.
ActivationMask top_p_route(const RoutingScoreMatrix& probs, double p);

/// Keep the top-1 expert; keep rank j in 2..k_orig iff score_j >= beta * score_1.
ActivationMask naee_route(const RoutingScoreMatrix& probs, int k_orig, double beta);

struct CalibrationResult {
    double threshold = 0.0;    // P for Top-P, beta for the relative-threshold skip
    double achieved_avg = 0.0; // average activations per token at that threshold
    double target_avg = 0.0;
};

/// Bisection over P to 1e-6 resolution; returns the achieved average closest
/// to the target from below-or-equal (average activations is a monotone
/// non-decreasing step function of P).
CalibrationResult calibrate_top_p(const RoutingScoreMatrix& calibration,
                                  double target_avg);

/// Bisection over beta to 1e-6; closest-from-below contract as above
/// (average activations is non-increasing in beta).
CalibrationResult calibrate_naee(const RoutingScoreMatrix& calibration, int k_orig,
                                 double target_avg);

}  // namespace moebudget
