// SPDX-License-Identifier: Apache-2.0
#include "moebudget/baselines.hpp"

#include <algorithm>
#include <numeric>

namespace moebudget {

AllocationVector uniform_allocation(const BudgetSpec& spec, bool spread_remainder) {
    spec.validate();
    const int L = spec.num_layers;
    const int B = spec.global_budget;
    if (B % L != 0 && !spread_remainder)
        throw budget_error("uniform_allocation: " + std::to_string(B) +
                           " not divisible by " + std::to_string(L) +
                           " (use spread-remainder)");
    AllocationVector alloc;
    alloc.per_layer.assign(L, B / L);
    for (int i = 0; i < B % L; ++i) ++alloc.per_layer[i];
    return alloc;
}

namespace {

int clamp_int(int v, int lo, int hi) { return std::max(lo, std::min(hi, v)); }

}  // namespace

AllocationVector ascending_allocation(const BudgetSpec& spec, int k_min, int k_max) {
    spec.validate();
    const int L = spec.num_layers;
    const int B = spec.global_budget;
    if (k_min < 1 || k_min > k_max || k_max > spec.k_orig)
        throw budget_error("ascending_allocation: bad k_min/k_max");
    if (B < L * k_min || B > L * k_max)
        throw budget_error("ascending_allocation: budget outside [L*k_min, L*k_max]");

    std::vector<int> a(L);
    for (int i = 0; i < L; ++i) {
        double v = (L == 1) ? static_cast<double>(k_min)
                            : k_min + (k_max - k_min) *
                                          (static_cast<double>(i) / (L - 1));
        a[i] = clamp_int(static_cast<int>(round_half_even(v)), k_min, k_max);
    }
    // enforce monotone non-decreasing with inter-layer step <= 1
    for (int i = 1; i < L; ++i) a[i] = clamp_int(a[i], a[i - 1], a[i - 1] + 1);

    auto sum = [&] { return std::accumulate(a.begin(), a.end(), 0); };
    while (sum() != B) {
        bool changed = false;
        if (sum() < B) {
            for (int i = 0; i < L && sum() < B; ++i) {
                bool left_ok = (i == 0) || (a[i] == a[i - 1]); // step stays <= 1
                bool right_ok = (i == L - 1) || (a[i] + 1 <= a[i + 1]);
                if (a[i] < k_max && left_ok && right_ok) {
                    ++a[i];
                    changed = true;
                }
            }
        } else {
            for (int i = L - 1; i >= 0 && sum() > B; --i) {
                bool left_ok = (i == 0) || (a[i] - 1 >= a[i - 1]);
                bool right_ok = (i == L - 1) || (a[i] == a[i + 1]);
                if (a[i] > k_min && left_ok && right_ok) {
                    --a[i];
                    changed = true;
                }
            }
        }
        if (!changed)
            throw budget_error("ascending_allocation: cannot reach budget exactly");
    }
    return AllocationVector{std::move(a)};
}

AllocationVector descending_allocation(const BudgetSpec& spec, int k_min, int k_max) {
    AllocationVector asc = ascending_allocation(spec, k_min, k_max);
    std::reverse(asc.per_layer.begin(), asc.per_layer.end());
    return asc;
}

ActivationMask top_p_route(const RoutingScoreMatrix& probs, double p) {
    if (!(p > 0.0 && p <= 1.0))
        throw invalid_input_error("top_p_route: P out of (0, 1]");
    const std::size_t T = probs.num_tokens();
    const std::size_t N = probs.num_experts();
    ActivationMask mask(T, N);
    std::vector<std::size_t> order(N);
    for (std::size_t t = 0; t < T; ++t) {
        auto row = probs.probs.row(t);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
        double cum = row[order[0]];
        mask.set_active(t, order[0], row[order[0]]);
        for (std::size_t j = 1; j < N; ++j) {
            if (cum >= p) break;
            if (row[order[j]] == 0.0) break; // nothing left to add
            mask.set_active(t, order[j], row[order[j]]);
            cum += row[order[j]];
        }
    }
    return mask;
}

ActivationMask naee_route(const RoutingScoreMatrix& probs, int k_orig, double beta) {
    if (!(beta >= 0.0 && beta <= 1.0))
        throw invalid_input_error("naee_route: beta out of [0, 1]");
    const std::size_t T = probs.num_tokens();
    const std::size_t N = probs.num_experts();
    if (k_orig < 1 || static_cast<std::size_t>(k_orig) > N)
        throw invalid_input_error("naee_route: k_orig out of [1, N]");
    ActivationMask mask(T, N);
    std::vector<std::size_t> order(N);
    for (std::size_t t = 0; t < T; ++t) {
        auto row = probs.probs.row(t);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
        double top1 = row[order[0]];
        mask.set_active(t, order[0], top1);
        for (int j = 1; j < k_orig; ++j) {
            if (row[order[j]] >= beta * top1)
                mask.set_active(t, order[j], row[order[j]]);
        }
    }
    return mask;
}

namespace {

double average_active(const ActivationMask& mask) {
    return static_cast<double>(mask.total_active()) /
           static_cast<double>(mask.num_tokens());
}

}  // namespace

CalibrationResult calibrate_top_p(const RoutingScoreMatrix& calibration,
                                  double target_avg) {
    const double n = static_cast<double>(calibration.num_experts());
    if (target_avg < 1.0 || target_avg > n)
        throw budget_error("calibrate_top_p: target out of [1, N]");
    auto avg_at = [&](double p) { return average_active(top_p_route(calibration, p)); };

    double hi = 1.0;
    if (avg_at(hi) <= target_avg)
        return {hi, avg_at(hi), target_avg};
    double lo = 1e-9;
    if (avg_at(lo) > target_avg)
        throw budget_error("calibrate_top_p: target unreachable");
    while (hi - lo > 1e-6) {
        double mid = 0.5 * (lo + hi);
        if (avg_at(mid) <= target_avg)
            lo = mid;
        else
            hi = mid;
    }
    return {lo, avg_at(lo), target_avg};
}

CalibrationResult calibrate_naee(const RoutingScoreMatrix& calibration, int k_orig,
                                 double target_avg) {
    if (target_avg < 1.0 || target_avg > static_cast<double>(k_orig))
        throw budget_error("calibrate_naee: target out of [1, k_orig]");
    auto avg_at = [&](double beta) {
        return average_active(naee_route(calibration, k_orig, beta));
    };

    double lo = 0.0;
    if (avg_at(lo) <= target_avg)
        return {lo, avg_at(lo), target_avg};
    double hi = 1.0;
    if (avg_at(hi) > target_avg)
        throw budget_error("calibrate_naee: target unreachable");
    while (hi - lo > 1e-6) {
        double mid = 0.5 * (lo + hi);
        if (avg_at(mid) > target_avg)
            lo = mid;
        else
            hi = mid;
    }
    return {hi, avg_at(hi), target_avg};
}

}  // namespace moebudget
