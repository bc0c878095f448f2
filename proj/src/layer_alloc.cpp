// SPDX-License-Identifier: Apache-2.0
#include "moebudget/layer_alloc.hpp"

#include <cmath>
#include <limits>

namespace moebudget {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_dims(const SensitivityMatrix& s, const BudgetSpec& spec) {
    spec.validate();
    if (s.num_layers() != static_cast<std::size_t>(spec.num_layers) ||
        s.k_orig() != static_cast<std::size_t>(spec.k_orig))
        throw invalid_input_error("sensitivity matrix dims do not match budget spec");
}

// Objective folded from the last layer toward the first so that the DP and
// the brute force produce bit-identical sums for the same allocation.
double fold_objective(const SensitivityMatrix& s, const std::vector<int>& alloc) {
    double obj = 0.0;
    for (int i = static_cast<int>(alloc.size()) - 1; i >= 0; --i)
        obj = s.at(i, alloc[i]) + obj;
    return obj;
}

}  // namespace

AllocationResult optimal_allocation(const SensitivityMatrix& s, const BudgetSpec& spec,
                                    long long* inner_loop_count) {
    check_dims(s, spec);
    const int L = spec.num_layers;
    const int B = spec.global_budget;
    const int K = spec.k_orig;

    // suffix[i][b]: minimal cost of layers i..L-1 spending exactly budget b.
    // Infeasible states stay at the infinity sentinel.
    std::vector<std::vector<double>> suffix(L + 1, std::vector<double>(B + 1, kInf));
    suffix[L][0] = 0.0;
    long long count = 0;
    for (int i = L - 1; i >= 0; --i) {
        for (int b = 0; b <= B; ++b) {
            double best = kInf;
            const int kmax = std::min(K, b);
            for (int k = 1; k <= kmax; ++k) {
                ++count;
                if (suffix[i + 1][b - k] == kInf) continue;
                double v = s.at(i, k) + suffix[i + 1][b - k];
                if (v < best) best = v;
            }
            suffix[i][b] = best;
        }
    }
    if (inner_loop_count) *inner_loop_count = count;

    // smallest total budget among equal-objective optima
    int best_b = -1;
    double best_obj = kInf;
    for (int b = 0; b <= B; ++b) {
        if (suffix[0][b] < best_obj) {
            best_obj = suffix[0][b];
            best_b = b;
        }
    }
    if (best_b < 0) throw budget_error("optimal_allocation: no feasible allocation");

    // forward reconstruction, smallest k first -> lexicographically smallest K
    AllocationResult result;
    result.alloc.per_layer.resize(L);
    int remaining = best_b;
    for (int i = 0; i < L; ++i) {
        const int kmax = std::min(K, remaining);
        for (int k = 1; k <= kmax; ++k) {
            if (suffix[i + 1][remaining - k] == kInf) continue;
            if (s.at(i, k) + suffix[i + 1][remaining - k] == suffix[i][remaining]) {
                result.alloc.per_layer[i] = k;
                remaining -= k;
                break;
            }
        }
    }
    result.objective = fold_objective(s, result.alloc.per_layer);
    return result;
}

AllocationResult brute_force_allocation(const SensitivityMatrix& s,
                                        const BudgetSpec& spec) {
    check_dims(s, spec);
    const int L = spec.num_layers;
    const int B = spec.global_budget;
    const int K = spec.k_orig;
    if (std::pow(static_cast<double>(K), static_cast<double>(L)) > 1e7)
        throw invalid_input_error("brute_force_allocation: instance too large");

    std::vector<int> current(L, 1);
    AllocationResult best;
    bool found = false;
    int best_sum = 0;
    while (true) {
        int sum = 0;
        for (int k : current) sum += k;
        if (sum <= B) {
            double obj = fold_objective(s, current);
            // lex order of enumeration makes the first hit lex-smallest
            if (!found || obj < best.objective ||
                (obj == best.objective && sum < best_sum)) {
                best.alloc.per_layer = current;
                best.objective = obj;
                best_sum = sum;
                found = true;
            }
        }
        // odometer increment, last layer fastest => lexicographic order
        int i = L - 1;
        while (i >= 0 && current[i] == K) current[i--] = 1;
        if (i < 0) break;
        ++current[i];
    }
    if (!found) throw budget_error("brute_force_allocation: no feasible allocation");
    return best;
}

long long dp_complexity_estimate(const BudgetSpec& spec) {
    spec.validate();
    return static_cast<long long>(spec.num_layers) * spec.global_budget * spec.k_orig;
}

}  // namespace moebudget
