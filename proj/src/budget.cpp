// SPDX-License-Identifier: Apache-2.0
#include "moebudget/budget.hpp"

#include <cmath>

namespace moebudget {

long long round_half_even(double x) {
    double f = std::floor(x);
    double frac = x - f;
    long long lo = static_cast<long long>(f);
    if (frac < 0.5) return lo;
    if (frac > 0.5) return lo + 1;
    return (lo % 2 == 0) ? lo : lo + 1;
}

void BudgetSpec::validate() const {
    if (num_layers < 1) throw budget_error("BudgetSpec: num_layers must be >= 1");
    if (k_orig < 1) throw budget_error("BudgetSpec: k_orig must be >= 1");
    if (global_budget < num_layers)
        throw budget_error("BudgetSpec: budget " + std::to_string(global_budget) +
                           " < num_layers " + std::to_string(num_layers));
    if (global_budget > num_layers * k_orig)
        throw budget_error("BudgetSpec: budget " + std::to_string(global_budget) +
                           " > L*k_orig " + std::to_string(num_layers * k_orig));
}

BudgetSpec budget_from_avg(int num_layers, int k_orig, double avg_k) {
    if (avg_k < 1.0 || avg_k > static_cast<double>(k_orig))
        throw budget_error("budget_from_avg: avg_k out of [1, k_orig]");
    BudgetSpec spec{num_layers, k_orig,
                    static_cast<int>(round_half_even(num_layers * avg_k))};
    spec.validate();
    return spec;
}

std::vector<BudgetViolation> validate_allocation(const AllocationVector& alloc,
                                                 const BudgetSpec& spec) {
    std::vector<BudgetViolation> out;
    if (alloc.per_layer.size() != static_cast<std::size_t>(spec.num_layers)) {
        out.push_back({-1, "length " + std::to_string(alloc.per_layer.size()) +
                               " != num_layers " + std::to_string(spec.num_layers)});
        return out;
    }
    for (int i = 0; i < spec.num_layers; ++i) {
        int k = alloc.per_layer[i];
        if (k < 1)
            out.push_back({i, "K_" + std::to_string(i) + " = " + std::to_string(k) + " < 1"});
        else if (k > spec.k_orig)
            out.push_back({i, "K_" + std::to_string(i) + " = " + std::to_string(k) +
                                  " > k_orig " + std::to_string(spec.k_orig)});
    }
    if (alloc.sum() > spec.global_budget)
        out.push_back({-1, "sum " + std::to_string(alloc.sum()) + " > budget " +
                               std::to_string(spec.global_budget)});
    return out;
}

}  // namespace moebudget
