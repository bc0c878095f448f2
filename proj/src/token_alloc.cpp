// SPDX-License-Identifier: Apache-2.0
#include "moebudget/token_alloc.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

namespace moebudget {

double RedistributionPlan::total_weight() const {
    double acc = 0.0;
    for (std::size_t t = 0; t < mask.num_tokens(); ++t)
        for (std::size_t e = 0; e < mask.num_experts(); ++e)
            if (mask.is_active(t, e)) acc += mask.weights(t, e);
    return acc;
}

std::vector<Candidate> candidate_set(const RoutingScoreMatrix& probs, int k_orig) {
    const std::size_t T = probs.num_tokens();
    const std::size_t N = probs.num_experts();
    if (k_orig < 1 || static_cast<std::size_t>(k_orig) > N)
        throw invalid_input_error("candidate_set: k_orig out of [1, N]");
    std::vector<Candidate> out;
    out.reserve(T * k_orig);
    std::vector<std::size_t> order(N);
    for (std::size_t t = 0; t < T; ++t) {
        auto row = probs.probs.row(t);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
        for (int r = 0; r < k_orig; ++r)
            out.push_back({t, order[r], row[order[r]]});
    }
    return out;
}

namespace {

void check_budget(const RoutingScoreMatrix& probs, const LayerTokenBudget& budget,
                  int k_orig) {
    const std::size_t T = probs.num_tokens();
    const std::size_t N = probs.num_experts();
    if (T < 1 || budget.token_count != T)
        throw invalid_input_error("redistribute: token count mismatch");
    if (k_orig < 1 || static_cast<std::size_t>(k_orig) > N)
        throw invalid_input_error("redistribute: k_orig out of [1, N]");
    if (budget.k_base < 0 || budget.k_base > k_orig)
        throw budget_error("redistribute: k_base out of [0, k_orig]");
    if (budget.avg_per_token > static_cast<double>(k_orig))
        throw budget_error("redistribute: K_l exceeds k_orig");
    if (budget.avg_per_token < static_cast<double>(budget.k_base))
        throw budget_error("redistribute: K_l below k_base");
    const long long floor_total =
        static_cast<long long>(T) * std::max(budget.k_base, 1);
    if (budget.total_slots() < floor_total)
        throw budget_error("redistribute: total slots below per-token floor");
}

}  // namespace

RedistributionPlan redistribute(const RoutingScoreMatrix& probs,
                                const LayerTokenBudget& budget, int k_orig) {
    check_budget(probs, budget, k_orig);
    const std::size_t T = probs.num_tokens();
    const std::size_t N = probs.num_experts();
    const int k_base = budget.k_base;
    const long long total_slots = budget.total_slots();

    auto cands = candidate_set(probs, k_orig); // T blocks of k_orig, sorted desc

    RedistributionPlan plan;
    plan.mask = ActivationMask(T, N);
    plan.k_base = k_base;
    plan.total_slots = total_slots;

    for (std::size_t t = 0; t < T; ++t)
        for (int r = 0; r < k_base; ++r) {
            const Candidate& c = cands[t * k_orig + r];
            plan.mask.set_active(c.token, c.expert, c.score);
        }

    // ranks k_base+1..k_orig compete globally for the leftover slots
    std::vector<Candidate> pool;
    pool.reserve(T * (k_orig - k_base));
    for (std::size_t t = 0; t < T; ++t)
        for (int r = k_base; r < k_orig; ++r) pool.push_back(cands[t * k_orig + r]);
    std::sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.token != b.token) return a.token < b.token;
        return a.expert < b.expert;
    });
    const long long extra =
        std::min<long long>(total_slots - static_cast<long long>(T) * k_base,
                            static_cast<long long>(pool.size()));
    std::vector<Candidate> selected(pool.begin(), pool.begin() + extra);
    for (const Candidate& c : selected)
        plan.mask.set_active(c.token, c.expert, c.score);

    if (k_base == 0) {
        // no-token-dropping floor: an empty token trades the globally
        // smallest selected score (from a token with >= 2) for its top-1
        for (std::size_t t = 0; t < T; ++t) {
            if (plan.mask.active_count(t) > 0) continue;
            for (auto it = selected.rbegin(); it != selected.rend(); ++it) {
                if (plan.mask.active_count(it->token) < 2) continue;
                plan.mask.active[it->token * N + it->expert] = 0;
                plan.mask.weights(it->token, it->expert) = 0.0;
                selected.erase(std::next(it).base());
                break;
            }
            const Candidate& top = cands[t * k_orig];
            plan.mask.set_active(top.token, top.expert, top.score);
        }
    }

    plan.slots_used = static_cast<long long>(plan.mask.total_active());
    return plan;
}

BruteForceRedistribution brute_force_redistribute(const RoutingScoreMatrix& probs,
                                                  const LayerTokenBudget& budget,
                                                  int k_orig) {
    check_budget(probs, budget, k_orig);
    const std::size_t T = probs.num_tokens();
    const std::size_t N = probs.num_experts();
    if (static_cast<long long>(T) * k_orig > 24)
        throw invalid_input_error("brute_force_redistribute: instance too large");
    const int floor = std::max(budget.k_base, 1);
    const long long total_slots = budget.total_slots();

    auto cands = candidate_set(probs, k_orig);

    // precompute per-token subset weights and popcounts
    const unsigned num_subsets = 1u << k_orig;
    std::vector<double> subset_weight(T * num_subsets, 0.0);
    for (std::size_t t = 0; t < T; ++t)
        for (unsigned m = 0; m < num_subsets; ++m) {
            double w = 0.0;
            for (int r = 0; r < k_orig; ++r)
                if (m & (1u << r)) w += cands[t * k_orig + r].score;
            subset_weight[t * num_subsets + m] = w;
        }

    std::vector<unsigned> choice(T, 0), best_choice;
    double best_weight = -1.0;
    bool found = false;

    auto dfs = [&](auto&& self, std::size_t t, long long used, double weight) -> void {
        if (used > total_slots) return;
        if (t == T) {
            if (!found || weight > best_weight) {
                found = true;
                best_weight = weight;
                best_choice = choice;
            }
            return;
        }
        for (unsigned m = 0; m < num_subsets; ++m) {
            int pc = std::popcount(m);
            if (pc < floor) continue;
            choice[t] = m;
            self(self, t + 1, used + pc, weight + subset_weight[t * num_subsets + m]);
        }
    };
    dfs(dfs, 0, 0, 0.0);
    if (!found) throw budget_error("brute_force_redistribute: infeasible");

    BruteForceRedistribution out;
    out.mask = ActivationMask(T, N);
    for (std::size_t t = 0; t < T; ++t)
        for (int r = 0; r < k_orig; ++r)
            if (best_choice[t] & (1u << r)) {
                const Candidate& c = cands[t * k_orig + r];
                out.mask.set_active(c.token, c.expert, c.score);
            }
    // canonical row-major total so exact comparisons against redistribute hold
    double acc = 0.0;
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t e = 0; e < N; ++e)
            if (out.mask.is_active(t, e)) acc += out.mask.weights(t, e);
    out.total_weight = acc;
    return out;
}

}  // namespace moebudget
