// SPDX-License-Identifier: Apache-2.0
#include "moebudget/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace moebudget {

std::vector<double> ExpertLoad::weighted_distribution() const {
    double total = std::accumulate(weighted.begin(), weighted.end(), 0.0);
    std::vector<double> out(weighted.size(), 0.0);
    if (total > 0.0)
        for (std::size_t i = 0; i < weighted.size(); ++i) out[i] = weighted[i] / total;
    return out;
}

ExpertLoad expert_load(const ActivationMask& mask) {
    ExpertLoad load;
    load.counts.assign(mask.num_experts(), 0);
    load.weighted.assign(mask.num_experts(), 0.0);
    for (std::size_t t = 0; t < mask.num_tokens(); ++t)
        for (std::size_t e = 0; e < mask.num_experts(); ++e)
            if (mask.is_active(t, e)) {
                ++load.counts[e];
                load.weighted[e] += mask.weights(t, e);
            }
    return load;
}

namespace {

// average ranks for ties, 1-based
std::vector<double> rank_vector(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

std::optional<double> spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2)
        throw invalid_input_error("spearman: need equal lengths >= 2");
    auto ra = rank_vector(a);
    auto rb = rank_vector(b);
    const double n = static_cast<double>(a.size());
    double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double da = ra[i] - ma, db = rb[i] - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if (va == 0.0 || vb == 0.0) return std::nullopt;
    return cov / std::sqrt(va * vb);
}

namespace {

void check_distribution(std::span<const double> p) {
    double sum = 0.0;
    for (double v : p) {
        if (!(v >= 0.0))
            throw invalid_input_error("distribution entry must be >= 0");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw invalid_input_error("distribution does not sum to 1");
}

}  // namespace

double normalized_entropy(std::span<const double> p) {
    if (p.size() < 2)
        throw invalid_input_error("normalized_entropy: need N >= 2");
    check_distribution(p);
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log(v);
    return h / std::log(static_cast<double>(p.size()));
}

double js_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size())
        throw invalid_input_error("js_divergence: support size mismatch");
    check_distribution(p);
    check_distribution(q);
    double js = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double m = 0.5 * (p[i] + q[i]);
        if (p[i] > 0.0) js += 0.5 * p[i] * std::log(p[i] / m);
        if (q[i] > 0.0) js += 0.5 * q[i] * std::log(q[i] / m);
    }
    return std::max(js, 0.0);
}

double speedup_estimate(const AllocationVector& alloc_a, const AllocationVector& alloc_b,
                        const CostModel& model) {
    if (alloc_a.size() != alloc_b.size())
        throw invalid_input_error("speedup_estimate: layer count mismatch");
    auto cost = [&](const AllocationVector& a) {
        double c = 0.0;
        for (int k : a.per_layer) c += model.fixed_cost + model.per_activation_cost * k;
        return c;
    };
    return cost(alloc_a) / cost(alloc_b);
}

}  // namespace moebudget
