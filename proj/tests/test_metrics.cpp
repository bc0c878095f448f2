// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <random>

#include "moebudget/metrics.hpp"
#include "test_helpers.hpp"

using namespace moebudget;

namespace {

std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t n) {
    std::vector<double> p(n);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    double sum = 0.0;
    for (double& v : p) sum += (v = u(rng));
    for (double& v : p) v /= sum;
    return p;
}

}  // namespace

TEST_CASE("expert_load counts and weights") {
    ActivationMask mask(3, 4);
    for (std::size_t t = 0; t < 3; ++t) mask.set_active(t, 0, 0.5);
    auto load = expert_load(mask);
    CHECK(load.counts == std::vector<long long>{3, 0, 0, 0});
    CHECK(load.weighted[0] == 1.5);

    std::mt19937_64 rng(3);
    auto probs = test::random_scores(rng, 5, 4);
    auto full = expert_load(top_k_route(probs, 4));
    CHECK(full.counts == std::vector<long long>{5, 5, 5, 5});
}

TEST_CASE("expert_load agrees with a naive recount") {
    std::mt19937_64 rng(5);
    auto probs = test::random_scores(rng, 16, 6);
    auto mask = top_k_route(probs, 3);
    auto load = expert_load(mask);
    for (std::size_t e = 0; e < 6; ++e) {
        long long count = 0;
        double w = 0.0;
        for (std::size_t t = 0; t < 16; ++t)
            if (mask.is_active(t, e)) {
                ++count;
                w += mask.weights(t, e);
            }
        CHECK(load.counts[e] == count);
        CHECK(load.weighted[e] == w);
    }
}

TEST_CASE("spearman identities") {
    std::vector<double> a = {1.0, 5.0, 2.0, 9.0, 3.0};
    CHECK(*spearman(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    std::vector<double> b = {9.0, 1.0, 5.0, 0.5, 4.0};  // reverse strict ordering of a
    CHECK(*spearman(a, b) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("spearman tie handling matches a reference implementation") {
    // frozen from an independent statistics package
    std::vector<double> a = {1.0, 2.0, 2.0, 3.0};
    std::vector<double> b = {3.0, 2.0, 2.0, 1.0};
    CHECK(*spearman(a, b) == doctest::Approx(-1.0).epsilon(1e-12));
    std::vector<double> a2 = {1.0, 1.0, 2.0, 3.0, 3.0};
    std::vector<double> b2 = {2.0, 1.0, 1.0, 3.0, 2.0};
    CHECK(*spearman(a2, b2) == doctest::Approx(0.5833333333333334).epsilon(1e-12));
}

TEST_CASE("spearman reports zero rank variance as undefined") {
    std::vector<double> flat = {2.0, 2.0, 2.0};
    std::vector<double> b = {1.0, 2.0, 3.0};
    CHECK_FALSE(spearman(flat, b).has_value());
}

TEST_CASE("spearman is invariant under strictly monotone transforms") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.1, 5.0);
    for (int it = 0; it < 50; ++it) {
        std::vector<double> a(8), b(8);
        for (auto& v : a) v = u(rng);
        for (auto& v : b) v = u(rng);
        double base = *spearman(a, b);
        std::vector<double> ta = a;
        for (double& v : ta) v = std::exp(2.0 * v) + 1.0;
        CHECK(*spearman(ta, b) == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("normalized_entropy boundary and analytic values") {
    std::vector<double> uniform = {0.25, 0.25, 0.25, 0.25};
    CHECK(normalized_entropy(uniform) == doctest::Approx(1.0).epsilon(1e-12));
    std::vector<double> onehot = {1.0, 0.0, 0.0};
    CHECK(normalized_entropy(onehot) == 0.0);
    std::vector<double> p = {0.5, 0.25, 0.25};
    CHECK(normalized_entropy(p) ==
          doctest::Approx(1.0397207708399179 / std::log(3.0)).epsilon(1e-12));
    std::vector<double> tiny = {1.0};
    CHECK_THROWS_AS(normalized_entropy(tiny), invalid_input_error);
}

TEST_CASE("js_divergence identities") {
    std::vector<double> p = {0.2, 0.3, 0.5};
    CHECK(js_divergence(p, p) == 0.0);
    std::vector<double> a = {1.0, 0.0};
    std::vector<double> b = {0.0, 1.0};
    CHECK(js_divergence(a, b) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    std::vector<double> short_q = {1.0};
    CHECK_THROWS_AS(js_divergence(p, short_q), invalid_input_error);
}

TEST_CASE("js_divergence symmetry and range on random pairs") {
    std::mt19937_64 rng(11);
    for (int it = 0; it < 100; ++it) {
        auto p = random_distribution(rng, 6);
        auto q = random_distribution(rng, 6);
        double pq = js_divergence(p, q);
        double qp = js_divergence(q, p);
        CHECK(std::abs(pq - qp) < 1e-12);
        CHECK(pq >= 0.0);
        CHECK(pq <= std::log(2.0) + 1e-12);
    }
}

TEST_CASE("js_divergence matches a direct high-precision evaluation") {
    std::mt19937_64 rng(13);
    auto p = random_distribution(rng, 5);
    auto q = random_distribution(rng, 5);
    long double acc = 0.0L;
    for (std::size_t i = 0; i < 5; ++i) {
        long double m = 0.5L * (p[i] + q[i]);
        if (p[i] > 0) acc += 0.5L * p[i] * std::log(static_cast<long double>(p[i]) / m);
        if (q[i] > 0) acc += 0.5L * q[i] * std::log(static_cast<long double>(q[i]) / m);
    }
    CHECK(js_divergence(p, q) ==
          doctest::Approx(static_cast<double>(acc)).epsilon(1e-12));
}

TEST_CASE("speedup_estimate linear cost ratios") {
    AllocationVector full{std::vector<int>(26, 6)};   // sum 156
    AllocationVector half{std::vector<int>(26, 3)};   // sum 78
    CHECK(speedup_estimate(full, half, CostModel{0.0, 1.0}) == 2.0);
    CHECK(speedup_estimate(half, half, CostModel{1.0, 2.0}) == 1.0);
    // with zero fixed cost the ratio is exactly the activation-count ratio
    std::mt19937_64 rng(17);
    for (int it = 0; it < 30; ++it) {
        AllocationVector a, b;
        for (int i = 0; i < 8; ++i) {
            a.per_layer.push_back(1 + static_cast<int>(rng() % 6));
            b.per_layer.push_back(1 + static_cast<int>(rng() % 6));
        }
        CHECK(speedup_estimate(a, b, CostModel{0.0, 1.0}) ==
              static_cast<double>(a.sum()) / static_cast<double>(b.sum()));
    }
}
