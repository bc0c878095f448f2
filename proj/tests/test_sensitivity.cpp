// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "moebudget/sensitivity.hpp"
#include "moebudget/sim.hpp"

using namespace moebudget;

namespace {

// records every configuration it is asked to evaluate
class RecordingOracle : public LossOracle {
public:
    explicit RecordingOracle(std::function<double(const LayerConfig&)> fn)
        : fn_(std::move(fn)) {}
    double loss(const LayerConfig& c) const override {
        calls.push_back(c);
        return fn_(c);
    }
    mutable std::vector<LayerConfig> calls;

private:
    std::function<double(const LayerConfig&)> fn_;
};

}  // namespace

TEST_CASE("degenerate profile: L=1, k_orig=1") {
    RecordingOracle oracle([](const LayerConfig&) { return 2.25; });
    auto s = profile_sensitivity(oracle, 1, 1);
    CHECK(oracle.calls.size() == 1);
    CHECK(oracle.calls[0] == LayerConfig{1});
    CHECK(s.at(0, 1) == 2.25);
}

TEST_CASE("hand-traced profile: L=2, k_orig=2") {
    RecordingOracle oracle([](const LayerConfig& c) {
        return 1.0 + 0.5 * c[0] + 0.25 * c[1];  // distinct loss per config
    });
    auto s = profile_sensitivity(oracle, 2, 2);
    REQUIRE(oracle.calls.size() == 3);
    CHECK(oracle.calls[0] == LayerConfig{2, 2});
    CHECK(oracle.calls[1] == LayerConfig{2, 1});
    CHECK(oracle.calls[2] == LayerConfig{1, 1});
    CHECK(s.at(1, 2) == 1.0 + 0.5 * 2 + 0.25 * 2);
    CHECK(s.at(1, 1) == 1.0 + 0.5 * 2 + 0.25 * 1);
    CHECK(s.at(0, 2) == 1.0 + 0.5 * 2 + 0.25 * 1);  // reused measurement
    CHECK(s.at(0, 1) == 1.0 + 0.5 * 1 + 0.25 * 1);
}

TEST_CASE("evaluation-count invariant: 1 + L*(k_orig-1)") {
    for (auto [L, K] : std::vector<std::pair<int, int>>{{2, 2}, {5, 3}, {26, 6}}) {
        RecordingOracle oracle([&](const LayerConfig& c) {
            double v = 1.0;
            for (std::size_t i = 0; i < c.size(); ++i) v += 0.01 * (i + 1) * c[i];
            return v;
        });
        profile_sensitivity(oracle, L, K);
        CHECK(static_cast<int>(oracle.calls.size()) == 1 + L * (K - 1));
    }
}

TEST_CASE("separable oracle: ln-row-differences isolate one layer's term") {
    std::mt19937_64 rng(77);
    const int L = 4, K = 3;
    std::vector<std::vector<double>> f(L, std::vector<double>(K));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& row : f)
        for (double& v : row) v = u(rng);
    RecordingOracle oracle([&](const LayerConfig& c) {
        double acc = 0.0;
        for (int i = 0; i < L; ++i) acc += f[i][c[i] - 1];
        return std::exp(acc);
    });
    auto s = profile_sensitivity(oracle, L, K);
    for (int i = 0; i < L; ++i)
        for (int k = 1; k <= K; ++k)
            for (int k2 = 1; k2 <= K; ++k2)
                CHECK(std::log(s.at(i, k)) - std::log(s.at(i, k2)) ==
                      doctest::Approx(f[i][k - 1] - f[i][k2 - 1]).epsilon(1e-9));
}

TEST_CASE("independent mode matches sequential for deterministic oracles") {
    RecordingOracle oracle([](const LayerConfig& c) {
        double v = 1.0;
        for (std::size_t i = 0; i < c.size(); ++i) v += 0.1 * (i + 1) * c[i] * c[i];
        return v;
    });
    auto seq = profile_sensitivity(oracle, 3, 3, false);
    auto cnt_seq = oracle.calls.size();
    oracle.calls.clear();
    auto ind = profile_sensitivity(oracle, 3, 3, true);
    CHECK(oracle.calls.size() == cnt_seq + 2);  // one re-measurement per i < L-1
    CHECK(seq.values == ind.values);
}

TEST_CASE("oracle failure carries the offending configuration") {
    RecordingOracle oracle([](const LayerConfig& c) {
        if (c[0] == 1) throw std::runtime_error("boom");
        return 1.5;
    });
    try {
        profile_sensitivity(oracle, 2, 2);
        FAIL("expected oracle_error");
    } catch (const oracle_error& e) {
        CHECK(e.failing_config == LayerConfig{1, 1});
    }
}

TEST_CASE("normalize_rows arithmetic") {
    SensitivityMatrix s;
    s.values = Matrix::from_rows({{5, 3, 2}, {4, 2, 2}});
    auto sub = normalize_rows(s, Normalization::subtract_row_min);
    CHECK(sub.values == Matrix::from_rows({{3, 1, 0}, {2, 0, 0}}));
    auto div = normalize_rows(s, Normalization::divide_by_full_activation);
    CHECK(div.values == Matrix::from_rows({{2.5, 1.5, 1}, {2, 1, 1}}));
    auto none = normalize_rows(s, Normalization::none);
    CHECK(none.values == s.values);
}

TEST_CASE("divide normalization rejects a zero full-activation entry") {
    SensitivityMatrix s;
    s.values = Matrix::from_rows({{5, 3, 0}});
    CHECK_THROWS_AS(normalize_rows(s, Normalization::divide_by_full_activation),
                    invalid_input_error);
}
