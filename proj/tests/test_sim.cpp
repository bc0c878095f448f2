// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <random>

#include "moebudget/sim.hpp"

using namespace moebudget;

namespace {

SimConfig small_config(std::uint64_t seed = 42) {
    SimConfig cfg;
    cfg.num_layers = 4;
    cfg.num_experts = 6;
    cfg.k_orig = 4;
    cfg.tokens = 64;
    cfg.seed = seed;
    cfg.alpha = {0.5, 1.0, 2.0, 3.0};
    cfg.lambda = {2.0, 1.0, 1.0, 0.5};
    return cfg;
}

}  // namespace

TEST_CASE("gen_gate_logits is deterministic per (seed, layer)") {
    auto cfg = small_config();
    auto a = gen_gate_logits(cfg, 2);
    auto b = gen_gate_logits(cfg, 2);
    CHECK(a.values == b.values);
    auto other_layer = gen_gate_logits(cfg, 3);
    CHECK(a.values != other_layer.values);
    auto other_seed = gen_gate_logits(small_config(43), 2);
    CHECK(a.values != other_seed.values);
}

TEST_CASE("tiny alpha gives near-uniform routing") {
    auto cfg = small_config();
    cfg.alpha = {1e-3, 1e-3, 1e-3, 1e-3};
    auto probs = gate_softmax(gen_gate_logits(cfg, 0));
    const double max_h = std::log(static_cast<double>(cfg.num_experts));
    for (double h : token_routing_entropy(probs))
        CHECK(max_h - h < 0.05 * max_h);
}

TEST_CASE("synthetic oracle: full activation drops nothing") {
    auto cfg = small_config();
    cfg.k_orig = cfg.num_experts;
    SyntheticLossOracle oracle(cfg);
    LayerConfig all_n(cfg.num_layers, cfg.num_experts);
    CHECK(oracle.loss(all_n) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("synthetic oracle: uniform single layer top-2 mass") {
    SimConfig cfg;
    cfg.num_layers = 1;
    cfg.num_experts = 4;
    cfg.k_orig = 4;
    cfg.tokens = 256;
    cfg.seed = 7;
    cfg.alpha = {1e-4};
    cfg.lambda = {1.0};
    SyntheticLossOracle oracle(cfg);
    CHECK(oracle.loss({2}) == doctest::Approx(std::exp(0.5)).epsilon(1e-3));
}

TEST_CASE("oracle losses are monotone in every coordinate") {
    auto cfg = small_config();
    SyntheticLossOracle oracle(cfg);
    std::mt19937_64 rng(5);
    for (int it = 0; it < 100; ++it) {
        LayerConfig lo(cfg.num_layers), hi(cfg.num_layers);
        for (int i = 0; i < cfg.num_layers; ++i) {
            lo[i] = 1 + static_cast<int>(rng() % cfg.k_orig);
            hi[i] = lo[i] + static_cast<int>(rng() % (cfg.k_orig - lo[i] + 1));
        }
        CHECK(oracle.loss(hi) <= oracle.loss(lo) + 1e-15);
    }
}

TEST_CASE("profiled rows from the synthetic oracle are non-increasing in k") {
    auto cfg = small_config();
    SyntheticLossOracle oracle(cfg);
    auto s = profile_sensitivity(oracle, cfg.num_layers, cfg.k_orig);
    for (int i = 0; i < cfg.num_layers; ++i)
        for (int k = 2; k <= cfg.k_orig; ++k)
            CHECK(s.at(i, k) <= s.at(i, k - 1) + 1e-15);
}

TEST_CASE("separability identity holds through the profiling protocol") {
    auto cfg = small_config();
    SyntheticLossOracle oracle(cfg);
    auto s = profile_sensitivity(oracle, cfg.num_layers, cfg.k_orig);
    const double L = cfg.num_layers;
    for (int i = 0; i < cfg.num_layers; ++i)
        for (int k = 1; k <= cfg.k_orig; ++k)
            for (int k2 = 1; k2 <= cfg.k_orig; ++k2) {
                double expect = cfg.lambda[i] *
                                (oracle.dropped_mass(i, k) - oracle.dropped_mass(i, k2)) / L;
                CHECK(std::log(s.at(i, k)) - std::log(s.at(i, k2)) ==
                      doctest::Approx(expect).epsilon(1e-9));
            }
}

TEST_CASE("full-budget pipeline reduces to plain top-k everywhere") {
    auto cfg = small_config();
    BudgetSpec spec{cfg.num_layers, cfg.k_orig, cfg.num_layers * cfg.k_orig};
    auto report = run_pipeline(cfg, spec, cfg.k_orig);
    for (int i = 0; i < cfg.num_layers; ++i) {
        CHECK(report.allocation[i] == cfg.k_orig);
        auto probs = gate_softmax(gen_gate_logits(cfg, i));
        CHECK(report.plans[i].mask == top_k_route(probs, cfg.k_orig));
        CHECK(report.layers[i].js == 0.0);
        CHECK(report.layers[i].entropy_delta == 0.0);
    }
    CHECK(report.speedup_vs_full == 1.0);
}

TEST_CASE("half-budget pipeline: speedup exactly 2 under zero overhead") {
    auto cfg = small_config();
    cfg.k_orig = 4;
    BudgetSpec spec{cfg.num_layers, cfg.k_orig, cfg.num_layers * 2};
    auto report = run_pipeline(cfg, spec, 1);
    CHECK(report.allocation.sum() == cfg.num_layers * 2);
    CHECK(report.speedup_vs_full == 2.0);
    CHECK(report.oracle_calls == 1 + cfg.num_layers * (cfg.k_orig - 1));
}

TEST_CASE("front-loaded importance pulls budget toward high-lambda layers") {
    auto cfg = small_config();
    cfg.alpha = {1.0, 1.0, 1.0, 1.0};
    cfg.lambda = {1.0, 1.0, 1.0, 1.0};
    BudgetSpec spec{cfg.num_layers, cfg.k_orig, 10};
    auto uniform_run = run_pipeline(cfg, spec, 1);

    auto heavy = cfg;
    heavy.lambda = {8.0, 4.0, 1.0, 0.25};
    auto heavy_run = run_pipeline(heavy, spec, 1);
    // weakly more budget on the emphasized front layers
    CHECK(heavy_run.allocation[0] >= uniform_run.allocation[0]);
    CHECK(heavy_run.allocation[0] + heavy_run.allocation[1] >=
          uniform_run.allocation[0] + uniform_run.allocation[1]);
}

TEST_CASE("pipeline reports are deterministic given the config") {
    auto cfg = small_config();
    BudgetSpec spec{cfg.num_layers, cfg.k_orig, 10};
    auto a = run_pipeline(cfg, spec, 1);
    auto b = run_pipeline(cfg, spec, 1);
    CHECK(a.allocation == b.allocation);
    CHECK(a.objective == b.objective);
    REQUIRE(a.plans.size() == b.plans.size());
    for (std::size_t i = 0; i < a.plans.size(); ++i)
        CHECK(a.plans[i].mask == b.plans[i].mask);
}

TEST_CASE("SimConfig JSON round-trip and validation") {
    auto cfg = small_config();
    auto j = cfg.to_json();
    auto back = SimConfig::from_json(j);
    CHECK(back.to_json() == j);
    auto bad = j;
    bad["k_orig"] = 99;
    CHECK_THROWS_AS(SimConfig::from_json(bad), invalid_input_error);
}
