// SPDX-License-Identifier: Apache-2.0
#include "moebudget/sim.hpp"

#include <algorithm>
#include <cmath>

#include "moebudget/rng.hpp"

namespace moebudget {

void SimConfig::validate() const {
    if (num_layers < 1 || num_experts < 1 || tokens < 1)
        throw invalid_input_error("SimConfig: L, N and T must be >= 1");
    if (k_orig < 1 || k_orig > num_experts)
        throw invalid_input_error("SimConfig: k_orig out of [1, N]");
    if (alpha.size() != static_cast<std::size_t>(num_layers) ||
        lambda.size() != static_cast<std::size_t>(num_layers))
        throw invalid_input_error("SimConfig: alpha/lambda must have one entry per layer");
    for (double a : alpha)
        if (!(a > 0.0)) throw invalid_input_error("SimConfig: alpha must be > 0");
    for (double l : lambda)
        if (!(l >= 0.0)) throw invalid_input_error("SimConfig: lambda must be >= 0");
}

nlohmann::json SimConfig::to_json() const {
    return {{"L", num_layers}, {"N", num_experts}, {"k_orig", k_orig},
            {"T", tokens},     {"seed", seed},     {"alpha", alpha},
            {"lambda", lambda}};
}

SimConfig SimConfig::from_json(const nlohmann::json& j) {
    SimConfig cfg;
    cfg.num_layers = j.at("L").get<int>();
    cfg.num_experts = j.at("N").get<int>();
    cfg.k_orig = j.at("k_orig").get<int>();
    cfg.tokens = j.at("T").get<std::size_t>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("alpha"))
        cfg.alpha = j.at("alpha").get<std::vector<double>>();
    else
        cfg.alpha.assign(cfg.num_layers, 1.0);
    if (j.contains("lambda"))
        cfg.lambda = j.at("lambda").get<std::vector<double>>();
    else
        cfg.lambda.assign(cfg.num_layers, 1.0);
    cfg.validate();
    return cfg;
}

GateLogits gen_gate_logits(const SimConfig& cfg, int layer) {
    cfg.validate();
    if (layer < 0 || layer >= cfg.num_layers)
        throw invalid_input_error("gen_gate_logits: layer out of range");
    auto rng = seeded_engine(cfg.seed, static_cast<std::uint64_t>(layer));
    Matrix logits(cfg.tokens, cfg.num_experts);
    const double scale = cfg.alpha[layer];
    for (std::size_t t = 0; t < cfg.tokens; ++t)
        for (int e = 0; e < cfg.num_experts; ++e)
            logits(t, e) = scale * standard_normal(rng);
    return GateLogits{std::move(logits)};
}

SyntheticLossOracle::SyntheticLossOracle(const SimConfig& cfg)
    : num_layers_(cfg.num_layers), k_orig_(cfg.k_orig), lambda_(cfg.lambda) {
    cfg.validate();
    mass_.resize(num_layers_);
    for (int i = 0; i < num_layers_; ++i) {
        RoutingScoreMatrix probs = gate_softmax(gen_gate_logits(cfg, i));
        mass_[i].assign(k_orig_, 0.0);
        std::vector<double> row(cfg.num_experts);
        for (std::size_t t = 0; t < cfg.tokens; ++t) {
            auto r = probs.probs.row(t);
            row.assign(r.begin(), r.end());
            std::sort(row.begin(), row.end(), std::greater<>());
            double kept = 0.0;
            for (int k = 1; k <= k_orig_; ++k) {
                kept += row[k - 1];
                mass_[i][k - 1] += std::max(0.0, 1.0 - kept);
            }
        }
        for (double& m : mass_[i]) m /= static_cast<double>(cfg.tokens);
    }
}

double SyntheticLossOracle::dropped_mass(int layer, int k) const {
    return mass_[layer][k - 1];
}

double SyntheticLossOracle::loss(const LayerConfig& config) const {
    if (config.size() != static_cast<std::size_t>(num_layers_))
        throw invalid_input_error("SyntheticLossOracle: config length mismatch");
    double acc = 0.0;
    for (int i = 0; i < num_layers_; ++i) {
        int k = config[i];
        if (k < 1 || k > k_orig_)
            throw invalid_input_error("SyntheticLossOracle: config entry out of range");
        acc += lambda_[i] * mass_[i][k - 1];
    }
    return std::exp(acc / static_cast<double>(num_layers_));
}

PipelineReport run_pipeline(const SimConfig& cfg, const BudgetSpec& spec, int k_base) {
    cfg.validate();
    spec.validate();
    if (spec.num_layers != cfg.num_layers || spec.k_orig != cfg.k_orig)
        throw invalid_input_error("run_pipeline: spec does not match config");

    PipelineReport report;

    SyntheticLossOracle oracle(cfg);
    CountingOracle counting(oracle);
    report.sensitivity_raw =
        profile_sensitivity(counting, cfg.num_layers, cfg.k_orig);
    report.oracle_calls = counting.calls();
    report.sensitivity =
        normalize_rows(report.sensitivity_raw, Normalization::subtract_row_min);

    AllocationResult best = optimal_allocation(report.sensitivity, spec);
    report.allocation = best.alloc;
    report.objective = best.objective;

    AllocationVector full;
    full.per_layer.assign(cfg.num_layers, cfg.k_orig);
    report.speedup_vs_full =
        speedup_estimate(full, report.allocation, CostModel{0.0, 1.0});

    for (int i = 0; i < cfg.num_layers; ++i) {
        RoutingScoreMatrix probs = gate_softmax(gen_gate_logits(cfg, i));
        LayerTokenBudget budget{i, static_cast<double>(report.allocation[i]),
                                std::min(k_base, report.allocation[i]), cfg.tokens};
        RedistributionPlan plan = redistribute(probs, budget, cfg.k_orig);
        ActivationMask reference = top_k_route(probs, cfg.k_orig);

        LayerReport lr;
        lr.layer = i;
        lr.allocated_k = report.allocation[i];
        lr.slots_used = plan.slots_used;

        ExpertLoad plan_load = expert_load(plan.mask);
        ExpertLoad ref_load = expert_load(reference);
        std::vector<double> plan_counts(plan_load.counts.begin(), plan_load.counts.end());
        std::vector<double> ref_counts(ref_load.counts.begin(), ref_load.counts.end());
        lr.load_spearman = spearman(ref_counts, plan_counts);
        lr.entropy_delta = normalized_entropy(ref_load.weighted_distribution()) -
                           normalized_entropy(plan_load.weighted_distribution());
        lr.js = js_divergence(ref_load.weighted_distribution(),
                              plan_load.weighted_distribution());

        std::vector<double> entropy = token_routing_entropy(probs);
        std::vector<double> per_token(cfg.tokens);
        for (std::size_t t = 0; t < cfg.tokens; ++t)
            per_token[t] = static_cast<double>(plan.mask.active_count(t));
        lr.entropy_alloc_spearman = spearman(entropy, per_token);

        report.layers.push_back(std::move(lr));
        report.plans.push_back(std::move(plan));
    }
    return report;
}

}  // namespace moebudget
