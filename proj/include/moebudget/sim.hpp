// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <json.hpp>

#include "moebudget/budget.hpp"
#include "moebudget/layer_alloc.hpp"
#include "moebudget/metrics.hpp"
#include "moebudget/routing.hpp"
#include "moebudget/sensitivity.hpp"
#include "moebudget/token_alloc.hpp"

namespace moebudget {

/// Synthetic MoE workload: L layers of T tokens over N experts, routing
/// peakedness controlled per layer by alpha (logit scale) and loss weight by
/// lambda. The seed fully determines all generated data.
struct SimConfig {
    int num_layers = 0;   // L
    int num_experts = 0;  // N
    int k_orig = 0;
    std::size_t tokens = 0; // T per batch
    std::uint64_t seed = 0;
    std::vector<double> alpha;  // per layer, > 0
    std::vector<double> lambda; // per layer, >= 0

    void validate() const;
    nlohmann::json to_json() const;
    static SimConfig from_json(const nlohmann::json& j);
};

/// Deterministic per-(seed, layer) logits: alpha-scaled standard-normal
/// draws, so alpha -> 0 gives near-uniform softmax rows and large alpha
/// gives peaked ones.
GateLogits gen_gate_logits(const SimConfig& cfg, int layer);

/// Layer-separable loss: loss(C) = exp((1/L) * sum_i lambda_i * m_i(C_i)),
/// where m_i(k) is the mean dropped routing mass (1 - top-k score sum) over
/// the layer's simulated tokens. Monotone non-increasing in every C_i.
class SyntheticLossOracle : public LossOracle {
public:
    explicit SyntheticLossOracle(const SimConfig& cfg);
    double loss(const LayerConfig& config) const override;

    /// m_i(k), exposed for the separability identity checks.
    double dropped_mass(int layer, int k) const;

private:
    int num_layers_;
    int k_orig_;
    std::vector<double> lambda_;
    std::vector<std::vector<double>> mass_; // [layer][k-1]
};

/// Counts calls to a wrapped oracle; test/manifest instrumentation.
class CountingOracle : public LossOracle {
public:
    explicit CountingOracle(const LossOracle& inner) : inner_(inner) {}
    double loss(const LayerConfig& config) const override {
        ++calls_;
        return inner_.loss(config);
    }
    long long calls() const { return calls_; }

private:
    const LossOracle& inner_;
    mutable long long calls_ = 0;
};

struct LayerReport {
    int layer = 0;
    int allocated_k = 0;
    long long slots_used = 0;
    std::optional<double> load_spearman;   // counts, plan vs. full activation
    double entropy_delta = 0.0;            // normalized entropy, full - plan
    double js = 0.0;                       // weighted load distributions
    std::optional<double> entropy_alloc_spearman; // token entropy vs. per-token count
};

struct PipelineReport {
    SensitivityMatrix sensitivity;         // normalized (submin)
    SensitivityMatrix sensitivity_raw;
    AllocationVector allocation;
    double objective = 0.0;
    long long oracle_calls = 0;
    std::vector<RedistributionPlan> plans; // one per layer
    std::vector<LayerReport> layers;
    double speedup_vs_full = 0.0;          // zero-overhead linear cost model
};

/// Full pipeline at desk scale: profile the synthetic oracle, solve the
/// layer DP, redistribute per layer, compare loads against plain
/// Top-k_orig routing. Deterministic given cfg.
PipelineReport run_pipeline(const SimConfig& cfg, const BudgetSpec& spec, int k_base);

}  // namespace moebudget
