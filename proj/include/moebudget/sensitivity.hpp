// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "moebudget/errors.hpp"
#include "moebudget/matrix.hpp"

namespace moebudget {

/// Per-layer Top-K settings, C[i] in 1..k_orig.
using LayerConfig = std::vector<int>;

/// Perplexity-like evaluator of a full per-layer configuration. Must be
/// deterministic: equal configurations yield equal losses.
class LossOracle {
public:
    virtual ~LossOracle() = default;
    virtual double loss(const LayerConfig& config) const = 0;
};

enum class Normalization { none, subtract_row_min, divide_by_full_activation };

std::string to_string(Normalization n);
Normalization normalization_from_string(const std::string& s);

/// L x k_orig matrix of profiled losses; column k-1 holds the loss with the
/// target layer at Top-k under the isolation protocol (deeper layers at 1,
/// shallower layers at k_orig).
struct SensitivityMatrix {
    Matrix values; // L x k_orig
    Normalization normalization = Normalization::none;

    std::size_t num_layers() const { return values.rows(); }
    std::size_t k_orig() const { return values.cols(); }

    double at(std::size_t layer, int k) const { return values(layer, k - 1); }
};

/// Sensitivity profiling sweep: start from the all-k_orig configuration, then
/// for each layer from deepest to shallowest lower its Top-K from k_orig down
/// to 1, keeping deeper layers pinned at 1 and shallower ones at k_orig.
/// Sequential mode reuses the previous measurement for S[i, k_orig] (exactly
/// 1 + L*(k_orig-1) oracle calls); independent mode re-measures it per layer.
/// Oracle exceptions surface as oracle_error with the failing configuration.
SensitivityMatrix profile_sensitivity(const LossOracle& oracle, int num_layers,
                                      int k_orig, bool independent = false);

SensitivityMatrix normalize_rows(const SensitivityMatrix& s, Normalization strategy);

}  // namespace moebudget
