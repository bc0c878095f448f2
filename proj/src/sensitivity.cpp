// SPDX-License-Identifier: Apache-2.0
#include "moebudget/sensitivity.hpp"

#include <algorithm>
#include <cmath>

namespace moebudget {

std::string to_string(Normalization n) {
    switch (n) {
        case Normalization::none: return "none";
        case Normalization::subtract_row_min: return "submin";
        case Normalization::divide_by_full_activation: return "divfull";
    }
    return "none";
}

Normalization normalization_from_string(const std::string& s) {
    if (s == "none") return Normalization::none;
    if (s == "submin") return Normalization::subtract_row_min;
    if (s == "divfull") return Normalization::divide_by_full_activation;
    throw invalid_input_error("unknown normalization: " + s);
}

namespace {

double call_oracle(const LossOracle& oracle, const LayerConfig& config) {
    double v;
    try {
        v = oracle.loss(config);
    } catch (const std::exception& e) {
        throw oracle_error(std::string("oracle failed: ") + e.what(), config);
    }
    if (!std::isfinite(v) || v <= 0.0)
        throw oracle_error("oracle returned a non-positive or non-finite loss", config);
    return v;
}

}  // namespace

SensitivityMatrix profile_sensitivity(const LossOracle& oracle, int num_layers,
                                      int k_orig, bool independent) {
    if (num_layers < 1 || k_orig < 1)
        throw invalid_input_error("profile_sensitivity: L and k_orig must be >= 1");
    SensitivityMatrix s;
    s.values = Matrix(num_layers, k_orig);

    LayerConfig config(num_layers, k_orig);
    double ppl = call_oracle(oracle, config);
    for (int i = num_layers - 1; i >= 0; --i) {
        if (independent && i < num_layers - 1) {
            // explicit re-measurement of the layer's full-activation point:
            // layers > i at 1, layers <= i at k_orig.  The top layer's point
            // is the initial all-k_orig call, so there is nothing to redo.
            LayerConfig c(num_layers, k_orig);
            for (int j = i + 1; j < num_layers; ++j) c[j] = 1;
            s.values(i, k_orig - 1) = call_oracle(oracle, c);
        } else {
            s.values(i, k_orig - 1) = ppl;
        }
        for (int k = k_orig - 1; k >= 1; --k) {
            config[i] = k;
            ppl = call_oracle(oracle, config);
            s.values(i, k - 1) = ppl;
        }
    }
    return s;
}

SensitivityMatrix normalize_rows(const SensitivityMatrix& s, Normalization strategy) {
    SensitivityMatrix out = s;
    out.normalization = strategy;
    if (strategy == Normalization::none) return out;
    for (std::size_t i = 0; i < s.num_layers(); ++i) {
        auto row = out.values.row(i);
        if (strategy == Normalization::subtract_row_min) {
            double m = *std::min_element(row.begin(), row.end());
            for (double& v : row) v -= m;
        } else {
            double full = row[s.k_orig() - 1];
            if (full == 0.0)
                throw invalid_input_error("normalize_rows: zero full-activation entry");
            for (double& v : row) v /= full;
        }
    }
    return out;
}

}  // namespace moebudget
