// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "moebudget/errors.hpp"
#include "moebudget/matrix.hpp"

namespace moebudget {

/// Raw gate outputs before the softmax, T tokens x N experts.
struct GateLogits {
    Matrix values;
};

/// Row-stochastic T x N matrix of per-token routing probabilities.
struct RoutingScoreMatrix {
    Matrix probs;

    std::size_t num_tokens() const { return probs.rows(); }
    std::size_t num_experts() const { return probs.cols(); }

    /// Checks row sums (1 +/- 1e-9) and entry range [0,1]; throws
    /// invalid_input_error on violation.
    static RoutingScoreMatrix validated(Matrix probs);
};

/// Token -> expert activation decisions with the retained routing weights.
/// weights[t,e] is 0 wherever the pair is inactive; an active pair may carry
/// weight 0 (a selected zero-probability expert).
struct ActivationMask {
    std::vector<std::uint8_t> active; // T*N, row-major
    Matrix weights;                   // T x N

    ActivationMask() = default;
    ActivationMask(std::size_t tokens, std::size_t experts)
        : active(tokens * experts, 0), weights(tokens, experts, 0.0) {}

    std::size_t num_tokens() const { return weights.rows(); }
    std::size_t num_experts() const { return weights.cols(); }

    bool is_active(std::size_t t, std::size_t e) const {
        return active[t * num_experts() + e] != 0;
    }
    void set_active(std::size_t t, std::size_t e, double weight) {
        active[t * num_experts() + e] = 1;
        weights(t, e) = weight;
    }
    std::size_t active_count(std::size_t t) const {
        std::size_t n = 0;
        for (std::size_t e = 0; e < num_experts(); ++e) n += is_active(t, e);
        return n;
    }
    std::size_t total_active() const {
        std::size_t n = 0;
        for (std::uint8_t a : active) n += a;
        return n;
    }

    bool operator==(const ActivationMask&) const = default;
};

/// N fixed affine experts x -> W x + b over a hidden size H, parameters drawn
/// from a seeded generator. Just enough structure to observe the weighted sum.
class ToyExpertBank {
public:
    ToyExpertBank(std::size_t num_experts, std::size_t hidden_size, std::uint64_t seed);

    std::size_t num_experts() const { return num_experts_; }
    std::size_t hidden_size() const { return hidden_size_; }

    /// y = W_e x + b_e for expert e.
    std::vector<double> apply(std::size_t expert, std::span<const double> x) const;

private:
    std::size_t num_experts_;
    std::size_t hidden_size_;
    std::vector<double> weights_; // N * H * H
    std::vector<double> biases_;  // N * H
};

/// Row-wise softmax in max-subtraction form. Throws invalid_input_error on
/// non-finite logits.
RoutingScoreMatrix gate_softmax(const GateLogits& logits);

/// Retain each token's k highest-probability experts (ties broken by lower
/// expert index). Weights stay unrenormalized unless `renormalize` is set.
ActivationMask top_k_route(const RoutingScoreMatrix& probs, std::size_t k,
                           bool renormalize = false);

/// y_t = sum_e weights[t,e] * E_e(x_t); zero-weight experts are skipped.
Matrix toy_moe_forward(const Matrix& x, const ActivationMask& mask,
                       const ToyExpertBank& bank);

/// Per-token Shannon entropy in nats, 0*log 0 = 0.
std::vector<double> token_routing_entropy(const RoutingScoreMatrix& probs);

}  // namespace moebudget
