// SPDX-License-Identifier: Apache-2.0
#include "moebudget/routing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "moebudget/rng.hpp"

namespace moebudget {

RoutingScoreMatrix RoutingScoreMatrix::validated(Matrix probs) {
    for (std::size_t t = 0; t < probs.rows(); ++t) {
        double sum = 0.0;
        for (double v : probs.row(t)) {
            if (!(v >= 0.0 && v <= 1.0))
                throw invalid_input_error("RoutingScoreMatrix: entry outside [0,1]");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw invalid_input_error("RoutingScoreMatrix: row " + std::to_string(t) +
                                      " sums to " + std::to_string(sum));
    }
    return RoutingScoreMatrix{std::move(probs)};
}

RoutingScoreMatrix gate_softmax(const GateLogits& logits) {
    const Matrix& z = logits.values;
    if (z.rows() == 0 || z.cols() == 0)
        throw invalid_input_error("gate_softmax: empty logits");
    if (!z.all_finite())
        throw invalid_input_error("gate_softmax: non-finite logit");
    Matrix probs(z.rows(), z.cols());
    for (std::size_t t = 0; t < z.rows(); ++t) {
        auto row = z.row(t);
        double m = *std::max_element(row.begin(), row.end());
        double denom = 0.0;
        for (std::size_t e = 0; e < z.cols(); ++e) {
            probs(t, e) = std::exp(row[e] - m);
            denom += probs(t, e);
        }
        for (std::size_t e = 0; e < z.cols(); ++e) probs(t, e) /= denom;
    }
    return RoutingScoreMatrix{std::move(probs)};
}

ActivationMask top_k_route(const RoutingScoreMatrix& probs, std::size_t k,
                           bool renormalize) {
    const std::size_t T = probs.num_tokens();
    const std::size_t N = probs.num_experts();
    if (k < 1 || k > N)
        throw budget_error("top_k_route: k out of [1, N]");
    ActivationMask mask(T, N);
    std::vector<std::size_t> order(N);
    for (std::size_t t = 0; t < T; ++t) {
        auto row = probs.probs.row(t);
        std::iota(order.begin(), order.end(), 0);
        // descending score, ties to the lower expert index
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
        double kept = 0.0;
        for (std::size_t r = 0; r < k; ++r) {
            mask.set_active(t, order[r], row[order[r]]);
            kept += row[order[r]];
        }
        if (renormalize && kept > 0.0) {
            for (std::size_t r = 0; r < k; ++r)
                mask.weights(t, order[r]) /= kept;
        }
    }
    return mask;
}

ToyExpertBank::ToyExpertBank(std::size_t num_experts, std::size_t hidden_size,
                             std::uint64_t seed)
    : num_experts_(num_experts),
      hidden_size_(hidden_size),
      weights_(num_experts * hidden_size * hidden_size),
      biases_(num_experts * hidden_size) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(hidden_size));
    for (std::size_t e = 0; e < num_experts; ++e) {
        auto rng = seeded_engine(seed, e);
        for (std::size_t i = 0; i < hidden_size * hidden_size; ++i)
            weights_[e * hidden_size * hidden_size + i] = scale * standard_normal(rng);
        for (std::size_t i = 0; i < hidden_size; ++i)
            biases_[e * hidden_size + i] = scale * standard_normal(rng);
    }
}

std::vector<double> ToyExpertBank::apply(std::size_t expert,
                                         std::span<const double> x) const {
    if (x.size() != hidden_size_)
        throw invalid_input_error("ToyExpertBank: input size mismatch");
    const double* w = weights_.data() + expert * hidden_size_ * hidden_size_;
    const double* b = biases_.data() + expert * hidden_size_;
    std::vector<double> y(hidden_size_);
    for (std::size_t i = 0; i < hidden_size_; ++i) {
        double acc = b[i];
        for (std::size_t j = 0; j < hidden_size_; ++j)
            acc += w[i * hidden_size_ + j] * x[j];
        y[i] = acc;
    }
    return y;
}

Matrix toy_moe_forward(const Matrix& x, const ActivationMask& mask,
                       const ToyExpertBank& bank) {
    const std::size_t T = x.rows();
    if (mask.num_tokens() != T || mask.num_experts() != bank.num_experts() ||
        x.cols() != bank.hidden_size())
        throw invalid_input_error("toy_moe_forward: dimension mismatch");
    Matrix y(T, bank.hidden_size(), 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t e = 0; e < bank.num_experts(); ++e) {
            double w = mask.weights(t, e);
            if (w == 0.0) continue;
            auto out = bank.apply(e, x.row(t));
            for (std::size_t i = 0; i < out.size(); ++i) y(t, i) += w * out[i];
        }
    }
    return y;
}

std::vector<double> token_routing_entropy(const RoutingScoreMatrix& probs) {
    std::vector<double> h(probs.num_tokens(), 0.0);
    for (std::size_t t = 0; t < probs.num_tokens(); ++t) {
        double acc = 0.0;
        for (double p : probs.probs.row(t))
            if (p > 0.0) acc -= p * std::log(p);
        h[t] = acc;
    }
    return h;
}

}  // namespace moebudget
