// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "moop/tensor.hpp"

namespace moop::ad {

void adam_step(std::span<Tensor> params, AdamState& state) {
    if (state.m.empty()) {
        state.m.reserve(params.size());
        state.v.reserve(params.size());
        for (const auto& p : params) {
            state.m.emplace_back(p.numel(), 0.0);
            state.v.emplace_back(p.numel(), 0.0);
        }
    }
    if (state.m.size() != params.size()) throw std::logic_error("adam_step: parameter list changed between steps");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i].has_grad())
            throw std::logic_error("adam_step: parameter '" + params[i].name() + "' has no gradient");
        if (state.m[i].size() != params[i].numel())
            throw std::logic_error("adam_step: moment shape mismatch for '" + params[i].name() + "'");
    }

    ++state.step;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto w = params[i].mutable_values();
        auto g = params[i].mutable_grad();
        auto& m = state.m[i];
        auto& v = state.v[i];
        for (std::size_t j = 0; j < w.size(); ++j) {
            m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
            v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
            const double m_hat = m[j] / bc1;
            const double v_hat = v[j] / bc2;
            w[j] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
            g[j] = 0.0;
        }
    }
}

void zero_grad(std::span<Tensor> params) {
    for (auto& p : params) p.zero_grad();
}

double grad_norm(std::span<const Tensor> params) {
    double sq = 0.0;
    for (const auto& p : params)
        for (double g : p.grad()) sq += g * g;
    return std::sqrt(sq);
}

double clip_grad_norm(std::span<Tensor> params, double max_norm) {
    const double norm = grad_norm(params);
    if (max_norm > 0.0 && norm > max_norm) {
        const double f = max_norm / norm;
        for (auto& p : params)
            for (auto& g : p.mutable_grad()) g *= f;
    }
    return norm;
}

double grad_check(const std::function<Tensor()>& loss, std::span<Tensor> params, double eps) {
    zero_grad(params);
    loss().backward();
    std::vector<std::vector<double>> analytic;
    for (const auto& p : params) {
        auto g = p.grad();
        analytic.emplace_back(g.begin(), g.end());
        if (analytic.back().empty()) analytic.back().assign(p.numel(), 0.0);
    }
    zero_grad(params);

    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto w = params[i].mutable_values();
        for (std::size_t j = 0; j < w.size(); ++j) {
            const double saved = w[j];
            w[j] = saved + eps;
            const double up = loss().item();
            w[j] = saved - eps;
            const double down = loss().item();
            w[j] = saved;
            const double numeric = (up - down) / (2.0 * eps);
            const double a = analytic[i][j];
            const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
            worst = std::max(worst, std::abs(a - numeric) / denom);
        }
    }
    return worst;
}

} // namespace moop::ad
