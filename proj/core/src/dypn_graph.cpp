// SPDX-License-Identifier: Apache-2.0
// Differentiable decode. Mirrors TourDecoder::step operation for operation.
#include <algorithm>
#include <cmath>

#include "moop/dypn.hpp"
#include "moop/error.hpp"
#include "moop/rng.hpp"

namespace moop {

using namespace moop::ad;

namespace {

Tensor coords_tensor(std::span<const Point2> coords) {
    std::vector<double> v;
    v.reserve(coords.size() * 2);
    for (const auto& c : coords) {
        v.push_back(c[0]);
        v.push_back(c[1]);
    }
    return Tensor::constant({coords.size(), 2}, std::move(v));
}

Tensor as_row(const Tensor& bias) { return reshape(bias, {1, bias.numel()}); }

} // namespace

Tensor static_embed(const ActorParameters& actor, std::span<const Point2> coords) {
    if (coords.empty()) throw ValidationError("static_embed: no cities");
    return pointwise_linear(coords_tensor(coords), actor.static_w, actor.static_b);
}

Tensor dynamic_embed(const ActorParameters& actor, std::span<const double> feature) {
    auto f = Tensor::constant({feature.size(), 1}, {feature.begin(), feature.end()});
    return pointwise_linear(f, actor.dynamic_w, actor.dynamic_b);
}

Rollout rollout(const ActorParameters& a, std::span<const Point2> coords, DecodeMode mode, Rng* rng,
                const RolloutOptions& options, std::span<const City> forced) {
    const std::size_t n = coords.size();
    const auto d = static_cast<std::size_t>(a.hidden);
    if (n == 0) throw ValidationError("rollout: no cities");
    if (!forced.empty() && forced.size() != n) throw ValidationError("rollout: forced tour must cover every city");
    if (forced.empty() && mode == DecodeMode::sample && rng == nullptr)
        throw ValidationError("rollout: sampling needs an rng");
    if (options.training && options.dropout > 0.0 && options.dropout_rng == nullptr)
        throw ValidationError("rollout: dropout needs an rng");

    const DistanceMatrix dist(coords);
    const Tensor s = static_embed(a, coords);
    const Tensor gi_r = pointwise_linear(s, a.gru_w_ir, a.gru_b_ir);
    const Tensor gi_z = pointwise_linear(s, a.gru_w_iz, a.gru_b_iz);
    const Tensor gi_n = pointwise_linear(s, a.gru_w_in, a.gru_b_in);
    const Tensor zero_embedding = as_row(a.static_b);
    const Tensor gi0_r = linear(zero_embedding, a.gru_w_ir, a.gru_b_ir);
    const Tensor gi0_z = linear(zero_embedding, a.gru_w_iz, a.gru_b_iz);
    const Tensor gi0_n = linear(zero_embedding, a.gru_w_in, a.gru_b_in);
    const Tensor att_s = matmul(s, a.att_w_static);
    const Tensor ctx_s = matmul(s, a.ctx_w_static);
    const Tensor dyn_dir = matmul(a.dynamic_w, a.att_w_dynamic);
    const Tensor dyn_off = matmul(as_row(a.dynamic_b), a.att_w_dynamic);
    const Tensor ones_n = Tensor::constant({n, 1}, std::vector<double>(n, 1.0));
    const Tensor ones_d = Tensor::constant({1, d}, std::vector<double>(d, 1.0));

    Tensor h = Tensor::zeros({1, d});
    std::vector<char> visited(n, 0);
    std::optional<City> last;
    std::vector<Tensor> picked;
    Rollout out;

    for (std::size_t t = 0; t < n; ++t) {
        const Tensor xr = last ? select_row(gi_r, *last) : gi0_r;
        const Tensor xz = last ? select_row(gi_z, *last) : gi0_z;
        const Tensor xn = last ? select_row(gi_n, *last) : gi0_n;
        const Tensor r = sigmoid(add(xr, linear(h, a.gru_w_hr, a.gru_b_hr)));
        const Tensor z = sigmoid(add(xz, linear(h, a.gru_w_hz, a.gru_b_hz)));
        const Tensor cand = tanh(add(xn, mul(r, linear(h, a.gru_w_hn, a.gru_b_hn))));
        h = add(mul(sub(ones_d, z), cand), mul(z, h));
        if (options.training && options.dropout > 0.0) h = dropout(h, options.dropout, *options.dropout_rng, true);

        std::vector<double> feature(n, 0.0);
        if (last && a.use_dynamic) feature = dynamic_feature(dist.row(*last));
        const Tensor f = Tensor::constant({n, 1}, feature);

        const Tensor shared = add(matmul(h, a.att_w_hidden), dyn_off);
        const Tensor pre = add(add(att_s, matmul(f, dyn_dir)), matmul(ones_n, shared));
        const Tensor u = reshape(matmul(tanh(pre), a.att_v), {1, n});
        const Tensor attn = softmax(u, 1);
        const Tensor context = matmul(attn, s);
        const Tensor pre_ctx = add(ctx_s, matmul(ones_n, matmul(context, a.ctx_w_context)));
        const Tensor logits = reshape(matmul(tanh(pre_ctx), a.ctx_v), {n});
        const Tensor logp = log_softmax(masked_fill(logits, visited), 0);

        std::vector<double> probs(n);
        for (std::size_t i = 0; i < n; ++i) probs[i] = std::exp(logp.at(i));
        City choice = 0;
        if (!forced.empty()) {
            choice = forced[t];
            if (choice < 0 || static_cast<std::size_t>(choice) >= n || visited[choice])
                throw ValidationError("rollout: forced tour is not a permutation");
        } else if (mode == DecodeMode::greedy) {
            choice = static_cast<City>(std::max_element(probs.begin(), probs.end()) - probs.begin());
        } else {
            choice = static_cast<City>(rng->categorical(probs));
        }
        picked.push_back(pick(logp, static_cast<std::size_t>(choice)));
        out.step_log_probs.push_back(logp.at(static_cast<std::size_t>(choice)));
        out.step_probs.push_back(std::move(probs));
        out.order.push_back(choice);
        visited[choice] = 1;
        last = choice;
    }
    out.log_prob = sum(concat(picked, 0));
    return out;
}

} // namespace moop
