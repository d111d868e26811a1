// SPDX-License-Identifier: Apache-2.0
#include "moop/dypn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Core>

#include "moop/error.hpp"
#include "moop/rng.hpp"

namespace moop {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVec = Eigen::Matrix<double, 1, Eigen::Dynamic>;
using CMat = Eigen::Map<const RowMat>;
using MMat = Eigen::Map<RowMat>;
using CRow = Eigen::Map<const RowVec>;
using MRow = Eigen::Map<RowVec>;

CMat as_mat(const ad::Tensor& t) {
    const auto r = static_cast<Eigen::Index>(t.rank() == 1 ? 1 : t.dim(0));
    const auto c = static_cast<Eigen::Index>(t.rank() == 1 ? t.dim(0) : t.dim(1));
    return CMat(t.values().data(), r, c);
}
CRow as_row(const ad::Tensor& t) { return CRow(t.values().data(), static_cast<Eigen::Index>(t.numel())); }

ad::Tensor uniform_param(ad::Shape shape, Rng& rng, double range, std::string name) {
    std::vector<double> v(ad::numel(shape));
    for (auto& x : v) x = rng.uniform(-range, range);
    return ad::Tensor::parameter(std::move(shape), std::move(v), std::move(name));
}

double sigmoid(double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
}

} // namespace

std::vector<std::pair<std::string, ad::Shape>> ActorParameters::layout(int hidden) {
    const auto d = static_cast<std::size_t>(hidden);
    return {
        {"static.weight", {2, d}},        {"static.bias", {d}},
        {"dynamic.weight", {1, d}},       {"dynamic.bias", {d}},
        {"gru.w_ir", {d, d}},             {"gru.w_iz", {d, d}},
        {"gru.w_in", {d, d}},             {"gru.w_hr", {d, d}},
        {"gru.w_hz", {d, d}},             {"gru.w_hn", {d, d}},
        {"gru.b_ir", {d}},                {"gru.b_iz", {d}},
        {"gru.b_in", {d}},                {"gru.b_hr", {d}},
        {"gru.b_hz", {d}},                {"gru.b_hn", {d}},
        {"attention.w_static", {d, d}},   {"attention.w_dynamic", {d, d}},
        {"attention.w_hidden", {d, d}},   {"attention.v", {d, 1}},
        {"context.w_static", {d, d}},     {"context.w_context", {d, d}},
        {"context.v", {d, 1}},
    };
}

std::vector<ad::Tensor> ActorParameters::tensors() const {
    return {static_w,     static_b,      dynamic_w,    dynamic_b,     gru_w_ir,      gru_w_iz,
            gru_w_in,     gru_w_hr,      gru_w_hz,     gru_w_hn,      gru_b_ir,      gru_b_iz,
            gru_b_in,     gru_b_hr,      gru_b_hz,     gru_b_hn,      att_w_static,  att_w_dynamic,
            att_w_hidden, att_v,         ctx_w_static, ctx_w_context, ctx_v};
}

namespace {

ActorParameters from_tensors(int hidden, bool use_dynamic, std::vector<ad::Tensor> t) {
    ActorParameters a;
    a.hidden = hidden;
    a.use_dynamic = use_dynamic;
    ad::Tensor* slots[] = {&a.static_w,     &a.static_b,      &a.dynamic_w,    &a.dynamic_b,     &a.gru_w_ir,
                           &a.gru_w_iz,     &a.gru_w_in,      &a.gru_w_hr,     &a.gru_w_hz,      &a.gru_w_hn,
                           &a.gru_b_ir,     &a.gru_b_iz,      &a.gru_b_in,     &a.gru_b_hr,      &a.gru_b_hz,
                           &a.gru_b_hn,     &a.att_w_static,  &a.att_w_dynamic, &a.att_w_hidden, &a.att_v,
                           &a.ctx_w_static, &a.ctx_w_context, &a.ctx_v};
    for (std::size_t i = 0; i < t.size(); ++i) *slots[i] = std::move(t[i]);
    return a;
}

} // namespace

ActorParameters ActorParameters::initialize(int hidden, Rng& rng, double init_range, bool use_dynamic) {
    if (hidden < 1) throw ValidationError("actor hidden width must be positive");
    std::vector<ad::Tensor> t;
    for (auto& [name, shape] : layout(hidden)) {
        double range = init_range;
        if (range <= 0.0) {
            // Fan-in scaling: 1/sqrt(inputs of the layer), capped at 1.
            std::size_t fan_in = static_cast<std::size_t>(hidden);
            if (name.starts_with("static.")) fan_in = 2;
            if (name.starts_with("dynamic.")) fan_in = 1;
            range = std::min(1.0, 1.0 / std::sqrt(static_cast<double>(fan_in)));
        }
        t.push_back(uniform_param(shape, rng, range, name));
    }
    return from_tensors(hidden, use_dynamic, std::move(t));
}

ActorParameters ActorParameters::clone() const {
    std::vector<ad::Tensor> t;
    for (const auto& p : tensors())
        t.push_back(ad::Tensor::parameter(p.shape(), {p.values().begin(), p.values().end()}, p.name()));
    return from_tensors(hidden, use_dynamic, std::move(t));
}

std::vector<double> dynamic_feature(std::span<const double> dist_row) {
    std::vector<double> out(dist_row.size(), 0.0);
    if (dist_row.empty()) return out;
    const auto [lo, hi] = std::minmax_element(dist_row.begin(), dist_row.end());
    const double range = *hi - *lo;
    if (!(range > 0.0)) return out;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*hi - dist_row[i]) / range;
    return out;
}

TourDecoder::TourDecoder(const ActorParameters& actor, std::span<const Point2> coords)
    : actor_(&actor), n_(static_cast<int>(coords.size())), d_(actor.hidden), dist_(coords) {
    if (n_ < 1) throw ValidationError("decoder needs at least one city");
    const Eigen::Index n = n_, d = d_;

    RowMat x(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) x.row(i) << coords[i][0], coords[i][1];

    s_.resize(static_cast<std::size_t>(n * d));
    MMat s(s_.data(), n, d);
    s.noalias() = x * as_mat(actor.static_w);
    s.rowwise() += as_row(actor.static_b);

    auto project = [&](std::vector<double>& dst, const ad::Tensor& w, const ad::Tensor* b) {
        dst.resize(static_cast<std::size_t>(n * d));
        MMat m(dst.data(), n, d);
        m.noalias() = s * as_mat(w);
        if (b) m.rowwise() += as_row(*b);
    };
    project(gi_r_, actor.gru_w_ir, &actor.gru_b_ir);
    project(gi_z_, actor.gru_w_iz, &actor.gru_b_iz);
    project(gi_n_, actor.gru_w_in, &actor.gru_b_in);
    project(att_static_, actor.att_w_static, nullptr);
    project(ctx_static_, actor.ctx_w_static, nullptr);

    // Embedding of the zero coordinate vector is the static bias.
    auto project0 = [&](std::vector<double>& dst, const ad::Tensor& w, const ad::Tensor& b) {
        dst.resize(static_cast<std::size_t>(d));
        MRow(dst.data(), d).noalias() = as_row(actor.static_b) * as_mat(w) + as_row(b);
    };
    project0(gi0_r_, actor.gru_w_ir, actor.gru_b_ir);
    project0(gi0_z_, actor.gru_w_iz, actor.gru_b_iz);
    project0(gi0_n_, actor.gru_w_in, actor.gru_b_in);

    dyn_dir_.resize(static_cast<std::size_t>(d));
    dyn_off_.resize(static_cast<std::size_t>(d));
    MRow(dyn_dir_.data(), d).noalias() = as_row(actor.dynamic_w) * as_mat(actor.att_w_dynamic);
    MRow(dyn_off_.data(), d).noalias() = as_row(actor.dynamic_b) * as_mat(actor.att_w_dynamic);
}

std::vector<double> TourDecoder::dynamic_embedding(std::span<const double> feature) const {
    std::vector<double> out(static_cast<std::size_t>(n_) * d_);
    auto w = actor_->dynamic_w.values();
    auto b = actor_->dynamic_b.values();
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < d_; ++j) out[static_cast<std::size_t>(i) * d_ + j] = feature[i] * w[j] + b[j];
    return out;
}

DecoderState TourDecoder::initial_state() const {
    DecoderState st;
    st.hidden.assign(static_cast<std::size_t>(d_), 0.0);
    st.visited.assign(static_cast<std::size_t>(n_), 0);
    return st;
}

std::vector<double> TourDecoder::feature_for(const DecoderState& state) const {
    if (!state.last || !actor_->use_dynamic) return std::vector<double>(static_cast<std::size_t>(n_), 0.0);
    return dynamic_feature(dist_.row(*state.last));
}

std::vector<double> TourDecoder::step(DecoderState& state, std::span<const double> feature) const {
    if (state.steps >= n_) throw ValidationError("decode_step: every city is already visited");
    const Eigen::Index n = n_, d = d_;
    const ActorParameters& a = *actor_;

    // GRU update from the embedding of the previously chosen city.
    const double* xr = state.last ? &gi_r_[static_cast<std::size_t>(*state.last) * d_] : gi0_r_.data();
    const double* xz = state.last ? &gi_z_[static_cast<std::size_t>(*state.last) * d_] : gi0_z_.data();
    const double* xn = state.last ? &gi_n_[static_cast<std::size_t>(*state.last) * d_] : gi0_n_.data();
    CRow h(state.hidden.data(), d);
    RowVec hr = h * as_mat(a.gru_w_hr) + as_row(a.gru_b_hr);
    RowVec hz = h * as_mat(a.gru_w_hz) + as_row(a.gru_b_hz);
    RowVec hn = h * as_mat(a.gru_w_hn) + as_row(a.gru_b_hn);
    RowVec h_new(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const double r = sigmoid(xr[j] + hr[j]);
        const double z = sigmoid(xz[j] + hz[j]);
        const double cand = std::tanh(xn[j] + r * hn[j]);
        h_new[j] = (1.0 - z) * cand + z * h[j];
    }
    std::copy(h_new.data(), h_new.data() + d, state.hidden.begin());

    // Attention over all cities: u_i = v_a . tanh(W_a [s_i; d_i; h]).
    RowVec shared = h_new * as_mat(a.att_w_hidden) + CRow(dyn_off_.data(), d);
    CRow dir(dyn_dir_.data(), d);
    CMat att_s(att_static_.data(), n, d);
    auto v_a = a.att_v.values();
    std::vector<double> u(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        double acc = 0.0;
        const double f = feature[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < d; ++j) acc += v_a[j] * std::tanh(att_s(i, j) + f * dir[j] + shared[j]);
        u[i] = acc;
    }
    const double umax = *std::max_element(u.begin(), u.end());
    double z = 0.0;
    for (auto& v : u) z += (v = std::exp(v - umax));
    for (auto& v : u) v /= z;

    // Context c = a^T s-bar, then logits over unvisited cities.
    RowVec c = CRow(u.data(), n) * CMat(s_.data(), n, d);
    RowVec cproj = c * as_mat(a.ctx_w_context);
    CMat ctx_s(ctx_static_.data(), n, d);
    auto v_c = a.ctx_v.values();
    std::vector<double> logits(static_cast<std::size_t>(n));
    double lmax = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (state.visited[i]) continue;
        double acc = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) acc += v_c[j] * std::tanh(ctx_s(i, j) + cproj[j]);
        logits[i] = acc;
        lmax = std::max(lmax, acc);
    }
    std::vector<double> probs(static_cast<std::size_t>(n), 0.0);
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        if (!state.visited[i]) total += (probs[i] = std::exp(logits[i] - lmax));
    for (auto& p : probs) p /= total;
    return probs;
}

void TourDecoder::commit(DecoderState& state, City city, std::span<const double> probs) const {
    if (city < 0 || city >= n_ || state.visited[city]) throw ValidationError("decoder: invalid or repeated city choice");
    state.visited[city] = 1;
    state.last = city;
    state.log_prob += std::log(probs[city]);
    ++state.steps;
}

DecodedTour TourDecoder::decode(DecodeMode mode, Rng* rng) const {
    if (mode == DecodeMode::sample && rng == nullptr) throw ValidationError("sampling decode needs an rng");
    DecodedTour out;
    out.order.reserve(static_cast<std::size_t>(n_));
    DecoderState st = initial_state();
    for (int t = 0; t < n_; ++t) {
        const auto feature = feature_for(st);
        const auto probs = step(st, feature);
        City pick = 0;
        if (mode == DecodeMode::greedy) {
            // max_element returns the first maximum: ties go to the lowest index.
            pick = static_cast<City>(std::max_element(probs.begin(), probs.end()) - probs.begin());
        } else {
            pick = static_cast<City>(rng->categorical(probs));
        }
        commit(st, pick, probs);
        out.order.push_back(pick);
        out.step_log_probs.push_back(std::log(probs[pick]));
    }
    out.log_prob = st.log_prob;
    return out;
}

DecodedTour decode_tour(const ActorParameters& actor, std::span<const Point2> coords, DecodeMode mode, Rng* rng) {
    return TourDecoder(actor, coords).decode(mode, rng);
}

std::vector<City> rotate_to(std::span<const City> cycle, City start) {
    std::vector<City> out(cycle.begin(), cycle.end());
    auto it = std::find(out.begin(), out.end(), start);
    if (it == out.end()) throw ValidationError("rotate_to: start city not in cycle");
    std::rotate(out.begin(), it, out.end());
    return out;
}

} // namespace moop
