// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "moop/instance.hpp"
#include "moop/tensor.hpp"

namespace moop {

class Rng;

/// Weights of the dynamic pointer network.
///
/// The attention projection W_a acting on [s; d; h] is stored as three d x d
/// blocks (one per concatenated input), and the context projection W_c on
/// [s; c] as two; the products are identical to the concatenated form.
/// Row-major [in, out] layout throughout, so `x * W` maps a row vector.
struct ActorParameters {
    int hidden = 128;
    bool use_dynamic = true;

    ad::Tensor static_w, static_b;    // [2,d], [d]
    ad::Tensor dynamic_w, dynamic_b;  // [1,d], [d]
    // GRU, PyTorch gate convention: r, z, n.
    ad::Tensor gru_w_ir, gru_w_iz, gru_w_in;  // [d,d]
    ad::Tensor gru_w_hr, gru_w_hz, gru_w_hn;  // [d,d]
    ad::Tensor gru_b_ir, gru_b_iz, gru_b_in;  // [d]
    ad::Tensor gru_b_hr, gru_b_hz, gru_b_hn;  // [d]
    ad::Tensor att_w_static, att_w_dynamic, att_w_hidden;  // [d,d]
    ad::Tensor att_v;                                      // [d,1]
    ad::Tensor ctx_w_static, ctx_w_context;                // [d,d]
    ad::Tensor ctx_v;                                      // [d,1]

    /// Every weight drawn uniform on [-init_range, init_range]. A range of 0
    /// scales each layer by its fan-in instead: [-r, r] with r = min(1, 1/sqrt(inputs)).
    static ActorParameters initialize(int hidden, Rng& rng, double init_range = 1.0, bool use_dynamic = true);

    /// All trainable tensors in a fixed order; names are the checkpoint keys.
    std::vector<ad::Tensor> tensors() const;
    /// Expected shape of each tensor in tensors() order.
    static std::vector<std::pair<std::string, ad::Shape>> layout(int hidden);

    /// Deep copy (fresh leaves, same values).
    ActorParameters clone() const;
};

/// Normalized dynamic feature d_i = (E_max - e_i) / (E_max - E_min) over a
/// row of distances from the last selected city: nearest -> 1, farthest -> 0.
/// A row with E_max == E_min maps to all zeros.
std::vector<double> dynamic_feature(std::span<const double> dist_row);

enum class DecodeMode { greedy, sample };

struct DecodedTour {
    /// Visiting order of all input cities (indices into the input).
    std::vector<City> order;
    /// log p of the city chosen at each step.
    std::vector<double> step_log_probs;
    /// Sum of step_log_probs: log p(order | coords).
    double log_prob = 0.0;
};

/// Decoder state between steps.
struct DecoderState {
    std::vector<double> hidden;   // h_t, d values
    std::vector<char> visited;    // one flag per city
    std::optional<City> last;     // pi_{t-1}; empty before the first step
    double log_prob = 0.0;
    int steps = 0;
};

/// Inference-only encoder/decoder over plain arrays. Holds the per-instance
/// precomputations (static embedding and its projections), so one object
/// decodes any number of tours for the same city set. Thread-safe for
/// concurrent const use; the parameters must outlive it.
class TourDecoder {
public:
    TourDecoder(const ActorParameters& actor, std::span<const Point2> coords);

    int cities() const noexcept { return n_; }
    int hidden() const noexcept { return d_; }

    /// s-bar: n x d, row-major.
    const std::vector<double>& static_embedding() const noexcept { return s_; }
    /// d-bar: the dynamic embedding of a feature vector, n x d row-major.
    std::vector<double> dynamic_embedding(std::span<const double> feature) const;

    DecoderState initial_state() const;

    /// Advances the GRU from state.last and returns the masked distribution
    /// over cities for the next pick. `feature` is the normalized dynamic
    /// feature (n values). Does not mark any city; see commit().
    /// Throws ValidationError if every city is already visited.
    std::vector<double> step(DecoderState& state, std::span<const double> feature) const;

    /// Records the choice of `city` (with probability vector `probs` from step()).
    void commit(DecoderState& state, City city, std::span<const double> probs) const;

    /// Dynamic feature for the state's next step (zeros before the first pick
    /// or when the dynamic embedding is disabled).
    std::vector<double> feature_for(const DecoderState& state) const;

    DecodedTour decode(DecodeMode mode, Rng* rng) const;

private:
    const ActorParameters* actor_;
    int n_ = 0;
    int d_ = 0;
    DistanceMatrix dist_;
    std::vector<double> s_;                          // n x d
    std::vector<double> gi_r_, gi_z_, gi_n_;         // n x d input-gate projections
    std::vector<double> gi0_r_, gi0_z_, gi0_n_;      // d, for the zero-input embedding
    std::vector<double> att_static_;                 // n x d
    std::vector<double> dyn_dir_, dyn_off_;          // d: feature -> attention space
    std::vector<double> ctx_static_;                 // n x d
};

/// Greedy or sampled decode of a full permutation.
DecodedTour decode_tour(const ActorParameters& actor, std::span<const Point2> coords, DecodeMode mode, Rng* rng = nullptr);

/// Rotates a decoded cycle over local indices so that `start` comes first.
std::vector<City> rotate_to(std::span<const City> cycle, City start);

/// Options for the differentiable decode used in training.
struct RolloutOptions {
    double dropout = 0.0;
    bool training = false;
    /// Source of dropout masks; required when training with dropout > 0.
    Rng* dropout_rng = nullptr;
};

/// A decode recorded in the autodiff graph.
struct Rollout {
    std::vector<City> order;
    ad::Tensor log_prob;                  // scalar, differentiable w.r.t. the actor
    std::vector<double> step_log_probs;
    std::vector<std::vector<double>> step_probs;  // full distribution at each step
};

/// Graph-building decode. With `forced` non-empty the given permutation is
/// scored instead of choosing cities (teacher forcing), which is how a fixed
/// sampled tour is re-evaluated for finite differences.
Rollout rollout(const ActorParameters& actor, std::span<const Point2> coords, DecodeMode mode, Rng* rng,
                const RolloutOptions& options = {}, std::span<const City> forced = {});

/// s-bar as a graph tensor [n, d].
ad::Tensor static_embed(const ActorParameters& actor, std::span<const Point2> coords);

/// d-bar_t as a graph tensor [n, d].
ad::Tensor dynamic_embed(const ActorParameters& actor, std::span<const double> feature);

} // namespace moop
