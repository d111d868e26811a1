// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "moop/dypn.hpp"
#include "moop/tensor.hpp"

namespace moop {

inline constexpr std::size_t kCriticWidth = 20;

/// Three kernel-size-1 layers (2d -> 20 -> 20 -> 1) with rectifiers between
/// them. Each city gets the concatenation of its static embedding and its
/// step-0 dynamic embedding; the per-city outputs are summed.
struct CriticParameters {
    int hidden = 128;
    ad::Tensor w1, b1;  // [2d,20], [20]
    ad::Tensor w2, b2;  // [20,20], [20]
    ad::Tensor w3, b3;  // [20,1],  [1]

    static CriticParameters initialize(int hidden, Rng& rng, double init_range = 1.0);
    std::vector<ad::Tensor> tensors() const;
    static std::vector<std::pair<std::string, ad::Shape>> layout(int hidden);
    CriticParameters clone() const;
};

/// V(r; phi) as a graph scalar. The actor embeddings enter as constants, so
/// the result only carries gradient to the critic.
ad::Tensor critic_value_graph(const CriticParameters& critic, std::span<const Point2> coords,
                              const ActorParameters& actor);
double critic_value(const CriticParameters& critic, std::span<const Point2> coords, const ActorParameters& actor);

struct ModelConfig {
    int hidden = 128;
    int train_cities = 100;
    bool use_dynamic = true;
    double init_range = 1.0;
    std::uint64_t seed = 1234;
};

/// Actor and critic together.
struct PolicyModel {
    ModelConfig config;
    ActorParameters actor;
    CriticParameters critic;

    static PolicyModel initialize(const ModelConfig& config);
    PolicyModel clone() const;
};

struct TrainConfig {
    int epochs = 10;
    long instances_per_epoch = 1'280'000;
    int batch_size = 64;
    double lr = 1e-4;
    double dropout = 0.1;
    int cities = 100;
    int hidden = 128;
    bool use_dynamic = true;
    /// Uniform initialization half-width; 0 selects fan-in scaling.
    double init_range = 1.0;
    /// Joint L2 gradient-norm cap per network; 0 disables clipping.
    double max_grad_norm = 0.0;
    /// Seeds model initialization and the stream of training instances.
    std::uint64_t seed = 1234;
    std::uint64_t validation_seed = 4321;
    int validation_size = 256;
    /// Greedy validation every this many batches (and after the last one).
    int validate_every = 20;
    /// Where to write model state if training diverges; empty disables the dump.
    std::filesystem::path dump_path;

    /// Full-size settings: 100-city instances, 10 epochs of 1.28M, batch 64.
    static TrainConfig paper();
    /// Desk-scale settings: 20-city instances, 200 batches of 128, lr 1e-3,
    /// fan-in scaled initialization, gradient norm capped at 2.
    static TrainConfig desk();

    ModelConfig model_config() const;
    long batches_per_epoch() const { return instances_per_epoch / batch_size; }
};

struct BatchStats {
    double mean_reward = 0.0;
    double mean_baseline = 0.0;
    double actor_loss = 0.0;
    double critic_loss = 0.0;
    double actor_grad_norm = 0.0;
    double critic_grad_norm = 0.0;
};

struct BatchOptions {
    double dropout = 0.0;
    bool training = true;
    /// When non-empty, one permutation per instance to score instead of sampling.
    std::span<const std::vector<City>> forced_tours;
};

/// Builds the actor loss mean((L - V) * log p) with V held constant and the
/// critic loss mean((L - V)^2), and back-propagates both into the parameter
/// gradients (accumulating; nothing is zeroed and no step is taken).
BatchStats accumulate_batch_gradients(PolicyModel& model, std::span<const std::vector<Point2>> batch, Rng& rng,
                                      const BatchOptions& options = {});

/// One REINFORCE update: sampled rollouts, both losses, one Adam step per network.
BatchStats reinforce_batch(PolicyModel& model, ad::AdamState& actor_opt, ad::AdamState& critic_opt,
                           std::span<const std::vector<Point2>> batch, Rng& rng, double dropout = 0.0,
                           double max_grad_norm = 0.0);

/// Actor surrogate (L - V) * log p(tour) for one fixed permutation, as a
/// graph scalar over the actor parameters; V is computed and held constant.
ad::Tensor actor_surrogate(const PolicyModel& model, std::span<const Point2> coords, std::span<const City> tour);

/// Closed length of a permutation over all cities (order[0] -> ... -> order[0]).
double cycle_length(std::span<const Point2> coords, std::span<const City> order);

/// Nearest-neighbour tour from city 0.
std::vector<City> nearest_neighbor_tour(std::span<const Point2> coords);

double mean_greedy_cost(const ActorParameters& actor, std::span<const std::vector<Point2>> instances);
double mean_nearest_neighbor_cost(std::span<const std::vector<Point2>> instances);

std::vector<std::vector<Point2>> sample_tsp_batch(int count, int cities, Rng& rng);

struct TrainLogRow {
    long batch = 0;
    double mean_reward = 0.0;
    double critic_loss = 0.0;
    std::optional<double> validation_cost;
};

struct Checkpoint {
    static constexpr int kVersion = 1;
    PolicyModel model;
    std::optional<ad::AdamState> actor_optimizer;
    std::optional<ad::AdamState> critic_optimizer;
    long epochs_seen = 0;
    long batches_seen = 0;
    std::uint64_t validation_seed = 0;
};

struct TrainResult {
    Checkpoint checkpoint;
    std::vector<TrainLogRow> log;
    double initial_validation_cost = 0.0;
    double final_validation_cost = 0.0;
};

/// Fresh initialization followed by epochs x (instances_per_epoch / batch)
/// REINFORCE batches on freshly sampled instances. Throws TrainingDiverged on
/// a non-finite loss (after dumping state to config.dump_path when set).
TrainResult train(const TrainConfig& config, const std::function<void(const TrainLogRow&)>& on_log = {});

/// Atomic (write to a sibling temporary, then rename).
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
/// Throws CheckpointError on unreadable or truncated files, version mismatch,
/// or a tensor whose size disagrees with the declared (or expected) width.
Checkpoint load_checkpoint(const std::filesystem::path& path, std::optional<int> expected_hidden = std::nullopt);

std::string checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const std::string& text, std::optional<int> expected_hidden = std::nullopt);

void write_train_log_csv(const std::vector<TrainLogRow>& log, const std::filesystem::path& path);

} // namespace moop
