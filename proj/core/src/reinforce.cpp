// SPDX-License-Identifier: Apache-2.0
#include "moop/reinforce.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "moop/error.hpp"
#include "moop/rng.hpp"

namespace moop {

using namespace moop::ad;

namespace {

Tensor uniform_param(Shape shape, Rng& rng, double range, std::string name) {
    std::vector<double> v(numel(shape));
    for (auto& x : v) x = rng.uniform(-range, range);
    return Tensor::parameter(std::move(shape), std::move(v), std::move(name));
}

CriticParameters critic_from(int hidden, std::vector<Tensor> t) {
    CriticParameters c;
    c.hidden = hidden;
    c.w1 = t[0];
    c.b1 = t[1];
    c.w2 = t[2];
    c.b2 = t[3];
    c.w3 = t[4];
    c.b3 = t[5];
    return c;
}

} // namespace

std::vector<std::pair<std::string, Shape>> CriticParameters::layout(int hidden) {
    const auto in = static_cast<std::size_t>(2 * hidden);
    return {{"critic.w1", {in, kCriticWidth}},          {"critic.b1", {kCriticWidth}},
            {"critic.w2", {kCriticWidth, kCriticWidth}}, {"critic.b2", {kCriticWidth}},
            {"critic.w3", {kCriticWidth, 1}},            {"critic.b3", {1}}};
}

CriticParameters CriticParameters::initialize(int hidden, Rng& rng, double init_range) {
    std::vector<Tensor> t;
    for (auto& [name, shape] : layout(hidden)) {
        double range = init_range;
        if (range <= 0.0) {
            const double fan_in = name.ends_with("1") ? 2.0 * hidden : static_cast<double>(kCriticWidth);
            range = std::min(1.0, 1.0 / std::sqrt(fan_in));
        }
        t.push_back(uniform_param(shape, rng, range, name));
    }
    return critic_from(hidden, std::move(t));
}

std::vector<Tensor> CriticParameters::tensors() const { return {w1, b1, w2, b2, w3, b3}; }

CriticParameters CriticParameters::clone() const {
    std::vector<Tensor> t;
    for (const auto& p : tensors()) t.push_back(Tensor::parameter(p.shape(), {p.values().begin(), p.values().end()}, p.name()));
    return critic_from(hidden, std::move(t));
}

Tensor critic_value_graph(const CriticParameters& critic, std::span<const Point2> coords, const ActorParameters& actor) {
    if (critic.hidden != actor.hidden) throw ShapeError("critic width does not match the actor embedding width");
    const Tensor s = static_embed(actor, coords).detach();
    const std::vector<double> zero_feature(coords.size(), 0.0);
    const Tensor d0 = dynamic_embed(actor, zero_feature).detach();
    const Tensor x = concat({s, d0}, 1);
    const Tensor h1 = relu(pointwise_linear(x, critic.w1, critic.b1));
    const Tensor h2 = relu(pointwise_linear(h1, critic.w2, critic.b2));
    return sum(pointwise_linear(h2, critic.w3, critic.b3));
}

double critic_value(const CriticParameters& critic, std::span<const Point2> coords, const ActorParameters& actor) {
    return critic_value_graph(critic, coords, actor).item();
}

PolicyModel PolicyModel::initialize(const ModelConfig& config) {
    Rng rng(config.seed);
    PolicyModel m;
    m.config = config;
    m.actor = ActorParameters::initialize(config.hidden, rng, config.init_range, config.use_dynamic);
    m.critic = CriticParameters::initialize(config.hidden, rng, config.init_range);
    return m;
}

PolicyModel PolicyModel::clone() const { return {config, actor.clone(), critic.clone()}; }

TrainConfig TrainConfig::paper() { return TrainConfig{}; }

TrainConfig TrainConfig::desk() {
    TrainConfig c;
    c.epochs = 1;
    c.batch_size = 128;
    c.instances_per_epoch = 200L * 128;
    c.cities = 20;
    c.lr = 1e-3;
    c.init_range = 0.0;
    c.max_grad_norm = 2.0;
    return c;
}

ModelConfig TrainConfig::model_config() const {
    ModelConfig m;
    m.hidden = hidden;
    m.train_cities = cities;
    m.use_dynamic = use_dynamic;
    m.init_range = init_range;
    m.seed = seed;
    return m;
}

double cycle_length(std::span<const Point2> coords, std::span<const City> order) {
    if (order.size() < 2) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i)
        total += euclidean(coords[order[i]], coords[order[(i + 1) % order.size()]]);
    return total;
}

std::vector<City> nearest_neighbor_tour(std::span<const Point2> coords) {
    const std::size_t n = coords.size();
    std::vector<City> tour;
    if (n == 0) return tour;
    std::vector<char> used(n, 0);
    City cur = 0;
    used[0] = 1;
    tour.push_back(0);
    for (std::size_t step = 1; step < n; ++step) {
        double best = std::numeric_limits<double>::infinity();
        City next = -1;
        for (std::size_t j = 0; j < n; ++j) {
            if (used[j]) continue;
            const double d = euclidean(coords[cur], coords[j]);
            if (d < best) {
                best = d;
                next = static_cast<City>(j);
            }
        }
        used[next] = 1;
        tour.push_back(next);
        cur = next;
    }
    return tour;
}

double mean_greedy_cost(const ActorParameters& actor, std::span<const std::vector<Point2>> instances) {
    if (instances.empty()) return 0.0;
    double total = 0.0;
    for (const auto& coords : instances) total += cycle_length(coords, decode_tour(actor, coords, DecodeMode::greedy).order);
    return total / static_cast<double>(instances.size());
}

double mean_nearest_neighbor_cost(std::span<const std::vector<Point2>> instances) {
    if (instances.empty()) return 0.0;
    double total = 0.0;
    for (const auto& coords : instances) total += cycle_length(coords, nearest_neighbor_tour(coords));
    return total / static_cast<double>(instances.size());
}

std::vector<std::vector<Point2>> sample_tsp_batch(int count, int cities, Rng& rng) {
    std::vector<std::vector<Point2>> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out.push_back(random_coords(cities, rng));
    return out;
}

Tensor actor_surrogate(const PolicyModel& model, std::span<const Point2> coords, std::span<const City> tour) {
    const auto ro = rollout(model.actor, coords, DecodeMode::greedy, nullptr, {}, tour);
    const double advantage = cycle_length(coords, ro.order) - critic_value(model.critic, coords, model.actor);
    return scale(ro.log_prob, advantage);
}

BatchStats accumulate_batch_gradients(PolicyModel& model, std::span<const std::vector<Point2>> batch, Rng& rng,
                                      const BatchOptions& options) {
    if (batch.empty()) throw ValidationError("reinforce: empty batch");
    if (!options.forced_tours.empty() && options.forced_tours.size() != batch.size())
        throw ValidationError("reinforce: need one forced tour per instance");
    const double inv_m = 1.0 / static_cast<double>(batch.size());
    RolloutOptions ro_opts;
    ro_opts.dropout = options.dropout;
    ro_opts.training = options.training;
    ro_opts.dropout_rng = &rng;

    BatchStats stats;
    // Every term of both losses depends on a single instance, so each
    // instance's graph is built, back-propagated, and released in turn.
    for (std::size_t m = 0; m < batch.size(); ++m) {
        std::span<const City> forced;
        if (!options.forced_tours.empty()) forced = options.forced_tours[m];
        const auto ro = rollout(model.actor, batch[m], DecodeMode::sample, &rng, ro_opts, forced);
        const double reward = cycle_length(batch[m], ro.order);
        const Tensor value = critic_value_graph(model.critic, batch[m], model.actor);
        const double advantage = reward - value.item();

        const Tensor actor_term = scale(ro.log_prob, advantage * inv_m);
        const Tensor diff = sub(Tensor::scalar(reward), value);
        const Tensor critic_term = scale(mul(diff, diff), inv_m);
        actor_term.backward();
        critic_term.backward();

        stats.mean_reward += reward * inv_m;
        stats.mean_baseline += value.item() * inv_m;
        stats.actor_loss += actor_term.item();
        stats.critic_loss += critic_term.item();
    }
    const auto actor_params = model.actor.tensors();
    const auto critic_params = model.critic.tensors();
    stats.actor_grad_norm = grad_norm(actor_params);
    stats.critic_grad_norm = grad_norm(critic_params);
    return stats;
}

BatchStats reinforce_batch(PolicyModel& model, AdamState& actor_opt, AdamState& critic_opt,
                           std::span<const std::vector<Point2>> batch, Rng& rng, double dropout, double max_grad_norm) {
    auto actor_params = model.actor.tensors();
    auto critic_params = model.critic.tensors();
    zero_grad(actor_params);
    zero_grad(critic_params);
    BatchOptions opts;
    opts.dropout = dropout;
    opts.training = true;
    BatchStats stats = accumulate_batch_gradients(model, batch, rng, opts);
    if (!std::isfinite(stats.actor_loss) || !std::isfinite(stats.critic_loss) || !std::isfinite(stats.actor_grad_norm) ||
        !std::isfinite(stats.critic_grad_norm))
        return stats;  // caller decides; parameters untouched
    if (max_grad_norm > 0.0) {
        clip_grad_norm(actor_params, max_grad_norm);
        clip_grad_norm(critic_params, max_grad_norm);
    }
    adam_step(actor_params, actor_opt);
    adam_step(critic_params, critic_opt);
    return stats;
}

TrainResult train(const TrainConfig& config, const std::function<void(const TrainLogRow&)>& on_log) {
    if (config.epochs < 0 || config.batch_size < 1 || config.cities < 2 || config.hidden < 1 || !(config.lr > 0.0) ||
        config.instances_per_epoch < 0 || !(config.dropout >= 0.0 && config.dropout < 1.0))
        throw ValidationError("train: invalid configuration");

    TrainResult result;
    Checkpoint& ckpt = result.checkpoint;
    ckpt.model = PolicyModel::initialize(config.model_config());
    ckpt.validation_seed = config.validation_seed;
    AdamState actor_opt;
    AdamState critic_opt;
    actor_opt.lr = critic_opt.lr = config.lr;

    Rng val_rng(config.validation_seed);
    const auto validation = sample_tsp_batch(config.validation_size, config.cities, val_rng);
    result.initial_validation_cost = mean_greedy_cost(ckpt.model.actor, validation);
    result.final_validation_cost = result.initial_validation_cost;
    TrainLogRow first;
    first.batch = 0;
    first.mean_reward = std::numeric_limits<double>::quiet_NaN();
    first.critic_loss = std::numeric_limits<double>::quiet_NaN();
    first.validation_cost = result.initial_validation_cost;
    result.log.push_back(first);
    if (on_log) on_log(first);

    const Rng root(config.seed);
    Rng data_rng = root.split(1);
    Rng policy_rng = root.split(2);
    const long per_epoch = config.batches_per_epoch();
    const long total = per_epoch * config.epochs;
    long batch_no = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (long b = 0; b < per_epoch; ++b) {
            const auto batch = sample_tsp_batch(config.batch_size, config.cities, data_rng);
            const BatchStats stats = reinforce_batch(ckpt.model, actor_opt, critic_opt, batch, policy_rng,
                                                     config.dropout, config.max_grad_norm);
            ++batch_no;
            if (!std::isfinite(stats.actor_loss) || !std::isfinite(stats.critic_loss) ||
                !std::isfinite(stats.actor_grad_norm) || !std::isfinite(stats.critic_grad_norm)) {
                std::ostringstream msg;
                msg << "training diverged at epoch " << epoch << " batch " << batch_no << ": mean_reward="
                    << stats.mean_reward << " mean_baseline=" << stats.mean_baseline << " actor_loss=" << stats.actor_loss
                    << " critic_loss=" << stats.critic_loss << " actor_grad_norm=" << stats.actor_grad_norm
                    << " critic_grad_norm=" << stats.critic_grad_norm;
                if (!config.dump_path.empty()) {
                    ckpt.batches_seen = batch_no;
                    ckpt.epochs_seen = epoch;
                    ckpt.actor_optimizer = actor_opt;
                    ckpt.critic_optimizer = critic_opt;
                    save_checkpoint(ckpt, config.dump_path);
                    msg << "; state dumped to " << config.dump_path.string();
                }
                throw TrainingDiverged(msg.str());
            }

            TrainLogRow row;
            row.batch = batch_no;
            row.mean_reward = stats.mean_reward;
            row.critic_loss = stats.critic_loss;
            if ((config.validate_every > 0 && batch_no % config.validate_every == 0) || batch_no == total) {
                row.validation_cost = mean_greedy_cost(ckpt.model.actor, validation);
                result.final_validation_cost = *row.validation_cost;
            }
            result.log.push_back(row);
            if (on_log) on_log(row);
        }
        ckpt.epochs_seen = epoch + 1;
    }
    ckpt.batches_seen = batch_no;
    ckpt.actor_optimizer = std::move(actor_opt);
    ckpt.critic_optimizer = std::move(critic_opt);
    return result;
}

void write_train_log_csv(const std::vector<TrainLogRow>& log, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write training log " + path.string());
    out.precision(17);
    out << "batch,mean_reward,critic_loss,validation_cost\n";
    for (const auto& r : log) {
        out << r.batch << ',';
        if (std::isfinite(r.mean_reward)) out << r.mean_reward;
        out << ',';
        if (std::isfinite(r.critic_loss)) out << r.critic_loss;
        out << ',';
        if (r.validation_cost) out << *r.validation_cost;
        out << '\n';
    }
}

} // namespace moop
