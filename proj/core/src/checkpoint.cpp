// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "moop/error.hpp"
#include "moop/reinforce.hpp"
#include "moop/rng.hpp"

namespace moop {

using nlohmann::json;

namespace {

json tensors_json(const std::vector<ad::Tensor>& tensors) {
    json out = json::object();
    for (const auto& t : tensors) out[t.name()] = std::vector<double>(t.values().begin(), t.values().end());
    return out;
}

void fill_tensors(std::vector<ad::Tensor> tensors, const json& src, const char* group) {
    if (!src.is_object()) throw CheckpointError(std::string("checkpoint: missing tensor group '") + group + "'");
    for (auto& t : tensors) {
        auto it = src.find(t.name());
        if (it == src.end()) throw CheckpointError("checkpoint: missing tensor '" + t.name() + "'");
        const auto values = it->get<std::vector<double>>();
        if (values.size() != t.numel())
            throw CheckpointError("checkpoint: tensor '" + t.name() + "' has " + std::to_string(values.size()) +
                                  " values, expected " + std::to_string(t.numel()) + " for shape " +
                                  ad::to_string(t.shape()));
        auto dst = t.mutable_values();
        std::copy(values.begin(), values.end(), dst.begin());
    }
}

json adam_json(const ad::AdamState& s) {
    return {{"lr", s.lr}, {"beta1", s.beta1}, {"beta2", s.beta2}, {"eps", s.eps},
            {"step", s.step}, {"m", s.m}, {"v", s.v}};
}

ad::AdamState adam_from(const json& j, const std::vector<ad::Tensor>& params) {
    ad::AdamState s;
    s.lr = j.at("lr").get<double>();
    s.beta1 = j.at("beta1").get<double>();
    s.beta2 = j.at("beta2").get<double>();
    s.eps = j.at("eps").get<double>();
    s.step = j.at("step").get<std::int64_t>();
    s.m = j.at("m").get<std::vector<std::vector<double>>>();
    s.v = j.at("v").get<std::vector<std::vector<double>>>();
    if (!s.m.empty() || !s.v.empty()) {
        if (s.m.size() != params.size() || s.v.size() != params.size())
            throw CheckpointError("checkpoint: optimizer moment count does not match the parameters");
        for (std::size_t i = 0; i < params.size(); ++i)
            if (s.m[i].size() != params[i].numel() || s.v[i].size() != params[i].numel())
                throw CheckpointError("checkpoint: optimizer moments for '" + params[i].name() + "' have the wrong size");
    }
    return s;
}

} // namespace

std::string checkpoint_to_json(const Checkpoint& ckpt) {
    const auto& cfg = ckpt.model.config;
    json j;
    j["header"] = {{"version", Checkpoint::kVersion},
                   {"d_h", cfg.hidden},
                   {"train_city_count", cfg.train_cities},
                   {"seed", cfg.seed},
                   {"use_dynamic", cfg.use_dynamic},
                   {"init_range", cfg.init_range}};
    j["actor"] = tensors_json(ckpt.model.actor.tensors());
    j["critic"] = tensors_json(ckpt.model.critic.tensors());
    if (ckpt.actor_optimizer) j["actor_optimizer"] = adam_json(*ckpt.actor_optimizer);
    if (ckpt.critic_optimizer) j["critic_optimizer"] = adam_json(*ckpt.critic_optimizer);
    j["metadata"] = {{"epochs_seen", ckpt.epochs_seen},
                     {"batches_seen", ckpt.batches_seen},
                     {"validation_seed", ckpt.validation_seed}};
    return j.dump();
}

Checkpoint checkpoint_from_json(const std::string& text, std::optional<int> expected_hidden) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw CheckpointError(std::string("checkpoint: unreadable or truncated (") + e.what() + ")");
    }
    try {
        const auto& h = j.at("header");
        const int version = h.at("version").get<int>();
        if (version != Checkpoint::kVersion)
            throw CheckpointError("checkpoint: format version " + std::to_string(version) + ", expected " +
                                  std::to_string(Checkpoint::kVersion));
        ModelConfig cfg;
        cfg.hidden = h.at("d_h").get<int>();
        cfg.train_cities = h.at("train_city_count").get<int>();
        cfg.seed = h.at("seed").get<std::uint64_t>();
        cfg.use_dynamic = h.value("use_dynamic", true);
        cfg.init_range = h.value("init_range", 1.0);
        if (cfg.hidden < 1) throw CheckpointError("checkpoint: invalid d_h");
        // Build at the expected width so a mismatch is reported against the
        // first tensor whose size disagrees.
        const int width = expected_hidden.value_or(cfg.hidden);

        Checkpoint ckpt;
        Rng scratch(0);
        ckpt.model.config = cfg;
        ckpt.model.actor = ActorParameters::initialize(width, scratch, 1.0, cfg.use_dynamic);
        ckpt.model.critic = CriticParameters::initialize(width, scratch, 1.0);
        fill_tensors(ckpt.model.actor.tensors(), j.at("actor"), "actor");
        fill_tensors(ckpt.model.critic.tensors(), j.at("critic"), "critic");
        if (width != cfg.hidden)
            throw CheckpointError("checkpoint: d_h is " + std::to_string(cfg.hidden) + ", expected " +
                                  std::to_string(width));
        if (j.contains("actor_optimizer")) ckpt.actor_optimizer = adam_from(j["actor_optimizer"], ckpt.model.actor.tensors());
        if (j.contains("critic_optimizer"))
            ckpt.critic_optimizer = adam_from(j["critic_optimizer"], ckpt.model.critic.tensors());
        if (j.contains("metadata")) {
            const auto& m = j["metadata"];
            ckpt.epochs_seen = m.value("epochs_seen", 0L);
            ckpt.batches_seen = m.value("batches_seen", 0L);
            ckpt.validation_seed = m.value("validation_seed", std::uint64_t{0});
        }
        return ckpt;
    } catch (const json::exception& e) {
        throw CheckpointError(std::string("checkpoint: malformed (") + e.what() + ")");
    }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw CheckpointError("checkpoint: cannot write " + tmp.string());
        out << checkpoint_to_json(ckpt);
        out.flush();
        if (!out) throw CheckpointError("checkpoint: write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw CheckpointError("checkpoint: cannot move into place at " + path.string());
    }
}

Checkpoint load_checkpoint(const std::filesystem::path& path, std::optional<int> expected_hidden) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("checkpoint: cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return checkpoint_from_json(buf.str(), expected_hidden);
}

} // namespace moop
