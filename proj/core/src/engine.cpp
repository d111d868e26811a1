// SPDX-License-Identifier: Apache-2.0
#include <algorithm>

#include "moop/error.hpp"
#include "moop/moea.hpp"
#include "moop/rng.hpp"

namespace moop {

std::string_view to_string(Engine engine) noexcept { return engine == Engine::nsga2 ? "nsga2" : "nsga3"; }

Engine engine_from_string(std::string_view name) {
    if (name == "nsga2") return Engine::nsga2;
    if (name == "nsga3") return Engine::nsga3;
    throw ValidationError("unknown engine '" + std::string(name) + "' (expected nsga2 or nsga3)");
}

void EngineConfig::prepare(int n_objectives) {
    if (pop_size < 2) throw ValidationError("population size must be >= 2");
    if (n_objectives < 1) throw ValidationError("need at least one objective");
    if (engine == Engine::nsga3 && ref_dirs.empty()) ref_dirs = das_dennis(n_objectives, divisions_for(n_objectives, pop_size));
}

void rank_population(Population& pop, const EngineConfig& config) {
    pop.rank.assign(pop.size(), 0);
    pop.crowding.assign(pop.size(), 0.0);
    const auto fronts = nondominated_fronts(pop.objectives, pop.cv);
    for (std::size_t r = 0; r < fronts.size(); ++r) {
        for (std::size_t i : fronts[r]) pop.rank[i] = static_cast<int>(r);
        if (config.engine == Engine::nsga2) {
            const auto crowd = crowding_distance(pop.objectives, fronts[r]);
            for (std::size_t k = 0; k < fronts[r].size(); ++k) pop.crowding[fronts[r][k]] = crowd[k];
        }
    }
}

Population make_population(std::vector<Genome> genomes, const Evaluator& evaluate, const EngineConfig& config) {
    Population pop;
    auto evals = evaluate(genomes);
    if (evals.size() != genomes.size()) throw std::logic_error("evaluator returned the wrong number of results");
    pop.genomes = std::move(genomes);
    for (auto& e : evals) {
        pop.objectives.push_back(std::move(e.objectives));
        pop.cv.push_back(e.cv);
    }
    rank_population(pop, config);
    return pop;
}

std::size_t binary_tournament(const Population& pop, const EngineConfig& config, Rng& rng) {
    const std::size_t a = rng.below(pop.size());
    const std::size_t b = rng.below(pop.size());
    if (pop.rank[a] != pop.rank[b]) return pop.rank[a] < pop.rank[b] ? a : b;
    if (config.engine == Engine::nsga2 && pop.crowding[a] != pop.crowding[b])
        return pop.crowding[a] > pop.crowding[b] ? a : b;
    return rng.bernoulli(0.5) ? a : b;
}

std::vector<Genome> make_offspring(const Population& pop, const EngineConfig& config, Rng& rng) {
    const std::size_t n = static_cast<std::size_t>(config.pop_size);
    const std::size_t pairs = (n + 1) / 2;
    std::vector<std::size_t> mates(2 * pairs);
    for (auto& m : mates) m = binary_tournament(pop, config, rng);

    std::vector<Genome> kids(2 * pairs);
    if (config.coding == Coding::binary || config.coding == Coding::dual) {
        std::vector<Bits> parents;
        parents.reserve(mates.size());
        for (std::size_t m : mates) parents.push_back(pop.genomes[m].bits);
        auto bits = vary_binary(parents, rng, config.rates);
        for (std::size_t i = 0; i < kids.size(); ++i) kids[i].bits = std::move(bits[i]);
    }
    if (config.coding == Coding::single || config.coding == Coding::dual) {
        std::vector<std::vector<City>> parents;
        parents.reserve(mates.size());
        for (std::size_t m : mates) parents.push_back(pop.genomes[m].order);
        auto orders = vary_permutation(parents, rng, config.rates);
        for (std::size_t i = 0; i < kids.size(); ++i) kids[i].order = std::move(orders[i]);
    }
    kids.resize(n);
    return kids;
}

Population moea_generation(const Population& pop, const EngineConfig& config, const Evaluator& evaluate, Rng& rng) {
    if (pop.size() == 0) throw ValidationError("moea_generation: empty population");
    Population kids = make_population(make_offspring(pop, config, rng), evaluate, config);

    Population merged;
    merged.genomes = pop.genomes;
    merged.objectives = pop.objectives;
    merged.cv = pop.cv;
    for (std::size_t i = 0; i < kids.size(); ++i) {
        merged.genomes.push_back(std::move(kids.genomes[i]));
        merged.objectives.push_back(std::move(kids.objectives[i]));
        merged.cv.push_back(kids.cv[i]);
    }

    const std::size_t target = static_cast<std::size_t>(config.pop_size);
    std::vector<std::size_t> keep;
    if (config.engine == Engine::nsga2)
        keep = nsga2_survival(merged.objectives, merged.cv, target);
    else
        keep = nsga3_survival(merged.objectives, merged.cv, target, config.ref_dirs, rng).survivors;

    Population next;
    for (std::size_t i : keep) {
        next.genomes.push_back(std::move(merged.genomes[i]));
        next.objectives.push_back(std::move(merged.objectives[i]));
        next.cv.push_back(merged.cv[i]);
    }
    rank_population(next, config);
    return next;
}

std::vector<std::size_t> feasible_first_front(const Population& pop) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < pop.size(); ++i)
        if (pop.rank[i] == 0 && pop.cv[i] == 0.0) out.push_back(i);
    return out;
}

} // namespace moop
