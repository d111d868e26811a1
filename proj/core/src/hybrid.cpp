// SPDX-License-Identifier: Apache-2.0
#include "moop/hybrid.hpp"

#include <algorithm>
#include <chrono>

#include "moop/error.hpp"
#include "moop/metrics.hpp"
#include "moop/parallel.hpp"
#include "moop/rng.hpp"

namespace moop {

namespace {

std::string key_of(const Bits& bits) { return {bits.begin(), bits.end()}; }

double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void check_config(const Instance& inst, const HybridConfig& config) {
    validate(inst);
    if (config.pop_size < 2) throw ValidationError("population size must be >= 2");
    if (config.max_generations < 0) throw ValidationError("generation count must be >= 0");
    if (config.kind == ProblemKind::mixed && inst.k_profits != 1)
        throw ValidationError("mixed problems need exactly one profit column, instance has " +
                              std::to_string(inst.k_profits));
    if (config.kind != ProblemKind::mixed && inst.k_profits != 2)
        throw ValidationError(std::string(to_string(config.kind)) + " problems need two profit columns, instance has " +
                              std::to_string(inst.k_profits));
}

template <class Solve>
RunResult evolve(const Instance& inst, const HybridConfig& config, Coding coding, std::vector<Genome> initial,
                 Solve&& solve_all, Rng& rng, std::chrono::steady_clock::time_point t0) {
    EngineConfig ec;
    ec.engine = config.engine;
    ec.coding = coding;
    ec.pop_size = config.pop_size;
    ec.rates = config.rates;
    ec.prepare(objective_count(config.kind, inst.k_profits));

    RunResult result;
    result.ref = reference_point(config.kind, inst.t_max, inst.k_profits);
    const Evaluator evaluator = [&](std::span<const Genome> genomes) {
        const auto sols = solve_all(genomes);
        std::vector<Evaluation> out;
        out.reserve(sols.size());
        for (const auto& s : sols) out.push_back(to_evaluation(s, config.kind));
        result.evaluated += static_cast<long>(genomes.size());
        return out;
    };
    auto trace = [&](const Population& pop) {
        std::vector<std::vector<double>> pts;
        for (std::size_t i : feasible_first_front(pop)) pts.push_back(pop.objectives[i]);
        result.hv_trace.push_back(hypervolume(pts, result.ref));
    };

    Population pop = make_population(std::move(initial), evaluator, ec);
    trace(pop);
    for (int g = 0; g < config.max_generations; ++g) {
        pop = moea_generation(pop, ec, evaluator, rng);
        trace(pop);
    }
    std::vector<Genome> best;
    for (std::size_t i : feasible_first_front(pop)) best.push_back(pop.genomes[i]);
    result.front = assemble_front(solve_all(best), config.kind);
    result.hv = front_hypervolume(result.front, config.kind, result.ref);
    result.wall_seconds = elapsed(t0);
    return result;
}

} // namespace

SelectionRouter::SelectionRouter(const Instance& inst, const ActorParameters& actor) : inst_(&inst), actor_(&actor) {}

std::vector<City> SelectionRouter::decode(const Bits& bits) const {
    const auto sel = selection_from_bits(bits);
    if (sel.size() == 1) return {};
    if (sel.size() == 2) return {sel[1]};
    std::vector<Point2> coords;
    coords.reserve(sel.size());
    for (City c : sel) coords.push_back(inst_->coords[c]);
    const auto cycle = decode_tour(*actor_, coords, DecodeMode::greedy).order;
    const auto local = rotate_to(cycle, 0);
    std::vector<City> tour;
    tour.reserve(local.size() - 1);
    for (std::size_t i = 1; i < local.size(); ++i) tour.push_back(sel[local[i]]);
    return tour;
}

EvaluatedSolution SelectionRouter::route(const Bits& bits) {
    if (bits.size() != static_cast<std::size_t>(inst_->n_cities - 1))
        throw ValidationError("selection genome has " + std::to_string(bits.size()) + " bits, expected " +
                              std::to_string(inst_->n_cities - 1));
    auto key = key_of(bits);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
        it = cache_.emplace(std::move(key), decode(bits)).first;
        ++decoded_;
    }
    return evaluate(*inst_, selection_from_bits(bits), it->second);
}

std::vector<EvaluatedSolution> SelectionRouter::route_all(std::span<const Genome> genomes, int jobs) {
    std::vector<const Bits*> missing;
    std::unordered_map<std::string, std::size_t> queued;
    for (const auto& g : genomes) {
        if (g.bits.size() != static_cast<std::size_t>(inst_->n_cities - 1))
            throw ValidationError("selection genome has " + std::to_string(g.bits.size()) + " bits, expected " +
                                  std::to_string(inst_->n_cities - 1));
        auto key = key_of(g.bits);
        if (cache_.contains(key) || queued.contains(key)) continue;
        queued.emplace(std::move(key), missing.size());
        missing.push_back(&g.bits);
    }
    std::vector<std::vector<City>> routes(missing.size());
    parallel_for(missing.size(), static_cast<std::size_t>(std::max(jobs, 1)),
                 [&](std::size_t i) { routes[i] = decode(*missing[i]); });
    for (std::size_t i = 0; i < missing.size(); ++i) cache_.emplace(key_of(*missing[i]), std::move(routes[i]));
    decoded_ += static_cast<long>(missing.size());

    std::vector<EvaluatedSolution> out;
    out.reserve(genomes.size());
    for (const auto& g : genomes) out.push_back(route(g.bits));
    return out;
}

Evaluation to_evaluation(const EvaluatedSolution& sol, ProblemKind kind) { return {project(sol.objectives, kind), sol.cv}; }

std::vector<EvaluatedSolution> assemble_front(std::vector<EvaluatedSolution> candidates, ProblemKind kind) {
    std::vector<EvaluatedSolution> feasible;
    for (auto& c : candidates)
        if (c.feasible()) feasible.push_back(std::move(c));
    std::vector<std::vector<double>> pts;
    for (const auto& s : feasible) pts.push_back(project(s.objectives, kind));
    std::vector<EvaluatedSolution> out;
    for (std::size_t i : pareto_filter_indices(pts)) out.push_back(std::move(feasible[i]));
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.objectives > b.objectives; });
    return out;
}

double front_hypervolume(std::span<const EvaluatedSolution> solutions, ProblemKind kind, std::span<const double> ref) {
    std::vector<std::vector<double>> pts;
    for (const auto& s : solutions)
        if (s.feasible()) pts.push_back(project(s.objectives, kind));
    return hypervolume(pareto_filter(pts), ref);
}

RunResult run_moea_drl(const Instance& inst, const ActorParameters& actor, const HybridConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    check_config(inst, config);
    Rng rng(config.seed);
    const DistanceMatrix dist = distance_matrix(inst);
    std::vector<Genome> initial;
    for (auto& bits : greedy_initialize(inst, dist, config.pop_size, rng)) initial.push_back({std::move(bits), {}});

    SelectionRouter router(inst, actor);
    auto solve_all = [&](std::span<const Genome> genomes) { return router.route_all(genomes, config.jobs); };
    RunResult r = evolve(inst, config, Coding::binary, std::move(initial), solve_all, rng, t0);
    r.decoded = router.decoded();
    return r;
}

RunResult run_pure_moea(const Instance& inst, const HybridConfig& config, Coding coding) {
    const auto t0 = std::chrono::steady_clock::now();
    check_config(inst, config);
    if (coding == Coding::binary) throw ValidationError("pure MOEA runs use the single or double coding");
    Rng rng(config.seed);
    const DistanceMatrix dist = distance_matrix(inst);
    auto initial = random_permutation_genomes(inst, config.pop_size, coding == Coding::dual, rng);

    auto solve_all = [&](std::span<const Genome> genomes) {
        std::vector<EvaluatedSolution> out(genomes.size());
        parallel_for(genomes.size(), static_cast<std::size_t>(std::max(config.jobs, 1)), [&](std::size_t i) {
            out[i] = coding == Coding::single ? decode_single_chromosome(inst, dist, genomes[i].order)
                                              : decode_double_chromosome(inst, dist, genomes[i].bits, genomes[i].order);
        });
        return out;
    };
    RunResult r = evolve(inst, config, coding, std::move(initial), solve_all, rng, t0);
    r.decoded = r.evaluated;
    return r;
}

} // namespace moop
