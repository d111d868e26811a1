// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "moop/dypn.hpp"
#include "moop/instance.hpp"
#include "moop/moea.hpp"
#include "moop/objectives.hpp"

namespace moop {

struct HybridConfig {
    int pop_size = 100;
    int max_generations = 20;
    Engine engine = Engine::nsga2;
    ProblemKind kind = ProblemKind::mixed;
    std::uint64_t seed = 1;
    /// Worker threads for genome evaluation.
    int jobs = 1;
    VariationRates rates;
};

struct RunResult {
    /// Feasible, mutually non-dominated, one per distinct objective vector,
    /// sorted by descending first objective.
    std::vector<EvaluatedSolution> front;
    /// Reference point used for hv and hv_trace.
    std::vector<double> ref;
    double hv = 0.0;
    /// HV of the feasible first front after initialization and after each generation.
    std::vector<double> hv_trace;
    double wall_seconds = 0.0;
    /// Genomes scored, counting repeats: pop_size * (max_generations + 1).
    long evaluated = 0;
    /// Routes actually decoded by the network (route-cache misses).
    long decoded = 0;
};

/// Greedy network routing of bit-set selections with a cache keyed by the bits.
class SelectionRouter {
public:
    SelectionRouter(const Instance& inst, const ActorParameters& actor);

    /// Depot-first route of {depot} and the selected cities, evaluated.
    EvaluatedSolution route(const Bits& bits);

    /// Routes every genome, decoding cache misses on up to `jobs` threads.
    std::vector<EvaluatedSolution> route_all(std::span<const Genome> genomes, int jobs);

    long decoded() const noexcept { return decoded_; }

private:
    std::vector<City> decode(const Bits& bits) const;

    const Instance* inst_;
    const ActorParameters* actor_;
    std::unordered_map<std::string, std::vector<City>> cache_;
    long decoded_ = 0;
};

/// Objectives used by the engine for `kind`, and the violation.
Evaluation to_evaluation(const EvaluatedSolution& sol, ProblemKind kind);

/// MOEA over selection bits with the network as router.
RunResult run_moea_drl(const Instance& inst, const ActorParameters& actor, const HybridConfig& config);

/// MOEA over permutations with single- or double-chromosome decoding.
RunResult run_pure_moea(const Instance& inst, const HybridConfig& config, Coding coding);

/// Feasible non-dominated distinct solutions, sorted by descending first objective.
std::vector<EvaluatedSolution> assemble_front(std::vector<EvaluatedSolution> candidates, ProblemKind kind);

/// HV of the feasible non-dominated subset of `solutions`.
double front_hypervolume(std::span<const EvaluatedSolution> solutions, ProblemKind kind, std::span<const double> ref);

// Front files: one row per solution, the engine's objectives (maximization
// orientation, full precision) followed by the depot-to-depot route "0;3;1;0".

void write_front_csv(const std::filesystem::path& path, std::span<const EvaluatedSolution> front, ProblemKind kind);

struct FrontRow {
    std::vector<double> objectives;
    std::vector<City> route;
};

/// Throws ParseError naming the offending line.
std::vector<FrontRow> read_front_csv(const std::filesystem::path& path);

std::vector<std::string> objective_names(ProblemKind kind, int k_profits);

} // namespace moop
