// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "moop/instance.hpp"
#include "moop/objectives.hpp"

namespace moop {

class Rng;

using Bits = std::vector<std::uint8_t>;
using Objectives = std::vector<double>;

// ---------------------------------------------------------------- dominance

/// Pareto dominance on maximization vectors: a >= b everywhere and > somewhere.
bool dominates(std::span<const double> a, std::span<const double> b) noexcept;

/// Feasibility-first rule: feasible beats infeasible, lower violation beats
/// higher, and two feasible points fall back to Pareto dominance.
bool constrained_dominates(std::span<const double> a, double cv_a, std::span<const double> b, double cv_b) noexcept;

/// Fast non-dominated sorting under constrained_dominates. Each front lists
/// indices in ascending order.
std::vector<std::vector<std::size_t>> nondominated_fronts(std::span<const Objectives> objs, std::span<const double> cvs);

/// Rank of every point (0 = first front).
std::vector<int> nondominated_sort(std::span<const Objectives> objs, std::span<const double> cvs);

/// Crowding distance of the points `members` (one front). Boundary points are
/// infinite; a constant objective contributes nothing. Ties in each
/// per-objective sort are broken by position in `members`.
std::vector<double> crowding_distance(std::span<const Objectives> objs, std::span<const std::size_t> members);

// ------------------------------------------------------------------ NSGA-III

/// Das-Dennis lattice: every m-vector of multiples of 1/divisions summing to 1,
/// in lexicographic order (first coordinate ascending).
std::vector<Objectives> das_dennis(int m, int divisions);

/// Number of lattice points for m objectives and p divisions: C(p+m-1, m-1).
std::size_t das_dennis_count(int m, int divisions);

/// Largest division count whose lattice has at most `pop_size` points.
int divisions_for(int m, int pop_size);

struct NicheAssignment {
    std::vector<std::size_t> survivors;
    /// Reference direction and perpendicular distance of every input point.
    std::vector<std::size_t> niche;
    std::vector<double> distance;
};

/// Chooses `target` of the points by NSGA-III survival: whole fronts first,
/// then niche-preserving selection from the partial front. Normalization uses
/// the ideal point, ASF extreme points and hyperplane intercepts (falling back
/// to the front's worst values when the hyperplane is degenerate). Niche ties
/// are broken with `rng`.
NicheAssignment nsga3_survival(std::span<const Objectives> objs, std::span<const double> cvs, std::size_t target,
                               std::span<const Objectives> ref_dirs, Rng& rng);

/// NSGA-II survival: whole fronts, then descending crowding distance on the
/// partial front. Repeats of an objective vector already kept from the same
/// front are taken last.
std::vector<std::size_t> nsga2_survival(std::span<const Objectives> objs, std::span<const double> cvs,
                                        std::size_t target);

// ----------------------------------------------------------------- variation

struct VariationRates {
    double crossover = 0.7;
    /// Per-bit flip probability; negative means 1/L.
    double bit_flip = -1.0;
    /// Per-child probability of one segment inversion.
    double inversion = 0.1;
};

/// Children replace positions [a, b) of parent 1 with parent 2's bits.
void two_point_crossover(const Bits& p1, const Bits& p2, std::size_t a, std::size_t b, Bits& c1, Bits& c2);

/// Pairs parents (0,1), (2,3), ...: two-point crossover then bit-flip mutation.
/// Requires an even parent count.
std::vector<Bits> vary_binary(std::span<const Bits> parents, Rng& rng, const VariationRates& rates = {});

/// Order crossover: the child keeps p1[a..b) in place and fills the remaining
/// positions, starting at b and wrapping, with p2's cities in p2's order
/// beginning at b.
std::vector<City> order_crossover(std::span<const City> p1, std::span<const City> p2, std::size_t a, std::size_t b);

/// Reverses positions first..last (inclusive, 0-based).
void invert_segment(std::vector<City>& order, std::size_t first, std::size_t last);

/// Pairs parents: OX then inversion mutation. Requires an even parent count.
std::vector<std::vector<City>> vary_permutation(std::span<const std::vector<City>> parents, Rng& rng,
                                                const VariationRates& rates = {});

// ------------------------------------------------------------------- codings

/// How a genome maps to a route.
///   binary : bits select cities; a router orders them (the hybrid)
///   single : permutation, cities taken while the budget allows
///   dual   : bits select, permutation orders; no repair
enum class Coding { binary, single, dual };

std::string_view to_string(Coding coding) noexcept;
/// Accepts "binary", "single", "double" (alias "dual").
Coding coding_from_string(std::string_view name);

struct Genome {
    Bits bits;                // one flag per non-depot city (binary, dual)
    std::vector<City> order;  // permutation of non-depot cities (single, dual)

    bool operator==(const Genome&) const = default;
};

/// Softmax over profit densities I_j = s_j / e_ij from `current` to each city
/// in `candidates`, where s_j sums city j's K profits.
std::vector<double> density_probabilities(const Instance& inst, const DistanceMatrix& dist, City current,
                                          std::span<const City> candidates);

/// Sequential density sampling from the depot; stops as soon as the sampled
/// city would push the closed circuit (return leg included) past t_max.
std::vector<Bits> greedy_initialize(const Instance& inst, const DistanceMatrix& dist, int pop_size, Rng& rng);

/// Uniformly random permutations of the non-depot cities (with random bits
/// when `with_bits`).
std::vector<Genome> random_permutation_genomes(const Instance& inst, int pop_size, bool with_bits, Rng& rng);

/// Walks `order`, appending each city while the closed circuit stays within
/// t_max; stops at the first city that does not fit. Always feasible.
EvaluatedSolution decode_single_chromosome(const Instance& inst, const DistanceMatrix& dist,
                                           std::span<const City> order);

/// Selected cities visited in `order`; may violate the budget (cv > 0).
EvaluatedSolution decode_double_chromosome(const Instance& inst, const DistanceMatrix& dist, const Bits& bits,
                                           std::span<const City> order);

/// Depot plus the cities whose bit is set (bit i is city i + 1).
std::vector<City> selection_from_bits(const Bits& bits);

// -------------------------------------------------------------------- engine

enum class Engine { nsga2, nsga3 };

std::string_view to_string(Engine engine) noexcept;
Engine engine_from_string(std::string_view name);

struct Evaluation {
    Objectives objectives;  // maximization orientation, already projected
    double cv = 0.0;
};

/// Scores a batch of genomes; must be pure so results do not depend on order.
using Evaluator = std::function<std::vector<Evaluation>(std::span<const Genome>)>;

struct Population {
    std::vector<Genome> genomes;
    std::vector<Objectives> objectives;
    std::vector<double> cv;
    std::vector<int> rank;
    /// NSGA-II: crowding distance within the rank. NSGA-III: unused (zeros).
    std::vector<double> crowding;

    std::size_t size() const noexcept { return genomes.size(); }
};

struct EngineConfig {
    Engine engine = Engine::nsga2;
    Coding coding = Coding::binary;
    int pop_size = 100;
    VariationRates rates;
    /// NSGA-III reference directions; filled by prepare() when empty.
    std::vector<Objectives> ref_dirs;

    /// Validates sizes and builds NSGA-III directions for `n_objectives`.
    void prepare(int n_objectives);
};

/// Scores `genomes` and fills rank and crowding.
Population make_population(std::vector<Genome> genomes, const Evaluator& evaluate, const EngineConfig& config);

/// Recomputes rank and crowding from objectives and cv.
void rank_population(Population& pop, const EngineConfig& config);

/// Binary tournament: lower rank wins, then larger crowding (NSGA-II) or a
/// coin flip (NSGA-III); equal crowding is also a coin flip.
std::size_t binary_tournament(const Population& pop, const EngineConfig& config, Rng& rng);

/// Offspring genomes for one generation (pop_size of them).
std::vector<Genome> make_offspring(const Population& pop, const EngineConfig& config, Rng& rng);

/// One (mu + lambda) generation: tournament selection, variation, evaluation
/// of the offspring, and survival by the engine's rule. Size is preserved.
Population moea_generation(const Population& pop, const EngineConfig& config, const Evaluator& evaluate, Rng& rng);

/// Indices of feasible rank-0 members.
std::vector<std::size_t> feasible_first_front(const Population& pop);

} // namespace moop
