// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "moop/instance.hpp"

namespace moop {

/// Which components of the full objective vector a solver optimizes.
///   mixed   : (f_1, -length)            K = 1
///   profits : (f_1, ..., f_K)           length only constrains
///   three   : (f_1, f_2, -length)       K = 2
enum class ProblemKind { mixed, profits, three };

std::string_view to_string(ProblemKind kind) noexcept;
ProblemKind problem_kind_from_string(std::string_view name);

/// A selection with its closed route through the depot.
struct EvaluatedSolution {
    /// Selected cities, ascending, always starting with the depot.
    std::vector<City> selection;
    /// Visiting order of selection \ {depot}; the route is depot, tour..., depot.
    std::vector<City> tour;
    /// (f_1, ..., f_K, -length): every component is maximized.
    std::vector<double> objectives;
    double length = 0.0;
    /// max(0, length - t_max).
    double cv = 0.0;

    bool feasible() const noexcept { return cv == 0.0; }
};

/// Closed-circuit length depot -> tour[0] -> ... -> tour[last] -> depot.
/// Throws ValidationError on a repeated, depot, or out-of-range index.
double tour_length(const Instance& inst, std::span<const City> tour);

/// Same circuit against precomputed distances; no validation.
double tour_length(const DistanceMatrix& dist, std::span<const City> tour) noexcept;

/// K profit sums over the non-depot members of `selection`.
/// Throws ValidationError if the depot is missing.
std::vector<double> profit_objectives(const Instance& inst, std::span<const City> selection);

/// Throws ValidationError unless `tour` is a permutation of selection \ {depot}.
EvaluatedSolution evaluate(const Instance& inst, std::span<const City> selection, std::span<const City> tour);

/// Selection is implied by the tour (depot plus every visited city).
EvaluatedSolution evaluate_tour(const Instance& inst, std::span<const City> tour);

/// Components of `full` (as stored in EvaluatedSolution::objectives) used by `kind`.
std::vector<double> project(std::span<const double> full, ProblemKind kind);

/// Number of objectives `kind` optimizes on an instance with k profit columns.
int objective_count(ProblemKind kind, int k_profits) noexcept;

} // namespace moop
