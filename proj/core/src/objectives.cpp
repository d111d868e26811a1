// SPDX-License-Identifier: Apache-2.0
#include "moop/objectives.hpp"

#include <algorithm>
#include <string>

#include "moop/error.hpp"

namespace moop {

std::string_view to_string(ProblemKind kind) noexcept {
    switch (kind) {
    case ProblemKind::mixed: return "mixed";
    case ProblemKind::profits: return "profits";
    case ProblemKind::three: return "three";
    }
    return "?";
}

ProblemKind problem_kind_from_string(std::string_view name) {
    if (name == "mixed") return ProblemKind::mixed;
    if (name == "profits") return ProblemKind::profits;
    if (name == "three") return ProblemKind::three;
    throw ValidationError("unknown problem kind '" + std::string(name) + "' (expected mixed, profits, or three)");
}

namespace {

void check_tour(const Instance& inst, std::span<const City> tour, std::vector<char>& seen) {
    seen.assign(static_cast<std::size_t>(inst.n_cities), 0);
    for (City c : tour) {
        if (c <= 0 || c >= inst.n_cities)
            throw ValidationError("tour index " + std::to_string(c) + " is the depot or out of range [1, " +
                                  std::to_string(inst.n_cities) + ")");
        if (seen[c]) throw ValidationError("tour visits city " + std::to_string(c) + " twice");
        seen[c] = 1;
    }
}

} // namespace

double tour_length(const Instance& inst, std::span<const City> tour) {
    std::vector<char> seen;
    check_tour(inst, tour, seen);
    if (tour.empty()) return 0.0;
    double total = euclidean(inst.coords[inst.depot], inst.coords[tour.front()]);
    for (std::size_t i = 1; i < tour.size(); ++i) total += euclidean(inst.coords[tour[i - 1]], inst.coords[tour[i]]);
    return total + euclidean(inst.coords[tour.back()], inst.coords[inst.depot]);
}

double tour_length(const DistanceMatrix& dist, std::span<const City> tour) noexcept {
    if (tour.empty()) return 0.0;
    double total = dist(0, tour.front());
    for (std::size_t i = 1; i < tour.size(); ++i) total += dist(tour[i - 1], tour[i]);
    return total + dist(tour.back(), 0);
}

std::vector<double> profit_objectives(const Instance& inst, std::span<const City> selection) {
    if (std::find(selection.begin(), selection.end(), inst.depot) == selection.end())
        throw ValidationError("selection must contain the depot");
    std::vector<double> sums(static_cast<std::size_t>(inst.k_profits), 0.0);
    for (City c : selection) {
        if (c < 0 || c >= inst.n_cities) throw ValidationError("selection index out of range: " + std::to_string(c));
        if (c == inst.depot) continue;
        for (int k = 0; k < inst.k_profits; ++k) sums[k] += inst.profit(c, k);
    }
    return sums;
}

EvaluatedSolution evaluate(const Instance& inst, std::span<const City> selection, std::span<const City> tour) {
    std::vector<City> sel(selection.begin(), selection.end());
    std::sort(sel.begin(), sel.end());
    if (std::adjacent_find(sel.begin(), sel.end()) != sel.end())
        throw ValidationError("selection contains a repeated city");
    if (sel.empty() || sel.front() != inst.depot) throw ValidationError("selection must contain the depot");

    std::vector<City> visited(tour.begin(), tour.end());
    std::sort(visited.begin(), visited.end());
    if (!std::equal(visited.begin(), visited.end(), sel.begin() + 1, sel.end()))
        throw ValidationError("tour is not a permutation of the selection without the depot");

    EvaluatedSolution out;
    out.length = tour_length(inst, tour);
    out.objectives = profit_objectives(inst, sel);
    out.objectives.push_back(-out.length);
    out.cv = std::max(0.0, out.length - inst.t_max);
    out.selection = std::move(sel);
    out.tour.assign(tour.begin(), tour.end());
    return out;
}

EvaluatedSolution evaluate_tour(const Instance& inst, std::span<const City> tour) {
    std::vector<City> sel;
    sel.reserve(tour.size() + 1);
    sel.push_back(inst.depot);
    sel.insert(sel.end(), tour.begin(), tour.end());
    return evaluate(inst, sel, tour);
}

std::vector<double> project(std::span<const double> full, ProblemKind kind) {
    if (kind == ProblemKind::profits) return {full.begin(), full.end() - 1};
    return {full.begin(), full.end()};
}

int objective_count(ProblemKind kind, int k_profits) noexcept {
    return kind == ProblemKind::profits ? k_profits : k_profits + 1;
}

} // namespace moop
