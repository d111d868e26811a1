// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "moop/objectives.hpp"

namespace moop {

/// Indices of the points no other point dominates (maximization). Of several
/// identical points only the first is kept. Ascending index order.
std::vector<std::size_t> pareto_filter_indices(std::span<const std::vector<double>> points);
std::vector<std::vector<double>> pareto_filter(std::span<const std::vector<double>> points);

/// Measure of the union of boxes [ref, p] over the points p that strictly
/// dominate `ref` (maximization). Exact in 2 and 3 dimensions; other
/// dimensions throw ValidationError.
double hypervolume(std::span<const std::vector<double>> points, std::span<const double> ref);

/// Reference point for a problem kind and budget: mixed (0, -t_max),
/// three (0, 0, -t_max), profits (0, ..., 0) with k_profits zeros.
std::vector<double> reference_point(ProblemKind kind, double t_max, int k_profits = 2);

struct ReferencePreset {
    std::string name;  // e.g. "mixed-200"
    ProblemKind kind;
    int n_cities;
    std::vector<double> ref;
};

/// Presets for every grid size and kind: "mixed-20" ... "three-1000",
/// "profits-20" ... "profits-1000".
const std::vector<ReferencePreset>& reference_presets();
/// Throws ValidationError listing the known names when `name` is unknown.
const ReferencePreset& reference_preset(std::string_view name);

} // namespace moop
