// SPDX-License-Identifier: Apache-2.0
#include "moop/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "moop/error.hpp"
#include "moop/instance.hpp"
#include "moop/moea.hpp"

namespace moop {

std::vector<std::size_t> pareto_filter_indices(std::span<const std::vector<double>> points) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].size() != points.front().size()) throw ValidationError("pareto_filter: mixed dimensions");
        bool keep = true;
        for (std::size_t j = 0; j < points.size() && keep; ++j) {
            if (j == i) continue;
            if (dominates(points[j], points[i]) || (j < i && points[j] == points[i])) keep = false;
        }
        if (keep) out.push_back(i);
    }
    return out;
}

std::vector<std::vector<double>> pareto_filter(std::span<const std::vector<double>> points) {
    std::vector<std::vector<double>> out;
    for (std::size_t i : pareto_filter_indices(points)) out.push_back(points[i]);
    return out;
}

namespace {

struct P2 {
    double x, y;
};

// Points must already strictly dominate the reference.
double hv2(std::vector<P2> pts, double rx, double ry) {
    std::sort(pts.begin(), pts.end(), [](const P2& a, const P2& b) { return a.x != b.x ? a.x > b.x : a.y > b.y; });
    double total = 0.0, best_y = ry;
    for (const auto& p : pts) {
        if (p.y > best_y) {
            total += (p.x - rx) * (p.y - best_y);
            best_y = p.y;
        }
    }
    return total;
}

} // namespace

double hypervolume(std::span<const std::vector<double>> points, std::span<const double> ref) {
    const std::size_t m = ref.size();
    if (m != 2 && m != 3) throw ValidationError("hypervolume: unsupported dimension " + std::to_string(m));
    std::vector<const std::vector<double>*> live;
    for (const auto& p : points) {
        if (p.size() != m) throw ValidationError("hypervolume: point and reference dimensions differ");
        bool strict = true;
        for (std::size_t k = 0; k < m; ++k) strict = strict && p[k] > ref[k];
        if (strict) live.push_back(&p);
    }
    if (live.empty()) return 0.0;
    if (m == 2) {
        std::vector<P2> pts;
        for (const auto* p : live) pts.push_back({(*p)[0], (*p)[1]});
        return hv2(std::move(pts), ref[0], ref[1]);
    }
    // Slice along the third axis from the top down; each slab's area is the
    // 2-D volume of every point reaching that high.
    std::sort(live.begin(), live.end(), [](const auto* a, const auto* b) { return (*a)[2] > (*b)[2]; });
    double total = 0.0;
    std::vector<P2> active;
    for (std::size_t i = 0; i < live.size(); ++i) {
        active.push_back({(*live[i])[0], (*live[i])[1]});
        const double top = (*live[i])[2];
        const double bottom = i + 1 < live.size() ? (*live[i + 1])[2] : ref[2];
        if (top > bottom) total += hv2(active, ref[0], ref[1]) * (top - bottom);
    }
    return total;
}

std::vector<double> reference_point(ProblemKind kind, double t_max, int k_profits) {
    switch (kind) {
        case ProblemKind::mixed: return {0.0, -t_max};
        case ProblemKind::three: return {0.0, 0.0, -t_max};
        case ProblemKind::profits: return std::vector<double>(static_cast<std::size_t>(k_profits), 0.0);
    }
    return {};
}

const std::vector<ReferencePreset>& reference_presets() {
    static const std::vector<ReferencePreset> presets = [] {
        std::vector<ReferencePreset> out;
        for (ProblemKind kind : {ProblemKind::mixed, ProblemKind::three, ProblemKind::profits})
            for (int n : kGridSizes)
                out.push_back({std::string(to_string(kind)) + "-" + std::to_string(n), kind, n,
                               reference_point(kind, grid_t_max(n))});
        return out;
    }();
    return presets;
}

const ReferencePreset& reference_preset(std::string_view name) {
    for (const auto& p : reference_presets())
        if (p.name == name) return p;
    std::string known;
    for (const auto& p : reference_presets()) known += (known.empty() ? "" : ", ") + p.name;
    throw ValidationError("unknown reference preset '" + std::string(name) + "' (known: " + known + ")");
}

} // namespace moop
