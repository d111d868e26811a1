// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <limits>
#include <numeric>

#include "moop/error.hpp"
#include "moop/moea.hpp"

namespace moop {

bool dominates(std::span<const double> a, std::span<const double> b) noexcept {
    bool strict = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return false;
        if (a[i] > b[i]) strict = true;
    }
    return strict;
}

bool constrained_dominates(std::span<const double> a, double cv_a, std::span<const double> b, double cv_b) noexcept {
    const bool fa = cv_a == 0.0;
    const bool fb = cv_b == 0.0;
    if (fa && fb) return dominates(a, b);
    if (fa != fb) return fa;
    return cv_a < cv_b;
}

std::vector<std::vector<std::size_t>> nondominated_fronts(std::span<const Objectives> objs, std::span<const double> cvs) {
    const std::size_t n = objs.size();
    if (cvs.size() != n) throw ValidationError("nondominated_sort: objective and violation counts differ");
    for (const auto& o : objs)
        if (o.size() != objs.front().size()) throw ValidationError("nondominated_sort: mixed objective dimensions");

    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> count(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (constrained_dominates(objs[i], cvs[i], objs[j], cvs[j])) {
                dominated[i].push_back(j);
                ++count[j];
            } else if (constrained_dominates(objs[j], cvs[j], objs[i], cvs[i])) {
                dominated[j].push_back(i);
                ++count[i];
            }
        }
    }
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i)
        if (count[i] == 0) current.push_back(i);
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (std::size_t i : current)
            for (std::size_t j : dominated[i])
                if (--count[j] == 0) next.push_back(j);
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

std::vector<int> nondominated_sort(std::span<const Objectives> objs, std::span<const double> cvs) {
    std::vector<int> rank(objs.size(), 0);
    const auto fronts = nondominated_fronts(objs, cvs);
    for (std::size_t r = 0; r < fronts.size(); ++r)
        for (std::size_t i : fronts[r]) rank[i] = static_cast<int>(r);
    return rank;
}

std::vector<double> crowding_distance(std::span<const Objectives> objs, std::span<const std::size_t> members) {
    const std::size_t n = members.size();
    std::vector<double> dist(n, 0.0);
    if (n == 0) return dist;
    if (n <= 2) {
        std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
        return dist;
    }
    const std::size_t m = objs[members[0]].size();
    std::vector<std::size_t> order(n);
    for (std::size_t k = 0; k < m; ++k) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return objs[members[a]][k] < objs[members[b]][k]; });
        const double lo = objs[members[order.front()]][k];
        const double hi = objs[members[order.back()]][k];
        dist[order.front()] = std::numeric_limits<double>::infinity();
        dist[order.back()] = std::numeric_limits<double>::infinity();
        const double range = hi - lo;
        if (!(range > 0.0)) continue;
        for (std::size_t i = 1; i + 1 < n; ++i)
            dist[order[i]] += (objs[members[order[i + 1]]][k] - objs[members[order[i - 1]]][k]) / range;
    }
    return dist;
}

std::vector<std::size_t> nsga2_survival(std::span<const Objectives> objs, std::span<const double> cvs,
                                        std::size_t target) {
    std::vector<std::size_t> kept;
    if (objs.size() <= target) {
        kept.resize(objs.size());
        std::iota(kept.begin(), kept.end(), 0);
        return kept;
    }
    for (const auto& front : nondominated_fronts(objs, cvs)) {
        if (kept.size() + front.size() <= target) {
            kept.insert(kept.end(), front.begin(), front.end());
            if (kept.size() == target) break;
            continue;
        }
        const auto crowd = crowding_distance(objs, front);
        // Repeats of a vector already seen in this front go to the back, so
        // distinct points are never dropped in favour of copies.
        std::vector<char> repeat(front.size(), 0);
        for (std::size_t i = 0; i < front.size(); ++i)
            for (std::size_t j = 0; j < i && !repeat[i]; ++j)
                if (objs[front[i]] == objs[front[j]] && cvs[front[i]] == cvs[front[j]]) repeat[i] = 1;
        std::vector<std::size_t> order(front.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (repeat[a] != repeat[b]) return repeat[a] < repeat[b];
            return crowd[a] > crowd[b];
        });
        for (std::size_t i = 0; kept.size() < target; ++i) kept.push_back(front[order[i]]);
        break;
    }
    return kept;
}

} // namespace moop
