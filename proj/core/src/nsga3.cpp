// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "moop/error.hpp"
#include "moop/moea.hpp"
#include "moop/rng.hpp"

namespace moop {

namespace {

void lattice(int m, int left, int divisions, Objectives& prefix, std::vector<Objectives>& out) {
    if (m == 1) {
        prefix.push_back(static_cast<double>(left) / divisions);
        out.push_back(prefix);
        prefix.pop_back();
        return;
    }
    for (int i = 0; i <= left; ++i) {
        prefix.push_back(static_cast<double>(i) / divisions);
        lattice(m - 1, left - i, divisions, prefix, out);
        prefix.pop_back();
    }
}

// Solves a * x = b in place by Gaussian elimination with partial pivoting.
bool solve(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double>& x) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        if (std::abs(a[piv][c]) < 1e-12) return false;
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    x.assign(n, 0.0);
    for (std::size_t c = n; c-- > 0;) {
        double s = b[c];
        for (std::size_t k = c + 1; k < n; ++k) s -= a[c][k] * x[k];
        x[c] = s / a[c][c];
    }
    return true;
}

} // namespace

std::vector<Objectives> das_dennis(int m, int divisions) {
    if (m < 1 || divisions < 0) throw ValidationError("das_dennis: need m >= 1 and divisions >= 0");
    std::vector<Objectives> out;
    if (divisions == 0) {
        out.push_back(Objectives(static_cast<std::size_t>(m), 1.0 / m));
        return out;
    }
    Objectives prefix;
    lattice(m, divisions, divisions, prefix, out);
    return out;
}

std::size_t das_dennis_count(int m, int divisions) {
    // C(divisions + m - 1, m - 1)
    std::size_t r = 1;
    for (int i = 1; i < m; ++i) r = r * static_cast<std::size_t>(divisions + i) / static_cast<std::size_t>(i);
    return r;
}

int divisions_for(int m, int pop_size) {
    if (m < 1 || pop_size < 1) throw ValidationError("divisions_for: need m >= 1 and pop_size >= 1");
    if (m == 1) return 1;
    int p = 1;
    while (das_dennis_count(m, p + 1) <= static_cast<std::size_t>(pop_size)) ++p;
    return p;
}

NicheAssignment nsga3_survival(std::span<const Objectives> objs, std::span<const double> cvs, std::size_t target,
                               std::span<const Objectives> ref_dirs, Rng& rng) {
    NicheAssignment out;
    const std::size_t n = objs.size();
    out.niche.assign(n, std::numeric_limits<std::size_t>::max());
    out.distance.assign(n, std::numeric_limits<double>::infinity());
    if (n <= target) {
        out.survivors.resize(n);
        std::iota(out.survivors.begin(), out.survivors.end(), 0);
        return out;
    }
    if (ref_dirs.empty()) throw ValidationError("nsga3_survival: no reference directions");
    const std::size_t m = objs.front().size();

    const auto fronts = nondominated_fronts(objs, cvs);
    std::vector<std::size_t> st;
    std::size_t last = 0;
    for (; last < fronts.size(); ++last) {
        if (st.size() + fronts[last].size() >= target) break;
        st.insert(st.end(), fronts[last].begin(), fronts[last].end());
    }
    out.survivors = st;
    if (st.size() + fronts[last].size() == target) {
        out.survivors.insert(out.survivors.end(), fronts[last].begin(), fronts[last].end());
        return out;
    }
    const auto& partial = fronts[last];
    std::vector<std::size_t> pool_all = st;
    pool_all.insert(pool_all.end(), partial.begin(), partial.end());

    // Minimization view, translated by the ideal point.
    Objectives ideal(m, std::numeric_limits<double>::infinity());
    for (std::size_t i : pool_all)
        for (std::size_t k = 0; k < m; ++k) ideal[k] = std::min(ideal[k], -objs[i][k]);
    auto translated = [&](std::size_t i, std::size_t k) { return -objs[i][k] - ideal[k]; };

    std::vector<double> intercept(m, 0.0);
    bool ok = true;
    {
        std::vector<std::vector<double>> extremes(m, std::vector<double>(m));
        for (std::size_t axis = 0; axis < m; ++axis) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t arg = pool_all.front();
            for (std::size_t i : pool_all) {
                double asf = 0.0;
                for (std::size_t k = 0; k < m; ++k) asf = std::max(asf, translated(i, k) / (k == axis ? 1.0 : 1e-6));
                if (asf < best) {
                    best = asf;
                    arg = i;
                }
            }
            for (std::size_t k = 0; k < m; ++k) extremes[axis][k] = translated(arg, k);
        }
        std::vector<double> b;
        ok = solve(extremes, std::vector<double>(m, 1.0), b);
        if (ok) {
            for (std::size_t k = 0; k < m; ++k) {
                if (!(b[k] > 0.0) || !std::isfinite(1.0 / b[k]) || 1.0 / b[k] <= 1e-6) {
                    ok = false;
                    break;
                }
                intercept[k] = 1.0 / b[k];
            }
        }
    }
    if (!ok) {
        for (std::size_t k = 0; k < m; ++k) {
            double worst = 0.0;
            for (std::size_t i : pool_all) worst = std::max(worst, translated(i, k));
            intercept[k] = worst > 1e-12 ? worst : 1.0;
        }
    }

    for (std::size_t i : pool_all) {
        Objectives x(m);
        for (std::size_t k = 0; k < m; ++k) x[k] = translated(i, k) / intercept[k];
        for (std::size_t r = 0; r < ref_dirs.size(); ++r) {
            const auto& w = ref_dirs[r];
            double ww = 0.0, xw = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                ww += w[k] * w[k];
                xw += x[k] * w[k];
            }
            const double t = ww > 0.0 ? xw / ww : 0.0;
            double d2 = 0.0;
            for (std::size_t k = 0; k < m; ++k) d2 += (x[k] - t * w[k]) * (x[k] - t * w[k]);
            const double d = std::sqrt(d2);
            if (d < out.distance[i]) {
                out.distance[i] = d;
                out.niche[i] = r;
            }
        }
    }

    std::vector<std::size_t> rho(ref_dirs.size(), 0);
    for (std::size_t i : st) ++rho[out.niche[i]];
    std::vector<std::vector<std::size_t>> members(ref_dirs.size());
    for (std::size_t i : partial) members[out.niche[i]].push_back(i);

    std::size_t need = target - st.size();
    std::vector<std::size_t> ties;
    while (need > 0) {
        std::size_t lo = std::numeric_limits<std::size_t>::max();
        ties.clear();
        for (std::size_t r = 0; r < ref_dirs.size(); ++r) {
            if (members[r].empty()) continue;
            if (rho[r] < lo) {
                lo = rho[r];
                ties.clear();
            }
            if (rho[r] == lo) ties.push_back(r);
        }
        const std::size_t r = ties.size() == 1 ? ties[0] : ties[rng.below(ties.size())];
        auto& pool = members[r];
        std::size_t pick = 0;
        if (rho[r] == 0) {
            for (std::size_t j = 1; j < pool.size(); ++j)
                if (out.distance[pool[j]] < out.distance[pool[pick]]) pick = j;
        } else if (pool.size() > 1) {
            pick = rng.below(pool.size());
        }
        out.survivors.push_back(pool[pick]);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
        ++rho[r];
        --need;
    }
    return out;
}

} // namespace moop
