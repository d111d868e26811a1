// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numeric>

#include "moop/error.hpp"
#include "moop/moea.hpp"
#include "moop/rng.hpp"

namespace moop {

std::string_view to_string(Coding coding) noexcept {
    switch (coding) {
        case Coding::binary: return "binary";
        case Coding::single: return "single";
        case Coding::dual: return "double";
    }
    return "?";
}

Coding coding_from_string(std::string_view name) {
    if (name == "binary") return Coding::binary;
    if (name == "single") return Coding::single;
    if (name == "double" || name == "dual") return Coding::dual;
    throw ValidationError("unknown coding '" + std::string(name) + "' (expected single or double)");
}

std::vector<double> density_probabilities(const Instance& inst, const DistanceMatrix& dist, City current,
                                          std::span<const City> candidates) {
    std::vector<double> p(candidates.size());
    if (candidates.empty()) return p;
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const City j = candidates[i];
        double s = 0.0;
        for (int k = 0; k < inst.k_profits; ++k) s += inst.profit(j, k);
        p[i] = s / std::max(dist(current, j), 1e-12);
        hi = std::max(hi, p[i]);
    }
    double z = 0.0;
    for (auto& v : p) z += (v = std::exp(v - hi));
    for (auto& v : p) v /= z;
    return p;
}

std::vector<Bits> greedy_initialize(const Instance& inst, const DistanceMatrix& dist, int pop_size, Rng& rng) {
    if (pop_size < 1) throw ValidationError("greedy_initialize: pop_size must be >= 1");
    const int n = inst.n_cities;
    std::vector<Bits> pop;
    pop.reserve(static_cast<std::size_t>(pop_size));
    std::vector<City> open;
    for (int p = 0; p < pop_size; ++p) {
        Bits bits(static_cast<std::size_t>(n - 1), 0);
        open.resize(static_cast<std::size_t>(n - 1));
        std::iota(open.begin(), open.end(), 1);
        City cur = inst.depot;
        double walked = 0.0;
        while (!open.empty()) {
            const auto probs = density_probabilities(inst, dist, cur, open);
            const std::size_t pick = rng.categorical(probs);
            const City next = open[pick];
            const double with = walked + dist(cur, next) + dist(next, inst.depot);
            if (with > inst.t_max) break;
            walked += dist(cur, next);
            bits[static_cast<std::size_t>(next - 1)] = 1;
            open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));
            cur = next;
        }
        pop.push_back(std::move(bits));
    }
    return pop;
}

std::vector<Genome> random_permutation_genomes(const Instance& inst, int pop_size, bool with_bits, Rng& rng) {
    std::vector<Genome> out(static_cast<std::size_t>(pop_size));
    for (auto& g : out) {
        g.order.resize(static_cast<std::size_t>(inst.n_cities - 1));
        std::iota(g.order.begin(), g.order.end(), 1);
        rng.shuffle(g.order.begin(), g.order.end());
        if (with_bits) {
            g.bits.resize(g.order.size());
            for (auto& b : g.bits) b = rng.bernoulli(0.5) ? 1 : 0;
        }
    }
    return out;
}

std::vector<City> selection_from_bits(const Bits& bits) {
    std::vector<City> sel{0};
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) sel.push_back(static_cast<City>(i + 1));
    return sel;
}

EvaluatedSolution decode_single_chromosome(const Instance& inst, const DistanceMatrix& dist,
                                           std::span<const City> order) {
    std::vector<City> tour;
    City cur = inst.depot;
    double walked = 0.0;
    for (City c : order) {
        if (walked + dist(cur, c) + dist(c, inst.depot) > inst.t_max) break;
        walked += dist(cur, c);
        tour.push_back(c);
        cur = c;
    }
    std::vector<City> sel = tour;
    sel.push_back(inst.depot);
    std::sort(sel.begin(), sel.end());
    return evaluate(inst, sel, tour);
}

EvaluatedSolution decode_double_chromosome(const Instance& inst, const DistanceMatrix& /*dist*/, const Bits& bits,
                                           std::span<const City> order) {
    if (bits.size() != order.size()) throw ValidationError("decode_double_chromosome: bits and order lengths differ");
    std::vector<City> tour;
    for (City c : order)
        if (bits[static_cast<std::size_t>(c - 1)]) tour.push_back(c);
    return evaluate(inst, selection_from_bits(bits), tour);
}

} // namespace moop
