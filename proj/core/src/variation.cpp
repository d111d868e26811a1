// SPDX-License-Identifier: Apache-2.0
#include <algorithm>

#include "moop/error.hpp"
#include "moop/moea.hpp"
#include "moop/rng.hpp"

namespace moop {

namespace {

// Two distinct cut points a < b in [0, len].
std::pair<std::size_t, std::size_t> cut_points(std::size_t len, Rng& rng) {
    std::size_t a = rng.below(len + 1);
    std::size_t b = rng.below(len);
    if (b >= a) ++b;
    if (a > b) std::swap(a, b);
    return {a, b};
}

void flip_bits(Bits& bits, double rate, Rng& rng) {
    for (auto& b : bits)
        if (rng.bernoulli(rate)) b ^= 1;
}

} // namespace

void two_point_crossover(const Bits& p1, const Bits& p2, std::size_t a, std::size_t b, Bits& c1, Bits& c2) {
    c1 = p1;
    c2 = p2;
    for (std::size_t i = a; i < b; ++i) {
        c1[i] = p2[i];
        c2[i] = p1[i];
    }
}

std::vector<Bits> vary_binary(std::span<const Bits> parents, Rng& rng, const VariationRates& rates) {
    if (parents.size() % 2 != 0) throw ValidationError("vary_binary: parent count must be even");
    std::vector<Bits> out;
    out.reserve(parents.size());
    for (std::size_t i = 0; i < parents.size(); i += 2) {
        const Bits& p1 = parents[i];
        const Bits& p2 = parents[i + 1];
        if (p1.size() != p2.size()) throw ValidationError("vary_binary: parent lengths differ");
        Bits c1 = p1, c2 = p2;
        const std::size_t len = p1.size();
        if (len > 0 && rng.bernoulli(rates.crossover)) {
            const auto [a, b] = cut_points(len, rng);
            two_point_crossover(p1, p2, a, b, c1, c2);
        }
        const double rate = rates.bit_flip < 0.0 ? (len > 0 ? 1.0 / static_cast<double>(len) : 0.0) : rates.bit_flip;
        flip_bits(c1, rate, rng);
        flip_bits(c2, rate, rng);
        out.push_back(std::move(c1));
        out.push_back(std::move(c2));
    }
    return out;
}

std::vector<City> order_crossover(std::span<const City> p1, std::span<const City> p2, std::size_t a, std::size_t b) {
    const std::size_t n = p1.size();
    std::vector<City> child(n, -1);
    City max_city = 0;
    for (City c : p1) max_city = std::max(max_city, c);
    std::vector<char> used(static_cast<std::size_t>(max_city) + 1, 0);
    for (std::size_t i = a; i < b; ++i) {
        child[i] = p1[i];
        used[static_cast<std::size_t>(p1[i])] = 1;
    }
    std::size_t pos = b % std::max<std::size_t>(n, 1);
    for (std::size_t k = 0; k < n; ++k) {
        const City c = p2[(b + k) % n];
        if (used[static_cast<std::size_t>(c)]) continue;
        while (child[pos] != -1) pos = (pos + 1) % n;
        child[pos] = c;
        used[static_cast<std::size_t>(c)] = 1;
    }
    return child;
}

void invert_segment(std::vector<City>& order, std::size_t first, std::size_t last) {
    if (first > last || last >= order.size()) throw ValidationError("invert_segment: bad segment");
    std::reverse(order.begin() + static_cast<std::ptrdiff_t>(first), order.begin() + static_cast<std::ptrdiff_t>(last) + 1);
}

std::vector<std::vector<City>> vary_permutation(std::span<const std::vector<City>> parents, Rng& rng,
                                                const VariationRates& rates) {
    if (parents.size() % 2 != 0) throw ValidationError("vary_permutation: parent count must be even");
    std::vector<std::vector<City>> out;
    out.reserve(parents.size());
    for (std::size_t i = 0; i < parents.size(); i += 2) {
        const auto& p1 = parents[i];
        const auto& p2 = parents[i + 1];
        if (p1.size() != p2.size()) throw ValidationError("vary_permutation: parent lengths differ");
        const std::size_t len = p1.size();
        std::vector<City> c1 = p1, c2 = p2;
        if (len > 1 && rng.bernoulli(rates.crossover)) {
            const auto [a, b] = cut_points(len, rng);
            c1 = order_crossover(p1, p2, a, b);
            c2 = order_crossover(p2, p1, a, b);
        }
        for (auto* c : {&c1, &c2}) {
            if (len > 1 && rng.bernoulli(rates.inversion)) {
                auto [a, b] = cut_points(len, rng);
                invert_segment(*c, a, b - 1);
            }
        }
        out.push_back(std::move(c1));
        out.push_back(std::move(c2));
    }
    return out;
}

} // namespace moop
