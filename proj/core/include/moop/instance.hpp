// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace moop {

using City = int;
using Point2 = std::array<double, 2>;

/// A multi-objective orienteering instance. City 0 is the depot; it carries
/// generated profits so every row has the same shape, but those profits never
/// enter an objective.
struct Instance {
    std::string name;
    int n_cities = 0;
    int k_profits = 0;
    double t_max = 0.0;
    City depot = 0;
    std::uint64_t seed = 0;
    std::vector<Point2> coords;
    /// n_cities rows of k_profits values, row-major.
    std::vector<double> profits;

    double profit(City i, int k) const { return profits[static_cast<std::size_t>(i) * k_profits + k]; }
    std::span<const double> profit_row(City i) const {
        return {profits.data() + static_cast<std::size_t>(i) * k_profits, static_cast<std::size_t>(k_profits)};
    }

    bool operator==(const Instance&) const = default;
};

/// Draws coordinates and then profits i.i.d. uniform on [0,1] from one
/// generator seeded with `seed`: all n coordinate pairs (x then y per city),
/// followed by all n*k profits in row order.
Instance generate_instance(int n_cities, int k_profits, double t_max, std::uint64_t seed,
                           std::string name = {});

/// Throws ValidationError if any documented invariant is broken.
void validate(const Instance& inst);

/// Dense symmetric Euclidean distances.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(std::span<const Point2> coords);

    int size() const noexcept { return n_; }
    double operator()(City i, City j) const noexcept { return d_[static_cast<std::size_t>(i) * n_ + j]; }
    std::span<const double> row(City i) const noexcept {
        return {d_.data() + static_cast<std::size_t>(i) * n_, static_cast<std::size_t>(n_)};
    }

private:
    int n_ = 0;
    std::vector<double> d_;
};

inline double euclidean(const Point2& a, const Point2& b) noexcept {
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    return std::sqrt(dx * dx + dy * dy);
}

DistanceMatrix distance_matrix(const Instance& inst);

/// Random TSP coordinates (no profits); used for training batches.
std::vector<Point2> random_coords(int n, class Rng& rng);

/// JSON document with keys name, n_cities, k_profits, t_max, depot, seed,
/// coords, profits. Doubles are written in shortest round-trip form.
std::string instance_to_json(const Instance& inst);
Instance instance_from_json(const std::string& text);

void save_instance(const Instance& inst, const std::filesystem::path& path);
Instance load_instance(const std::filesystem::path& path);

/// Tour-length budgets of the benchmark grid (20 -> 2, ..., 1000 -> 15).
/// Returns a negative value for sizes outside the grid.
double grid_t_max(int n_cities) noexcept;
inline constexpr std::array<int, 6> kGridSizes{20, 50, 100, 200, 500, 1000};
inline constexpr std::uint64_t kTestSeed = 12345;
inline constexpr std::uint64_t kTrainSeed = 1234;

} // namespace moop
