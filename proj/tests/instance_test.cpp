// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "moop/error.hpp"
#include "moop/instance.hpp"
#include "moop/objectives.hpp"
#include "moop/rng.hpp"
#include "test_support.hpp"

using namespace moop;
namespace fs = std::filesystem;

namespace {

Instance square_instance() {
    Instance inst;
    inst.n_cities = 4;
    inst.k_profits = 2;
    inst.t_max = 4.0;
    inst.coords = {{0, 0}, {0, 1}, {1, 1}, {1, 0}};
    inst.profits = {9, 9, 0.2, 0.3, 0.5, 0.1, 0.25, 0.5};
    return inst;
}

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("moop_inst_" + name); }

// Reference xoshiro256** written from the published algorithm.
struct RefXoshiro {
    std::uint64_t s[4];
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    explicit RefXoshiro(std::uint64_t seed) {
        for (auto& w : s) {
            seed += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = seed;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            w = z ^ (z >> 31);
        }
    }
    std::uint64_t next() {
        const std::uint64_t r = rotl(s[1] * 5, 7) * 9;
        const std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return r;
    }
};

} // namespace

TEST(Rng, SplitMixKnownValue) {
    std::uint64_t state = 0;
    EXPECT_EQ(splitmix64(state), 0xe220a8397b1dcdafULL);
}

TEST(Rng, MatchesReferenceXoshiro) {
    for (std::uint64_t seed : {0ULL, 1ULL, 12345ULL, ~0ULL}) {
        Rng rng(seed);
        RefXoshiro ref(seed);
        for (int i = 0; i < 100; ++i) ASSERT_EQ(rng.next(), ref.next());
    }
}

TEST(Rng, BelowIsUnbiasedAndInRange) {
    Rng rng(3);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 70000; ++i) {
        const auto v = rng.below(7);
        ASSERT_LT(v, 7u);
        ++counts[v];
    }
    for (int c : counts) EXPECT_NEAR(c, 10000, 400);
}

TEST(Rng, SplitStreamsDiffer) {
    Rng base(5);
    auto a = base.split(1), b = base.split(2), a2 = base.split(1);
    EXPECT_NE(a.next(), b.next());
    a = base.split(1);
    EXPECT_EQ(a.next(), a2.next());
}

TEST(Rng, CategoricalSkipsZeroWeights) {
    Rng rng(6);
    const std::vector<double> w{0.0, 1.0, 0.0, 3.0};
    std::vector<int> counts(4, 0);
    for (int i = 0; i < 40000; ++i) ++counts[rng.categorical(w)];
    EXPECT_EQ(counts[0], 0);
    EXPECT_EQ(counts[2], 0);
    EXPECT_NEAR(counts[3] / 40000.0, 0.75, 0.01);
}

TEST(Generate, RangesAndShape) {
    const auto inst = generate_instance(100, 2, 4.0, 12345);
    EXPECT_EQ(inst.coords.size(), 100u);
    EXPECT_EQ(inst.profits.size(), 200u);
    EXPECT_EQ(inst.t_max, 4.0);
    EXPECT_EQ(inst.depot, 0);
    for (const auto& c : inst.coords) {
        EXPECT_GE(c[0], 0.0);
        EXPECT_LE(c[0], 1.0);
        EXPECT_GE(c[1], 0.0);
        EXPECT_LE(c[1], 1.0);
    }
    for (double p : inst.profits) {
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, 1.0);
    }
    EXPECT_NO_THROW(validate(inst));
}

TEST(Generate, DrawOrderIsCoordinatesThenProfits) {
    const auto inst = generate_instance(5, 2, 1.0, 77);
    Rng rng(77);
    for (const auto& c : inst.coords) {
        EXPECT_EQ(c[0], rng.uniform());
        EXPECT_EQ(c[1], rng.uniform());
    }
    for (double p : inst.profits) EXPECT_EQ(p, rng.uniform());
}

TEST(Generate, DeterministicBitForBit) {
    EXPECT_EQ(generate_instance(50, 2, 3.0, 9), generate_instance(50, 2, 3.0, 9));
    EXPECT_EQ(instance_to_json(generate_instance(50, 2, 3.0, 9)), instance_to_json(generate_instance(50, 2, 3.0, 9)));
    EXPECT_NE(generate_instance(50, 2, 3.0, 9).coords, generate_instance(50, 2, 3.0, 10).coords);
}

TEST(Generate, ZeroBudgetOnlyEmptySelectionFeasible) {
    const auto inst = generate_instance(2, 1, 0.0, 7);
    EXPECT_TRUE(evaluate(inst, std::vector<City>{0}, {}).feasible());
    const std::vector<City> tour{1};
    EXPECT_FALSE(evaluate_tour(inst, tour).feasible());
}

TEST(Generate, RejectsBadArguments) {
    EXPECT_THROW(generate_instance(1, 1, 1.0, 1), ValidationError);
    EXPECT_THROW(generate_instance(5, -1, 1.0, 1), ValidationError);
    EXPECT_THROW(generate_instance(5, 1, -1.0, 1), ValidationError);
}

TEST(Grid, BudgetsPerSize) {
    const double expect[] = {2, 3, 4, 6, 10, 15};
    for (std::size_t i = 0; i < kGridSizes.size(); ++i) EXPECT_EQ(grid_t_max(kGridSizes[i]), expect[i]);
    EXPECT_LT(grid_t_max(30), 0.0);
}

TEST(Distance, ThreeFourFive) {
    const std::vector<Point2> pts{{0, 0}, {3, 4}};
    DistanceMatrix d(pts);
    EXPECT_EQ(d(0, 1), 5.0);
    EXPECT_EQ(d(1, 0), 5.0);
    EXPECT_EQ(d(0, 0), 0.0);
}

TEST(Distance, MatchesPairwiseLoop) {
    const auto inst = generate_instance(10, 1, 1.0, 3);
    const auto d = distance_matrix(inst);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) EXPECT_DOUBLE_EQ(d(i, j), oracle::dist(inst.coords[i], inst.coords[j]));
}

TEST(InstanceIo, RoundTrip) {
    const auto inst = generate_instance(30, 2, 3.0, 4);
    const auto path = temp_file("rt.json");
    save_instance(inst, path);
    EXPECT_EQ(load_instance(path), inst);
    fs::remove(path);
}

TEST(InstanceIo, MissingCoordsNamesField) {
    const std::string text = R"({"name":"x","n_cities":2,"k_profits":1,"t_max":1,"depot":0,"seed":0,"profits":[[0],[1]]})";
    try {
        instance_from_json(text);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.field(), "coords");
    }
}

TEST(InstanceIo, HandWrittenThreeCities) {
    const auto path = temp_file("hand.json");
    std::ofstream(path) << R"({"name":"tiny","n_cities":3,"k_profits":2,"t_max":2.5,"depot":0,"seed":0,
        "coords":[[0,0],[0.5,0.25],[1,1]],"profits":[[0,0],[0.1,0.9],[0.4,0.6]]})";
    const auto inst = load_instance(path);
    EXPECT_EQ(inst.name, "tiny");
    EXPECT_EQ(inst.t_max, 2.5);
    EXPECT_EQ(inst.coords[1][0], 0.5);
    EXPECT_EQ(inst.coords[1][1], 0.25);
    EXPECT_EQ(inst.profit(2, 0), 0.4);
    EXPECT_EQ(inst.profit(1, 1), 0.9);
    fs::remove(path);
}

TEST(InstanceIo, BadDocumentsAreParseErrors) {
    EXPECT_THROW(instance_from_json("{not json"), ParseError);
    EXPECT_THROW(instance_from_json("[1,2]"), ParseError);
    EXPECT_THROW(load_instance(temp_file("does-not-exist.json")), std::exception);
}

TEST(TourLength, UnitSquare) {
    const auto inst = square_instance();
    const std::vector<City> tour{1, 2, 3};
    EXPECT_DOUBLE_EQ(tour_length(inst, tour), 4.0);
    EXPECT_EQ(tour_length(inst, std::vector<City>{}), 0.0);
}

TEST(TourLength, RejectsBadTours) {
    const auto inst = square_instance();
    EXPECT_THROW(tour_length(inst, std::vector<City>{1, 1}), ValidationError);
    EXPECT_THROW(tour_length(inst, std::vector<City>{0, 1}), ValidationError);
    EXPECT_THROW(tour_length(inst, std::vector<City>{5}), ValidationError);
}

TEST(TourLength, MatchesLegByLeg) {
    const auto inst = generate_instance(7, 1, 2.0, 11);
    const std::vector<City> tour{3, 6, 1, 5, 2, 4};
    double expect = oracle::dist(inst.coords[0], inst.coords[3]);
    for (std::size_t i = 1; i < tour.size(); ++i) expect += oracle::dist(inst.coords[tour[i - 1]], inst.coords[tour[i]]);
    expect += oracle::dist(inst.coords[4], inst.coords[0]);
    EXPECT_NEAR(tour_length(inst, tour), expect, 1e-14);
    EXPECT_NEAR(tour_length(distance_matrix(inst), tour), expect, 1e-14);
}

TEST(Profits, DirectSums) {
    const auto inst = square_instance();
    EXPECT_EQ(profit_objectives(inst, std::vector<City>{0}), (std::vector<double>{0, 0}));
    const auto p = profit_objectives(inst, std::vector<City>{0, 1, 2});
    EXPECT_DOUBLE_EQ(p[0], 0.7);
    EXPECT_DOUBLE_EQ(p[1], 0.4);
    EXPECT_THROW(profit_objectives(inst, std::vector<City>{1, 2}), ValidationError);
}

TEST(Profits, MatchesColumnLoop) {
    const auto inst = generate_instance(50, 2, 3.0, 21);
    Rng rng(1);
    std::vector<City> sel{0};
    for (City c = 1; c < 50; ++c)
        if (rng.bernoulli(0.4)) sel.push_back(c);
    const auto p = profit_objectives(inst, sel);
    for (int k = 0; k < 2; ++k) {
        double s = 0.0;
        for (std::size_t i = 1; i < sel.size(); ++i) s += inst.profits[static_cast<std::size_t>(sel[i]) * 2 + k];
        EXPECT_NEAR(p[k], s, 1e-13);
    }
}

TEST(Evaluate, DepotOnly) {
    const auto sol = evaluate(square_instance(), std::vector<City>{0}, {});
    EXPECT_EQ(sol.objectives, (std::vector<double>{0, 0, -0.0}));
    EXPECT_EQ(sol.cv, 0.0);
    EXPECT_TRUE(sol.feasible());
}

TEST(Evaluate, ViolationIsExcessLength) {
    Instance inst;
    inst.n_cities = 3;
    inst.k_profits = 1;
    inst.t_max = 4.0;
    inst.coords = {{0, 0}, {1.2, 0}, {1.2, 1.2}};
    inst.profits = {0, 1, 1};
    const auto sol = evaluate_tour(inst, std::vector<City>{1, 2});
    const double len = 1.2 + 1.2 + std::hypot(1.2, 1.2);
    EXPECT_NEAR(sol.length, len, 1e-15);
    EXPECT_NEAR(sol.cv, len - 4.0, 1e-15);

    inst.coords = {{0, 0}, {1.2, 0}, {1.2, 1.6}};
    const auto sol2 = evaluate_tour(inst, std::vector<City>{1, 2});
    EXPECT_NEAR(sol2.length, 4.8, 1e-15);
    EXPECT_NEAR(sol2.cv, 0.8, 1e-12);
}

TEST(Evaluate, TourMustMatchSelection) {
    const auto inst = square_instance();
    EXPECT_THROW(evaluate(inst, std::vector<City>{0, 1, 2}, std::vector<City>{1}), ValidationError);
    EXPECT_THROW(evaluate(inst, std::vector<City>{1, 2}, std::vector<City>{1, 2}), ValidationError);
    EXPECT_NO_THROW(evaluate(inst, std::vector<City>{0, 1, 2}, std::vector<City>{2, 1}));
}

TEST(Evaluate, EightCityEnumerationAgrees) {
    const auto inst = generate_instance(8, 2, 2.0, kTestSeed);
    const auto all = oracle::enumerate_subsets(inst);
    ASSERT_EQ(all.size(), 128u);
    for (const auto& p : all) {
        std::vector<City> sel{0};
        sel.insert(sel.end(), p.tour.begin(), p.tour.end());
        std::sort(sel.begin(), sel.end());
        const auto sol = evaluate(inst, sel, p.tour);
        ASSERT_EQ(sol.objectives.size(), p.objectives.size());
        for (std::size_t k = 0; k < p.objectives.size(); ++k) EXPECT_NEAR(sol.objectives[k], p.objectives[k], 1e-12);
        EXPECT_EQ(sol.feasible(), -p.objectives.back() <= inst.t_max);
    }
}

TEST(Project, ComponentsPerKind) {
    const std::vector<double> full{0.5, 0.7, -1.5};
    EXPECT_EQ(project(full, ProblemKind::three), full);
    EXPECT_EQ(project(full, ProblemKind::profits), (std::vector<double>{0.5, 0.7}));
    const std::vector<double> one{0.5, -1.5};
    EXPECT_EQ(project(one, ProblemKind::mixed), one);
    EXPECT_EQ(objective_count(ProblemKind::mixed, 1), 2);
    EXPECT_EQ(objective_count(ProblemKind::profits, 2), 2);
    EXPECT_EQ(objective_count(ProblemKind::three, 2), 3);
    EXPECT_EQ(problem_kind_from_string("three"), ProblemKind::three);
    EXPECT_THROW(problem_kind_from_string("four"), ValidationError);
}
