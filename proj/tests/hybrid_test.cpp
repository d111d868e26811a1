// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "moop/error.hpp"
#include "moop/hybrid.hpp"
#include "moop/metrics.hpp"
#include "moop/rng.hpp"
#include "test_support.hpp"

using namespace moop;
namespace fs = std::filesystem;

namespace {

ActorParameters test_actor(int hidden = 16) {
    Rng rng(42);
    return ActorParameters::initialize(hidden, rng, 0.0);
}

void expect_valid_front(const Instance& inst, const RunResult& r, ProblemKind kind) {
    for (const auto& s : r.front) {
        EXPECT_EQ(s.cv, 0.0);
        EXPECT_LE(s.length, inst.t_max);
        const auto again = evaluate(inst, s.selection, s.tour);
        EXPECT_EQ(again.objectives, s.objectives);
        EXPECT_EQ(again.length, s.length);
    }
    for (std::size_t i = 0; i < r.front.size(); ++i)
        for (std::size_t j = 0; j < r.front.size(); ++j)
            if (i != j) {
                const auto a = project(r.front[i].objectives, kind), b = project(r.front[j].objectives, kind);
                EXPECT_FALSE(oracle::dominates(a, b));
                EXPECT_NE(a, b);
            }
}

} // namespace

TEST(Router, EmptyAndSingleCitySelections) {
    const auto inst = generate_instance(12, 1, 2.0, 3);
    const auto actor = test_actor();
    SelectionRouter router(inst, actor);
    const auto empty = router.route(Bits(11, 0));
    EXPECT_TRUE(empty.tour.empty());
    EXPECT_EQ(empty.objectives, (std::vector<double>{0.0, -0.0}));
    EXPECT_EQ(empty.cv, 0.0);

    Bits one(11, 0);
    one[4] = 1;
    const auto single = router.route(one);
    EXPECT_EQ(single.tour, std::vector<City>{5});
    EXPECT_NEAR(single.length, 2 * oracle::dist(inst.coords[0], inst.coords[5]), 1e-15);
}

TEST(Router, RoutesArePermutationsOfSelectionAndCached) {
    const auto inst = generate_instance(30, 1, 3.0, 4);
    const auto actor = test_actor();
    SelectionRouter router(inst, actor);
    Rng rng(5);
    std::vector<Genome> gs(40);
    for (auto& g : gs) {
        g.bits.resize(29);
        for (auto& b : g.bits) b = rng.bernoulli(0.3);
    }
    gs[10] = gs[3];
    const auto sols = router.route_all(gs, 3);
    EXPECT_EQ(router.decoded(), 39);
    for (std::size_t i = 0; i < gs.size(); ++i) {
        EXPECT_EQ(sols[i].selection, selection_from_bits(gs[i].bits));
        auto t = sols[i].tour;
        std::sort(t.begin(), t.end());
        EXPECT_EQ(t, std::vector<City>(sols[i].selection.begin() + 1, sols[i].selection.end()));
    }
    EXPECT_EQ(sols[10].tour, sols[3].tour);
    router.route_all(gs, 1);
    EXPECT_EQ(router.decoded(), 39);
}

TEST(Hybrid, CountsAndTrace) {
    const auto inst = generate_instance(20, 1, 2.0, kTestSeed);
    const auto actor = test_actor();
    HybridConfig cfg;
    cfg.pop_size = 20;
    cfg.max_generations = 5;
    const auto r = run_moea_drl(inst, actor, cfg);
    EXPECT_EQ(r.evaluated, 20L * 6);
    EXPECT_LE(r.decoded, r.evaluated);
    EXPECT_EQ(r.hv_trace.size(), 6u);
    EXPECT_EQ(r.ref, (std::vector<double>{0, -2}));
    EXPECT_NEAR(r.hv, hypervolume([&] {
                    std::vector<std::vector<double>> pts;
                    for (const auto& s : r.front) pts.push_back(s.objectives);
                    return pts;
                }(),
                                  r.ref),
                1e-15);
    expect_valid_front(inst, r, ProblemKind::mixed);
}

TEST(Hybrid, DeterministicAcrossThreadCounts) {
    const auto inst = generate_instance(25, 2, 2.5, 6);
    const auto actor = test_actor();
    HybridConfig cfg;
    cfg.pop_size = 16;
    cfg.max_generations = 4;
    cfg.kind = ProblemKind::three;
    cfg.engine = Engine::nsga3;
    cfg.seed = 9;
    const auto a = run_moea_drl(inst, actor, cfg);
    cfg.jobs = 4;
    const auto b = run_moea_drl(inst, actor, cfg);
    ASSERT_EQ(a.front.size(), b.front.size());
    for (std::size_t i = 0; i < a.front.size(); ++i) {
        EXPECT_EQ(a.front[i].objectives, b.front[i].objectives);
        EXPECT_EQ(a.front[i].tour, b.front[i].tour);
    }
    EXPECT_EQ(a.hv_trace, b.hv_trace);
    expect_valid_front(inst, a, ProblemKind::three);
}

TEST(Hybrid, ZeroGenerationsReportsInitialFront) {
    const auto inst = generate_instance(20, 1, 2.0, 7);
    const auto actor = test_actor();
    HybridConfig cfg;
    cfg.pop_size = 12;
    cfg.max_generations = 0;
    const auto r = run_moea_drl(inst, actor, cfg);
    EXPECT_EQ(r.evaluated, 12);
    ASSERT_EQ(r.hv_trace.size(), 1u);
    EXPECT_DOUBLE_EQ(r.hv, r.hv_trace[0]);
}

TEST(Hybrid, ProfitsKindAndConfigChecks) {
    const auto inst = generate_instance(20, 2, 2.0, 8);
    const auto actor = test_actor();
    HybridConfig cfg;
    cfg.pop_size = 10;
    cfg.max_generations = 3;
    cfg.kind = ProblemKind::profits;
    const auto r = run_moea_drl(inst, actor, cfg);
    EXPECT_EQ(r.ref, (std::vector<double>{0, 0}));
    expect_valid_front(inst, r, ProblemKind::profits);
    cfg.kind = ProblemKind::mixed;
    EXPECT_THROW(run_moea_drl(inst, actor, cfg), ValidationError);
    cfg.kind = ProblemKind::profits;
    cfg.pop_size = 1;
    EXPECT_THROW(run_moea_drl(inst, actor, cfg), ValidationError);
}

TEST(PureMoea, SingleCodingFrontIsFeasible) {
    const auto inst = generate_instance(50, 1, 3.0, 10);
    HybridConfig cfg;
    cfg.pop_size = 30;
    cfg.max_generations = 40;
    for (Coding c : {Coding::single, Coding::dual}) {
        const auto r = run_pure_moea(inst, cfg, c);
        EXPECT_EQ(r.evaluated, 30L * 41);
        expect_valid_front(inst, r, ProblemKind::mixed);
    }
}

TEST(PureMoea, SmallInstanceSaturatesEarly) {
    // On 20 cities, 500 generations already reach the HV of 2000.
    const auto inst = generate_instance(20, 1, 2.0, kTestSeed);
    std::vector<double> h500, h2000;
    for (std::uint64_t s = 0; s < 11; ++s) {
        HybridConfig cfg;
        cfg.seed = s + 1;
        cfg.max_generations = 500;
        h500.push_back(run_pure_moea(inst, cfg, Coding::single).hv);
        cfg.max_generations = 2000;
        h2000.push_back(run_pure_moea(inst, cfg, Coding::single).hv);
    }
    std::nth_element(h500.begin(), h500.begin() + 5, h500.end());
    std::nth_element(h2000.begin(), h2000.begin() + 5, h2000.end());
    EXPECT_GE(h500[5] / h2000[5], 0.95);
}

TEST(Front, AssembleKeepsFeasibleDistinctSorted) {
    const auto inst = generate_instance(10, 1, 1.5, 11);
    std::vector<EvaluatedSolution> cands;
    for (const std::vector<City>& t : std::vector<std::vector<City>>{{}, {1}, {2}, {1, 2}, {2, 1}, {1, 2, 3, 4, 5, 6, 7, 8, 9}})
        cands.push_back(evaluate_tour(inst, t));
    const auto front = assemble_front(cands, ProblemKind::mixed);
    for (std::size_t i = 1; i < front.size(); ++i) EXPECT_GT(front[i - 1].objectives[0], front[i].objectives[0]);
    for (const auto& s : front) EXPECT_TRUE(s.feasible());
}

TEST(FrontIo, RoundTripAndErrors) {
    const auto inst = generate_instance(20, 2, 2.0, 12);
    const auto actor = test_actor();
    HybridConfig cfg;
    cfg.pop_size = 10;
    cfg.max_generations = 2;
    cfg.kind = ProblemKind::three;
    const auto r = run_moea_drl(inst, actor, cfg);
    const auto path = fs::temp_directory_path() / "moop_front.csv";
    write_front_csv(path, r.front, ProblemKind::three);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "profit1,profit2,neg_length,route");
    const auto rows = read_front_csv(path);
    ASSERT_EQ(rows.size(), r.front.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i].objectives, r.front[i].objectives);
        EXPECT_EQ(rows[i].route.front(), 0);
        EXPECT_EQ(rows[i].route.back(), 0);
        EXPECT_EQ(std::vector<City>(rows[i].route.begin() + 1, rows[i].route.end() - 1), r.front[i].tour);
    }
    std::ofstream(path) << "profit,neg_length,route\n1.5,oops,0;0\n";
    try {
        read_front_csv(path);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(e.field().find(":2"), std::string::npos) << e.field();
    }
    fs::remove(path);
    EXPECT_EQ(objective_names(ProblemKind::mixed, 1), (std::vector<std::string>{"profit", "neg_length"}));
}
