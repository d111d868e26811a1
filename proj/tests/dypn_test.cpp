// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "moop/dypn.hpp"
#include "moop/error.hpp"
#include "moop/rng.hpp"
#include "test_support.hpp"

using namespace moop;

namespace {

using Vec = std::vector<double>;

// y = x * W for row-major W [in, out].
Vec vecmat(const Vec& x, const ad::Tensor& w) {
    const std::size_t in = w.dim(0), out = w.dim(1);
    Vec y(out, 0.0);
    for (std::size_t i = 0; i < in; ++i)
        for (std::size_t j = 0; j < out; ++j) y[j] += x[i] * w.at(i * out + j);
    return y;
}

Vec plus(Vec a, const Vec& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

Vec values(const ad::Tensor& t) { return {t.values().begin(), t.values().end()}; }

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Straight-line recomputation of one decoder step from the formulas, using
// the concatenated [s; d; h] input as one 3d vector against the stacked W_a.
Vec scripted_step(const ActorParameters& a, const std::vector<Point2>& coords, Vec& h, const Vec* last_embed,
                  const Vec& feature, const std::vector<char>& visited) {
    const std::size_t n = coords.size(), d = static_cast<std::size_t>(a.hidden);
    std::vector<Vec> s(n), dyn(n);
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = plus(vecmat({coords[i][0], coords[i][1]}, a.static_w), values(a.static_b));
        dyn[i] = plus(vecmat({feature[i]}, a.dynamic_w), values(a.dynamic_b));
    }
    // Before the first pick the decoder input is the embedding of the origin.
    const Vec x = last_embed ? *last_embed : values(a.static_b);
    const Vec r_in = plus(vecmat(x, a.gru_w_ir), values(a.gru_b_ir));
    const Vec z_in = plus(vecmat(x, a.gru_w_iz), values(a.gru_b_iz));
    const Vec n_in = plus(vecmat(x, a.gru_w_in), values(a.gru_b_in));
    const Vec r_h = plus(vecmat(h, a.gru_w_hr), values(a.gru_b_hr));
    const Vec z_h = plus(vecmat(h, a.gru_w_hz), values(a.gru_b_hz));
    const Vec n_h = plus(vecmat(h, a.gru_w_hn), values(a.gru_b_hn));
    Vec hn(d);
    for (std::size_t j = 0; j < d; ++j) {
        const double r = sig(r_in[j] + r_h[j]);
        const double z = sig(z_in[j] + z_h[j]);
        const double c = std::tanh(n_in[j] + r * n_h[j]);
        hn[j] = (1 - z) * c + z * h[j];
    }
    h = hn;

    Vec u(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vec cat;
        cat.insert(cat.end(), s[i].begin(), s[i].end());
        cat.insert(cat.end(), dyn[i].begin(), dyn[i].end());
        cat.insert(cat.end(), h.begin(), h.end());
        Vec pre(d, 0.0);
        const ad::Tensor* blocks[3] = {&a.att_w_static, &a.att_w_dynamic, &a.att_w_hidden};
        for (std::size_t k = 0; k < 3 * d; ++k)
            for (std::size_t j = 0; j < d; ++j) pre[j] += cat[k] * blocks[k / d]->at((k % d) * d + j);
        for (std::size_t j = 0; j < d; ++j) u[i] += a.att_v.at(j) * std::tanh(pre[j]);
    }
    double z = 0.0, mx = *std::max_element(u.begin(), u.end());
    for (auto& v : u) z += (v = std::exp(v - mx));
    Vec c(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) c[j] += u[i] / z * s[i][j];

    Vec logits(n, -INFINITY);
    for (std::size_t i = 0; i < n; ++i) {
        if (visited[i]) continue;
        const Vec pre = plus(vecmat(s[i], a.ctx_w_static), vecmat(c, a.ctx_w_context));
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) acc += a.ctx_v.at(j) * std::tanh(pre[j]);
        logits[i] = acc;
    }
    mx = -INFINITY;
    for (double l : logits) mx = std::max(mx, l);
    Vec p(n, 0.0);
    double tot = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (!visited[i]) tot += (p[i] = std::exp(logits[i] - mx));
    for (auto& v : p) v /= tot;
    return p;
}

} // namespace

TEST(DynamicFeature, NearestIsOneFarthestIsZero) {
    const std::vector<double> row{0.0, 2.0, 1.0, 4.0};
    const auto f = dynamic_feature(row);
    EXPECT_DOUBLE_EQ(f[0], 1.0);
    EXPECT_DOUBLE_EQ(f[1], 0.5);
    EXPECT_DOUBLE_EQ(f[2], 0.75);
    EXPECT_DOUBLE_EQ(f[3], 0.0);
}

TEST(DynamicFeature, DegenerateRowIsZero) {
    for (double v : dynamic_feature(std::vector<double>{3.0, 3.0, 3.0})) EXPECT_EQ(v, 0.0);
}

TEST(Actor, LayoutShapes) {
    Rng rng(1);
    const auto a = ActorParameters::initialize(16, rng);
    const auto layout = ActorParameters::layout(16);
    const auto ts = a.tensors();
    ASSERT_EQ(ts.size(), layout.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        EXPECT_EQ(ts[i].shape(), layout[i].second);
        EXPECT_EQ(ts[i].name(), layout[i].first);
        EXPECT_TRUE(ts[i].trainable());
        for (double v : ts[i].values()) EXPECT_LE(std::abs(v), 1.0);
    }
}

TEST(Decoder, StepsMatchScriptedRecomputation) {
    Rng rng(2);
    const auto a = ActorParameters::initialize(6, rng, 0.7);
    const auto coords = random_coords(5, rng);
    TourDecoder dec(a, coords);
    auto st = dec.initial_state();
    Vec h(6, 0.0);
    std::vector<char> visited(5, 0);
    std::optional<Vec> last;
    for (int t = 0; t < 5; ++t) {
        const auto feature = dec.feature_for(st);
        const auto probs = dec.step(st, feature);
        const auto expect = scripted_step(a, coords, h, last ? &*last : nullptr, feature, visited);
        for (int i = 0; i < 5; ++i) EXPECT_NEAR(probs[i], expect[i], 1e-12) << "step " << t << " city " << i;
        for (int j = 0; j < 6; ++j) EXPECT_NEAR(st.hidden[j], h[j], 1e-12);
        City pick = 0;
        for (int i = 1; i < 5; ++i)
            if (probs[i] > probs[pick]) pick = i;
        dec.commit(st, pick, probs);
        visited[pick] = 1;
        last = plus(vecmat({coords[pick][0], coords[pick][1]}, a.static_w), values(a.static_b));
        if (t == 0) {
            for (double f : feature) EXPECT_EQ(f, 0.0);
        }
    }
}

TEST(Decoder, VisitedCitiesHaveZeroProbabilityAndTourIsPermutation) {
    Rng rng(3);
    const auto a = ActorParameters::initialize(8, rng, 0.5);
    const auto coords = random_coords(12, rng);
    for (int rep = 0; rep < 20; ++rep) {
        const auto t = decode_tour(a, coords, DecodeMode::sample, &rng);
        std::vector<City> sorted = t.order;
        std::sort(sorted.begin(), sorted.end());
        for (int i = 0; i < 12; ++i) EXPECT_EQ(sorted[i], i);
        double total = 0.0;
        for (double lp : t.step_log_probs) {
            EXPECT_LE(lp, 0.0);
            total += lp;
        }
        EXPECT_NEAR(total, t.log_prob, 1e-12);
    }
}

TEST(Decoder, GreedyTieGoesToLowestIndex) {
    // Zero output weights make every logit equal.
    Rng rng(4);
    auto a = ActorParameters::initialize(4, rng);
    for (auto& v : a.ctx_v.mutable_values()) v = 0.0;
    const auto coords = random_coords(6, rng);
    const auto t = decode_tour(a, coords, DecodeMode::greedy);
    for (int i = 0; i < 6; ++i) EXPECT_EQ(t.order[i], i);
}

TEST(Decoder, GraphRolloutAgreesWithFastPath) {
    Rng rng(5);
    const auto a = ActorParameters::initialize(8, rng, 0.6);
    const auto coords = random_coords(9, rng);
    const auto fast = decode_tour(a, coords, DecodeMode::greedy);
    const auto slow = rollout(a, coords, DecodeMode::greedy, nullptr);
    EXPECT_EQ(fast.order, slow.order);
    EXPECT_NEAR(fast.log_prob, slow.log_prob.item(), 1e-10);
    for (std::size_t t = 0; t < fast.step_log_probs.size(); ++t)
        EXPECT_NEAR(fast.step_log_probs[t], slow.step_log_probs[t], 1e-10);

    Rng r1(9), r2(9);
    const auto s_fast = decode_tour(a, coords, DecodeMode::sample, &r1);
    const auto s_slow = rollout(a, coords, DecodeMode::sample, &r2);
    EXPECT_EQ(s_fast.order, s_slow.order);
}

TEST(Decoder, AblationIgnoresDistances) {
    Rng rng(6);
    auto a = ActorParameters::initialize(8, rng, 0.6, false);
    const auto coords = random_coords(7, rng);
    TourDecoder dec(a, coords);
    auto st = dec.initial_state();
    const auto p = dec.step(st, dec.feature_for(st));
    dec.commit(st, 3, p);
    for (double f : dec.feature_for(st)) EXPECT_EQ(f, 0.0);
}

TEST(Decoder, ForcedRolloutScoresGivenTour) {
    Rng rng(7);
    const auto a = ActorParameters::initialize(8, rng, 0.6);
    const auto coords = random_coords(6, rng);
    const std::vector<City> tour{2, 0, 5, 1, 4, 3};
    const auto ro = rollout(a, coords, DecodeMode::greedy, nullptr, {}, tour);
    EXPECT_EQ(ro.order, tour);
    TourDecoder dec(a, coords);
    auto st = dec.initial_state();
    for (City c : tour) dec.commit(st, c, dec.step(st, dec.feature_for(st)));
    EXPECT_NEAR(ro.log_prob.item(), st.log_prob, 1e-10);
    const std::vector<City> bad{0, 0, 1, 2, 3, 4};
    EXPECT_THROW(rollout(a, coords, DecodeMode::greedy, nullptr, {}, bad), ValidationError);
}

TEST(RotateTo, StartsAtDepot) {
    const std::vector<City> cyc{3, 1, 0, 2};
    EXPECT_EQ(rotate_to(cyc, 0), (std::vector<City>{0, 2, 3, 1}));
    EXPECT_THROW(rotate_to(cyc, 7), ValidationError);
}

TEST(Decoder, SingleCityIsForced) {
    Rng rng(8);
    const auto a = ActorParameters::initialize(4, rng);
    const std::vector<Point2> one{{0.3, 0.4}};
    const auto t = decode_tour(a, one, DecodeMode::sample, &rng);
    EXPECT_EQ(t.order, std::vector<City>{0});
    EXPECT_EQ(t.log_prob, 0.0);
}

TEST(Decoder, GreedyIsDeterministic) {
    Rng rng(9);
    const auto a = ActorParameters::initialize(8, rng, 0.5);
    const auto coords = random_coords(15, rng);
    const auto t1 = decode_tour(a, coords, DecodeMode::greedy);
    const auto t2 = decode_tour(a, coords, DecodeMode::greedy);
    EXPECT_EQ(t1.order, t2.order);
    EXPECT_EQ(t1.log_prob, t2.log_prob);
}

TEST(Decoder, LastStepIsPointMass) {
    Rng rng(10);
    const auto a = ActorParameters::initialize(8, rng, 0.5);
    const auto coords = random_coords(4, rng);
    TourDecoder dec(a, coords);
    auto st = dec.initial_state();
    for (City c : {2, 0, 3}) dec.commit(st, c, dec.step(st, dec.feature_for(st)));
    const auto p = dec.step(st, dec.feature_for(st));
    EXPECT_EQ(p[1], 1.0);
    dec.commit(st, 1, p);
    EXPECT_THROW(dec.step(st, dec.feature_for(st)), ValidationError);
}

TEST(Decoder, FirstCityFrequenciesMatchDistribution) {
    Rng rng(11);
    const auto a = ActorParameters::initialize(8, rng, 1.0);
    const auto coords = random_coords(4, rng);
    TourDecoder dec(a, coords);
    auto st = dec.initial_state();
    const auto p = dec.step(st, dec.feature_for(st));
    std::vector<int> counts(4, 0);
    Rng draw(12);
    const int samples = 100000;
    for (int s = 0; s < samples; ++s) ++counts[static_cast<std::size_t>(dec.decode(DecodeMode::sample, &draw).order[0])];
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(counts[i] / double(samples), p[i], 0.01);
}

TEST(StaticEmbed, IdentityWeightsCopyCoordinates) {
    Rng rng(13);
    auto a = ActorParameters::initialize(4, rng);
    auto w = a.static_w.mutable_values();
    std::fill(w.begin(), w.end(), 0.0);
    w[0] = 1.0;      // x -> channel 0
    w[4 + 1] = 1.0;  // y -> channel 1
    for (auto& v : a.static_b.mutable_values()) v = 0.0;
    const std::vector<Point2> coords{{0.1, 0.2}, {0.7, 0.3}};
    const auto s = static_embed(a, coords);
    EXPECT_EQ(s.shape(), (ad::Shape{2, 4}));
    EXPECT_EQ(s.at(0), 0.1);
    EXPECT_EQ(s.at(1), 0.2);
    EXPECT_EQ(s.at(4), 0.7);
    EXPECT_EQ(s.at(5), 0.3);
    EXPECT_EQ(s.at(2), 0.0);
}

TEST(StaticEmbed, MatchesRowLoopAndCommutesWithPermutation) {
    Rng rng(14);
    const auto a = ActorParameters::initialize(5, rng);
    const auto coords = random_coords(6, rng);
    const auto s = static_embed(a, coords);
    for (int i = 0; i < 6; ++i) {
        const auto row = plus(vecmat({coords[i][0], coords[i][1]}, a.static_w), values(a.static_b));
        for (int j = 0; j < 5; ++j) EXPECT_NEAR(s.at(i * 5 + j), row[j], 1e-15);
    }
    std::vector<Point2> perm{coords[3], coords[0], coords[5], coords[1], coords[4], coords[2]};
    const int src[] = {3, 0, 5, 1, 4, 2};
    const auto sp = static_embed(a, perm);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 5; ++j) EXPECT_EQ(sp.at(i * 5 + j), s.at(src[i] * 5 + j));
}
