// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "moop/error.hpp"
#include "moop/rng.hpp"
#include "moop/tensor.hpp"

using namespace moop;
using namespace moop::ad;

namespace {

Tensor random_param(Shape shape, Rng& rng, double range = 1.0) {
    std::vector<double> v(numel(shape));
    for (auto& x : v) x = rng.uniform(-range, range);
    return Tensor::parameter(std::move(shape), std::move(v));
}

// Central differences of a scalar function of one parameter, computed
// without touching backward().
std::vector<double> numeric_grad(const std::function<double()>& f, Tensor& p, double h = 1e-5) {
    std::vector<double> g(p.numel());
    auto v = p.mutable_values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double keep = v[i];
        v[i] = keep + h;
        const double up = f();
        v[i] = keep - h;
        const double down = f();
        v[i] = keep;
        g[i] = (up - down) / (2 * h);
    }
    return g;
}

void expect_grad_matches(const std::function<Tensor()>& loss, std::vector<Tensor> params, double tol = 1e-6) {
    for (auto& p : params) p.zero_grad();
    loss().backward();
    for (auto& p : params) {
        const std::vector<double> analytic(p.grad().begin(), p.grad().end());
        const auto numeric = numeric_grad([&] { return loss().item(); }, p);
        for (std::size_t i = 0; i < analytic.size(); ++i)
            EXPECT_NEAR(analytic[i], numeric[i], tol * std::max(1.0, std::abs(numeric[i]))) << "element " << i;
    }
}

} // namespace

TEST(Tensor, MatmulValuesAndShapeError) {
    const auto a = Tensor::constant({2, 3}, {1, 2, 3, 4, 5, 6});
    const auto b = Tensor::constant({3, 2}, {7, 8, 9, 10, 11, 12});
    const auto c = matmul(a, b);
    ASSERT_EQ(c.shape(), (Shape{2, 2}));
    EXPECT_DOUBLE_EQ(c.at(0), 58);
    EXPECT_DOUBLE_EQ(c.at(1), 64);
    EXPECT_DOUBLE_EQ(c.at(2), 139);
    EXPECT_DOUBLE_EQ(c.at(3), 154);
    EXPECT_THROW(matmul(a, a), ShapeError);
}

TEST(Tensor, ShapeErrorNamesBothShapes) {
    const auto a = Tensor::zeros({2, 3});
    const auto b = Tensor::zeros({3, 2});
    try {
        add(a, b);
        FAIL() << "expected ShapeError";
    } catch (const ShapeError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("[2,3]"), std::string::npos) << msg;
        EXPECT_NE(msg.find("[3,2]"), std::string::npos) << msg;
    }
}

TEST(Tensor, SoftmaxRowsSumToOne) {
    Rng rng(1);
    const auto x = random_param({3, 5}, rng, 4.0);
    for (std::size_t axis : {0u, 1u}) {
        const auto s = softmax(x, axis);
        const std::size_t outer = axis == 0 ? 5 : 3, len = axis == 0 ? 3 : 5;
        for (std::size_t o = 0; o < outer; ++o) {
            double total = 0.0;
            for (std::size_t j = 0; j < len; ++j) total += axis == 0 ? s.at(j * 5 + o) : s.at(o * 5 + j);
            EXPECT_NEAR(total, 1.0, 1e-12);
        }
    }
}

TEST(Tensor, MaskedEntriesGetZeroProbabilityAndNoGradient) {
    auto x = Tensor::parameter({4}, {0.3, -1.0, 2.0, 0.5});
    const std::vector<char> mask{0, 1, 0, 1};
    const auto p = softmax(masked_fill(x, mask), 0);
    EXPECT_EQ(p.at(1), 0.0);
    EXPECT_EQ(p.at(3), 0.0);
    EXPECT_NEAR(p.at(0) + p.at(2), 1.0, 1e-15);
    sum(mul(p, Tensor::constant({4}, {1, 2, 3, 4}))).backward();
    EXPECT_EQ(x.grad()[1], 0.0);
    EXPECT_EQ(x.grad()[3], 0.0);
    EXPECT_NE(x.grad()[0], 0.0);
}

TEST(Tensor, LogSoftmaxMatchesLogOfSoftmax) {
    Rng rng(2);
    const auto x = random_param({2, 6}, rng, 10.0);
    const auto a = log_softmax(x, 1);
    const auto b = softmax(x, 1);
    for (std::size_t i = 0; i < 12; ++i) EXPECT_NEAR(a.at(i), std::log(b.at(i)), 1e-12);
}

TEST(Tensor, GradientsOfEveryOpMatchFiniteDifferences) {
    Rng rng(3);
    auto w = random_param({3, 4}, rng);
    auto b = random_param({4}, rng);
    auto x = random_param({5, 3}, rng);
    auto y = random_param({5, 4}, rng);
    expect_grad_matches([&] { return sum(tanh(pointwise_linear(x, w, b))); }, {w, b, x});
    expect_grad_matches([&] { return mean(sigmoid(matmul(x, w))); }, {w, x});
    expect_grad_matches([&] { return sum(relu(add(matmul(x, w), y))); }, {w, x, y});
    expect_grad_matches([&] { return squared_error(matmul(x, w), y); }, {w, x, y});
    expect_grad_matches([&] { return sum(mul(log_softmax(y, 0), softmax(y, 1))); }, {y});
    expect_grad_matches([&] { return sum(scale(sub(concat({x, x}, 1), concat({x, x}, 1)), 3.0)); }, {x});
    expect_grad_matches([&] { return sum(mul(concat({y, x}, 1), concat({y, x}, 1))); }, {x, y});
    expect_grad_matches([&] { return sum(mul(concat({y, y}, 0), concat({y, y}, 0))); }, {y});
    expect_grad_matches([&] { return sum(tanh(select_row(reshape(y, {4, 5}), 2))); }, {y});
    expect_grad_matches([&] { return sum(mul(pick(y, 7), pick(y, 3))); }, {y});
    auto v = random_param({3}, rng);
    expect_grad_matches([&] { return sum(linear(v, w, b)); }, {v, w, b});
    const std::vector<char> mask{0, 1, 0, 0};
    expect_grad_matches([&] { return pick(log_softmax(masked_fill(b, mask), 0), 2); }, {b});
}

TEST(Tensor, DropoutIsInvertedAndIdentityOutsideTraining) {
    Rng rng(4);
    const auto x = Tensor::constant({10000}, std::vector<double>(10000, 1.0));
    const auto off = dropout(x, 0.3, rng, false);
    for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(off.at(i), 1.0);
    const auto on = dropout(x, 0.3, rng, true);
    double total = 0.0;
    std::size_t zeros = 0;
    for (std::size_t i = 0; i < 10000; ++i) {
        total += on.at(i);
        zeros += on.at(i) == 0.0;
        if (on.at(i) != 0.0) EXPECT_NEAR(on.at(i), 1.0 / 0.7, 1e-12);
    }
    EXPECT_NEAR(total / 10000, 1.0, 0.03);
    EXPECT_NEAR(static_cast<double>(zeros) / 10000, 0.3, 0.02);
}

TEST(Tensor, DetachStopsGradient) {
    auto w = Tensor::parameter({2}, {1.0, 2.0});
    sum(mul(w.detach(), w)).backward();
    EXPECT_DOUBLE_EQ(w.grad()[0], 1.0);
    EXPECT_DOUBLE_EQ(w.grad()[1], 2.0);
}

TEST(Tensor, GradientsAccumulateAcrossBackwardCalls) {
    auto w = Tensor::parameter({1}, {3.0});
    const auto loss = sum(mul(w, w));
    loss.backward();
    loss.backward();
    EXPECT_DOUBLE_EQ(w.grad()[0], 12.0);
    w.zero_grad();
    EXPECT_DOUBLE_EQ(w.grad()[0], 0.0);
}

TEST(Tensor, SharedSubgraphGradientIsSummed) {
    auto w = Tensor::parameter({1}, {0.5});
    const auto t = tanh(w);
    sum(add(t, t)).backward();
    EXPECT_NEAR(w.grad()[0], 2.0 * (1.0 - std::tanh(0.5) * std::tanh(0.5)), 1e-15);
}

TEST(Tensor, BackwardRequiresScalar) { EXPECT_THROW(Tensor::parameter({2}, {1, 2}).backward(), ShapeError); }

TEST(Adam, FirstStepMovesEachWeightByLearningRate) {
    // With bias correction, step 1 is lr * g / (|g| + eps') = lr * sign(g).
    auto w = Tensor::parameter({3}, {1.0, -2.0, 0.5});
    sum(mul(w, Tensor::constant({3}, {2.0, -3.0, 0.0}))).backward();
    std::vector<Tensor> ps{w};
    AdamState st;
    st.lr = 0.1;
    adam_step(ps, st);
    EXPECT_NEAR(w.at(0), 0.9, 1e-7);
    EXPECT_NEAR(w.at(1), -1.9, 1e-7);
    EXPECT_DOUBLE_EQ(w.at(2), 0.5);
    EXPECT_EQ(w.grad()[0], 0.0);
}

TEST(Adam, SecondStepMatchesHandComputation) {
    auto w = Tensor::parameter({1}, {0.0});
    std::vector<Tensor> ps{w};
    AdamState st;
    st.lr = 0.01;
    const double g1 = 1.0, g2 = 3.0;
    for (double g : {g1, g2}) {
        sum(scale(w, g)).backward();
        adam_step(ps, st);
    }
    const double m = 0.9 * (0.1 * g1) + 0.1 * g2;
    const double v = 0.999 * (0.001 * g1 * g1) + 0.001 * g2 * g2;
    const double step2 = 0.01 * (m / (1 - 0.81)) / (std::sqrt(v / (1 - 0.999 * 0.999)) + 1e-8);
    const double step1 = 0.01 * g1 / (std::abs(g1) + 1e-8);
    EXPECT_NEAR(w.at(0), -step1 - step2, 1e-14);
}

TEST(GradCheck, AcceptsCorrectAndRejectsWrongBackward) {
    Rng rng(5);
    auto w = random_param({4}, rng);
    std::vector<Tensor> ps{w};
    EXPECT_LT(grad_check([&] { return sum(mul(tanh(w), w)); }, ps), 1e-6);

    // Square with a backward rule that forgets the factor 2.
    auto bad_square = [](const Tensor& x) {
        std::vector<double> y(x.values().begin(), x.values().end());
        for (auto& v : y) v *= v;
        return Tensor::from_op(x.shape(), y, {x}, [x](std::span<const double> g, std::span<const std::span<double>> pg) {
            for (std::size_t i = 0; i < g.size(); ++i) pg[0][i] += g[i] * x.values()[i];
        });
    };
    EXPECT_GT(grad_check([&] { return sum(bad_square(w)); }, ps), 0.1);
}

TEST(ClipGradNorm, RescalesToCap) {
    auto a = Tensor::parameter({2}, {0, 0});
    sum(mul(a, Tensor::constant({2}, {3.0, 4.0}))).backward();
    std::vector<Tensor> ps{a};
    EXPECT_DOUBLE_EQ(clip_grad_norm(ps, 1.0), 5.0);
    EXPECT_NEAR(grad_norm(ps), 1.0, 1e-15);
    EXPECT_NEAR(a.grad()[0], 0.6, 1e-15);
}
