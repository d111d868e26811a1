// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "moop/error.hpp"
#include "moop/rng.hpp"
#include "tensor_internal.hpp"

namespace moop::ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMap = Eigen::Map<const RowMat>;
using MMap = Eigen::Map<RowMat>;
using Grads = std::span<const std::span<double>>;

[[noreturn]] void mismatch(const char* op, const Shape& a, const Shape& b) {
    throw ShapeError(std::string(op) + ": incompatible shapes " + to_string(a) + " and " + to_string(b));
}

void require_defined(const Tensor& t, const char* op) {
    if (!t.defined()) throw std::logic_error(std::string(op) + ": undefined tensor argument");
}

struct AxisSplit {
    std::size_t outer = 1, len = 1, inner = 1;
};

AxisSplit split_axis(const Shape& s, std::size_t axis, const char* op) {
    if (axis >= s.size())
        throw ShapeError(std::string(op) + ": axis " + std::to_string(axis) + " out of range for shape " + to_string(s));
    AxisSplit a;
    for (std::size_t i = 0; i < axis; ++i) a.outer *= s[i];
    a.len = s[axis];
    for (std::size_t i = axis + 1; i < s.size(); ++i) a.inner *= s[i];
    return a;
}

template <class F, class DF>
Tensor unary(const Tensor& x, F f, DF df_from_y) {
    require_defined(x, "unary");
    auto xv = x.values();
    std::vector<double> y(xv.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = f(xv[i]);
    return make_op(x.shape(), std::move(y), {x}, [df_from_y, x](const Node& self, Grads g) {
        auto xv = x.values();
        for (std::size_t i = 0; i < self.grad.size(); ++i) g[0][i] += self.grad[i] * df_from_y(xv[i], self.value[i]);
    });
}

} // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_defined(a, "matmul");
    require_defined(b, "matmul");
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) mismatch("matmul", a.shape(), b.shape());
    const auto m = static_cast<Eigen::Index>(a.dim(0)), k = static_cast<Eigen::Index>(a.dim(1)),
               n = static_cast<Eigen::Index>(b.dim(1));
    std::vector<double> out(static_cast<std::size_t>(m * n));
    MMap(out.data(), m, n).noalias() = CMap(a.values().data(), m, k) * CMap(b.values().data(), k, n);
    return make_op({a.dim(0), b.dim(1)}, std::move(out), {a, b}, [a, b, m, k, n](const Node& self, Grads g) {
        CMap dc(self.grad.data(), m, n);
        if (!g[0].empty()) MMap(g[0].data(), m, k).noalias() += dc * CMap(b.values().data(), k, n).transpose();
        if (!g[1].empty()) MMap(g[1].data(), k, n).noalias() += CMap(a.values().data(), m, k).transpose() * dc;
    });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
    require_defined(x, "linear");
    require_defined(weight, "linear");
    if (weight.rank() != 2 || (x.rank() != 1 && x.rank() != 2) || x.shape().back() != weight.dim(0))
        mismatch("linear", x.shape(), weight.shape());
    if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != weight.dim(1))) mismatch("linear", weight.shape(), bias.shape());

    const auto rows = static_cast<Eigen::Index>(x.rank() == 1 ? 1 : x.dim(0));
    const auto in = static_cast<Eigen::Index>(weight.dim(0)), out_w = static_cast<Eigen::Index>(weight.dim(1));
    std::vector<double> out(static_cast<std::size_t>(rows * out_w));
    MMap y(out.data(), rows, out_w);
    y.noalias() = CMap(x.values().data(), rows, in) * CMap(weight.values().data(), in, out_w);
    if (bias.defined()) y.rowwise() += CMap(bias.values().data(), 1, out_w).row(0);

    Shape shape = x.rank() == 1 ? Shape{weight.dim(1)} : Shape{x.dim(0), weight.dim(1)};
    std::vector<Tensor> parents{x, weight};
    if (bias.defined()) parents.push_back(bias);
    return make_op(std::move(shape), std::move(out), std::move(parents),
                   [x, weight, rows, in, out_w](const Node& self, Grads g) {
                       CMap dy(self.grad.data(), rows, out_w);
                       if (!g[0].empty())
                           MMap(g[0].data(), rows, in).noalias() += dy * CMap(weight.values().data(), in, out_w).transpose();
                       if (!g[1].empty())
                           MMap(g[1].data(), in, out_w).noalias() += CMap(x.values().data(), rows, in).transpose() * dy;
                       if (g.size() > 2 && !g[2].empty()) MMap(g[2].data(), 1, out_w) += dy.colwise().sum();
                   });
}

Tensor pointwise_linear(const Tensor& seq, const Tensor& weight, const Tensor& bias) {
    require_defined(seq, "pointwise_linear");
    if (seq.rank() != 2) throw ShapeError("pointwise_linear: expected a [n, channels] sequence, got " + to_string(seq.shape()));
    return linear(seq, weight, bias);
}

Tensor tanh(const Tensor& x) {
    return unary(x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& x) {
    return unary(
        x,
        [](double v) {
            if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
            const double e = std::exp(v);
            return e / (1.0 + e);
        },
        [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor& x) {
    return unary(x, [](double v) { return v > 0.0 ? v : 0.0; }, [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor softmax(const Tensor& x, std::size_t axis) {
    require_defined(x, "softmax");
    const auto s = split_axis(x.shape(), axis, "softmax");
    auto xv = x.values();
    std::vector<double> y(xv.size());
    for (std::size_t o = 0; o < s.outer; ++o)
        for (std::size_t in = 0; in < s.inner; ++in) {
            const std::size_t base = o * s.len * s.inner + in;
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < s.len; ++i) mx = std::max(mx, xv[base + i * s.inner]);
            double z = 0.0;
            for (std::size_t i = 0; i < s.len; ++i) z += (y[base + i * s.inner] = std::exp(xv[base + i * s.inner] - mx));
            for (std::size_t i = 0; i < s.len; ++i) y[base + i * s.inner] /= z;
        }
    return make_op(x.shape(), std::move(y), {x}, [s](const Node& self, Grads g) {
        for (std::size_t o = 0; o < s.outer; ++o)
            for (std::size_t in = 0; in < s.inner; ++in) {
                const std::size_t base = o * s.len * s.inner + in;
                double dot = 0.0;
                for (std::size_t i = 0; i < s.len; ++i) dot += self.value[base + i * s.inner] * self.grad[base + i * s.inner];
                for (std::size_t i = 0; i < s.len; ++i) {
                    const std::size_t k = base + i * s.inner;
                    g[0][k] += self.value[k] * (self.grad[k] - dot);
                }
            }
    });
}

Tensor log_softmax(const Tensor& x, std::size_t axis) {
    require_defined(x, "log_softmax");
    const auto s = split_axis(x.shape(), axis, "log_softmax");
    auto xv = x.values();
    std::vector<double> y(xv.size());
    for (std::size_t o = 0; o < s.outer; ++o)
        for (std::size_t in = 0; in < s.inner; ++in) {
            const std::size_t base = o * s.len * s.inner + in;
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < s.len; ++i) mx = std::max(mx, xv[base + i * s.inner]);
            double z = 0.0;
            for (std::size_t i = 0; i < s.len; ++i) z += std::exp(xv[base + i * s.inner] - mx);
            const double lse = mx + std::log(z);
            for (std::size_t i = 0; i < s.len; ++i) y[base + i * s.inner] = xv[base + i * s.inner] - lse;
        }
    return make_op(x.shape(), std::move(y), {x}, [s](const Node& self, Grads g) {
        for (std::size_t o = 0; o < s.outer; ++o)
            for (std::size_t in = 0; in < s.inner; ++in) {
                const std::size_t base = o * s.len * s.inner + in;
                double total = 0.0;
                for (std::size_t i = 0; i < s.len; ++i) total += self.grad[base + i * s.inner];
                for (std::size_t i = 0; i < s.len; ++i) {
                    const std::size_t k = base + i * s.inner;
                    g[0][k] += self.grad[k] - std::exp(self.value[k]) * total;
                }
            }
    });
}

namespace {

template <class F, class DA, class DB>
Tensor binary(const char* op, const Tensor& a, const Tensor& b, F f, DA da, DB db) {
    require_defined(a, op);
    require_defined(b, op);
    if (a.shape() != b.shape()) mismatch(op, a.shape(), b.shape());
    auto av = a.values(), bv = b.values();
    std::vector<double> y(av.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = f(av[i], bv[i]);
    return make_op(a.shape(), std::move(y), {a, b}, [a, b, da, db](const Node& self, Grads g) {
        auto av = a.values(), bv = b.values();
        if (!g[0].empty())
            for (std::size_t i = 0; i < self.grad.size(); ++i) g[0][i] += self.grad[i] * da(av[i], bv[i]);
        if (!g[1].empty())
            for (std::size_t i = 0; i < self.grad.size(); ++i) g[1][i] += self.grad[i] * db(av[i], bv[i]);
    });
}

} // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    return binary(
        "add", a, b, [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
        [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return binary(
        "sub", a, b, [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
        [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return binary(
        "mul", a, b, [](double x, double y) { return x * y; }, [](double, double y) { return y; },
        [](double x, double) { return x; });
}

Tensor scale(const Tensor& x, double factor) {
    return unary(x, [factor](double v) { return v * factor; }, [factor](double, double) { return factor; });
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
    if (parts.empty()) throw ShapeError("concat: no inputs");
    for (const auto& p : parts) require_defined(p, "concat");
    const Shape& first = parts[0].shape();
    if (axis >= first.size()) throw ShapeError("concat: axis out of range for " + to_string(first));
    Shape out_shape = first;
    out_shape[axis] = 0;
    for (const auto& p : parts) {
        const Shape& s = p.shape();
        if (s.size() != first.size()) mismatch("concat", first, s);
        for (std::size_t i = 0; i < s.size(); ++i)
            if (i != axis && s[i] != first[i]) mismatch("concat", first, s);
        out_shape[axis] += s[axis];
    }
    const auto split = split_axis(out_shape, axis, "concat");
    std::vector<std::size_t> widths;  // contiguous run per part per outer index
    for (const auto& p : parts) widths.push_back(p.dim(axis) * split.inner);
    const std::size_t row = split.len * split.inner;

    std::vector<double> y(numel(out_shape));
    for (std::size_t o = 0; o < split.outer; ++o) {
        std::size_t off = 0;
        for (std::size_t k = 0; k < parts.size(); ++k) {
            auto v = parts[k].values();
            std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(o * widths[k]), widths[k],
                        y.begin() + static_cast<std::ptrdiff_t>(o * row + off));
            off += widths[k];
        }
    }
    return make_op(std::move(out_shape), std::move(y), {parts.begin(), parts.end()},
                   [widths, split, row](const Node& self, Grads g) {
                       for (std::size_t o = 0; o < split.outer; ++o) {
                           std::size_t off = 0;
                           for (std::size_t k = 0; k < widths.size(); ++k) {
                               if (!g[k].empty())
                                   for (std::size_t i = 0; i < widths[k]; ++i)
                                       g[k][o * widths[k] + i] += self.grad[o * row + off + i];
                               off += widths[k];
                           }
                       }
                   });
}

Tensor masked_fill(const Tensor& x, std::span<const char> mask, double fill) {
    require_defined(x, "masked_fill");
    if (mask.size() != x.numel())
        throw ShapeError("masked_fill: mask of " + std::to_string(mask.size()) + " entries for shape " + to_string(x.shape()));
    std::vector<double> y(x.values().begin(), x.values().end());
    std::vector<char> m(mask.begin(), mask.end());
    for (std::size_t i = 0; i < y.size(); ++i)
        if (m[i]) y[i] = fill;
    return make_op(x.shape(), std::move(y), {x}, [m = std::move(m)](const Node& self, Grads g) {
        for (std::size_t i = 0; i < self.grad.size(); ++i)
            if (!m[i]) g[0][i] += self.grad[i];
    });
}

Tensor sum(const Tensor& x) {
    require_defined(x, "sum");
    double total = 0.0;
    for (double v : x.values()) total += v;
    return make_op({1}, {total}, {x}, [](const Node& self, Grads g) {
        for (auto& v : g[0]) v += self.grad[0];
    });
}

Tensor mean(const Tensor& x) {
    require_defined(x, "mean");
    return scale(sum(x), 1.0 / static_cast<double>(x.numel()));
}

Tensor squared_error(const Tensor& a, const Tensor& b) {
    auto d = sub(a, b);
    return mean(mul(d, d));
}

Tensor reshape(const Tensor& x, Shape shape) {
    require_defined(x, "reshape");
    if (numel(shape) != x.numel()) mismatch("reshape", x.shape(), shape);
    std::vector<double> y(x.values().begin(), x.values().end());
    return make_op(std::move(shape), std::move(y), {x}, [](const Node& self, Grads g) {
        for (std::size_t i = 0; i < self.grad.size(); ++i) g[0][i] += self.grad[i];
    });
}

Tensor select_row(const Tensor& x, std::size_t row) {
    require_defined(x, "select_row");
    if (x.rank() != 2 || row >= x.dim(0))
        throw ShapeError("select_row: row " + std::to_string(row) + " of shape " + to_string(x.shape()));
    const std::size_t cols = x.dim(1);
    auto v = x.values().subspan(row * cols, cols);
    return make_op({1, cols}, {v.begin(), v.end()}, {x}, [row, cols](const Node& self, Grads g) {
        for (std::size_t j = 0; j < cols; ++j) g[0][row * cols + j] += self.grad[j];
    });
}

Tensor pick(const Tensor& x, std::size_t flat_index) {
    require_defined(x, "pick");
    if (flat_index >= x.numel())
        throw ShapeError("pick: index " + std::to_string(flat_index) + " out of range for " + to_string(x.shape()));
    return make_op({1}, {x.values()[flat_index]}, {x},
                   [flat_index](const Node& self, Grads g) { g[0][flat_index] += self.grad[0]; });
}

Tensor dropout(const Tensor& x, double rate, Rng& rng, bool training) {
    require_defined(x, "dropout");
    if (!training || rate <= 0.0) return x;
    if (rate >= 1.0) throw std::invalid_argument("dropout: rate must be < 1");
    const double keep_scale = 1.0 / (1.0 - rate);
    std::vector<double> factor(x.numel());
    for (auto& f : factor) f = rng.uniform() < rate ? 0.0 : keep_scale;
    auto xv = x.values();
    std::vector<double> y(xv.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = xv[i] * factor[i];
    return make_op(x.shape(), std::move(y), {x}, [factor = std::move(factor)](const Node& self, Grads g) {
        for (std::size_t i = 0; i < self.grad.size(); ++i) g[0][i] += self.grad[i] * factor[i];
    });
}

} // namespace moop::ad
