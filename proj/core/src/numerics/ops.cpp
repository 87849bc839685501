// Copyright 2026 The DSS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dss/numerics/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dss::num {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

// out(m x n) (+)= op(a) * op(b), where a is stored (ar x ac) and b (br x bc).
void gemm(const double* a, std::size_t ar, std::size_t ac, bool ta, const double* b,
          std::size_t br, std::size_t bc, bool tb, double* out, bool accumulate) {
  ConstMap A(a, static_cast<Eigen::Index>(ar), static_cast<Eigen::Index>(ac));
  ConstMap B(b, static_cast<Eigen::Index>(br), static_cast<Eigen::Index>(bc));
  const auto m = static_cast<Eigen::Index>(ta ? ac : ar);
  const auto n = static_cast<Eigen::Index>(tb ? br : bc);
  MutMap C(out, m, n);
  if (!accumulate) C.setZero();
  if (!ta && !tb) {
    C.noalias() += A * B;
  } else if (ta && !tb) {
    C.noalias() += A.transpose() * B;
  } else if (!ta && tb) {
    C.noalias() += A * B.transpose();
  } else {
    C.noalias() += A.transpose() * B.transpose();
  }
}

struct AxisSplit {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisSplit split_at(const Shape& shape, std::size_t axis, std::string_view op) {
  if (axis >= shape.size()) {
    throw DimensionError(std::string(op) + ": axis " + std::to_string(axis) +
                         " out of range for shape " + shape_string(shape));
  }
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

std::string two_shapes(std::string_view op, const Shape& a, const Shape& b) {
  return std::string(op) + ": incompatible shapes " + shape_string(a) + " and " +
         shape_string(b);
}

// ---------------------------------------------------------------------------
// Broadcasting

struct BroadcastPlan {
  Shape out;
  std::vector<std::size_t> stride_a, stride_b;  // per out axis; 0 on broadcast
};

BroadcastPlan plan_broadcast(const Shape& a, const Shape& b, std::string_view op) {
  const std::size_t r = std::max(a.size(), b.size());
  BroadcastPlan p;
  p.out.resize(r);
  p.stride_a.assign(r, 0);
  p.stride_b.assign(r, 0);
  std::size_t sa = 1, sb = 1;
  for (std::size_t k = 0; k < r; ++k) {
    const std::size_t ax = r - 1 - k;
    const std::size_t da = k < a.size() ? a[a.size() - 1 - k] : 1;
    const std::size_t db = k < b.size() ? b[b.size() - 1 - k] : 1;
    if (da != db && da != 1 && db != 1) throw DimensionError(two_shapes(op, a, b));
    p.out[ax] = std::max(da, db);
    p.stride_a[ax] = da == 1 ? 0 : sa;
    p.stride_b[ax] = db == 1 ? 0 : sb;
    sa *= da;
    sb *= db;
  }
  return p;
}

// Calls f(out_index, a_index, b_index) for every output element.
template <typename F>
void for_each_broadcast(const BroadcastPlan& p, F&& f) {
  const std::size_t r = p.out.size();
  const std::size_t total = numel(p.out);
  if (total == 0) return;
  if (r == 0) {
    f(std::size_t{0}, std::size_t{0}, std::size_t{0});
    return;
  }
  std::vector<std::size_t> counter(r, 0);
  std::size_t ia = 0, ib = 0;
  const std::size_t last = r - 1;
  const std::size_t n_last = p.out[last];
  const std::size_t sa_last = p.stride_a[last], sb_last = p.stride_b[last];
  for (std::size_t i = 0; i < total;) {
    for (std::size_t j = 0; j < n_last; ++j, ++i) {
      f(i, ia + j * sa_last, ib + j * sb_last);
    }
    // advance counter over the leading axes
    for (std::size_t ax = last; ax-- > 0;) {
      ++counter[ax];
      ia += p.stride_a[ax];
      ib += p.stride_b[ax];
      if (counter[ax] < p.out[ax]) break;
      ia -= p.stride_a[ax] * counter[ax];
      ib -= p.stride_b[ax] * counter[ax];
      counter[ax] = 0;
    }
  }
}

template <typename Fwd, typename GradA, typename GradB>
Var binary_op(std::string op, const Var& a, const Var& b, Fwd fwd, GradA ga, GradB gb) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.shape() == bv.shape()) {
    Tensor out(av.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(av[i], bv[i]);
    return Var::from_op(std::move(op), std::move(out), {a, b},
                        [a, b, ga, gb](const Tensor& g, std::vector<Tensor>& gi) {
                          const Tensor& x = a.value();
                          const Tensor& y = b.value();
                          if (a.requires_grad()) {
                            Tensor d(x.shape());
                            for (std::size_t i = 0; i < d.size(); ++i) d[i] = g[i] * ga(x[i], y[i]);
                            gi[0] = std::move(d);
                          }
                          if (b.requires_grad()) {
                            Tensor d(y.shape());
                            for (std::size_t i = 0; i < d.size(); ++i) d[i] = g[i] * gb(x[i], y[i]);
                            gi[1] = std::move(d);
                          }
                        });
  }
  auto plan = std::make_shared<BroadcastPlan>(plan_broadcast(av.shape(), bv.shape(), op));
  Tensor out(plan->out);
  for_each_broadcast(*plan, [&](std::size_t i, std::size_t ia, std::size_t ib) {
    out[i] = fwd(av[ia], bv[ib]);
  });
  return Var::from_op(std::move(op), std::move(out), {a, b},
                      [a, b, plan, ga, gb](const Tensor& g, std::vector<Tensor>& gi) {
                        const Tensor& x = a.value();
                        const Tensor& y = b.value();
                        Tensor dx(x.shape()), dy(y.shape());
                        const bool wa = a.requires_grad(), wb = b.requires_grad();
                        for_each_broadcast(*plan, [&](std::size_t i, std::size_t ia, std::size_t ib) {
                          if (wa) dx[ia] += g[i] * ga(x[ia], y[ib]);
                          if (wb) dy[ib] += g[i] * gb(x[ia], y[ib]);
                        });
                        if (wa) gi[0] = std::move(dx);
                        if (wb) gi[1] = std::move(dy);
                      });
}

template <typename Fwd, typename Deriv>
Var unary_op(std::string op, const Var& a, Fwd fwd, Deriv deriv) {
  const Tensor& av = a.value();
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(av[i]);
  return Var::from_op(std::move(op), std::move(out), {a},
                      [a, deriv](const Tensor& g, std::vector<Tensor>& gi) {
                        const Tensor& x = a.value();
                        Tensor d(x.shape());
                        for (std::size_t i = 0; i < d.size(); ++i) d[i] = g[i] * deriv(x[i]);
                        gi[0] = std::move(d);
                      });
}

std::size_t row_width(const Shape& s) {
  std::size_t w = 1;
  for (std::size_t i = 1; i < s.size(); ++i) w *= s[i];
  return w;
}

}  // namespace

IndexList make_index(std::vector<std::size_t> indices) {
  return std::make_shared<const std::vector<std::size_t>>(std::move(indices));
}

// ---------------------------------------------------------------------------
// Linear algebra

Var matmul(const Var& a, const Var& b, bool transpose_a, bool transpose_b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() < 2 || sb.size() < 2) throw DimensionError(two_shapes("matmul", sa, sb));
  const bool shared_b = sb.size() == 2;
  if (!shared_b && (sa.size() != sb.size() ||
                    !std::equal(sa.begin(), sa.end() - 2, sb.begin()))) {
    throw DimensionError(two_shapes("matmul", sa, sb));
  }
  const std::size_t ar = sa[sa.size() - 2], ac = sa.back();
  const std::size_t br = sb[sb.size() - 2], bc = sb.back();
  const std::size_t m = transpose_a ? ac : ar, k = transpose_a ? ar : ac;
  const std::size_t kb = transpose_b ? bc : br, n = transpose_b ? br : bc;
  if (k != kb) throw DimensionError(two_shapes("matmul", sa, sb));
  std::size_t batches = 1;
  for (std::size_t i = 0; i + 2 < sa.size(); ++i) batches *= sa[i];

  Shape out_shape(sa.begin(), sa.end() - 2);
  out_shape.push_back(m);
  out_shape.push_back(n);
  Tensor out(out_shape);
  const double* pa = a.value().data().data();
  const double* pb = b.value().data().data();
  double* po = out.data().data();
  const bool flatten = shared_b && !transpose_a;
  if (flatten) {
    gemm(pa, batches * ar, ac, false, pb, br, bc, transpose_b, po, false);
  } else {
    for (std::size_t i = 0; i < batches; ++i) {
      gemm(pa + i * ar * ac, ar, ac, transpose_a, pb + (shared_b ? 0 : i * br * bc), br, bc,
           transpose_b, po + i * m * n, false);
    }
  }

  return Var::from_op(
      "matmul", std::move(out), {a, b},
      [=](const Tensor& g, std::vector<Tensor>& gi) {
        const double* pa = a.value().data().data();
        const double* pb = b.value().data().data();
        const double* pg = g.data().data();
        if (a.requires_grad()) {
          Tensor da(a.shape());
          double* pd = da.data().data();
          if (flatten) {
            // dA = G op(B)^T
            gemm(pg, batches * m, n, false, pb, br, bc, !transpose_b, pd, false);
          } else {
            for (std::size_t i = 0; i < batches; ++i) {
              const double* bi = pb + (shared_b ? 0 : i * br * bc);
              const double* gi_ = pg + i * m * n;
              if (!transpose_a) {
                gemm(gi_, m, n, false, bi, br, bc, !transpose_b, pd + i * ar * ac, false);
              } else {
                // dA = op(B) G^T
                gemm(bi, br, bc, transpose_b, gi_, m, n, true, pd + i * ar * ac, false);
              }
            }
          }
          gi[0] = std::move(da);
        }
        if (b.requires_grad()) {
          Tensor db(b.shape());
          double* pd = db.data().data();
          if (flatten) {
            if (!transpose_b) {
              gemm(pa, batches * ar, ac, true, pg, batches * m, n, false, pd, false);
            } else {
              gemm(pg, batches * m, n, true, pa, batches * ar, ac, false, pd, false);
            }
          } else {
            for (std::size_t i = 0; i < batches; ++i) {
              const double* ai = pa + i * ar * ac;
              const double* gi_ = pg + i * m * n;
              double* dst = pd + (shared_b ? 0 : i * br * bc);
              const bool acc = shared_b && i > 0;
              if (!transpose_b) {
                // dB = op(A)^T G
                gemm(ai, ar, ac, !transpose_a, gi_, m, n, false, dst, acc);
              } else {
                // dB = G^T op(A)
                gemm(gi_, m, n, true, ai, ar, ac, transpose_a, dst, acc);
              }
            }
          }
          gi[1] = std::move(db);
        }
      });
}

Var permute(const Var& a, const std::vector<std::size_t>& axes) {
  const Shape& s = a.shape();
  const std::size_t r = s.size();
  if (axes.size() != r) throw DimensionError("permute: axes do not match rank of " + shape_string(s));
  std::vector<bool> seen(r, false);
  for (auto ax : axes) {
    if (ax >= r || seen[ax]) throw DimensionError("permute: invalid axes for " + shape_string(s));
    seen[ax] = true;
  }
  Shape out_shape(r);
  std::vector<std::size_t> in_stride(r, 1);
  for (std::size_t i = r; i-- > 1;) in_stride[i - 1] = in_stride[i] * s[i];
  std::vector<std::size_t> src_stride(r);  // stride in the input of out axis i
  for (std::size_t i = 0; i < r; ++i) {
    out_shape[i] = s[axes[i]];
    src_stride[i] = in_stride[axes[i]];
  }
  auto gather_map = std::make_shared<std::vector<std::size_t>>(numel(s));
  {
    BroadcastPlan p;
    p.out = out_shape;
    p.stride_a = src_stride;
    p.stride_b.assign(r, 0);
    auto& map = *gather_map;
    for_each_broadcast(p, [&](std::size_t i, std::size_t ia, std::size_t) { map[i] = ia; });
  }
  Tensor out(out_shape);
  const Tensor& av = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[(*gather_map)[i]];
  return Var::from_op("permute", std::move(out), {a},
                      [a, gather_map](const Tensor& g, std::vector<Tensor>& gi) {
                        Tensor d(a.shape());
                        for (std::size_t i = 0; i < g.size(); ++i) d[(*gather_map)[i]] = g[i];
                        gi[0] = std::move(d);
                      });
}

Var transpose(const Var& a) {
  const std::size_t r = a.shape().size();
  if (r < 2) throw DimensionError("transpose needs rank >= 2, got " + shape_string(a.shape()));
  std::vector<std::size_t> axes(r);
  std::iota(axes.begin(), axes.end(), 0);
  std::swap(axes[r - 1], axes[r - 2]);
  return permute(a, axes);
}

Var reshape(const Var& a, Shape shape) {
  Tensor out = a.value().reshaped(std::move(shape));
  return Var::from_op("reshape", std::move(out), {a},
                      [a](const Tensor& g, std::vector<Tensor>& gi) {
                        gi[0] = g.reshaped(a.shape());
                      });
}

// ---------------------------------------------------------------------------
// Elementwise

Var add(const Var& a, const Var& b) {
  return binary_op(
      "add", a, b, [](double x, double y) { return x + y; },
      [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Var sub(const Var& a, const Var& b) {
  return binary_op(
      "sub", a, b, [](double x, double y) { return x - y; },
      [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Var mul(const Var& a, const Var& b) {
  return binary_op(
      "mul", a, b, [](double x, double y) { return x * y; },
      [](double, double y) { return y; }, [](double x, double) { return x; });
}

Var scale(const Var& a, double factor) {
  return unary_op(
      "scale", a, [factor](double x) { return x * factor; },
      [factor](double) { return factor; });
}

Var add_scalar(const Var& a, double offset) {
  return unary_op(
      "add_scalar", a, [offset](double x) { return x + offset; }, [](double) { return 1.0; });
}

Var broadcast_to(const Var& a, const Shape& shape) {
  auto plan = plan_broadcast(a.shape(), shape, "broadcast_to");
  if (plan.out != shape) throw DimensionError(two_shapes("broadcast_to", a.shape(), shape));
  return add(a, Var::constant(Tensor::zeros(shape)));
}

Var relu(const Var& a) {
  return unary_op(
      "relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x) { return x > 0.0 ? 1.0 : 0.0; });
}

Var leaky_relu(const Var& a, double slope) {
  return unary_op(
      "leaky_relu", a, [slope](double x) { return x > 0.0 ? x : slope * x; },
      [slope](double x) { return x > 0.0 ? 1.0 : slope; });
}

namespace {
double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}
}  // namespace

Var sigmoid(const Var& a) {
  return unary_op("sigmoid", a, stable_sigmoid, [](double x) {
    const double s = stable_sigmoid(x);
    return s * (1.0 - s);
  });
}

Var tanh(const Var& a) {
  return unary_op(
      "tanh", a, [](double x) { return std::tanh(x); },
      [](double x) {
        const double t = std::tanh(x);
        return 1.0 - t * t;
      });
}

Var exp(const Var& a) {
  return unary_op(
      "exp", a, [](double x) { return std::exp(x); }, [](double x) { return std::exp(x); });
}

Var log(const Var& a) {
  return unary_op(
      "log", a, [](double x) { return std::log(x); }, [](double x) { return 1.0 / x; });
}

Var square(const Var& a) {
  return unary_op(
      "square", a, [](double x) { return x * x; }, [](double x) { return 2.0 * x; });
}

Var clamp(const Var& a, double lo, double hi) {
  if (lo > hi) throw ContractError("clamp: lo > hi");
  return unary_op(
      "clamp", a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [lo, hi](double x) { return (x < lo || x > hi) ? 0.0 : 1.0; });
}

// ---------------------------------------------------------------------------
// Reductions

Var softmax(const Var& a, std::size_t axis) {
  const AxisSplit s = split_at(a.shape(), axis, "softmax");
  const Tensor& x = a.value();
  Tensor out(x.shape());
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t in = 0; in < s.inner; ++in) {
      const std::size_t base = o * s.extent * s.inner + in;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < s.extent; ++j) mx = std::max(mx, x[base + j * s.inner]);
      double total = 0.0;
      for (std::size_t j = 0; j < s.extent; ++j) {
        const double e = std::exp(x[base + j * s.inner] - mx);
        out[base + j * s.inner] = e;
        total += e;
      }
      for (std::size_t j = 0; j < s.extent; ++j) out[base + j * s.inner] /= total;
    }
  }
  auto probs = std::make_shared<Tensor>(out);
  return Var::from_op("softmax", std::move(out), {a},
                      [s, probs](const Tensor& g, std::vector<Tensor>& gi) {
                        const Tensor& p = *probs;
                        Tensor d(p.shape());
                        for (std::size_t o = 0; o < s.outer; ++o) {
                          for (std::size_t in = 0; in < s.inner; ++in) {
                            const std::size_t base = o * s.extent * s.inner + in;
                            double dot = 0.0;
                            for (std::size_t j = 0; j < s.extent; ++j) {
                              const std::size_t k = base + j * s.inner;
                              dot += g[k] * p[k];
                            }
                            for (std::size_t j = 0; j < s.extent; ++j) {
                              const std::size_t k = base + j * s.inner;
                              d[k] = p[k] * (g[k] - dot);
                            }
                          }
                        }
                        gi[0] = std::move(d);
                      });
}

namespace {
Var reduce_axis(std::string op, const Var& a, std::size_t axis, double factor) {
  const AxisSplit s = split_at(a.shape(), axis, op);
  Shape out_shape = a.shape();
  out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(axis));
  const Tensor& x = a.value();
  Tensor out(out_shape);
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t j = 0; j < s.extent; ++j) {
      const double* src = x.data().data() + (o * s.extent + j) * s.inner;
      double* dst = out.data().data() + o * s.inner;
      for (std::size_t in = 0; in < s.inner; ++in) dst[in] += src[in];
    }
  }
  if (factor != 1.0) {
    for (auto& v : out.data()) v *= factor;
  }
  return Var::from_op(std::move(op), std::move(out), {a},
                      [a, s, factor](const Tensor& g, std::vector<Tensor>& gi) {
                        Tensor d(a.shape());
                        for (std::size_t o = 0; o < s.outer; ++o) {
                          for (std::size_t j = 0; j < s.extent; ++j) {
                            double* dst = d.data().data() + (o * s.extent + j) * s.inner;
                            const double* src = g.data().data() + o * s.inner;
                            for (std::size_t in = 0; in < s.inner; ++in) dst[in] = src[in] * factor;
                          }
                        }
                        gi[0] = std::move(d);
                      });
}
}  // namespace

Var sum(const Var& a, std::size_t axis) { return reduce_axis("sum", a, axis, 1.0); }

Var mean(const Var& a, std::size_t axis) {
  const std::size_t n = split_at(a.shape(), axis, "mean").extent;
  if (n == 0) throw ContractError("mean over an empty axis");
  return reduce_axis("mean", a, axis, 1.0 / static_cast<double>(n));
}

Var sum_all(const Var& a) {
  const Tensor& x = a.value();
  double total = 0.0;
  for (double v : x.data()) total += v;
  return Var::from_op("sum_all", Tensor::scalar(total), {a},
                      [a](const Tensor& g, std::vector<Tensor>& gi) {
                        gi[0] = Tensor(a.shape(), g[0]);
                      });
}

Var mean_all(const Var& a) {
  if (a.size() == 0) throw ContractError("mean_all of an empty tensor");
  return scale(sum_all(a), 1.0 / static_cast<double>(a.size()));
}

// ---------------------------------------------------------------------------
// Structural

Var concat(std::span<const Var> parts, std::size_t axis) {
  if (parts.empty()) throw ContractError("concat of zero tensors");
  const Shape& first = parts[0].shape();
  if (axis >= first.size()) throw DimensionError("concat: axis out of range for " + shape_string(first));
  Shape out_shape = first;
  out_shape[axis] = 0;
  std::vector<std::size_t> extents;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    if (s.size() != first.size()) throw DimensionError(two_shapes("concat", first, s));
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i != axis && s[i] != first[i]) throw DimensionError(two_shapes("concat", first, s));
    }
    out_shape[axis] += s[axis];
    extents.push_back(s[axis]);
  }
  const AxisSplit so = split_at(out_shape, axis, "concat");
  Tensor out(out_shape);
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const Tensor& x = parts[p].value();
    const std::size_t chunk = extents[p] * so.inner;
    for (std::size_t o = 0; o < so.outer; ++o) {
      std::copy_n(x.data().data() + o * chunk, chunk,
                  out.data().data() + o * so.extent * so.inner + offset * so.inner);
    }
    offset += extents[p];
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return Var::from_op("concat", std::move(out), inputs,
                      [inputs, extents, so](const Tensor& g, std::vector<Tensor>& gi) {
                        std::size_t offset = 0;
                        for (std::size_t p = 0; p < inputs.size(); ++p) {
                          const std::size_t chunk = extents[p] * so.inner;
                          if (inputs[p].requires_grad()) {
                            Tensor d(inputs[p].shape());
                            for (std::size_t o = 0; o < so.outer; ++o) {
                              std::copy_n(g.data().data() + o * so.extent * so.inner + offset * so.inner,
                                          chunk, d.data().data() + o * chunk);
                            }
                            gi[p] = std::move(d);
                          }
                          offset += extents[p];
                        }
                      });
}

Var slice(const Var& a, std::size_t axis, std::size_t begin, std::size_t end) {
  const AxisSplit s = split_at(a.shape(), axis, "slice");
  if (begin > end || end > s.extent) {
    throw DimensionError("slice [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") out of range for axis " + std::to_string(axis) + " of " +
                         shape_string(a.shape()));
  }
  Shape out_shape = a.shape();
  out_shape[axis] = end - begin;
  const std::size_t chunk = (end - begin) * s.inner;
  Tensor out(out_shape);
  const Tensor& x = a.value();
  for (std::size_t o = 0; o < s.outer; ++o) {
    std::copy_n(x.data().data() + (o * s.extent + begin) * s.inner, chunk,
                out.data().data() + o * chunk);
  }
  return Var::from_op("slice", std::move(out), {a},
                      [a, s, begin, chunk](const Tensor& g, std::vector<Tensor>& gi) {
                        Tensor d(a.shape());
                        for (std::size_t o = 0; o < s.outer; ++o) {
                          std::copy_n(g.data().data() + o * chunk, chunk,
                                      d.data().data() + (o * s.extent + begin) * s.inner);
                        }
                        gi[0] = std::move(d);
                      });
}

// ---------------------------------------------------------------------------
// Sparse row operations

Var gather_rows(const Var& a, const IndexList& rows) {
  const Shape& s = a.shape();
  if (s.empty()) throw DimensionError("gather_rows on a scalar");
  const std::size_t n = s[0];
  const std::size_t w = row_width(s);
  for (auto r : *rows) {
    if (r >= n) throw DimensionError("gather_rows: index " + std::to_string(r) +
                                     " out of range for " + shape_string(s));
  }
  Shape out_shape = s;
  out_shape[0] = rows->size();
  Tensor out(out_shape);
  const double* src = a.value().data().data();
  double* dst = out.data().data();
  for (std::size_t i = 0; i < rows->size(); ++i) std::copy_n(src + (*rows)[i] * w, w, dst + i * w);
  return Var::from_op("gather_rows", std::move(out), {a},
                      [a, rows, w](const Tensor& g, std::vector<Tensor>& gi) {
                        Tensor d(a.shape());
                        double* pd = d.data().data();
                        const double* pg = g.data().data();
                        for (std::size_t i = 0; i < rows->size(); ++i) {
                          double* row = pd + (*rows)[i] * w;
                          for (std::size_t j = 0; j < w; ++j) row[j] += pg[i * w + j];
                        }
                        gi[0] = std::move(d);
                      });
}

Var scatter_add_rows(const Var& a, const IndexList& rows, std::size_t row_count) {
  const Shape& s = a.shape();
  if (s.empty() || s[0] != rows->size()) {
    throw DimensionError("scatter_add_rows: " + std::to_string(rows->size()) +
                         " indices for shape " + shape_string(s));
  }
  const std::size_t w = row_width(s);
  for (auto r : *rows) {
    if (r >= row_count) throw DimensionError("scatter_add_rows: index " + std::to_string(r) +
                                             " >= row count " + std::to_string(row_count));
  }
  Shape out_shape = s;
  out_shape[0] = row_count;
  Tensor out(out_shape);
  const double* src = a.value().data().data();
  double* dst = out.data().data();
  for (std::size_t i = 0; i < rows->size(); ++i) {
    double* row = dst + (*rows)[i] * w;
    for (std::size_t j = 0; j < w; ++j) row[j] += src[i * w + j];
  }
  return Var::from_op("scatter_add_rows", std::move(out), {a},
                      [a, rows, w](const Tensor& g, std::vector<Tensor>& gi) {
                        Tensor d(a.shape());
                        const double* pg = g.data().data();
                        double* pd = d.data().data();
                        for (std::size_t i = 0; i < rows->size(); ++i) {
                          std::copy_n(pg + (*rows)[i] * w, w, pd + i * w);
                        }
                        gi[0] = std::move(d);
                      });
}

Var edge_aggregate(const Var& weights, const Var& x, const IndexList& receiver, const IndexList& sender,
                   std::size_t row_count) {
  const Shape& s = x.shape();
  if (s.size() != 2) throw DimensionError("edge_aggregate: x must be [rows, width], got " + shape_string(s));
  const std::size_t edges = receiver->size();
  if (sender->size() != edges || weights.size() != edges || weights.shape().size() != 1) {
    throw DimensionError("edge_aggregate: " + std::to_string(edges) + " receivers, " +
                         std::to_string(sender->size()) + " senders, weights " + shape_string(weights.shape()));
  }
  const std::size_t w = s[1];
  for (std::size_t e = 0; e < edges; ++e) {
    if ((*receiver)[e] >= row_count || (*sender)[e] >= s[0]) {
      throw DimensionError("edge_aggregate: edge " + std::to_string(e) + " out of range");
    }
  }
  Tensor out({row_count, w});
  const double* px = x.value().data().data();
  const double* pw = weights.value().data().data();
  double* po = out.data().data();
  for (std::size_t e = 0; e < edges; ++e) {
    const double* src = px + (*sender)[e] * w;
    double* dst = po + (*receiver)[e] * w;
    for (std::size_t j = 0; j < w; ++j) dst[j] += pw[e] * src[j];
  }
  return Var::from_op("edge_aggregate", std::move(out), {weights, x},
                      [weights, x, receiver, sender, w](const Tensor& g, std::vector<Tensor>& gi) {
                        const double* pg = g.data().data();
                        const double* px = x.value().data().data();
                        const double* pw = weights.value().data().data();
                        const std::size_t edges = receiver->size();
                        if (weights.requires_grad()) {
                          Tensor d(weights.shape());
                          for (std::size_t e = 0; e < edges; ++e) {
                            const double* gr = pg + (*receiver)[e] * w;
                            const double* src = px + (*sender)[e] * w;
                            double acc = 0.0;
                            for (std::size_t j = 0; j < w; ++j) acc += gr[j] * src[j];
                            d[e] = acc;
                          }
                          gi[0] = std::move(d);
                        }
                        if (x.requires_grad()) {
                          Tensor d(x.shape());
                          double* pd = d.data().data();
                          for (std::size_t e = 0; e < edges; ++e) {
                            const double* gr = pg + (*receiver)[e] * w;
                            double* dst = pd + (*sender)[e] * w;
                            for (std::size_t j = 0; j < w; ++j) dst[j] += pw[e] * gr[j];
                          }
                          gi[1] = std::move(d);
                        }
                      });
}

Var segment_softmax(const Var& scores, const IndexList& segments, std::size_t segment_count) {
  const Tensor& x = scores.value();
  if (x.size() != segments->size()) {
    throw DimensionError("segment_softmax: " + std::to_string(segments->size()) +
                         " segment ids for scores of shape " + shape_string(x.shape()));
  }
  std::vector<double> seg_max(segment_count, -std::numeric_limits<double>::infinity());
  for (std::size_t e = 0; e < x.size(); ++e) {
    const std::size_t sg = (*segments)[e];
    if (sg >= segment_count) throw DimensionError("segment_softmax: segment id out of range");
    seg_max[sg] = std::max(seg_max[sg], x[e]);
  }
  std::vector<double> seg_sum(segment_count, 0.0);
  Tensor out(x.shape());
  for (std::size_t e = 0; e < x.size(); ++e) {
    const std::size_t sg = (*segments)[e];
    out[e] = std::exp(x[e] - seg_max[sg]);
    seg_sum[sg] += out[e];
  }
  for (std::size_t e = 0; e < x.size(); ++e) out[e] /= seg_sum[(*segments)[e]];
  auto probs = std::make_shared<Tensor>(out);
  return Var::from_op("segment_softmax", std::move(out), {scores},
                      [probs, segments, segment_count](const Tensor& g, std::vector<Tensor>& gi) {
                        const Tensor& p = *probs;
                        std::vector<double> dot(segment_count, 0.0);
                        for (std::size_t e = 0; e < p.size(); ++e) dot[(*segments)[e]] += g[e] * p[e];
                        Tensor d(p.shape());
                        for (std::size_t e = 0; e < p.size(); ++e) {
                          d[e] = p[e] * (g[e] - dot[(*segments)[e]]);
                        }
                        gi[0] = std::move(d);
                      });
}

// ---------------------------------------------------------------------------

Var layer_norm(const Var& x, const Var& gain, const Var& bias, double eps) {
  const Shape& s = x.shape();
  if (s.empty()) throw DimensionError("layer_norm on a scalar");
  const std::size_t d = s.back();
  if (gain.shape() != Shape{d} || bias.shape() != Shape{d}) {
    throw DimensionError(two_shapes("layer_norm", s, gain.shape()));
  }
  const std::size_t rows = x.size() / d;
  const Tensor& xv = x.value();
  const Tensor& gv = gain.value();
  const Tensor& bv = bias.value();
  auto normalized = std::make_shared<Tensor>(s);
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  Tensor out(s);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = xv.data().data() + r * d;
    double mu = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += row[j];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(d);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = is;
    for (std::size_t j = 0; j < d; ++j) {
      const double xh = (row[j] - mu) * is;
      (*normalized)[r * d + j] = xh;
      out[r * d + j] = xh * gv[j] + bv[j];
    }
  }
  return Var::from_op(
      "layer_norm", std::move(out), {x, gain, bias},
      [x, gain, bias, normalized, inv_std, d, rows](const Tensor& g, std::vector<Tensor>& gi) {
        const Tensor& xh = *normalized;
        const Tensor& gv = gain.value();
        Tensor dx(x.shape()), dg(gain.shape()), db(bias.shape());
        for (std::size_t r = 0; r < rows; ++r) {
          double mean_dxh = 0.0, mean_dxh_xh = 0.0;
          for (std::size_t j = 0; j < d; ++j) {
            const std::size_t k = r * d + j;
            const double dxh = g[k] * gv[j];
            mean_dxh += dxh;
            mean_dxh_xh += dxh * xh[k];
            dg[j] += g[k] * xh[k];
            db[j] += g[k];
          }
          mean_dxh /= static_cast<double>(d);
          mean_dxh_xh /= static_cast<double>(d);
          for (std::size_t j = 0; j < d; ++j) {
            const std::size_t k = r * d + j;
            dx[k] = (*inv_std)[r] * (g[k] * gv[j] - mean_dxh - xh[k] * mean_dxh_xh);
          }
        }
        if (x.requires_grad()) gi[0] = std::move(dx);
        if (gain.requires_grad()) gi[1] = std::move(dg);
        if (bias.requires_grad()) gi[2] = std::move(db);
      });
}

}  // namespace dss::num
