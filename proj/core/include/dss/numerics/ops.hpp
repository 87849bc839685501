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

#pragma once

#include <memory>
#include <span>
#include <vector>

#include "dss/numerics/autograd.hpp"

namespace dss::num {

/// Shared, immutable index list (edge endpoints, segment ids).
using IndexList = std::shared_ptr<const std::vector<std::size_t>>;
IndexList make_index(std::vector<std::size_t> indices);

// Linear algebra. Inputs of rank >= 2; leading dims are batch dims and must
// match, or `b` may be a plain matrix shared by every batch of `a`.
Var matmul(const Var& a, const Var& b, bool transpose_a = false, bool transpose_b = false);
/// Swaps the last two axes.
Var transpose(const Var& a);
Var permute(const Var& a, const std::vector<std::size_t>& axes);
Var reshape(const Var& a, Shape shape);

// Elementwise arithmetic with numpy-style broadcasting.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
Var add_scalar(const Var& a, double offset);
Var broadcast_to(const Var& a, const Shape& shape);

// Pointwise nonlinearities.
Var relu(const Var& a);
Var leaky_relu(const Var& a, double negative_slope);
Var sigmoid(const Var& a);
Var tanh(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
Var square(const Var& a);
/// Clamp into [lo, hi]; gradient is zero where the clamp is active.
Var clamp(const Var& a, double lo, double hi);

// Reductions.
Var softmax(const Var& a, std::size_t axis);
Var sum(const Var& a, std::size_t axis);
Var mean(const Var& a, std::size_t axis);
Var sum_all(const Var& a);
Var mean_all(const Var& a);

// Structural.
Var concat(std::span<const Var> parts, std::size_t axis);
Var slice(const Var& a, std::size_t axis, std::size_t begin, std::size_t end);

// Sparse row operations used by message passing. Rank-1 inputs are treated
// as a single column.
Var gather_rows(const Var& a, const IndexList& rows);
Var scatter_add_rows(const Var& a, const IndexList& rows, std::size_t row_count);
/// out[r] = sum over edges e with receiver[e] == r of weights[e] * x[sender[e]].
/// Same result as scatter_add_rows(gather_rows(x, sender) * weights, receiver)
/// without the per-edge intermediates.
Var edge_aggregate(const Var& weights, const Var& x, const IndexList& receiver, const IndexList& sender,
                   std::size_t row_count);
/// Softmax of a rank-1 score vector within each segment. Empty segments
/// contribute nothing.
Var segment_softmax(const Var& scores, const IndexList& segments, std::size_t segment_count);

/// Normalizes over the last axis, then applies per-feature gain and bias.
Var layer_norm(const Var& x, const Var& gain, const Var& bias, double eps = 1e-5);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }

}  // namespace dss::num
