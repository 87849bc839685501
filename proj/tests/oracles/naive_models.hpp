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

// Brute-force reference implementations used only by tests. They share no code
// with the library's tensor path: plain nested vectors and explicit loops.

#include <algorithm>
#include <cmath>
#include <vector>

namespace dss::oracle {

using Matrix = std::vector<std::vector<double>>;

inline Matrix to_matrix(const std::vector<double>& flat, std::size_t rows, std::size_t cols) {
  Matrix m(rows, std::vector<double>(cols));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m[r][c] = flat[r * cols + c];
  return m;
}

// y = W x with W [out][in].
inline std::vector<double> matvec(const Matrix& w, const std::vector<double>& x) {
  std::vector<double> y(w.size(), 0.0);
  for (std::size_t o = 0; o < w.size(); ++o)
    for (std::size_t i = 0; i < x.size(); ++i) y[o] += w[o][i] * x[i];
  return y;
}

struct NaiveGatLayer {
  Matrix self_weight;      // [out][in]
  Matrix neighbor_weight;  // [out][in]
  std::vector<double> attention;  // [2*out]
};

/// alpha[i][j] for j in neighbors[i]; zero elsewhere.
inline Matrix naive_alpha(const NaiveGatLayer& layer, const Matrix& h,
                          const std::vector<std::vector<std::size_t>>& neighbors,
                          double slope) {
  const std::size_t n = h.size();
  const std::size_t out = layer.self_weight.size();
  Matrix alpha(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    if (neighbors[i].empty()) continue;
    const auto wi = matvec(layer.neighbor_weight, h[i]);
    std::vector<double> e;
    for (std::size_t j : neighbors[i]) {
      const auto wj = matvec(layer.neighbor_weight, h[j]);
      double s = 0.0;
      for (std::size_t k = 0; k < out; ++k) s += layer.attention[k] * wi[k];
      for (std::size_t k = 0; k < out; ++k) s += layer.attention[out + k] * wj[k];
      e.push_back(s > 0 ? s : slope * s);
    }
    double total = 0.0;
    for (double v : e) total += std::exp(v);
    for (std::size_t q = 0; q < e.size(); ++q) alpha[i][neighbors[i][q]] = std::exp(e[q]) / total;
  }
  return alpha;
}

inline Matrix naive_gat_layer(const NaiveGatLayer& layer, const Matrix& h,
                              const std::vector<std::vector<std::size_t>>& neighbors,
                              double slope) {
  const std::size_t n = h.size();
  const std::size_t out = layer.self_weight.size();
  const Matrix alpha = naive_alpha(layer, h, neighbors, slope);
  Matrix next(n, std::vector<double>(out, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> agg(h[i].size(), 0.0);
    for (std::size_t j : neighbors[i])
      for (std::size_t k = 0; k < agg.size(); ++k) agg[k] += alpha[i][j] * h[j][k];
    const auto a = matvec(layer.self_weight, h[i]);
    const auto b = matvec(layer.neighbor_weight, agg);
    for (std::size_t k = 0; k < out; ++k) next[i][k] = std::max(0.0, a[k] + b[k]);
  }
  return next;
}

inline std::vector<double> naive_encode(const std::vector<NaiveGatLayer>& layers, Matrix h,
                                        const std::vector<std::vector<std::size_t>>& neighbors,
                                        double slope) {
  for (const auto& layer : layers) h = naive_gat_layer(layer, h, neighbors, slope);
  std::vector<double> mean(h[0].size(), 0.0);
  for (const auto& row : h)
    for (std::size_t k = 0; k < row.size(); ++k) mean[k] += row[k] / static_cast<double>(h.size());
  return mean;
}

struct NaiveAttentionResult {
  Matrix output;                 // [T][d] after output projection
  std::vector<Matrix> weights;   // per head [T][T]
};

/// Scaled dot-product multi-head attention with explicit triple loops.
inline NaiveAttentionResult naive_attention(const Matrix& x, const Matrix& wq, const Matrix& wk,
                                            const Matrix& wv, const Matrix& wo,
                                            const std::vector<double>& bo, std::size_t heads) {
  const std::size_t steps = x.size();
  const std::size_t d = x[0].size();
  const std::size_t dk = d / heads;
  Matrix q(steps), k(steps), v(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    q[t] = matvec(wq, x[t]);
    k[t] = matvec(wk, x[t]);
    v[t] = matvec(wv, x[t]);
  }
  NaiveAttentionResult r;
  Matrix merged(steps, std::vector<double>(d, 0.0));
  for (std::size_t hd = 0; hd < heads; ++hd) {
    Matrix w(steps, std::vector<double>(steps, 0.0));
    for (std::size_t i = 0; i < steps; ++i) {
      std::vector<double> s(steps, 0.0);
      double mx = -1e300;
      for (std::size_t j = 0; j < steps; ++j) {
        for (std::size_t c = 0; c < dk; ++c) s[j] += q[i][hd * dk + c] * k[j][hd * dk + c];
        s[j] /= std::sqrt(static_cast<double>(dk));
        mx = std::max(mx, s[j]);
      }
      double total = 0.0;
      for (std::size_t j = 0; j < steps; ++j) total += std::exp(s[j] - mx);
      for (std::size_t j = 0; j < steps; ++j) w[i][j] = std::exp(s[j] - mx) / total;
      for (std::size_t j = 0; j < steps; ++j)
        for (std::size_t c = 0; c < dk; ++c) merged[i][hd * dk + c] += w[i][j] * v[j][hd * dk + c];
    }
    r.weights.push_back(w);
  }
  r.output.resize(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    r.output[t] = matvec(wo, merged[t]);
    for (std::size_t c = 0; c < d; ++c) r.output[t][c] += bo[c];
  }
  return r;
}

}  // namespace dss::oracle
