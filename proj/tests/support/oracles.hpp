// Copyright (c) 2026, The SPCL Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Independent reference implementations. None of these call into the
// library's numerical code; they are written as plain loops over the
// defining formulas so the vectorized implementations can be checked
// against them.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "spcl/common/matrix.hpp"
#include "spcl/core/rng.hpp"
#include "spcl/nn/mlp.hpp"

namespace oracle {

using Vec = std::vector<double>;
using Rows = std::vector<Vec>;

inline double dot(const Vec& a, const Vec& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double cosine(const Vec& a, const Vec& b) { return dot(a, b) / std::sqrt(dot(a, a) * dot(b, b)); }

template <class T>
Rows rows_of(const spcl::Matrix<T>& m) {
  Rows r(m.rows(), Vec(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) r[i][j] = static_cast<double>(m(i, j));
  return r;
}

/// Sum over views of -log(exp(s(z,z')/t) / sum_{k in D} exp(s(z,z_k)/t)).
inline double nt_xent(const Rows& z, const std::vector<int>& sib, double tau, bool exclude_positive) {
  double total = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const std::size_t j = static_cast<std::size_t>(sib[i]);
    double denom = 0;
    for (std::size_t k = 0; k < z.size(); ++k) {
      if (k == i) continue;
      if (exclude_positive && k == j) continue;
      denom += std::exp(cosine(z[i], z[k]) / tau);
    }
    total += -std::log(std::exp(cosine(z[i], z[j]) / tau) / denom);
  }
  return total;
}

/// Forward pass of an MLP, reading the library's weight layout [out][in].
template <class T>
Vec mlp_forward(const spcl::nn::Mlp<T>& mlp, Vec x) {
  const auto& layers = mlp.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& L = layers[l];
    Vec y(L.out_features());
    for (std::size_t o = 0; o < L.out_features(); ++o) {
      double s = L.has_bias() ? static_cast<double>(L.bias().value[o]) : 0.0;
      for (std::size_t i = 0; i < L.in_features(); ++i) s += static_cast<double>(L.weight().value[o * L.in_features() + i]) * x[i];
      y[o] = (l + 1 < layers.size()) ? std::max(0.0, s) : s;
    }
    x = std::move(y);
  }
  return x;
}

inline double bce_with_logit(double logit, int label) {
  const double p = 1.0 / (1.0 + std::exp(-logit));
  // direct form; callers keep logits moderate
  return label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

template <class T>
double metric_loss(const Rows& h, const std::vector<int>& anchor, const std::vector<int>& pos,
                   const std::vector<int>& neg, const spcl::nn::Mlp<T>& g_m) {
  double total = 0;
  for (std::size_t a = 0; a < anchor.size(); ++a) {
    Vec dp(h[0].size()), dn(h[0].size());
    for (std::size_t e = 0; e < dp.size(); ++e) {
      dp[e] = std::fabs(h[anchor[a]][e] - h[pos[a]][e]);
      dn[e] = std::fabs(h[anchor[a]][e] - h[neg[a]][e]);
    }
    total += bce_with_logit(mlp_forward(g_m, dp)[0], 1) + bce_with_logit(mlp_forward(g_m, dn)[0], 0);
  }
  return total;
}

inline Vec softmax(const Vec& l) {
  double mx = *std::max_element(l.begin(), l.end());
  Vec p(l.size());
  double s = 0;
  for (std::size_t k = 0; k < l.size(); ++k) s += (p[k] = std::exp(l[k] - mx));
  for (auto& v : p) v /= s;
  return p;
}

/// Softmax CE per row, summed.
inline double cross_entropy(const Rows& logits, const std::vector<int>& y) {
  double total = 0;
  for (std::size_t r = 0; r < logits.size(); ++r) total += -std::log(softmax(logits[r])[y[r]]);
  return total;
}

/// a * CE + b * RCE, RCE = -sum_k p_k log(q_k) with q the one-hot label and
/// log(0) replaced by clamp.
inline double symmetric_ce(const Rows& logits, const std::vector<int>& y, double a, double b, double clamp) {
  double total = 0;
  for (std::size_t r = 0; r < logits.size(); ++r) {
    const Vec p = softmax(logits[r]);
    double rce = 0;
    for (std::size_t k = 0; k < p.size(); ++k) rce -= p[k] * (static_cast<int>(k) == y[r] ? 0.0 : clamp);
    total += a * -std::log(p[y[r]]) + b * rce;
  }
  return total;
}

/// Plain Lloyd's from given initial centers, nearest-first-index ties.
inline std::vector<int> lloyd(const Rows& x, Rows centers, int iters) {
  std::vector<int> asg(x.size(), 0);
  for (int it = 0; it < iters; ++it) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < centers.size(); ++c) {
        double d = 0;
        for (std::size_t e = 0; e < x[i].size(); ++e) d += (x[i][e] - centers[c][e]) * (x[i][e] - centers[c][e]);
        if (d < best) {
          best = d;
          asg[i] = static_cast<int>(c);
        }
      }
    }
    Rows sum(centers.size(), Vec(x[0].size(), 0.0));
    std::vector<int> cnt(centers.size(), 0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      ++cnt[asg[i]];
      for (std::size_t e = 0; e < x[i].size(); ++e) sum[asg[i]][e] += x[i][e];
    }
    for (std::size_t c = 0; c < centers.size(); ++c)
      if (cnt[c] > 0)
        for (std::size_t e = 0; e < x[0].size(); ++e) centers[c][e] = sum[c][e] / cnt[c];
  }
  return asg;
}

/// Adjusted Rand index between two labelings.
inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  const int ka = *std::max_element(a.begin(), a.end()) + 1;
  const int kb = *std::max_element(b.begin(), b.end()) + 1;
  std::vector<std::vector<double>> n(ka, std::vector<double>(kb, 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) n[a[i]][b[i]] += 1;
  auto c2 = [](double v) { return v * (v - 1) / 2; };
  double index = 0, sa = 0, sb = 0;
  std::vector<double> rs(ka, 0), cs(kb, 0);
  for (int i = 0; i < ka; ++i)
    for (int j = 0; j < kb; ++j) {
      index += c2(n[i][j]);
      rs[i] += n[i][j];
      cs[j] += n[i][j];
    }
  for (double v : rs) sa += c2(v);
  for (double v : cs) sb += c2(v);
  const double total = c2(static_cast<double>(a.size()));
  const double expected = sa * sb / total;
  const double max_index = 0.5 * (sa + sb);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

/// Best agreement of two labelings over all bijections between label sets
/// (exhaustive; small K only).
inline double best_match_accuracy(const std::vector<int>& truth, const std::vector<int>& pred, int k) {
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  double best = 0;
  do {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hit += perm[pred[i]] == truth[i];
    best = std::max(best, static_cast<double>(hit) / truth.size());
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// TP and FN statistics by enumerating every (anchor, partner) pair.
struct PairStats {
  double tp_mean = 0, fn_mean = 0;
  std::size_t fn_anchors = 0;
};
inline PairStats tp_fn(const Rows& z, const std::vector<int>& sib, const std::vector<int>& slot,
                       const std::vector<int>& label) {
  PairStats s;
  for (std::size_t i = 0; i < z.size(); ++i) {
    s.tp_mean += cosine(z[i], z[sib[i]]);
    double sum = 0;
    int cnt = 0;
    for (std::size_t k = 0; k < z.size(); ++k) {
      if (slot[k] != slot[i] && label[k] == label[i]) {
        sum += cosine(z[i], z[k]);
        ++cnt;
      }
    }
    if (cnt > 0) {
      s.fn_mean += sum / cnt;
      ++s.fn_anchors;
    }
  }
  s.tp_mean /= z.size();
  if (s.fn_anchors) s.fn_mean /= s.fn_anchors;
  return s;
}

/// One LARS step on a single layer, coordinate by coordinate.
inline void lars_step(Vec& w, const Vec& g, Vec& v, double lr, double wd, double trust, double momentum) {
  double wn = 0, gn = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    wn += w[i] * w[i];
    gn += g[i] * g[i];
  }
  wn = std::sqrt(wn);
  gn = std::sqrt(gn);
  const double local = (wn > 0 && gn > 0) ? trust * wn / (gn + wd * wn) : 1.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    v[i] = momentum * v[i] + lr * local * (g[i] + wd * w[i]);
    w[i] -= v[i];
  }
}

/// Central finite-difference gradient of f with respect to x (in place).
inline Vec numeric_gradient(std::span<double> x, const std::function<double()>& f, double h = 1e-5) {
  Vec g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double fp = f();
    x[i] = keep - h;
    const double fm = f();
    x[i] = keep;
    g[i] = (fp - fm) / (2 * h);
  }
  return g;
}

/// ||a - n|| / max(||a||, ||n||); 0 when both vanish.
inline double relative_error(const Vec& a, const Vec& n) {
  double d = 0, na = 0, nn = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += (a[i] - n[i]) * (a[i] - n[i]);
    na += a[i] * a[i];
    nn += n[i] * n[i];
  }
  const double scale = std::sqrt(std::max(na, nn));
  return scale == 0 ? 0.0 : std::sqrt(d) / scale;
}

}  // namespace oracle
