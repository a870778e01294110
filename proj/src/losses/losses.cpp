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

#include "spcl/losses/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "spcl/simd/kernels.hpp"

namespace spcl::losses {
namespace {

template <class T>
void prepare_grad(Matrix<T>* grad, std::size_t rows, std::size_t cols, const char* what) {
  if (grad == nullptr) return;
  if (grad->empty()) {
    grad->resize(rows, cols);
    return;
  }
  check_same_shape(grad->rows(), grad->cols(), rows, cols, what);
}

void check_labels(std::span<const int> labels, std::size_t rows, std::size_t classes, const char* what) {
  if (labels.size() != rows) throw ShapeError(std::string(what) + ": one label per view required");
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw ShapeError(std::string(what) + ": label " + std::to_string(y) + " outside [0, " +
                       std::to_string(classes) + ")");
    }
  }
}

// Row-wise log-softmax pieces: returns log-sum-exp and fills p with softmax.
template <class T>
double softmax_row(std::span<const T> logits, std::vector<double>& p) {
  double mx = -std::numeric_limits<double>::infinity();
  for (T v : logits) mx = std::max(mx, static_cast<double>(v));
  double s = 0.0;
  p.resize(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) {
    p[k] = std::exp(static_cast<double>(logits[k]) - mx);
    s += p[k];
  }
  for (auto& v : p) v /= s;
  return mx + std::log(s);
}

}  // namespace

double softplus(double x) noexcept {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

template <class T>
double cosine_similarity(std::span<const T> u, std::span<const T> v) {
  if (u.size() != v.size()) throw ShapeError("cosine_similarity: length mismatch");
  double uv = 0, uu = 0, vv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uv += static_cast<double>(u[i]) * v[i];
    uu += static_cast<double>(u[i]) * u[i];
    vv += static_cast<double>(v[i]) * v[i];
  }
  if (uu == 0.0 || vv == 0.0) throw NumericError("cosine_similarity: zero-norm vector");
  return uv / std::sqrt(uu * vv);
}

void validate_siblings(std::span<const int> sibling, std::size_t views) {
  if (sibling.size() != views) throw ShapeError("sibling map must have one entry per view");
  for (std::size_t i = 0; i < views; ++i) {
    const int j = sibling[i];
    if (j < 0 || static_cast<std::size_t>(j) >= views || static_cast<std::size_t>(j) == i ||
        sibling[static_cast<std::size_t>(j)] != static_cast<int>(i)) {
      throw ShapeError("view " + std::to_string(i) + " has no valid sibling");
    }
  }
}

template <class T>
double nt_xent(const Matrix<T>& z, std::span<const int> sibling, double tau, bool exclude_positive,
               Matrix<T>* grad_z, double grad_scale) {
  if (!(tau > 0)) throw NumericError("nt_xent: temperature must be positive");
  const std::size_t v = z.rows(), d = z.cols();
  if (v < 4 || v % 2 != 0) throw ShapeError("nt_xent: need an even number of views, at least 4");
  validate_siblings(sibling, v);
  if (!z.all_finite()) throw NumericError("nt_xent: non-finite projection");

  std::vector<double> norm(v);
  Matrix<T> zh(v, d);
  for (std::size_t i = 0; i < v; ++i) {
    double s = 0;
    for (T x : z.row(i)) s += static_cast<double>(x) * x;
    norm[i] = std::sqrt(s);
    if (norm[i] == 0.0) throw NumericError("nt_xent: zero projection vector");
    for (std::size_t c = 0; c < d; ++c) zh(i, c) = static_cast<T>(z(i, c) / norm[i]);
  }
  Matrix<T> sim(v, v);
  simd::gemm(false, true, v, v, d, T(1), zh.data(), d, zh.data(), d, T(0), sim.data(), v);

  const bool want_grad = grad_z != nullptr;
  Matrix<double> g;
  if (want_grad) g.resize(v, v);
  double total = 0.0;
  std::vector<double> w(v);
  for (std::size_t i = 0; i < v; ++i) {
    const std::size_t j = static_cast<std::size_t>(sibling[i]);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < v; ++k) {
      if (k == i || (exclude_positive && k == j)) continue;
      mx = std::max(mx, sim(i, k) / tau);
    }
    double s = 0.0;
    for (std::size_t k = 0; k < v; ++k) {
      if (k == i || (exclude_positive && k == j)) {
        w[k] = 0.0;
        continue;
      }
      w[k] = std::exp(sim(i, k) / tau - mx);
      s += w[k];
    }
    total += -sim(i, j) / tau + mx + std::log(s);
    if (want_grad) {
      for (std::size_t k = 0; k < v; ++k) g(i, k) = w[k] / s / tau;
      g(i, j) -= 1.0 / tau;
    }
  }
  if (!std::isfinite(total)) throw NumericError("nt_xent: non-finite loss");

  if (want_grad) {
    prepare_grad(grad_z, v, d, "nt_xent");
    // L depends on zhat through sim = zhat zhat^T, so dL/dzhat = (G + G^T) zhat.
    Matrix<double> gs(v, v);
    for (std::size_t i = 0; i < v; ++i)
      for (std::size_t k = 0; k < v; ++k) gs(i, k) = g(i, k) + g(k, i);
    std::vector<double> dzh(d);
    for (std::size_t i = 0; i < v; ++i) {
      std::fill(dzh.begin(), dzh.end(), 0.0);
      for (std::size_t k = 0; k < v; ++k) {
        const double c = gs(i, k);
        if (c == 0.0) continue;
        for (std::size_t e = 0; e < d; ++e) dzh[e] += c * static_cast<double>(zh(k, e));
      }
      double dot = 0.0;
      for (std::size_t e = 0; e < d; ++e) dot += dzh[e] * static_cast<double>(zh(i, e));
      for (std::size_t e = 0; e < d; ++e) {
        (*grad_z)(i, e) += static_cast<T>(grad_scale * (dzh[e] - static_cast<double>(zh(i, e)) * dot) / norm[i]);
      }
    }
  }
  return total;
}

PairingPlan make_pairing_plan(std::span<const int> sample_slot, std::span<const std::uint8_t> in_anchor_group,
                              std::span<const int> sibling, RandomStream& rng) {
  const std::size_t v = sample_slot.size();
  if (in_anchor_group.size() != v || sibling.size() != v) throw ShapeError("make_pairing_plan: length mismatch");
  std::vector<int> anchors, others;
  for (std::size_t i = 0; i < v; ++i) (in_anchor_group[i] ? anchors : others).push_back(static_cast<int>(i));
  if (anchors.empty()) throw ShapeError("make_pairing_plan: no anchor-group views");
  if (others.empty()) throw ShapeError("make_pairing_plan: no views outside the anchor group");

  PairingPlan plan;
  plan.anchor.reserve(anchors.size());
  std::vector<int> candidates;
  candidates.reserve(anchors.size());
  for (int a : anchors) {
    candidates.clear();
    for (int b : anchors) {
      if (sample_slot[static_cast<std::size_t>(b)] != sample_slot[static_cast<std::size_t>(a)]) candidates.push_back(b);
    }
    int pos = sibling[static_cast<std::size_t>(a)];
    if (!candidates.empty()) pos = candidates[rng.below(candidates.size())];
    const int neg = others[rng.below(others.size())];
    plan.anchor.push_back(a);
    plan.positive.push_back(pos);
    plan.negative.push_back(neg);
  }
  return plan;
}

template <class T>
double siamese_metric_loss(const Matrix<T>& h, const PairingPlan& plan, nn::Mlp<T>& g_m, Matrix<T>* grad_h,
                           double grad_scale) {
  const std::size_t a = plan.size(), d = h.cols();
  if (a == 0) throw ShapeError("siamese_metric_loss: empty pairing plan");
  if (plan.positive.size() != a || plan.negative.size() != a) throw ShapeError("siamese_metric_loss: malformed plan");
  if (g_m.in_dim() != d || g_m.out_dim() != 1) throw ShapeError("siamese_metric_loss: head must map d_e -> 1");
  auto check_row = [&](int r) {
    if (r < 0 || static_cast<std::size_t>(r) >= h.rows()) throw ShapeError("siamese_metric_loss: plan index out of range");
  };
  Matrix<T> diff(2 * a, d);
  for (std::size_t i = 0; i < a; ++i) {
    check_row(plan.anchor[i]);
    check_row(plan.positive[i]);
    check_row(plan.negative[i]);
    const auto ha = h.row(static_cast<std::size_t>(plan.anchor[i]));
    const auto hp = h.row(static_cast<std::size_t>(plan.positive[i]));
    const auto hn = h.row(static_cast<std::size_t>(plan.negative[i]));
    for (std::size_t e = 0; e < d; ++e) {
      diff(i, e) = std::abs(ha[e] - hp[e]);
      diff(a + i, e) = std::abs(ha[e] - hn[e]);
    }
  }
  const Matrix<T> logits = g_m.forward(diff);
  double total = 0.0;
  for (std::size_t r = 0; r < 2 * a; ++r) {
    const double l = logits(r, 0);
    total += r < a ? softplus(-l) : softplus(l);
  }
  if (!std::isfinite(total)) throw NumericError("siamese_metric_loss: non-finite loss");
  if (grad_h == nullptr) return total;

  prepare_grad(grad_h, h.rows(), d, "siamese_metric_loss");
  Matrix<T> dlogit(2 * a, 1);
  for (std::size_t r = 0; r < 2 * a; ++r) {
    const double l = logits(r, 0);
    const double sig = l >= 0 ? 1.0 / (1.0 + std::exp(-l)) : std::exp(l) / (1.0 + std::exp(l));
    dlogit(r, 0) = static_cast<T>(grad_scale * (sig - (r < a ? 1.0 : 0.0)));
  }
  const Matrix<T> ddiff = g_m.backward(dlogit);
  for (std::size_t i = 0; i < a; ++i) {
    const std::size_t ia = static_cast<std::size_t>(plan.anchor[i]);
    const std::size_t ip = static_cast<std::size_t>(plan.positive[i]);
    const std::size_t in = static_cast<std::size_t>(plan.negative[i]);
    for (std::size_t e = 0; e < d; ++e) {
      const T sp = h(ia, e) > h(ip, e) ? T(1) : (h(ia, e) < h(ip, e) ? T(-1) : T(0));
      const T sn = h(ia, e) > h(in, e) ? T(1) : (h(ia, e) < h(in, e) ? T(-1) : T(0));
      const T gp = ddiff(i, e) * sp, gn = ddiff(a + i, e) * sn;
      (*grad_h)(ia, e) += gp + gn;
      (*grad_h)(ip, e) -= gp;
      (*grad_h)(in, e) -= gn;
    }
  }
  return total;
}

template <class T>
double softmax_ce_logits(const Matrix<T>& logits, std::span<const int> labels, Matrix<T>* grad_logits,
                         double grad_scale) {
  check_labels(labels, logits.rows(), logits.cols(), "softmax_ce");
  prepare_grad(grad_logits, logits.rows(), logits.cols(), "softmax_ce");
  std::vector<double> p;
  double total = 0.0;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto row = logits.row(r);
    const std::size_t y = static_cast<std::size_t>(labels[r]);
    total += softmax_row(row, p) - static_cast<double>(row[y]);
    if (grad_logits != nullptr) {
      for (std::size_t k = 0; k < row.size(); ++k) {
        (*grad_logits)(r, k) += static_cast<T>(grad_scale * (p[k] - (k == y ? 1.0 : 0.0)));
      }
    }
  }
  if (!std::isfinite(total)) throw NumericError("softmax_ce: non-finite loss");
  return total;
}

template <class T>
double symmetric_ce_logits(const Matrix<T>& logits, std::span<const int> labels, double a, double b,
                           double clamp_log, Matrix<T>* grad_logits, double grad_scale) {
  if (!(clamp_log < 0)) throw NumericError("symmetric_ce: clamp value must be negative");
  check_labels(labels, logits.rows(), logits.cols(), "symmetric_ce");
  prepare_grad(grad_logits, logits.rows(), logits.cols(), "symmetric_ce");
  const double rce_scale = -clamp_log;
  std::vector<double> p;
  double total = 0.0;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto row = logits.row(r);
    const std::size_t y = static_cast<std::size_t>(labels[r]);
    const double ce = softmax_row(row, p) - static_cast<double>(row[y]);
    const double py = p[y];
    total += a * ce + b * rce_scale * (1.0 - py);
    if (grad_logits != nullptr) {
      // d(1 - p_y)/dl_k = -p_y (delta_ky - p_k)
      for (std::size_t k = 0; k < row.size(); ++k) {
        const double delta = k == y ? 1.0 : 0.0;
        const double gk = a * (p[k] - delta) - b * rce_scale * py * (delta - p[k]);
        (*grad_logits)(r, k) += static_cast<T>(grad_scale * gk);
      }
    }
  }
  if (!std::isfinite(total)) throw NumericError("symmetric_ce: non-finite loss");
  return total;
}

namespace {

template <class T, class LogitLoss>
double head_loss(const Matrix<T>& h, nn::Mlp<T>& g_p, Matrix<T>* grad_h, LogitLoss&& loss) {
  if (g_p.in_dim() != h.cols()) throw ShapeError("prototype head input width does not match embeddings");
  const Matrix<T> logits = g_p.forward(h);
  if (grad_h == nullptr) return loss(logits, static_cast<Matrix<T>*>(nullptr));
  Matrix<T> dlogits;
  const double value = loss(logits, &dlogits);
  prepare_grad(grad_h, h.rows(), h.cols(), "prototype loss");
  const Matrix<T> dh = g_p.backward(dlogits);
  for (std::size_t i = 0; i < dh.size(); ++i) grad_h->data()[i] += dh.data()[i];
  return value;
}

}  // namespace

template <class T>
double prototypical_ce(const Matrix<T>& h, std::span<const int> labels, nn::Mlp<T>& g_p, Matrix<T>* grad_h,
                       double grad_scale) {
  return head_loss(h, g_p, grad_h, [&](const Matrix<T>& logits, Matrix<T>* gl) {
    return softmax_ce_logits(logits, labels, gl, grad_scale);
  });
}

template <class T>
double symmetric_prototypical_ce(const Matrix<T>& h, std::span<const int> labels, nn::Mlp<T>& g_p, double a,
                                 double b, double clamp_log, Matrix<T>* grad_h, double grad_scale) {
  return head_loss(h, g_p, grad_h, [&](const Matrix<T>& logits, Matrix<T>* gl) {
    return symmetric_ce_logits(logits, labels, a, b, clamp_log, gl, grad_scale);
  });
}

double total_loss(double l_contra, double l_metric, double l_proto, const LossWeights& w) {
  if (!std::isfinite(l_contra) || !std::isfinite(l_metric) || !std::isfinite(l_proto)) {
    throw NumericError("total_loss: non-finite component");
  }
  return w.alpha * l_contra + w.beta * l_metric + w.gamma * l_proto;
}

#define SPCL_INSTANTIATE(T)                                                                              \
  template double cosine_similarity<T>(std::span<const T>, std::span<const T>);                        \
  template double nt_xent<T>(const Matrix<T>&, std::span<const int>, double, bool, Matrix<T>*, double); \
  template double siamese_metric_loss<T>(const Matrix<T>&, const PairingPlan&, nn::Mlp<T>&, Matrix<T>*, \
                                         double);                                                       \
  template double prototypical_ce<T>(const Matrix<T>&, std::span<const int>, nn::Mlp<T>&, Matrix<T>*,   \
                                     double);                                                           \
  template double symmetric_prototypical_ce<T>(const Matrix<T>&, std::span<const int>, nn::Mlp<T>&,     \
                                               double, double, double, Matrix<T>*, double);             \
  template double softmax_ce_logits<T>(const Matrix<T>&, std::span<const int>, Matrix<T>*, double);      \
  template double symmetric_ce_logits<T>(const Matrix<T>&, std::span<const int>, double, double, double, \
                                         Matrix<T>*, double);

SPCL_INSTANTIATE(float)
SPCL_INSTANTIATE(double)
#undef SPCL_INSTANTIATE

}  // namespace spcl::losses
