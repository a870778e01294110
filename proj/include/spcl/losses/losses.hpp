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

#include <span>
#include <vector>

#include "spcl/common/matrix.hpp"
#include "spcl/core/config.hpp"
#include "spcl/core/rng.hpp"
#include "spcl/nn/mlp.hpp"

namespace spcl::losses {

// Pure loss functions over view batches. Rows of z / h are views; sibling[i]
// is the row holding the other augmented view of row i's sample.
//
// Gradient convention: when a gradient pointer is passed, dL/dinput scaled by
// `grad_scale` is ADDED into it (it is shaped and zeroed first if empty), and
// parameter gradients of any head involved are accumulated, scaled the same
// way. Returned values are always unscaled.

/// u.v / (|u| |v|). Throws NumericError on a zero-norm input.
template <class T>
double cosine_similarity(std::span<const T> u, std::span<const T> v);

/// Checks that sibling is a fixed-point-free involution over `views` rows.
void validate_siblings(std::span<const int> sibling, std::size_t views);

/// Sum over every view z of
///   -log( exp(s(z, z')/tau) / sum_{zbar != z, z'} exp(s(z, zbar)/tau) ).
/// With exclude_positive = false the denominator also contains z'.
/// Requires an even number of views >= 4 and tau > 0.
template <class T>
double nt_xent(const Matrix<T>& z, std::span<const int> sibling, double tau, bool exclude_positive,
               Matrix<T>* grad_z = nullptr, double grad_scale = 1.0);

/// For every anchor view of the anchor prototype: one intra-prototype
/// partner and one inter-prototype partner (row indices).
struct PairingPlan {
  std::vector<int> anchor;
  std::vector<int> positive;
  std::vector<int> negative;

  std::size_t size() const noexcept { return anchor.size(); }
};

/// Builds the pairing plan. in_anchor_group[v] marks views of the anchor
/// prototype batch; sample_slot[v] identifies the sample a view came from.
/// Each anchor is paired with a uniformly drawn anchor-group view of a
/// different sample (its own sibling when the group holds one sample) and a
/// uniformly drawn view outside the anchor group.
PairingPlan make_pairing_plan(std::span<const int> sample_slot, std::span<const std::uint8_t> in_anchor_group,
                              std::span<const int> sibling, RandomStream& rng);

/// Sum over anchors of BCE(g_m(|h_a - h_pos|), 1) + BCE(g_m(|h_a - h_neg|), 0),
/// with g_m emitting one logit scored through a sigmoid.
template <class T>
double siamese_metric_loss(const Matrix<T>& h, const PairingPlan& plan, nn::Mlp<T>& g_m,
                           Matrix<T>* grad_h = nullptr, double grad_scale = 1.0);

/// Sum over views of softmax cross-entropy between g_p(h) and the view's
/// cluster label.
template <class T>
double prototypical_ce(const Matrix<T>& h, std::span<const int> labels, nn::Mlp<T>& g_p,
                       Matrix<T>* grad_h = nullptr, double grad_scale = 1.0);

/// a * CE + b * RCE with RCE = -sum_k p_k log(y_k), log 0 clamped to
/// clamp_log (< 0). For one-hot y this is -clamp_log * (1 - p_label).
template <class T>
double symmetric_prototypical_ce(const Matrix<T>& h, std::span<const int> labels, nn::Mlp<T>& g_p,
                                 double a, double b, double clamp_log, Matrix<T>* grad_h = nullptr,
                                 double grad_scale = 1.0);

/// Logit-level forms used by the two functions above (rows = views).
template <class T>
double softmax_ce_logits(const Matrix<T>& logits, std::span<const int> labels, Matrix<T>* grad_logits,
                         double grad_scale = 1.0);
template <class T>
double symmetric_ce_logits(const Matrix<T>& logits, std::span<const int> labels, double a, double b,
                           double clamp_log, Matrix<T>* grad_logits, double grad_scale = 1.0);

/// alpha * l_contra + beta * l_metric + gamma * l_proto. Non-finite input
/// throws NumericError.
double total_loss(double l_contra, double l_metric, double l_proto, const LossWeights& w);

/// Numerically stable log(1 + exp(x)).
double softplus(double x) noexcept;

}  // namespace spcl::losses
