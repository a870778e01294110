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
#include <string>
#include <string_view>
#include <vector>

#include "spcl/common/error.hpp"
#include "spcl/core/config.hpp"
#include "spcl/nn/param.hpp"

namespace spcl {

/// LARS step on one layer (all tensors of the group share one trust ratio):
///   local_lr = trust * |w| / (|g| + wd * |w|)   (1 when either norm is 0)
///   v <- momentum * v + lr * local_lr * (g + wd * w);  w <- w - v
/// `velocity` holds one vector per tensor of the group.
template <class T>
void lars_update(const nn::ParamGroup<T>& group, std::span<std::vector<T>> velocity, double lr,
                 double weight_decay, double trust_coefficient, double momentum);

/// v <- momentum * v + g + wd * w;  w <- w - lr * v
template <class T>
void sgd_momentum_update(const nn::ParamGroup<T>& group, std::span<std::vector<T>> velocity, double lr,
                         double weight_decay, double momentum);

/// Momentum buffers for a fixed list of parameter groups, addressed in
/// collect() order.
template <class T>
class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(const OptimizerConfig& config, const std::vector<nn::ParamGroup<T>>& groups);

  void step(const std::vector<nn::ParamGroup<T>>& groups, double lr);
  /// Zeroes the buffers of every layer whose name starts with prefix.
  void reset(std::string_view prefix);

  const OptimizerConfig& config() const noexcept { return config_; }
  /// Flattened buffers (one per tensor) with their tensor names.
  std::vector<std::vector<T>>& buffers() noexcept { return velocity_; }
  const std::vector<std::string>& buffer_names() const noexcept { return names_; }

 private:
  OptimizerConfig config_;
  std::vector<std::string> layer_names_;
  std::vector<std::size_t> layer_offset_;  // first buffer of each layer
  std::vector<std::string> names_;
  std::vector<std::vector<T>> velocity_;
};

/// Linear warmup from 0 to base_lr over warmup_steps, then cosine decay to
/// 0 at total_steps. Throws ShapeError for step outside [0, total_steps].
double lr_schedule(std::int64_t step, double base_lr, std::int64_t warmup_steps, std::int64_t total_steps);

}  // namespace spcl
