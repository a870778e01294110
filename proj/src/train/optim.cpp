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

#include "spcl/train/optim.hpp"

#include <algorithm>
#include <cmath>

namespace spcl {
namespace {

template <class T>
void check_group(const nn::ParamGroup<T>& group, std::span<std::vector<T>> velocity) {
  if (velocity.size() != group.tensors.size()) throw ShapeError("optimizer: buffer count does not match " + group.layer);
  for (std::size_t i = 0; i < velocity.size(); ++i) {
    const auto* p = group.tensors[i].param;
    if (velocity[i].size() != p->size() || p->grad.size() != p->size()) {
      throw ShapeError("optimizer: shape mismatch in " + group.tensors[i].name);
    }
  }
}

}  // namespace

template <class T>
void lars_update(const nn::ParamGroup<T>& group, std::span<std::vector<T>> velocity, double lr, double weight_decay,
                 double trust_coefficient, double momentum) {
  check_group(group, velocity);
  double ww = 0.0, gg = 0.0;
  for (const auto& t : group.tensors) {
    for (std::size_t j = 0; j < t.param->size(); ++j) {
      ww += static_cast<double>(t.param->value[j]) * t.param->value[j];
      gg += static_cast<double>(t.param->grad[j]) * t.param->grad[j];
    }
  }
  const double wn = std::sqrt(ww), gn = std::sqrt(gg);
  double local = 1.0;
  if (wn > 0.0 && gn > 0.0) local = trust_coefficient * wn / (gn + weight_decay * wn);
  const double scale = lr * local;
  for (std::size_t i = 0; i < group.tensors.size(); ++i) {
    auto& p = *group.tensors[i].param;
    auto& v = velocity[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double upd = momentum * v[j] + scale * (static_cast<double>(p.grad[j]) + weight_decay * p.value[j]);
      v[j] = static_cast<T>(upd);
      p.value[j] = static_cast<T>(p.value[j] - v[j]);
    }
  }
}

template <class T>
void sgd_momentum_update(const nn::ParamGroup<T>& group, std::span<std::vector<T>> velocity, double lr,
                         double weight_decay, double momentum) {
  check_group(group, velocity);
  for (std::size_t i = 0; i < group.tensors.size(); ++i) {
    auto& p = *group.tensors[i].param;
    auto& v = velocity[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      v[j] = static_cast<T>(momentum * v[j] + p.grad[j] + weight_decay * p.value[j]);
      p.value[j] = static_cast<T>(p.value[j] - lr * v[j]);
    }
  }
}

template <class T>
Optimizer<T>::Optimizer(const OptimizerConfig& config, const std::vector<nn::ParamGroup<T>>& groups) : config_(config) {
  for (const auto& g : groups) {
    layer_names_.push_back(g.layer);
    layer_offset_.push_back(velocity_.size());
    for (const auto& t : g.tensors) {
      names_.push_back(t.name);
      velocity_.emplace_back(t.param->size(), T(0));
    }
  }
  layer_offset_.push_back(velocity_.size());
}

template <class T>
void Optimizer<T>::step(const std::vector<nn::ParamGroup<T>>& groups, double lr) {
  if (groups.size() != layer_names_.size()) throw ShapeError("optimizer: parameter layout changed");
  for (std::size_t l = 0; l < groups.size(); ++l) {
    if (groups[l].layer != layer_names_[l]) throw ShapeError("optimizer: unexpected layer " + groups[l].layer);
    std::span<std::vector<T>> v(velocity_.data() + layer_offset_[l], layer_offset_[l + 1] - layer_offset_[l]);
    if (config_.fallback == OptimizerKind::Lars) {
      lars_update(groups[l], v, lr, config_.weight_decay, config_.trust_coefficient, config_.momentum);
    } else {
      sgd_momentum_update(groups[l], v, lr, config_.weight_decay, config_.momentum);
    }
  }
}

template <class T>
void Optimizer<T>::reset(std::string_view prefix) {
  for (std::size_t l = 0; l < layer_names_.size(); ++l) {
    if (layer_names_[l].compare(0, prefix.size(), prefix) != 0) continue;
    for (std::size_t b = layer_offset_[l]; b < layer_offset_[l + 1]; ++b) {
      std::fill(velocity_[b].begin(), velocity_[b].end(), T(0));
    }
  }
}

double lr_schedule(std::int64_t step, double base_lr, std::int64_t warmup_steps, std::int64_t total_steps) {
  if (total_steps <= 0 || step < 0 || step > total_steps) {
    throw ShapeError("lr_schedule: step " + std::to_string(step) + " outside [0, " + std::to_string(total_steps) + "]");
  }
  if (warmup_steps < 0 || warmup_steps > total_steps) throw ShapeError("lr_schedule: bad warmup length");
  if (step < warmup_steps) return base_lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
  if (total_steps == warmup_steps) return base_lr;
  const double progress = static_cast<double>(step - warmup_steps) / static_cast<double>(total_steps - warmup_steps);
  return base_lr * 0.5 * (1.0 + std::cos(M_PI * progress));
}

template void lars_update<float>(const nn::ParamGroup<float>&, std::span<std::vector<float>>, double, double, double,
                                 double);
template void lars_update<double>(const nn::ParamGroup<double>&, std::span<std::vector<double>>, double, double,
                                  double, double);
template void sgd_momentum_update<float>(const nn::ParamGroup<float>&, std::span<std::vector<float>>, double, double,
                                         double);
template void sgd_momentum_update<double>(const nn::ParamGroup<double>&, std::span<std::vector<double>>, double,
                                          double, double);
template class Optimizer<float>;
template class Optimizer<double>;

}  // namespace spcl
