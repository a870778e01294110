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

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "spcl/clustering/kmeans.hpp"
#include "spcl/core/config.hpp"
#include "spcl/data/dataset.hpp"
#include "spcl/eval/diagnostics.hpp"
#include "spcl/losses/losses.hpp"
#include "spcl/model/model.hpp"
#include "spcl/sampling/sampler.hpp"
#include "spcl/train/optim.hpp"

namespace spcl {

/// One optimizer step. Components whose weight is zero are not evaluated
/// and recorded as 0.
struct StepRecord {
  int epoch = 0;
  std::int64_t step = 0;  // global step index
  double lr = 0.0;
  double loss_total = 0.0;
  double loss_contra = 0.0;
  double loss_metric = 0.0;
  double loss_proto = 0.0;
  double wall_ms = 0.0;
};

/// Everything needed to continue a run. Every random stream is derived from
/// (seed, epoch, step), so epoch and global_step are the whole rng cursor.
struct TrainState {
  TrainConfig config;
  ImageShape input_shape;
  int epoch = 0;  // completed epochs
  std::int64_t global_step = 0;
  ModelBundle<float> bundle;
  Optimizer<float> optimizer;
  PrototypeTable table;  // clustering of the most recent epoch
  std::vector<StepRecord> metrics;
  std::vector<DistanceReport> reports;
};

/// Fresh state: model and optimizer built from the config seed.
TrainState initial_state(const TrainConfig& config, const ImageShape& input_shape);

/// What a step observer sees: the sampled batch, its views and the loss
/// record, with the bundle still holding its pre-update parameters.
struct StepCapture {
  const TrainState& state;
  const StepBatch& batch;
  const ViewBatch& views;
  const StepRecord& record;
};

/// Algorithm driver. Per epoch: re-initialize heads in scope (and their
/// optimizer buffers), cluster encoder features of one augmented pass,
/// then run steps of prototype-pair sampling, loss assembly and an
/// optimizer update.
class Trainer {
 public:
  Trainer(TrainState state, const Dataset& train, const Dataset* eval = nullptr);

  void set_step_observer(std::function<void(const StepCapture&)> fn) { step_observer_ = std::move(fn); }
  /// Called after each completed epoch (checkpointing hook).
  void set_epoch_observer(std::function<void(const TrainState&)> fn) { epoch_observer_ = std::move(fn); }

  /// Runs the remaining epochs.
  void run();
  /// Runs at most `count` more epochs.
  void run_epochs(int count);

  void begin_epoch();
  StepRecord train_step();
  void end_epoch();

  bool finished() const noexcept { return state_.epoch >= state_.config.epochs; }
  int steps_per_epoch() const noexcept { return steps_per_epoch_; }
  std::int64_t total_steps() const noexcept { return static_cast<std::int64_t>(steps_per_epoch_) * state_.config.epochs; }
  TrainState& state() noexcept { return state_; }
  const TrainState& state() const noexcept { return state_; }

 private:
  TrainState state_;
  const Dataset& train_;
  const Dataset* eval_;
  int steps_per_epoch_ = 0;
  int step_in_epoch_ = 0;
  bool in_epoch_ = false;
  std::optional<ClusterIndex> index_;
  std::function<void(const StepCapture&)> step_observer_;
  std::function<void(const TrainState&)> epoch_observer_;
};

/// Loss terms of one step, computed from captured views (shared by the
/// trainer and by tests that re-evaluate a step).
struct StepLosses {
  double contra = 0.0;
  double metric = 0.0;
  double proto = 0.0;
  double total = 0.0;
};

/// Forward pass, losses and (when backprop is set) gradient accumulation
/// into every parameter of the bundle.
template <class T>
StepLosses compute_step_losses(ModelBundle<T>& bundle, const ViewBatch& views, const TrainConfig& config,
                               RandomStream& pairing_rng, bool backprop);

/// CSV with the metric columns, one line per record.
std::string metrics_csv(const std::vector<StepRecord>& records);

}  // namespace spcl
