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

#include "spcl/train/trainer.hpp"

#include <chrono>
#include <cstdio>

namespace spcl {
namespace {

std::string label(const char* what, int epoch) { return std::string(what) + "/" + std::to_string(epoch); }
std::string label(const char* what, int epoch, std::int64_t step) {
  return label(what, epoch) + "/" + std::to_string(step);
}

}  // namespace

TrainState initial_state(const TrainConfig& config, const ImageShape& input_shape) {
  validate_config(config);
  TrainState s;
  s.config = config;
  s.input_shape = input_shape;
  s.bundle = build_model<float>(config, config.encoder_arch, input_shape, config.seed);
  s.optimizer = Optimizer<float>(config.optimizer, s.bundle.parameters());
  return s;
}

template <class T>
StepLosses compute_step_losses(ModelBundle<T>& bundle, const ViewBatch& views, const TrainConfig& config,
                               RandomStream& pairing_rng, bool backprop) {
  const LossWeights& w = config.loss_weights;
  EmbeddingBatch<T> emb = encode(bundle, views, backprop);
  Matrix<T> grad_h;
  Matrix<T>* gh = backprop ? &grad_h : nullptr;
  if (backprop) grad_h.resize(emb.h.rows(), emb.h.cols());
  StepLosses l;
  if (w.alpha > 0) {
    const Matrix<T> z = bundle.head_c.forward(emb.h);
    Matrix<T> gz;
    l.contra = losses::nt_xent(z, emb.sibling, config.temperature, config.exclude_positive_in_denominator,
                               backprop ? &gz : nullptr, w.alpha);
    if (backprop) {
      const Matrix<T> d = bundle.head_c.backward(gz);
      for (std::size_t i = 0; i < d.size(); ++i) grad_h.data()[i] += d.data()[i];
    }
  }
  if (w.beta > 0) {
    const losses::PairingPlan plan =
        losses::make_pairing_plan(views.sample_slot, views.in_anchor_group, views.sibling, pairing_rng);
    l.metric = losses::siamese_metric_loss(emb.h, plan, bundle.head_m, gh, w.beta);
  }
  if (w.gamma > 0) {
    if (config.symmetric_ce) {
      l.proto = losses::symmetric_prototypical_ce(emb.h, emb.source_proto, bundle.head_p, config.sce_a, config.sce_b,
                                                  config.sce_clamp, gh, w.gamma);
    } else {
      l.proto = losses::prototypical_ce(emb.h, emb.source_proto, bundle.head_p, gh, w.gamma);
    }
  }
  l.total = losses::total_loss(l.contra, l.metric, l.proto, w);
  if (backprop) bundle.encoder->backward(grad_h);
  return l;
}

Trainer::Trainer(TrainState state, const Dataset& train, const Dataset* eval)
    : state_(std::move(state)), train_(train), eval_(eval) {
  if (train_.empty()) throw DataError("training dataset is empty");
  if (!(train_.shape() == state_.input_shape)) throw DataError("training images do not match the model input shape");
  if (eval_ != nullptr && !(eval_->shape() == state_.input_shape)) {
    throw DataError("evaluation images do not match the model input shape");
  }
  if (train_.size() < static_cast<std::size_t>(state_.config.num_prototypes)) {
    throw DataError("dataset has " + std::to_string(train_.size()) + " samples, fewer than num_prototypes = " +
                    std::to_string(state_.config.num_prototypes));
  }
  steps_per_epoch_ = spcl::steps_per_epoch(state_.config, train_.size());
}

void Trainer::begin_epoch() {
  if (in_epoch_) throw Error("begin_epoch called twice");
  if (finished()) throw Error("training already finished");
  const TrainConfig& c = state_.config;
  const int e = state_.epoch;
  try {
    const ReinitScope& scope = c.reinit_scope;
    reinit_heads(state_.bundle, scope, c.seed, label("reinit", e));
    if (scope.head_c) state_.optimizer.reset("g_c");
    if (scope.head_m) state_.optimizer.reset("g_m");
    if (scope.head_p) state_.optimizer.reset("g_p");

    const FeatureMatrix f = extract_epoch_features(train_, *state_.bundle.encoder, c.augmentation, c.seed,
                                                   label("features", e),
                                                   static_cast<std::size_t>(c.eval_batch_size));
    RandomStream krng = derive_rng(c.seed, label("kmeans", e));
    state_.table = kmeans(f, c.num_prototypes, krng, c.kmeans_max_iter, c.kmeans_tol);
    state_.table.epoch = e;
    index_.emplace(state_.table);
    if (index_->eligible().size() < 2) {
      throw DataError("only " + std::to_string(index_->eligible().size()) + " clusters have at least " +
                      std::to_string(kMinAnchorClusterSize) + " members");
    }
  } catch (const Error& err) {
    throw Error("epoch " + std::to_string(e) + ": " + err.what());
  }
  step_in_epoch_ = 0;
  in_epoch_ = true;
}

StepRecord Trainer::train_step() {
  if (!in_epoch_) throw Error("train_step outside an epoch");
  const TrainConfig& c = state_.config;
  const int e = state_.epoch;
  const int s = step_in_epoch_;
  const auto t0 = std::chrono::steady_clock::now();
  StepRecord rec;
  rec.epoch = e;
  rec.step = state_.global_step;
  try {
    RandomStream srng = derive_rng(c.seed, label("step", e, s));
    const auto [p, q] = choose_prototype_pair(*index_, srng, c.proto_sampling_mode);
    const StepBatch batch = sample_step_batch(*index_, p, q, static_cast<std::size_t>(c.half_batch()), srng);
    const ViewBatch views = make_views(train_, batch, *index_, c.augmentation, c.seed, label("view", e, s));

    auto groups = state_.bundle.parameters();
    nn::zero_grads(groups);
    RandomStream prng = derive_rng(c.seed, label("pair", e, s));
    const StepLosses l = compute_step_losses(state_.bundle, views, c, prng, true);
    for (const auto& g : groups) {
      for (const auto& t : g.tensors) {
        for (float v : t.param->grad) {
          if (!std::isfinite(v)) throw NumericError("non-finite gradient in " + t.name);
        }
      }
    }
    const std::int64_t warmup = static_cast<std::int64_t>(c.optimizer.warmup_epochs) * steps_per_epoch_;
    rec.lr = lr_schedule(state_.global_step, c.optimizer.base_lr, warmup, total_steps());
    rec.loss_contra = l.contra;
    rec.loss_metric = l.metric;
    rec.loss_proto = l.proto;
    rec.loss_total = l.total;
    if (step_observer_) step_observer_(StepCapture{state_, batch, views, rec});
    state_.optimizer.step(groups, rec.lr);
  } catch (const Error& err) {
    throw Error("epoch " + std::to_string(e) + " step " + std::to_string(s) + ": " + err.what());
  }
  rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  state_.metrics.push_back(rec);
  ++state_.global_step;
  ++step_in_epoch_;
  return rec;
}

void Trainer::end_epoch() {
  if (!in_epoch_) throw Error("end_epoch outside an epoch");
  if (step_in_epoch_ != steps_per_epoch_) throw Error("end_epoch before all steps ran");
  const TrainConfig& c = state_.config;
  const int e = state_.epoch;
  const bool last = e + 1 == c.epochs;
  if (eval_ != nullptr && c.eval_every > 0 && ((e + 1) % c.eval_every == 0 || last)) {
    state_.reports.push_back(tp_fn_distances(state_.bundle, *eval_, c.augmentation, c.seed,
                                             static_cast<std::size_t>(c.eval_batch_size), e, c.temperature));
  }
  in_epoch_ = false;
  ++state_.epoch;
  if (epoch_observer_) epoch_observer_(state_);
}

void Trainer::run_epochs(int count) {
  for (int i = 0; i < count && !finished(); ++i) {
    begin_epoch();
    for (int s = 0; s < steps_per_epoch_; ++s) train_step();
    end_epoch();
  }
}

void Trainer::run() { run_epochs(state_.config.epochs); }

std::string metrics_csv(const std::vector<StepRecord>& records) {
  std::string out = "epoch,step,lr,loss_total,loss_contra,loss_metric,loss_proto,wall_ms\n";
  char buf[320];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%d,%lld,%.9g,%.17g,%.17g,%.17g,%.17g,%.3f\n", r.epoch,
                  static_cast<long long>(r.step), r.lr, r.loss_total, r.loss_contra, r.loss_metric, r.loss_proto,
                  r.wall_ms);
    out += buf;
  }
  return out;
}

template StepLosses compute_step_losses<float>(ModelBundle<float>&, const ViewBatch&, const TrainConfig&, RandomStream&,
                                               bool);
template StepLosses compute_step_losses<double>(ModelBundle<double>&, const ViewBatch&, const TrainConfig&,
                                                RandomStream&, bool);

}  // namespace spcl
