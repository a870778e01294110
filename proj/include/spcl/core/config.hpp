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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace spcl {

/// Weights of the combined objective: alpha * contrastive + beta * metric +
/// gamma * prototypical.
struct LossWeights {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;

  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

enum class OptimizerKind { Lars, SgdMomentum };

struct OptimizerConfig {
  double base_lr = 1.0;
  double weight_decay = 1e-6;
  int warmup_epochs = 10;
  double trust_coefficient = 1e-3;
  double momentum = 0.9;
  OptimizerKind fallback = OptimizerKind::Lars;

  friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

/// One stochastic image transform with its application probability and
/// parameter ranges.
struct AugmentStep {
  enum class Kind { CropResize, HorizontalFlip, ColorJitter, Grayscale, GaussianBlur };
  Kind kind = Kind::HorizontalFlip;
  double probability = 1.0;
  // CropResize: scale_min, scale_max, ratio_min, ratio_max
  // ColorJitter: brightness, contrast, saturation, hue
  // GaussianBlur: sigma_min, sigma_max
  std::vector<double> params;

  friend bool operator==(const AugmentStep&, const AugmentStep&) = default;
};

/// Ordered transform list. Applied in order; every transform preserves the
/// spatial shape of its input.
struct AugmentationSpec {
  std::vector<AugmentStep> steps;

  bool is_identity() const noexcept { return steps.empty(); }

  /// Text form: "identity", "simclr", or a ';'-separated list such as
  /// "crop(0.08,1,0.75,1.3333);flip(0.5);jitter(0.8,0.4,0.4,0.4,0.1);gray(0.2);blur(0.5,0.1,2)".
  static AugmentationSpec parse(std::string_view text);
  static AugmentationSpec simclr();
  std::string to_string() const;

  friend bool operator==(const AugmentationSpec&, const AugmentationSpec&) = default;
};

struct ReinitScope {
  bool head_c = true;
  bool head_m = true;
  bool head_p = true;

  friend bool operator==(const ReinitScope&, const ReinitScope&) = default;
};

enum class ProtoSamplingMode { SingleQ, MixedQ };

enum class EncoderArch { SmallResNet, ResNet50, Identity, Linear };

struct ProbeConfig {
  int epochs = 100;
  double lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  int batch_size = 256;

  friend bool operator==(const ProbeConfig&, const ProbeConfig&) = default;
};

/// Full run configuration. Immutable once loaded.
struct TrainConfig {
  std::string dataset_path;
  std::string eval_dataset_path;  // optional held-out labeled split for per-epoch diagnostics
  int num_prototypes = 512;
  int batch_size = 512;  // total samples per step, split evenly between the two prototype batches
  int epochs = 1000;
  double temperature = 0.5;
  LossWeights loss_weights;
  int embed_dim = 128;
  int proj_dim = 128;
  OptimizerConfig optimizer;
  AugmentationSpec augmentation = AugmentationSpec::simclr();
  bool exclude_positive_in_denominator = true;
  ReinitScope reinit_scope;
  ProtoSamplingMode proto_sampling_mode = ProtoSamplingMode::SingleQ;
  bool symmetric_ce = false;
  double sce_a = 1.0;
  double sce_b = 1.0;
  double sce_clamp = -4.0;
  std::uint64_t seed = 0;
  EncoderArch encoder_arch = EncoderArch::SmallResNet;
  int kmeans_max_iter = 100;
  double kmeans_tol = 1e-4;
  int steps_per_epoch = 0;  // 0: ceil(n_samples / batch_size)
  int checkpoint_every = 1;  // epochs; 0 disables periodic checkpoints
  int eval_every = 1;        // epochs; only used when eval_dataset_path is set
  int eval_batch_size = 256;
  ProbeConfig probe;

  int half_batch() const noexcept { return batch_size / 2; }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Parses a flat "key = value" document ('#' starts a comment). Unknown or
/// duplicate keys and invalid values raise ConfigError naming the key. The
/// result is validated.
TrainConfig parse_config(std::string_view text);
TrainConfig load_config(const std::filesystem::path& path);

/// Sets one key from its text form, with the same syntax as the file.
void apply_override(TrainConfig& config, std::string_view key, std::string_view value);

/// Checks every cross-field invariant; throws ConfigError.
void validate_config(const TrainConfig& config);

/// Canonical text form: every key, schema order, shortest round-trip numbers.
std::string serialize_config(const TrainConfig& config);

/// Hex SHA-256 of serialize_config().
std::string config_hash(const TrainConfig& config);

/// Every key accepted by parse_config, in schema order.
std::vector<std::string> config_keys();

std::string_view encoder_arch_name(EncoderArch arch) noexcept;

}  // namespace spcl
