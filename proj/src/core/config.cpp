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

#include "spcl/core/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "spcl/common/digest.hpp"
#include "spcl/common/error.hpp"

namespace spcl {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_double(std::string_view key, std::string_view text) {
  text = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError(std::string(key), "expected a real number, got '" + std::string(text) + "'");
  }
  return v;
}

long long parse_integer(std::string_view key, std::string_view text) {
  text = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError(std::string(key), "expected an integer, got '" + std::string(text) + "'");
  }
  return v;
}

int parse_int(std::string_view key, std::string_view text) {
  const long long v = parse_integer(key, text);
  if (v < INT32_MIN || v > INT32_MAX) throw ConfigError(std::string(key), "integer out of range");
  return static_cast<int>(v);
}

bool parse_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(std::string(key), "expected true/false, got '" + std::string(text) + "'");
}

std::string fmt_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string fmt_bool(bool v) { return v ? "true" : "false"; }

struct KeySpec {
  std::string name;
  std::function<void(TrainConfig&, std::string_view)> set;
  std::function<std::string(const TrainConfig&)> get;
};

const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs = [] {
    std::vector<KeySpec> s;
    auto add = [&s](std::string name, auto set, auto get) {
      s.push_back(KeySpec{std::move(name), set, get});
    };
    add("dataset_path", [](TrainConfig& c, std::string_view v) { c.dataset_path = std::string(trim(v)); },
        [](const TrainConfig& c) { return c.dataset_path; });
    add("eval_dataset_path",
        [](TrainConfig& c, std::string_view v) { c.eval_dataset_path = std::string(trim(v)); },
        [](const TrainConfig& c) { return c.eval_dataset_path; });
    add("num_prototypes",
        [](TrainConfig& c, std::string_view v) { c.num_prototypes = parse_int("num_prototypes", v); },
        [](const TrainConfig& c) { return std::to_string(c.num_prototypes); });
    add("batch_size",
        [](TrainConfig& c, std::string_view v) { c.batch_size = parse_int("batch_size", v); },
        [](const TrainConfig& c) { return std::to_string(c.batch_size); });
    add("epochs", [](TrainConfig& c, std::string_view v) { c.epochs = parse_int("epochs", v); },
        [](const TrainConfig& c) { return std::to_string(c.epochs); });
    add("temperature",
        [](TrainConfig& c, std::string_view v) { c.temperature = parse_double("temperature", v); },
        [](const TrainConfig& c) { return fmt_double(c.temperature); });
    add("loss_weights",
        [](TrainConfig& c, std::string_view v) {
          const auto parts = split(v, ',');
          if (parts.size() != 3) throw ConfigError("loss_weights", "expected alpha,beta,gamma");
          c.loss_weights = {parse_double("loss_weights", parts[0]),
                            parse_double("loss_weights", parts[1]),
                            parse_double("loss_weights", parts[2])};
        },
        [](const TrainConfig& c) {
          return fmt_double(c.loss_weights.alpha) + "," + fmt_double(c.loss_weights.beta) + "," +
                 fmt_double(c.loss_weights.gamma);
        });
    add("embed_dim", [](TrainConfig& c, std::string_view v) { c.embed_dim = parse_int("embed_dim", v); },
        [](const TrainConfig& c) { return std::to_string(c.embed_dim); });
    add("proj_dim", [](TrainConfig& c, std::string_view v) { c.proj_dim = parse_int("proj_dim", v); },
        [](const TrainConfig& c) { return std::to_string(c.proj_dim); });
    add("optimizer.base_lr",
        [](TrainConfig& c, std::string_view v) { c.optimizer.base_lr = parse_double("optimizer.base_lr", v); },
        [](const TrainConfig& c) { return fmt_double(c.optimizer.base_lr); });
    add("optimizer.weight_decay",
        [](TrainConfig& c, std::string_view v) {
          c.optimizer.weight_decay = parse_double("optimizer.weight_decay", v);
        },
        [](const TrainConfig& c) { return fmt_double(c.optimizer.weight_decay); });
    add("optimizer.warmup_epochs",
        [](TrainConfig& c, std::string_view v) {
          c.optimizer.warmup_epochs = parse_int("optimizer.warmup_epochs", v);
        },
        [](const TrainConfig& c) { return std::to_string(c.optimizer.warmup_epochs); });
    add("optimizer.trust_coefficient",
        [](TrainConfig& c, std::string_view v) {
          c.optimizer.trust_coefficient = parse_double("optimizer.trust_coefficient", v);
        },
        [](const TrainConfig& c) { return fmt_double(c.optimizer.trust_coefficient); });
    add("optimizer.momentum",
        [](TrainConfig& c, std::string_view v) { c.optimizer.momentum = parse_double("optimizer.momentum", v); },
        [](const TrainConfig& c) { return fmt_double(c.optimizer.momentum); });
    add("optimizer.fallback",
        [](TrainConfig& c, std::string_view v) {
          v = trim(v);
          if (v == "lars") {
            c.optimizer.fallback = OptimizerKind::Lars;
          } else if (v == "sgd_momentum") {
            c.optimizer.fallback = OptimizerKind::SgdMomentum;
          } else {
            throw ConfigError("optimizer.fallback", "expected lars or sgd_momentum");
          }
        },
        [](const TrainConfig& c) {
          return std::string(c.optimizer.fallback == OptimizerKind::Lars ? "lars" : "sgd_momentum");
        });
    add("augmentation",
        [](TrainConfig& c, std::string_view v) { c.augmentation = AugmentationSpec::parse(v); },
        [](const TrainConfig& c) { return c.augmentation.to_string(); });
    add("exclude_positive_in_denominator",
        [](TrainConfig& c, std::string_view v) {
          c.exclude_positive_in_denominator = parse_bool("exclude_positive_in_denominator", v);
        },
        [](const TrainConfig& c) { return fmt_bool(c.exclude_positive_in_denominator); });
    add("reinit_scope",
        [](TrainConfig& c, std::string_view v) {
          ReinitScope scope{false, false, false};
          v = trim(v);
          if (v != "none" && !v.empty()) {
            for (auto part : split(v, ',')) {
              if (part == "g_c") {
                scope.head_c = true;
              } else if (part == "g_m") {
                scope.head_m = true;
              } else if (part == "g_p") {
                scope.head_p = true;
              } else {
                throw ConfigError("reinit_scope", "unknown head '" + std::string(part) + "'");
              }
            }
          }
          c.reinit_scope = scope;
        },
        [](const TrainConfig& c) {
          std::string out;
          auto append = [&out](const char* name) {
            if (!out.empty()) out += ",";
            out += name;
          };
          if (c.reinit_scope.head_c) append("g_c");
          if (c.reinit_scope.head_m) append("g_m");
          if (c.reinit_scope.head_p) append("g_p");
          return out.empty() ? std::string("none") : out;
        });
    add("proto_sampling_mode",
        [](TrainConfig& c, std::string_view v) {
          v = trim(v);
          if (v == "single_q") {
            c.proto_sampling_mode = ProtoSamplingMode::SingleQ;
          } else if (v == "mixed_q") {
            c.proto_sampling_mode = ProtoSamplingMode::MixedQ;
          } else {
            throw ConfigError("proto_sampling_mode", "expected single_q or mixed_q");
          }
        },
        [](const TrainConfig& c) {
          return std::string(c.proto_sampling_mode == ProtoSamplingMode::SingleQ ? "single_q" : "mixed_q");
        });
    add("symmetric_ce",
        [](TrainConfig& c, std::string_view v) { c.symmetric_ce = parse_bool("symmetric_ce", v); },
        [](const TrainConfig& c) { return fmt_bool(c.symmetric_ce); });
    add("sce_a", [](TrainConfig& c, std::string_view v) { c.sce_a = parse_double("sce_a", v); },
        [](const TrainConfig& c) { return fmt_double(c.sce_a); });
    add("sce_b", [](TrainConfig& c, std::string_view v) { c.sce_b = parse_double("sce_b", v); },
        [](const TrainConfig& c) { return fmt_double(c.sce_b); });
    add("sce_clamp", [](TrainConfig& c, std::string_view v) { c.sce_clamp = parse_double("sce_clamp", v); },
        [](const TrainConfig& c) { return fmt_double(c.sce_clamp); });
    add("seed",
        [](TrainConfig& c, std::string_view v) {
          const long long s = parse_integer("seed", v);
          if (s < 0) throw ConfigError("seed", "must be non-negative");
          c.seed = static_cast<std::uint64_t>(s);
        },
        [](const TrainConfig& c) { return std::to_string(c.seed); });
    add("encoder_arch",
        [](TrainConfig& c, std::string_view v) {
          v = trim(v);
          for (EncoderArch a : {EncoderArch::SmallResNet, EncoderArch::ResNet50, EncoderArch::Identity,
                                EncoderArch::Linear}) {
            if (encoder_arch_name(a) == v) {
              c.encoder_arch = a;
              return;
            }
          }
          throw ConfigError("encoder_arch", "unknown architecture '" + std::string(v) + "'");
        },
        [](const TrainConfig& c) { return std::string(encoder_arch_name(c.encoder_arch)); });
    add("kmeans_max_iter",
        [](TrainConfig& c, std::string_view v) { c.kmeans_max_iter = parse_int("kmeans_max_iter", v); },
        [](const TrainConfig& c) { return std::to_string(c.kmeans_max_iter); });
    add("kmeans_tol", [](TrainConfig& c, std::string_view v) { c.kmeans_tol = parse_double("kmeans_tol", v); },
        [](const TrainConfig& c) { return fmt_double(c.kmeans_tol); });
    add("steps_per_epoch",
        [](TrainConfig& c, std::string_view v) { c.steps_per_epoch = parse_int("steps_per_epoch", v); },
        [](const TrainConfig& c) { return std::to_string(c.steps_per_epoch); });
    add("checkpoint_every",
        [](TrainConfig& c, std::string_view v) { c.checkpoint_every = parse_int("checkpoint_every", v); },
        [](const TrainConfig& c) { return std::to_string(c.checkpoint_every); });
    add("eval_every", [](TrainConfig& c, std::string_view v) { c.eval_every = parse_int("eval_every", v); },
        [](const TrainConfig& c) { return std::to_string(c.eval_every); });
    add("eval_batch_size",
        [](TrainConfig& c, std::string_view v) { c.eval_batch_size = parse_int("eval_batch_size", v); },
        [](const TrainConfig& c) { return std::to_string(c.eval_batch_size); });
    add("probe.epochs", [](TrainConfig& c, std::string_view v) { c.probe.epochs = parse_int("probe.epochs", v); },
        [](const TrainConfig& c) { return std::to_string(c.probe.epochs); });
    add("probe.lr", [](TrainConfig& c, std::string_view v) { c.probe.lr = parse_double("probe.lr", v); },
        [](const TrainConfig& c) { return fmt_double(c.probe.lr); });
    add("probe.momentum",
        [](TrainConfig& c, std::string_view v) { c.probe.momentum = parse_double("probe.momentum", v); },
        [](const TrainConfig& c) { return fmt_double(c.probe.momentum); });
    add("probe.weight_decay",
        [](TrainConfig& c, std::string_view v) { c.probe.weight_decay = parse_double("probe.weight_decay", v); },
        [](const TrainConfig& c) { return fmt_double(c.probe.weight_decay); });
    add("probe.batch_size",
        [](TrainConfig& c, std::string_view v) { c.probe.batch_size = parse_int("probe.batch_size", v); },
        [](const TrainConfig& c) { return std::to_string(c.probe.batch_size); });
    return s;
  }();
  return specs;
}

const KeySpec* find_key(std::string_view key) {
  for (const auto& spec : key_specs()) {
    if (spec.name == key) return &spec;
  }
  return nullptr;
}

void require(bool cond, const char* key, const std::string& message) {
  if (!cond) throw ConfigError(key, message);
}

}  // namespace

std::string_view encoder_arch_name(EncoderArch arch) noexcept {
  switch (arch) {
    case EncoderArch::SmallResNet: return "small_resnet";
    case EncoderArch::ResNet50: return "resnet50";
    case EncoderArch::Identity: return "identity";
    case EncoderArch::Linear: return "linear";
  }
  return "unknown";
}

void apply_override(TrainConfig& config, std::string_view key, std::string_view value) {
  const KeySpec* spec = find_key(trim(key));
  if (spec == nullptr) throw ConfigError(std::string(trim(key)), "unknown key");
  spec->set(config, value);
}

void validate_config(const TrainConfig& c) {
  require(c.num_prototypes >= 2, "num_prototypes", "must be at least 2");
  require(c.batch_size >= 4, "batch_size", "batch_size must be at least 4");
  require(c.batch_size % 2 == 0, "batch_size", "batch_size must be even");
  require(c.epochs >= 1, "epochs", "must be positive");
  require(c.temperature > 0.0, "temperature", "must be positive");
  const auto& w = c.loss_weights;
  require(w.alpha >= 0.0 && w.beta >= 0.0 && w.gamma >= 0.0, "loss_weights", "weights must be non-negative");
  require(w.alpha > 0.0 || w.beta > 0.0 || w.gamma > 0.0, "loss_weights", "weights must not all be zero");
  require(c.embed_dim >= 1, "embed_dim", "must be positive");
  require(c.proj_dim >= 1, "proj_dim", "must be positive");
  require(c.optimizer.base_lr > 0.0, "optimizer.base_lr", "must be positive");
  require(c.optimizer.weight_decay >= 0.0, "optimizer.weight_decay", "must be non-negative");
  require(c.optimizer.warmup_epochs >= 0, "optimizer.warmup_epochs", "must be non-negative");
  require(c.optimizer.warmup_epochs < c.epochs, "optimizer.warmup_epochs", "must be less than epochs");
  require(c.optimizer.trust_coefficient > 0.0, "optimizer.trust_coefficient", "must be positive");
  require(c.optimizer.momentum >= 0.0 && c.optimizer.momentum < 1.0, "optimizer.momentum", "must be in [0, 1)");
  require(c.sce_clamp < 0.0, "sce_clamp", "must be negative");
  require(c.sce_a >= 0.0 && c.sce_b >= 0.0, "sce_a", "symmetric CE coefficients must be non-negative");
  require(c.kmeans_max_iter >= 1, "kmeans_max_iter", "must be positive");
  require(c.kmeans_tol >= 0.0, "kmeans_tol", "must be non-negative");
  require(c.steps_per_epoch >= 0, "steps_per_epoch", "must be non-negative");
  require(c.checkpoint_every >= 0, "checkpoint_every", "must be non-negative");
  require(c.eval_every >= 0, "eval_every", "must be non-negative");
  require(c.eval_batch_size >= 2, "eval_batch_size", "must be at least 2");
  require(c.probe.epochs >= 1, "probe.epochs", "must be positive");
  require(c.probe.lr > 0.0, "probe.lr", "must be positive");
  require(c.probe.batch_size >= 1, "probe.batch_size", "must be positive");
  for (const auto& step : c.augmentation.steps) {
    require(step.probability >= 0.0 && step.probability <= 1.0, "augmentation",
            "probabilities must lie in [0, 1]");
  }
}

TrainConfig parse_config(std::string_view text) {
  TrainConfig config;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    const auto hash = raw.find('#');
    const auto line = trim(hash == std::string_view::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("", "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (!seen.insert(std::string(key)).second) throw ConfigError(std::string(key), "duplicate key");
    apply_override(config, key, value);
  }
  validate_config(config);
  return config;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const TrainConfig& config) {
  std::string out;
  for (const auto& spec : key_specs()) {
    out += spec.name;
    out += " = ";
    out += spec.get(config);
    out += '\n';
  }
  return out;
}

std::string config_hash(const TrainConfig& config) { return to_hex(sha256(serialize_config(config))); }

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& spec : key_specs()) keys.push_back(spec.name);
  return keys;
}

// ---------------------------------------------------------------------------
// AugmentationSpec text form

AugmentationSpec AugmentationSpec::simclr() {
  using K = AugmentStep::Kind;
  AugmentationSpec spec;
  spec.steps = {
      {K::CropResize, 1.0, {0.08, 1.0, 3.0 / 4.0, 4.0 / 3.0}},
      {K::HorizontalFlip, 0.5, {}},
      {K::ColorJitter, 0.8, {0.4, 0.4, 0.4, 0.1}},
      {K::Grayscale, 0.2, {}},
  };
  return spec;
}

AugmentationSpec AugmentationSpec::parse(std::string_view text) {
  using K = AugmentStep::Kind;
  text = trim(text);
  if (text == "identity" || text.empty()) return {};
  if (text == "simclr") return simclr();

  AugmentationSpec spec;
  for (auto item : split(text, ';')) {
    if (item.empty()) continue;
    const auto open = item.find('(');
    const auto close = item.rfind(')');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
      throw ConfigError("augmentation", "malformed transform '" + std::string(item) + "'");
    }
    const auto name = trim(item.substr(0, open));
    std::vector<double> args;
    const auto inner = trim(item.substr(open + 1, close - open - 1));
    if (!inner.empty()) {
      for (auto a : split(inner, ',')) args.push_back(parse_double("augmentation", a));
    }
    auto expect = [&](std::size_t n) {
      if (args.size() != n) {
        throw ConfigError("augmentation", std::string(name) + " expects " + std::to_string(n) + " arguments");
      }
    };
    AugmentStep step;
    if (name == "crop") {
      expect(4);
      step = {K::CropResize, 1.0, args};
      if (!(args[0] > 0 && args[0] <= args[1] && args[1] <= 1.0 && args[2] > 0 && args[2] <= args[3])) {
        throw ConfigError("augmentation", "crop ranges must satisfy 0<smin<=smax<=1, 0<rmin<=rmax");
      }
    } else if (name == "flip") {
      expect(1);
      step = {K::HorizontalFlip, args[0], {}};
    } else if (name == "jitter") {
      expect(5);
      step = {K::ColorJitter, args[0], {args[1], args[2], args[3], args[4]}};
      if (args[4] < 0 || args[4] > 0.5) throw ConfigError("augmentation", "hue jitter must lie in [0, 0.5]");
    } else if (name == "gray") {
      expect(1);
      step = {K::Grayscale, args[0], {}};
    } else if (name == "blur") {
      expect(3);
      step = {K::GaussianBlur, args[0], {args[1], args[2]}};
      if (!(args[1] > 0 && args[1] <= args[2])) {
        throw ConfigError("augmentation", "blur sigma range must satisfy 0<min<=max");
      }
    } else {
      throw ConfigError("augmentation", "unknown transform '" + std::string(name) + "'");
    }
    if (step.probability < 0.0 || step.probability > 1.0) {
      throw ConfigError("augmentation", "probabilities must lie in [0, 1]");
    }
    spec.steps.push_back(std::move(step));
  }
  return spec;
}

std::string AugmentationSpec::to_string() const {
  using K = AugmentStep::Kind;
  if (steps.empty()) return "identity";
  std::string out;
  auto list = [](std::initializer_list<double> values) {
    std::string s;
    for (double v : values) {
      if (!s.empty()) s += ",";
      s += fmt_double(v);
    }
    return s;
  };
  for (const auto& s : steps) {
    if (!out.empty()) out += ";";
    const auto& p = s.params;
    switch (s.kind) {
      case K::CropResize: out += "crop(" + list({p[0], p[1], p[2], p[3]}) + ")"; break;
      case K::HorizontalFlip: out += "flip(" + list({s.probability}) + ")"; break;
      case K::ColorJitter: out += "jitter(" + list({s.probability, p[0], p[1], p[2], p[3]}) + ")"; break;
      case K::Grayscale: out += "gray(" + list({s.probability}) + ")"; break;
      case K::GaussianBlur: out += "blur(" + list({s.probability, p[0], p[1]}) + ")"; break;
    }
  }
  return out;
}

}  // namespace spcl
