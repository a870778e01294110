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

#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "spcl/clustering/kmeans.hpp"
#include "spcl/core/config.hpp"
#include "spcl/data/dataset.hpp"
#include "spcl/data/toy.hpp"
#include "spcl/eval/diagnostics.hpp"
#include "spcl/eval/probe.hpp"
#include "spcl/eval/report.hpp"
#include "spcl/simd/kernels.hpp"
#include "spcl/train/checkpoint.hpp"
#include "spcl/train/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace spcl::cli {
namespace {

struct UsageError : Error {
  using Error::Error;
};

std::string now_iso() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) { write_file_atomic(path, text); }

Dataset load_nonempty(const fs::path& path) {
  if (!fs::exists(path)) throw UsageError("dataset not found: " + path.string());
  Dataset d = load_dataset(path);
  if (d.empty()) throw UsageError("dataset is empty: " + path.string());
  return d;
}

TrainState load_ckpt(const fs::path& path) {
  if (!fs::exists(path)) throw UsageError("checkpoint not found: " + path.string());
  return load_checkpoint(path);
}

std::vector<double> parse_taus(const std::string& text) {
  std::vector<double> taus;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (end == item.c_str() || *end != '\0' || !(v > 0)) throw UsageError("invalid tau '" + item + "'");
    taus.push_back(v);
  }
  if (taus.empty()) throw UsageError("--taus needs at least one value");
  return taus;
}

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("SPCL_SEED");
  if (s == nullptr || *s == '\0') return std::nullopt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (*end != '\0') throw UsageError(std::string("SPCL_SEED is not an unsigned integer: ") + s);
  return static_cast<std::uint64_t>(v);
}

// ---------------------------------------------------------------- pretrain

struct PretrainArgs {
  std::string config_path;
  std::string out_dir;
  std::string resume;
  std::vector<std::string> overrides;  // "--key value" pairs left over by the parser
};

int cmd_pretrain(const PretrainArgs& a) {
  TrainConfig cfg = load_config(a.config_path);
  for (std::size_t i = 0; i < a.overrides.size(); ++i) {
    std::string key = a.overrides[i];
    if (key.rfind("--", 0) != 0) throw UsageError("unexpected argument '" + key + "'");
    key = key.substr(2);
    std::string value;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key = key.substr(0, eq);
    } else {
      if (i + 1 >= a.overrides.size()) throw UsageError("missing value for --" + key);
      value = a.overrides[++i];
    }
    apply_override(cfg, key, value);
  }
  if (auto s = env_seed()) cfg.seed = *s;
  validate_config(cfg);
  if (cfg.dataset_path.empty()) throw ConfigError("dataset_path", "required for pretraining");

  const fs::path base = fs::path(a.config_path).parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() || fs::exists(p) ? fs::path(p) : base / p; };
  const Dataset train = load_nonempty(resolve(cfg.dataset_path));
  std::optional<Dataset> eval;
  if (!cfg.eval_dataset_path.empty()) eval = load_nonempty(resolve(cfg.eval_dataset_path));

  TrainState state = a.resume.empty() ? initial_state(cfg, train.shape()) : load_checkpoint_for_resume(a.resume, cfg);

  const fs::path out(a.out_dir);
  const fs::path ckpt_dir = out / "checkpoints";
  ensure_dir(ckpt_dir);
  const std::string run_id = config_hash(cfg).substr(0, 12) + "-s" + std::to_string(cfg.seed);
  const std::string started = now_iso();
  std::vector<std::string> checkpoints;
  for (const auto& e : fs::directory_iterator(ckpt_dir)) {
    if (e.path().extension() == ".ckpt") checkpoints.push_back(fs::relative(e.path(), out).string());
  }
  std::sort(checkpoints.begin(), checkpoints.end());

  auto write_manifest = [&](const TrainState& s, bool done) {
    json m;
    m["run_id"] = run_id;
    m["config_hash"] = config_hash(s.config);
    m["config"] = serialize_config(s.config);
    m["isa"] = std::string(simd::isa_name(simd::active_isa()));
    m["epochs_completed"] = s.epoch;
    m["global_step"] = s.global_step;
    m["finished"] = done;
    m["started_at"] = started;
    m["updated_at"] = now_iso();
    json art;
    art["metrics"] = "metrics.csv";
    art["checkpoints"] = checkpoints;
    if (!s.reports.empty()) {
      art["distances_csv"] = "distances.csv";
      art["distances_plot"] = "distances.png";
    }
    m["artifacts"] = art;
    write_text(out / "manifest.json", m.dump(2) + "\n");
  };

  Trainer trainer(std::move(state), train, eval ? &*eval : nullptr);
  auto epoch_t0 = std::chrono::steady_clock::now();
  trainer.set_epoch_observer([&](const TrainState& s) {
    const bool done = s.epoch >= s.config.epochs;
    const int every = s.config.checkpoint_every;
    if ((every > 0 && s.epoch % every == 0) || done) {
      char name[32];
      std::snprintf(name, sizeof name, "epoch_%04d.ckpt", s.epoch);
      save_checkpoint(s, ckpt_dir / name);
      const std::string rel = (fs::path("checkpoints") / name).string();
      if (std::find(checkpoints.begin(), checkpoints.end(), rel) == checkpoints.end()) checkpoints.push_back(rel);
    }
    write_text(out / "metrics.csv", metrics_csv(s.metrics));
    if (!s.reports.empty()) export_report(s.reports, out / "distances.csv", out / "distances.png");
    write_manifest(s, done);
    double loss = 0.0;
    std::size_t n = 0;
    for (auto it = s.metrics.rbegin(); it != s.metrics.rend() && it->epoch == s.epoch - 1; ++it, ++n) loss += it->loss_total;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch_t0).count();
    std::printf("epoch %d/%d  loss %.4f  sse %.3f  %.1fs", s.epoch, s.config.epochs, n ? loss / n : 0.0, s.table.sse, secs);
    if (!s.reports.empty() && s.reports.back().epoch == s.epoch - 1) {
      std::printf("  tp %.4f  fn %.4f", s.reports.back().tp_mean, s.reports.back().fn_mean);
    }
    std::printf("\n");
    std::fflush(stdout);
    epoch_t0 = std::chrono::steady_clock::now();
  });
  if (trainer.finished()) {
    write_manifest(trainer.state(), true);
    return kExitOk;
  }
  trainer.run();
  return kExitOk;
}

// ------------------------------------------------------------------ probe

int cmd_probe(const std::string& ckpt, const std::string& data_path, const std::string& test_path,
              double train_fraction, const std::string& out_dir) {
  TrainState s = load_ckpt(ckpt);
  Dataset data = load_nonempty(data_path);
  Dataset train, test;
  if (!test_path.empty()) {
    train = std::move(data);
    test = load_nonempty(test_path);
  } else {
    if (!(train_fraction > 0 && train_fraction < 1)) throw UsageError("--train-fraction must be in (0, 1)");
    const std::size_t cut = static_cast<std::size_t>(train_fraction * static_cast<double>(data.size()));
    if (cut == 0 || cut == data.size()) throw UsageError("dataset too small to split");
    train = data.slice(0, cut);
    test = data.slice(cut, data.size());
  }
  std::uint64_t seed = s.config.seed;
  if (auto e = env_seed()) seed = *e;
  const ProbeResult r = linear_probe(*s.bundle.encoder, train, test, s.config.probe, seed);
  const fs::path out(out_dir);
  ensure_dir(out);
  char buf[256];
  std::snprintf(buf, sizeof buf, "top1,top5,n_train,n_test\n%.4f,%.4f,%zu,%zu\n", r.top1, r.top5, r.n_train, r.n_test);
  write_text(out / "probe.csv", buf);
  std::snprintf(buf, sizeof buf, "linear probe: top-1 %.2f%%  top-5 %.2f%%  (%zu train / %zu test)\n", r.top1, r.top5,
                r.n_train, r.n_test);
  write_text(out / "probe.txt", buf);
  std::fputs(buf, stdout);
  return kExitOk;
}

// --------------------------------------------------------------- diagnose

int cmd_diagnose(const std::vector<std::string>& ckpts, const std::string& data_path, const std::string& taus_text,
                 const std::string& out_dir) {
  const std::vector<double> taus = parse_taus(taus_text);
  if (ckpts.size() != 1 && ckpts.size() != taus.size()) {
    throw UsageError("pass one checkpoint, or one checkpoint per tau");
  }
  const Dataset data = load_nonempty(data_path);
  std::vector<DistanceReport> rows;
  std::optional<TrainState> shared;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (ckpts.size() > 1 || !shared) shared = load_ckpt(ckpts[ckpts.size() > 1 ? i : 0]);
    TrainState& s = *shared;
    const int epoch = s.epoch > 0 ? s.epoch - 1 : 0;
    rows.push_back(tp_fn_distances(s.bundle, data, s.config.augmentation, s.config.seed,
                                   static_cast<std::size_t>(s.config.eval_batch_size), epoch, taus[i]));
  }
  const fs::path out(out_dir);
  ensure_dir(out);
  export_report(rows, out / "diagnose.csv", out / "diagnose.png");
  std::fputs(distance_csv(rows).c_str(), stdout);
  return kExitOk;
}

// ------------------------------------------------------------------- plot

int cmd_plot(const std::vector<std::string>& ckpts, const std::string& out_dir) {
  std::vector<DistanceReport> rows;
  for (const auto& c : ckpts) {
    const TrainState s = load_ckpt(c);
    rows.insert(rows.end(), s.reports.begin(), s.reports.end());
  }
  if (rows.empty()) throw UsageError("the checkpoints hold no distance reports (was eval_dataset_path set?)");
  const fs::path out(out_dir);
  ensure_dir(out);
  export_report(rows, out / "trajectories.csv", out / "trajectories.png");
  return kExitOk;
}

// -------------------------------------------------------- cluster-inspect

int cmd_cluster_inspect(const std::string& ckpt, const std::string& data_path, const std::string& out_dir) {
  TrainState s = load_ckpt(ckpt);
  const Dataset data = load_nonempty(data_path);
  const TrainConfig& c = s.config;
  if (data.size() < static_cast<std::size_t>(c.num_prototypes)) {
    throw UsageError("dataset has fewer samples than num_prototypes");
  }
  const FeatureMatrix f = extract_epoch_features(data, *s.bundle.encoder, c.augmentation, c.seed, "inspect/features",
                                                 static_cast<std::size_t>(c.eval_batch_size));
  RandomStream rng = derive_rng(c.seed, "inspect/kmeans");
  const PrototypeTable t = kmeans(f, c.num_prototypes, rng, c.kmeans_max_iter, c.kmeans_tol);
  const fs::path out(out_dir);
  ensure_dir(out);
  std::ostringstream a;
  write_assignments(t, f, a);
  write_text(out / "assignments.csv", a.str());
  std::string h = "cluster,size\n";
  const auto sizes = t.cluster_sizes();
  for (std::size_t k = 0; k < sizes.size(); ++k) h += std::to_string(k) + "," + std::to_string(sizes[k]) + "\n";
  write_text(out / "histogram.csv", h);
  std::printf("%zu samples in %zu clusters, sse %.6f, %d iterations\n", f.size(), sizes.size(), t.sse, t.iterations);
  return kExitOk;
}

// --------------------------------------------------------- make-toy-data

int cmd_make_toy(std::size_t n, int classes, std::uint64_t seed, const std::string& out) {
  if (n == 0) throw UsageError("--n must be positive");
  const Dataset d = make_toy_dataset(n, classes, seed);
  const fs::path p(out);
  if (p.has_parent_path()) ensure_dir(p.parent_path());
  save_dataset(d, p);
  return kExitOk;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Siamese prototypical contrastive pretraining"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "spcl 1.0.0");

  PretrainArgs pre;
  auto* pretrain = app.add_subcommand("pretrain", "Pretrain an encoder");
  pretrain->add_option("--config", pre.config_path, "Config file")->required();
  pretrain->add_option("--out", pre.out_dir, "Output directory")->required();
  pretrain->add_option("--resume", pre.resume, "Checkpoint to continue from");
  pretrain->allow_extras();

  std::string ckpt, data, test, out, taus;
  std::vector<std::string> ckpts;
  double train_fraction = 0.8;
  auto* probe = app.add_subcommand("probe", "Linear probe on frozen features");
  probe->add_option("--ckpt", ckpt, "Checkpoint")->required();
  probe->add_option("--data", data, "Labeled dataset (split into train/test unless --test is given)")->required();
  probe->add_option("--test", test, "Separate labeled test set");
  probe->add_option("--train-fraction", train_fraction, "Train share when splitting --data");
  probe->add_option("--out", out, "Output directory")->required();

  auto* diagnose = app.add_subcommand("diagnose", "TP/FN similarity report");
  diagnose->add_option("--ckpt", ckpts, "Checkpoint (once, or once per tau)")->required();
  diagnose->add_option("--data", data, "Labeled dataset")->required();
  diagnose->add_option("--taus", taus, "Comma-separated temperatures")->required();
  diagnose->add_option("--out", out, "Output directory")->required();

  auto* plot = app.add_subcommand("plot", "Plot per-epoch TP/FN trajectories stored in checkpoints");
  plot->add_option("--ckpt", ckpts, "Checkpoints")->required();
  plot->add_option("--out", out, "Output directory")->required();

  auto* inspect = app.add_subcommand("cluster-inspect", "Recluster a dataset with a checkpointed encoder");
  inspect->add_option("--ckpt", ckpt, "Checkpoint")->required();
  inspect->add_option("--data", data, "Dataset")->required();
  inspect->add_option("--out", out, "Output directory")->required();

  std::size_t toy_n = 5000;
  int toy_classes = 5;
  std::uint64_t toy_seed = 0;
  auto* toy = app.add_subcommand("make-toy-data", "Write the procedural shapes dataset");
  toy->add_option("--n", toy_n, "Number of images");
  toy->add_option("--classes", toy_classes, "Number of shape classes (<= 8)");
  toy->add_option("--seed", toy_seed, "Seed");
  toy->add_option("--out", out, "Output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*pretrain) {
      pre.overrides = pretrain->remaining();
      return cmd_pretrain(pre);
    }
    if (*probe) return cmd_probe(ckpt, data, test, train_fraction, out);
    if (*diagnose) return cmd_diagnose(ckpts, data, taus, out);
    if (*plot) return cmd_plot(ckpts, out);
    if (*inspect) return cmd_cluster_inspect(ckpt, data, out);
    if (*toy) return cmd_make_toy(toy_n, toy_classes, toy_seed, out);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: usage: %s\n", e.what());
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: config: %s\n", e.what());
    return kExitUsage;
  } catch (const CheckpointError& e) {
    std::fprintf(stderr, "error: checkpoint: %s\n", e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: runtime: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace spcl::cli
