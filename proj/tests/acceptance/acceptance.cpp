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

// Acceptance checks. Prints one line per criterion and exits non-zero when any
// selected criterion fails. Usage: spcl_acceptance [--criteria 1,2,...] [--report file]
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "oracles.hpp"
#include "spcl/clustering/kmeans.hpp"
#include "spcl/data/toy.hpp"
#include "spcl/eval/probe.hpp"
#include "spcl/losses/losses.hpp"
#include "spcl/sampling/sampler.hpp"
#include "spcl/train/trainer.hpp"

using namespace spcl;

namespace {

std::FILE* g_report = nullptr;

// Tolerances.
constexpr double kLossTol = 1e-6;
constexpr double kFdStep = 1e-5;
constexpr double kFdRelTol = 1e-4;
constexpr double kInvarianceTol = 1e-6;
constexpr double kClosedFormTol = 1e-9;
constexpr double kAriMin = 0.99;
constexpr double kSigmas = 5.0;
constexpr double kBatchGapPp = 2.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Matrix<double> random_matrix(std::size_t r, std::size_t c, RandomStream& rng) {
  Matrix<double> m(r, c);
  for (auto& v : m.flat()) v = rng.normal();
  return m;
}

std::vector<int> pair_siblings(std::size_t v) {
  std::vector<int> s(v);
  for (std::size_t i = 0; i < v; ++i) s[i] = static_cast<int>(i ^ 1);
  return s;
}

// Even view count with a multiple of four so half the slots form the anchor group.
std::size_t random_views(RandomStream& rng) { return 4 * (1 + rng.below(4)); }

losses::PairingPlan random_plan(std::size_t views, RandomStream& rng) {
  std::vector<int> slot(views);
  std::vector<std::uint8_t> anchor(views);
  for (std::size_t i = 0; i < views; ++i) {
    slot[i] = static_cast<int>(i / 2);
    anchor[i] = i < views / 2 ? 1 : 0;
  }
  const auto sib = pair_siblings(views);
  return losses::make_pairing_plan(slot, anchor, sib, rng);
}

std::vector<int> random_labels(std::size_t n, int k, RandomStream& rng) {
  std::vector<int> y(n);
  for (auto& v : y) v = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
  return y;
}

oracle::Rows head_logits(const nn::Mlp<double>& g, const Matrix<double>& h) {
  oracle::Rows out;
  for (const auto& r : oracle::rows_of(h)) out.push_back(oracle::mlp_forward(g, r));
  return out;
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  RandomStream rng(101);
  double worst = 0.0;
  int batches = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t v = random_views(rng), d = 2 + rng.below(6);
    const Matrix<double> z = random_matrix(v, d, rng);
    const auto sib = pair_siblings(v);
    const double tau = rng.uniform(0.1, 1.0);
    for (bool excl : {true, false}) {
      worst = std::max(worst, std::fabs(losses::nt_xent(z, sib, tau, excl) - oracle::nt_xent(oracle::rows_of(z), sib, tau, excl)));
    }

    nn::Mlp<double> gm({d, d, 1});
    gm.reset_parameters(rng);
    const auto plan = random_plan(v, rng);
    worst = std::max(worst, std::fabs(losses::siamese_metric_loss(z, plan, gm) -
                                      oracle::metric_loss(oracle::rows_of(z), plan.anchor, plan.positive, plan.negative, gm)));

    const int k = 2 + static_cast<int>(rng.below(6));
    nn::Mlp<double> gp({d, static_cast<std::size_t>(k)});
    gp.reset_parameters(rng);
    const auto y = random_labels(v, k, rng);
    const auto logits = head_logits(gp, z);
    worst = std::max(worst, std::fabs(losses::prototypical_ce(z, y, gp) - oracle::cross_entropy(logits, y)));
    const double a = rng.uniform(0.1, 2.0), b = rng.uniform(0.0, 2.0), clamp = -rng.uniform(1.0, 6.0);
    worst = std::max(worst, std::fabs(losses::symmetric_prototypical_ce(z, y, gp, a, b, clamp) -
                                      oracle::symmetric_ce(logits, y, a, b, clamp)));
    ++batches;
  }
  return {worst <= kLossTol, fmt("%d batches x 4 losses, max |diff| = %.3g (tol %.0e)", batches, worst, kLossTol)};
}

// Flat views over every head parameter value and gradient.
struct HeadParams {
  std::vector<std::span<double>> values;
  std::vector<std::span<double>> grads;
};

HeadParams head_params(nn::Mlp<double>& g) {
  HeadParams p;
  for (auto& l : g.layers()) {
    p.values.emplace_back(l.weight().value);
    p.grads.emplace_back(l.weight().grad);
    if (l.has_bias()) {
      p.values.emplace_back(l.bias().value);
      p.grads.emplace_back(l.bias().grad);
    }
  }
  return p;
}

void zero_head(nn::Mlp<double>& g) {
  for (auto& l : g.layers()) {
    l.weight().zero_grad();
    if (l.has_bias()) l.bias().zero_grad();
  }
}

// Relative error of analytic gradients w.r.t. the input matrix and the head.
double fd_error(Matrix<double>& x, const Matrix<double>& gx, nn::Mlp<double>& head, const std::function<double()>& f) {
  double worst = oracle::relative_error(oracle::Vec(gx.data(), gx.data() + gx.size()),
                                        oracle::numeric_gradient(x.flat(), f, kFdStep));
  const HeadParams hp = head_params(head);
  for (std::size_t i = 0; i < hp.values.size(); ++i) {
    const oracle::Vec analytic(hp.grads[i].begin(), hp.grads[i].end());
    worst = std::max(worst, oracle::relative_error(analytic, oracle::numeric_gradient(hp.values[i], f, kFdStep)));
  }
  return worst;
}

Outcome criterion2() {
  RandomStream rng(202);
  double worst[4] = {0, 0, 0, 0};
  const int trials = 50;
  for (int t = 0; t < trials; ++t) {
    const std::size_t v = random_views(rng), d = 3 + rng.below(4);
    const auto sib = pair_siblings(v);
    Matrix<double> h = random_matrix(v, d, rng);

    // Contrastive loss through the projection head.
    {
      nn::Mlp<double> gc({d, d, 3});
      gc.reset_parameters(rng);
      zero_head(gc);
      const double tau = rng.uniform(0.2, 1.0);
      Matrix<double> gz;
      losses::nt_xent(gc.forward(h), sib, tau, true, &gz);
      const Matrix<double> gh = gc.backward(gz);
      worst[0] = std::max(worst[0], fd_error(h, gh, gc, [&] { return losses::nt_xent(gc.forward(h), sib, tau, true); }));
    }
    {
      nn::Mlp<double> gm({d, d, 1});
      gm.reset_parameters(rng);
      zero_head(gm);
      const auto plan = random_plan(v, rng);
      Matrix<double> gh;
      losses::siamese_metric_loss(h, plan, gm, &gh);
      worst[1] = std::max(worst[1], fd_error(h, gh, gm, [&] { return losses::siamese_metric_loss(h, plan, gm); }));
    }
    const int k = 3 + static_cast<int>(rng.below(4));
    const auto y = random_labels(v, k, rng);
    {
      nn::Mlp<double> gp({d, static_cast<std::size_t>(k)});
      gp.reset_parameters(rng);
      zero_head(gp);
      Matrix<double> gh;
      losses::prototypical_ce(h, y, gp, &gh);
      worst[2] = std::max(worst[2], fd_error(h, gh, gp, [&] { return losses::prototypical_ce(h, y, gp); }));
    }
    {
      nn::Mlp<double> gp({d, static_cast<std::size_t>(k)});
      gp.reset_parameters(rng);
      zero_head(gp);
      Matrix<double> gh;
      losses::symmetric_prototypical_ce(h, y, gp, 1.0, 0.7, -4.0, &gh);
      worst[3] = std::max(worst[3], fd_error(h, gh, gp, [&] {
        return losses::symmetric_prototypical_ce(h, y, gp, 1.0, 0.7, -4.0);
      }));
    }
  }
  const double m = *std::max_element(worst, worst + 4);
  return {m <= kFdRelTol, fmt("rel err contra %.2g metric %.2g proto %.2g sce %.2g (tol %.0e, h %.0e, %d trials)",
                              worst[0], worst[1], worst[2], worst[3], kFdRelTol, kFdStep, trials)};
}

Outcome criterion3() {
  RandomStream rng(303);
  double worst_perm = 0, worst_scale = 0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t v = 2 * (2 + rng.below(7)), d = 2 + rng.below(6);
    const Matrix<double> z = random_matrix(v, d, rng);
    const auto sib = pair_siblings(v);
    const double tau = rng.uniform(0.1, 1.0);
    const double base = losses::nt_xent(z, sib, tau, true);

    std::vector<int> perm(v);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span<int>(perm));
    Matrix<double> zp(v, d);
    std::vector<int> inv(v), sp(v);
    for (std::size_t i = 0; i < v; ++i) inv[static_cast<std::size_t>(perm[i])] = static_cast<int>(i);
    for (std::size_t i = 0; i < v; ++i) {
      for (std::size_t e = 0; e < d; ++e) zp(i, e) = z(static_cast<std::size_t>(perm[i]), e);
      sp[i] = inv[static_cast<std::size_t>(sib[static_cast<std::size_t>(perm[i])])];
    }
    worst_perm = std::max(worst_perm, std::fabs(losses::nt_xent(zp, sp, tau, true) - base));

    Matrix<double> zs = z;
    for (std::size_t i = 0; i < v; ++i) {
      const double c = std::exp(rng.uniform(-3.0, 3.0));
      for (std::size_t e = 0; e < d; ++e) zs(i, e) *= c;
    }
    worst_scale = std::max(worst_scale, std::fabs(losses::nt_xent(zs, sib, tau, true) - base));
  }
  Matrix<double> z(4, 2);
  z(0, 0) = z(1, 0) = 1;
  z(2, 1) = z(3, 1) = 1;
  const auto sib = pair_siblings(4);
  const double excl = losses::nt_xent(z, sib, 1.0, true), incl = losses::nt_xent(z, sib, 1.0, false);
  const double excl_ref = 4 * (std::log(2.0) - 1);
  const double incl_ref = -4 * std::log(std::exp(1.0) / (std::exp(1.0) + 2));
  const double closed = std::max(std::fabs(excl - excl_ref), std::fabs(incl - incl_ref));
  const bool pass = worst_perm <= kInvarianceTol && worst_scale <= kInvarianceTol && closed <= kClosedFormTol &&
                    std::fabs(incl_ref - 2.2057) < 1e-4;
  return {pass, fmt("perm %.2g scale %.2g (tol %.0e, 50 batches); closed forms %.6f %.6f, err %.2g (tol %.0e)",
                    worst_perm, worst_scale, kInvarianceTol, excl, incl, closed, kClosedFormTol)};
}

Outcome criterion4() {
  int monotone = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    RandomStream rng = derive_rng(s, "acceptance/sse");
    const std::size_t n = 50 + rng.below(250), d = 2 + rng.below(14);
    const int k = 2 + static_cast<int>(rng.below(12));
    Matrix<float> x(n, d);
    for (auto& v : x.flat()) v = static_cast<float>(rng.normal() + (rng.bernoulli(0.3) ? 4.0 : 0.0));
    const auto f = make_feature_matrix(std::move(x), rng.bernoulli(0.5));
    const auto t = kmeans(f, k, rng);
    bool ok = true;
    for (std::size_t i = 1; i < t.sse_history.size(); ++i) ok &= t.sse_history[i] <= t.sse_history[i - 1];
    monotone += ok;
  }

  RandomStream g(404);
  const std::size_t per = 250, d = 2;
  const double centers[4][2] = {{0, 0}, {8, 0}, {0, 8}, {8, 8}};
  Matrix<float> x(4 * per, d);
  std::vector<int> truth;
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t i = 0; i < per; ++i) {
      for (std::size_t e = 0; e < d; ++e) x(c * per + i, e) = static_cast<float>(centers[c][e] + g.normal());
      truth.push_back(static_cast<int>(c));
    }
  const auto gf = make_feature_matrix(std::move(x), false);
  RandomStream kr(5);
  const double ari = oracle::adjusted_rand_index(truth, kmeans(gf, 4, kr).assignment);

  int repaired = 0;
  const int repair_cases = 100;
  for (std::uint64_t s = 0; s < repair_cases; ++s) {
    RandomStream rng = derive_rng(s, "acceptance/repair");
    const std::size_t n = 20 + rng.below(60);
    const std::size_t k = 2 + rng.below(std::min<std::size_t>(n - 1, 20));
    Matrix<float> rx(n, 3);
    for (auto& v : rx.flat()) v = static_cast<float>(rng.normal());
    const auto rf = make_feature_matrix(std::move(rx), false);
    PrototypeTable t;
    t.centroids.resize(k, 3);
    t.assignment.assign(n, 0);
    const std::size_t used = 1 + rng.below(k);
    for (auto& a : t.assignment) a = static_cast<int>(rng.below(used));
    const auto sizes = repair_empty_clusters(t, rf).cluster_sizes();
    repaired += std::all_of(sizes.begin(), sizes.end(), [](std::size_t c) { return c > 0; });
  }
  const bool pass = monotone == 100 && ari >= kAriMin && repaired == repair_cases;
  return {pass, fmt("SSE non-increasing %d/100; 4-Gaussian ARI %.4f (min %.2f); repair %d/%d without empty clusters",
                    monotone, ari, kAriMin, repaired, repair_cases)};
}

Outcome criterion5() {
  // Uneven clusters, some smaller than the half batch, one ineligible.
  const std::vector<std::size_t> sizes = {40, 25, 9, 6, 3, 1, 17};
  PrototypeTable table;
  table.centroids.resize(sizes.size(), 1);
  for (std::size_t c = 0; c < sizes.size(); ++c) table.assignment.insert(table.assignment.end(), sizes[c], static_cast<int>(c));
  const ClusterIndex index(table);
  const std::size_t half = 8;
  const int trials = 10000;
  RandomStream rng(505);
  std::vector<long> hits(index.num_samples(), 0);
  int violations = 0;
  for (int t = 0; t < trials; ++t) {
    const auto [p, q] = choose_prototype_pair(index, rng, ProtoSamplingMode::SingleQ);
    const auto b = sample_step_batch(index, p, q, half, rng);
    bool ok = p != q && b.idx_p.size() == half && b.idx_q.size() == half;
    for (auto i : b.idx_p) ok &= index.cluster_of(i) == p;
    for (auto i : b.idx_q) ok &= index.cluster_of(i) == q;
    for (int c : {p, q}) ok &= index.members(c).size() >= kMinAnchorClusterSize;
    const std::set<std::size_t> up(b.idx_p.begin(), b.idx_p.end()), uq(b.idx_q.begin(), b.idx_q.end());
    if (index.members(p).size() >= half) ok &= up.size() == half;
    if (index.members(q).size() >= half) ok &= uq.size() == half;
    violations += !ok;
    std::set<std::size_t> seen = up;
    seen.insert(uq.begin(), uq.end());
    for (auto i : seen) ++hits[i];
  }
  // Analytic inclusion probability of one sample of cluster c.
  const double e = static_cast<double>(index.eligible().size());
  double worst_z = 0.0;
  for (std::size_t i = 0; i < index.num_samples(); ++i) {
    const double nc = static_cast<double>(index.members(index.cluster_of(i)).size());
    double pi = 0.0;
    if (nc >= kMinAnchorClusterSize) {
      const double within = nc >= half ? half / nc : 1.0 - std::pow(1.0 - 1.0 / nc, static_cast<double>(half));
      pi = 2.0 / e * within;
    }
    const double sd = std::sqrt(trials * pi * (1 - pi));
    const double dev = std::fabs(hits[i] - trials * pi);
    worst_z = std::max(worst_z, sd > 0 ? dev / sd : (dev > 0 ? INFINITY : 0.0));
  }
  return {violations == 0 && worst_z <= kSigmas,
          fmt("%d batches, %d invariant violations; worst inclusion deviation %.2f sigma (max %.0f)", trials,
              violations, worst_z, kSigmas)};
}

// ---------------------------------------------------------------------------
// Toy runs shared by criteria 6-8.

constexpr int kToySeeds = 3;
constexpr int kToyEpochs = 50;

struct ToyResult {
  double top1 = 0, tp = 0, fn = 0;
};

TrainConfig toy_config(bool spcl, double tau, int batch, std::uint64_t seed) {
  TrainConfig c;
  c.num_prototypes = 32;
  c.batch_size = batch;
  c.epochs = kToyEpochs;
  c.temperature = tau;
  c.loss_weights = spcl ? LossWeights{1, 1, 1} : LossWeights{1, 0, 0};
  c.optimizer.warmup_epochs = 5;
  c.optimizer.trust_coefficient = 0.003;
  c.augmentation = AugmentationSpec::parse("crop(0.3,1,0.75,1.3333333333333333);flip(0.5);jitter(0.8,0.4,0.4,0.4,0.1);gray(0.2)");
  c.reinit_scope = ReinitScope{false, false, true};
  c.checkpoint_every = 0;
  c.eval_every = 10;
  c.seed = seed;
  return c;
}

class ToyRuns {
 public:
  ToyRuns() : train_(make_toy_dataset(5000, 5, 1)), test_(make_toy_dataset(1000, 5, 2)) {}

  const ToyResult& get(bool spcl, double tau, int batch, std::uint64_t seed) {
    const auto key = std::make_tuple(spcl, tau, batch, seed);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    const auto t0 = std::chrono::steady_clock::now();
    const TrainConfig c = toy_config(spcl, tau, batch, seed);
    Trainer trainer(initial_state(c, train_.shape()), train_, &test_);
    trainer.run();
    ToyResult r;
    const DistanceReport& d = trainer.state().reports.back();
    r.tp = d.tp_mean;
    r.fn = d.fn_mean;
    r.top1 = linear_probe<float>(*trainer.state().bundle.encoder, train_, test_, c.probe, seed).top1;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    total_seconds_ += secs;
    std::fprintf(stderr, "  toy %-8s tau %.1f batch %d seed %llu: top1 %.2f tp %.4f fn %.4f (%.0f s)\n",
                 spcl ? "spcl" : "baseline", tau, batch, static_cast<unsigned long long>(seed), r.top1, r.tp, r.fn, secs);
    if (g_report) {
      std::fprintf(g_report, "toy %s tau %.1f batch %d seed %llu: top1 %.2f tp %.4f fn %.4f (%.0f s)\n",
                   spcl ? "spcl" : "baseline", tau, batch, static_cast<unsigned long long>(seed), r.top1, r.tp, r.fn,
                   secs);
      std::fflush(g_report);
    }
    return cache_.emplace(key, r).first->second;
  }

  ToyResult mean(bool spcl, double tau, int batch) {
    ToyResult m;
    for (int s = 0; s < kToySeeds; ++s) {
      const ToyResult& r = get(spcl, tau, batch, static_cast<std::uint64_t>(s));
      m.top1 += r.top1 / kToySeeds;
      m.tp += r.tp / kToySeeds;
      m.fn += r.fn / kToySeeds;
    }
    return m;
  }

  double hours() const { return total_seconds_ / 3600.0; }

 private:
  Dataset train_, test_;
  std::map<std::tuple<bool, double, int, std::uint64_t>, ToyResult> cache_;
  double total_seconds_ = 0;
};

ToyRuns& toy_runs() {
  static ToyRuns runs;
  return runs;
}

Outcome criterion6() {
  auto& runs = toy_runs();
  const ToyResult s = runs.mean(true, 0.5, 128), b = runs.mean(false, 0.5, 128);
  return {s.top1 > b.top1 && s.fn < b.fn,
          fmt("mean over %d seeds: top-1 spcl %.2f vs baseline %.2f; FN spcl %.4f vs baseline %.4f", kToySeeds, s.top1,
              b.top1, s.fn, b.fn)};
}

Outcome criterion7() {
  auto& runs = toy_runs();
  const ToyResult a = runs.mean(true, 0.5, 128), b = runs.mean(true, 0.5, 512);
  const double gap = std::fabs(a.top1 - b.top1);
  return {gap <= kBatchGapPp, fmt("spcl top-1 batch 128 %.2f vs batch 512 %.2f, gap %.2f pp (max %.1f)", a.top1,
                                  b.top1, gap, kBatchGapPp)};
}

Outcome criterion8() {
  auto& runs = toy_runs();
  int tp_wins = 0, fn_wins = 0;
  std::string detail;
  for (double tau : {0.1, 0.5, 1.0}) {
    const ToyResult s = runs.mean(true, tau, 128), b = runs.mean(false, tau, 128);
    tp_wins += s.tp > b.tp;
    fn_wins += s.fn < b.fn;
    detail += fmt("tau %.1f tp %.3f/%.3f fn %.3f/%.3f; ", tau, s.tp, b.tp, s.fn, b.fn);
  }
  detail += fmt("TP higher at %d/3, FN lower at %d/3 (spcl/baseline, final epoch, %d seeds, %.2f h of toy runs)",
                tp_wins, fn_wins, kToySeeds, runs.hours());
  return {tp_wins >= 2 && fn_wins >= 2, detail};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted = {1, 2, 3, 4, 5, 6, 7, 8};
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criteria") == 0 && i + 1 < argc) {
      wanted.clear();
      std::string list = argv[++i];
      std::size_t pos = 0;
      while (pos <= list.size()) {
        const std::size_t next = std::min(list.find(',', pos), list.size());
        if (next > pos) wanted.insert(std::stoi(list.substr(pos, next - pos)));
        pos = next + 1;
      }
    } else if (std::strcmp(argv[i], "--report") == 0 && i + 1 < argc) {
      g_report = std::fopen(argv[++i], "w");
      if (!g_report) {
        std::fprintf(stderr, "cannot open %s\n", argv[i]);
        return 2;
      }
    } else {
      std::fprintf(stderr, "usage: %s [--criteria 1,2,...] [--report file]\n", argv[0]);
      return 2;
    }
  }
  const std::function<Outcome()> checks[] = {criterion1, criterion2, criterion3, criterion4,
                                             criterion5, criterion6, criterion7, criterion8};
  bool all = true;
  for (int c = 1; c <= 8; ++c) {
    if (!wanted.count(c)) continue;
    Outcome o;
    try {
      o = checks[c - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all &= o.pass;
    std::printf("criterion %d: %s  %s\n", c, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    if (g_report) {
      std::fprintf(g_report, "criterion %d: %s  %s\n", c, o.pass ? "PASS" : "FAIL", o.detail.c_str());
      std::fflush(g_report);
    }
  }
  if (g_report) std::fclose(g_report);
  return all ? 0 : 1;
}
