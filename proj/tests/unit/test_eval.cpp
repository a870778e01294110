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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "spcl/common/error.hpp"
#include "spcl/data/toy.hpp"
#include "spcl/eval/diagnostics.hpp"
#include "spcl/eval/probe.hpp"
#include "spcl/eval/report.hpp"

using namespace spcl;

namespace {

std::vector<int> pair_siblings(std::size_t v) {
  std::vector<int> s(v);
  for (std::size_t i = 0; i < v; ++i) s[i] = static_cast<int>(i ^ 1);
  return s;
}

std::vector<int> pair_slots(std::size_t v) {
  std::vector<int> s(v);
  for (std::size_t i = 0; i < v; ++i) s[i] = static_cast<int>(i / 2);
  return s;
}

std::uint32_t be32(const std::vector<std::uint8_t>& b, std::size_t o) {
  return (std::uint32_t{b[o]} << 24) | (std::uint32_t{b[o + 1]} << 16) | (std::uint32_t{b[o + 2]} << 8) | b[o + 3];
}

}  // namespace

TEST_CASE("tp and fn on an orthonormal construction") {
  Matrix<double> z(4, 2);
  z(0, 0) = z(1, 0) = 1;
  z(2, 1) = z(3, 1) = 1;
  const std::vector<int> labels{0, 0, 0, 0};
  const auto s = anchor_similarities(z, pair_siblings(4), pair_slots(4), labels);
  CHECK(s.tp[0] == doctest::Approx(1.0));
  CHECK(s.fn[0] == doctest::Approx(0.0));
  const auto r = summarize_similarities(s, 3, 0.5);
  CHECK(r.tp_mean == doctest::Approx(1.0));
  CHECK(r.fn_mean == doctest::Approx(0.0));
  CHECK(r.n_fn_anchors == 4);
  CHECK(r.epoch == 3);
}

TEST_CASE("collapsed embeddings give fn of one") {
  Matrix<double> z(6, 3, 0.5);
  const std::vector<int> labels{1, 1, 1, 1, 2, 2};
  const auto r = summarize_similarities(anchor_similarities(z, pair_siblings(6), pair_slots(6), labels), 0, 1.0);
  CHECK(r.fn_mean == doctest::Approx(1.0));
  CHECK(r.n_fn_anchors == 4);
  CHECK(r.n_skipped == 2);
  CHECK(r.fn_std == doctest::Approx(0.0));
}

TEST_CASE("tp and fn match the pair enumeration oracle") {
  RandomStream rng(3);
  for (int t = 0; t < 30; ++t) {
    const std::size_t v = 2 * (2 + rng.below(10));
    Matrix<double> z(v, 4);
    for (auto& x : z.flat()) x = rng.normal();
    std::vector<int> labels(v);
    for (std::size_t i = 0; i < v; i += 2) labels[i] = labels[i + 1] = static_cast<int>(rng.below(3));
    const auto sib = pair_siblings(v), slot = pair_slots(v);
    const auto r = summarize_similarities(anchor_similarities(z, sib, slot, labels), 0, 1.0);
    const auto o = oracle::tp_fn(oracle::rows_of(z), sib, slot, labels);
    CHECK(r.tp_mean == doctest::Approx(o.tp_mean).epsilon(1e-12));
    CHECK(r.n_fn_anchors == o.fn_anchors);
    if (o.fn_anchors) CHECK(r.fn_mean == doctest::Approx(o.fn_mean).epsilon(1e-12));
  }
}

TEST_CASE("distance report on a dataset is deterministic and finite") {
  TrainConfig c;
  c.num_prototypes = 4;
  c.embed_dim = 8;
  c.proj_dim = 4;
  const Dataset d = make_toy_dataset(40, 4, 2);
  auto b = build_model<float>(c, EncoderArch::Linear, d.shape(), 1);
  const auto r1 = tp_fn_distances(b, d, AugmentationSpec::simclr(), 7, 16, 2, 0.5);
  const auto r2 = tp_fn_distances(b, d, AugmentationSpec::simclr(), 7, 16, 2, 0.5);
  CHECK(r1.tp_mean == r2.tp_mean);
  CHECK(r1.fn_mean == r2.fn_mean);
  CHECK(r1.n_anchors == 80);
  CHECK(std::isfinite(r1.fn_mean));
  CHECK(r1.tp_mean <= 1.0 + 1e-9);
  CHECK(r1.tau == 0.5);
}

TEST_CASE("probe reaches full accuracy on separable features") {
  RandomStream rng(1);
  const std::size_t n = 200;
  Matrix<float> x(n, 3), tx(n, 3);
  std::vector<int> y(n), ty(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = ty[i] = static_cast<int>(i % 4);
    for (std::size_t e = 0; e < 3; ++e) {
      x(i, e) = static_cast<float>(rng.normal() * 0.1);
      tx(i, e) = static_cast<float>(rng.normal() * 0.1);
    }
    if (y[i] < 3) {
      x(i, static_cast<std::size_t>(y[i])) += 3.0f;
      tx(i, static_cast<std::size_t>(y[i])) += 3.0f;
    }
  }
  ProbeConfig pc;
  pc.epochs = 30;
  const auto r = linear_probe_features(x, y, tx, ty, pc, 0);
  CHECK(r.top1 == doctest::Approx(100.0));
  CHECK(r.top5 == doctest::Approx(100.0));
  CHECK(r.n_train == n);
}

TEST_CASE("probe on constant features predicts the majority class") {
  Matrix<float> x(10, 2, 1.0f), tx(4, 2, 1.0f);
  std::vector<int> y{0, 1, 1, 1, 1, 1, 1, 2, 2, 0}, ty{1, 1, 0, 2};
  ProbeConfig pc;
  pc.epochs = 20;
  const auto r = linear_probe_features(x, y, tx, ty, pc, 0);
  CHECK(r.top1 == doctest::Approx(50.0));
  std::vector<int> unseen{3, 3, 3, 3};
  CHECK_THROWS_AS(linear_probe_features(x, y, tx, unseen, pc, 0), DataError);
}

TEST_CASE("probe leaves the encoder unchanged") {
  TrainConfig c;
  c.num_prototypes = 2;
  c.embed_dim = 6;
  const Dataset d = make_toy_dataset(30, 3, 4);
  auto b = build_model<float>(c, EncoderArch::SmallResNet, d.shape(), 2);
  const auto before = embed_dataset(*b.encoder, d, 16);
  ProbeConfig pc;
  pc.epochs = 2;
  linear_probe(*b.encoder, d, d, pc, 1);
  CHECK(embed_dataset(*b.encoder, d, 16) == before);
  CHECK(embed_dataset(*b.encoder, d, 7) == before);
}

TEST_CASE("distance csv and plot") {
  std::vector<DistanceReport> reps;
  for (int e = 0; e < 3; ++e) {
    DistanceReport r;
    r.epoch = e;
    r.tau = 0.5;
    r.tp_mean = 0.5 + 0.1 * e;
    r.fn_mean = 0.4 - 0.1 * e;
    reps.push_back(r);
  }
  const std::string csv = distance_csv(reps);
  CHECK(csv.rfind("epoch,tau,tp_mean,tp_std,fn_mean,fn_std\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK(csv == distance_csv(reps));

  const Image img = plot_distances(reps);
  const auto png = encode_png(img);
  const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  CHECK(std::equal(sig, sig + 8, png.begin()));
  CHECK(be32(png, 16) == static_cast<std::uint32_t>(img.width));
  CHECK(be32(png, 20) == static_cast<std::uint32_t>(img.height));
  CHECK(std::string(png.end() - 8, png.end() - 4) == "IEND");
  CHECK(png == encode_png(plot_distances(reps)));

  const auto dir = std::filesystem::temp_directory_path() / "spcl_report_test";
  std::filesystem::create_directories(dir);
  export_report(reps, dir / "d.csv", dir / "d.png");
  CHECK(std::filesystem::file_size(dir / "d.png") == png.size());
  std::ifstream in(dir / "d.csv");
  std::string back((std::istreambuf_iterator<char>(in)), {});
  CHECK(back == csv);
  CHECK_THROWS_AS(export_report({}, dir / "e.csv", dir / "e.png"), DataError);
  std::filesystem::remove_all(dir);
}
