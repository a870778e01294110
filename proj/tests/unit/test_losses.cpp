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

#include "oracles.hpp"
#include "spcl/losses/losses.hpp"

using namespace spcl;
using spcl::losses::PairingPlan;

namespace {

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

std::vector<double> flat(const Matrix<double>& m) { return {m.data(), m.data() + m.size()}; }

PairingPlan plan_for(std::size_t views, RandomStream& rng) {
  std::vector<int> slot(views);
  std::vector<std::uint8_t> anchor(views);
  for (std::size_t i = 0; i < views; ++i) {
    slot[i] = static_cast<int>(i / 2);
    anchor[i] = i < views / 2 ? 1 : 0;
  }
  const auto sib = pair_siblings(views);
  return losses::make_pairing_plan(slot, anchor, sib, rng);
}

}  // namespace

TEST_CASE("cosine similarity basics") {
  const std::vector<double> a{1, 0}, b{0, 1}, c{-1, 0};
  CHECK(losses::cosine_similarity<double>(a, a) == doctest::Approx(1.0));
  CHECK(losses::cosine_similarity<double>(a, b) == doctest::Approx(0.0));
  CHECK(losses::cosine_similarity<double>(a, c) == doctest::Approx(-1.0));
  const std::vector<double> zero{0, 0};
  CHECK_THROWS_AS(losses::cosine_similarity<double>(a, zero), NumericError);
}

TEST_CASE("nt_xent closed forms") {
  Matrix<double> z(4, 2);
  z(0, 0) = z(1, 0) = 1;
  z(2, 1) = z(3, 1) = 1;
  const auto sib = pair_siblings(4);
  CHECK(losses::nt_xent(z, sib, 1.0, true) == doctest::Approx(4 * (std::log(2.0) - 1)).epsilon(1e-12));
  const double excl_false = -4 * std::log(std::exp(1.0) / (std::exp(1.0) + 2));
  CHECK(losses::nt_xent(z, sib, 1.0, false) == doctest::Approx(excl_false).epsilon(1e-12));
  CHECK(excl_false == doctest::Approx(2.2057).epsilon(1e-4));
}

TEST_CASE("nt_xent matches the double loop reference") {
  RandomStream rng(11);
  for (int t = 0; t < 20; ++t) {
    const Matrix<double> z = random_matrix(8, 5, rng);
    const auto sib = pair_siblings(8);
    for (bool excl : {true, false}) {
      CHECK(std::fabs(losses::nt_xent(z, sib, 0.5, excl) - oracle::nt_xent(oracle::rows_of(z), sib, 0.5, excl)) <= 1e-9);
    }
  }
}

TEST_CASE("nt_xent rejects bad inputs") {
  Matrix<double> z(4, 3, 1.0);
  auto sib = pair_siblings(4);
  CHECK_THROWS_AS(losses::nt_xent(z, sib, 0.0, true), NumericError);
  CHECK_THROWS_AS(losses::nt_xent(z, sib, -1.0, true), NumericError);
  sib[3] = 3;
  CHECK_THROWS_AS(losses::nt_xent(z, sib, 0.5, true), ShapeError);
  Matrix<double> two(2, 3, 1.0);
  CHECK_THROWS_AS(losses::nt_xent(two, pair_siblings(2), 0.5, true), ShapeError);
}

TEST_CASE("nt_xent gradient") {
  RandomStream rng(5);
  for (bool excl : {true, false}) {
    Matrix<double> z = random_matrix(8, 4, rng);
    const auto sib = pair_siblings(8);
    Matrix<double> g;
    losses::nt_xent(z, sib, 0.3, excl, &g);
    const auto num = oracle::numeric_gradient(z.flat(), [&] { return losses::nt_xent(z, sib, 0.3, excl); });
    CHECK(oracle::relative_error(flat(g), num) <= 1e-6);
  }
}

TEST_CASE("nt_xent gradient accumulates and scales") {
  RandomStream rng(6);
  const Matrix<double> z = random_matrix(6, 3, rng);
  const auto sib = pair_siblings(6);
  Matrix<double> g1, g2(6, 3, 1.0);
  losses::nt_xent(z, sib, 0.5, true, &g1);
  losses::nt_xent(z, sib, 0.5, true, &g2, 0.25);
  for (std::size_t i = 0; i < g1.size(); ++i) CHECK(g2.data()[i] == doctest::Approx(1.0 + 0.25 * g1.data()[i]));
}

TEST_CASE("pairing plan structure") {
  RandomStream rng(3);
  const PairingPlan plan = plan_for(12, rng);
  REQUIRE(plan.size() == 6);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    CHECK(plan.anchor[i] < 6);
    CHECK(plan.positive[i] < 6);
    CHECK(plan.positive[i] / 2 != plan.anchor[i] / 2);
    CHECK(plan.negative[i] >= 6);
  }
  // one anchor sample: partner falls back to the sibling
  RandomStream r2(4);
  std::vector<int> slot{0, 0, 1, 1};
  std::vector<std::uint8_t> anchor{1, 1, 0, 0};
  const auto one = losses::make_pairing_plan(slot, anchor, pair_siblings(4), r2);
  CHECK(one.positive == std::vector<int>{1, 0});
}

TEST_CASE("siamese metric loss limits") {
  nn::Mlp<double> gm({3, 3, 1});
  RandomStream rng(1);
  gm.reset_parameters(rng);
  for (auto& l : gm.layers()) l.bias().value.assign(l.bias().size(), 0.0);
  Matrix<double> h(4, 3);
  for (auto& v : h.flat()) v = rng.normal();
  PairingPlan plan{{0}, {0}, {2}};
  // positive partner identical: zero input, logit = output bias = 0
  const double with_pos_only = losses::siamese_metric_loss(h, plan, gm) - oracle::bce_with_logit(
      oracle::mlp_forward(gm, {std::fabs(h(0, 0) - h(2, 0)), std::fabs(h(0, 1) - h(2, 1)), std::fabs(h(0, 2) - h(2, 2))})[0], 0);
  CHECK(with_pos_only == doctest::Approx(std::log(2.0)));

  // saturated head emitting +100
  for (auto& v : gm.layers().back().weight().value) v = 0;
  gm.layers().back().bias().value[0] = 100;
  PairingPlan p2{{0}, {1}, {2}};
  const double l = losses::siamese_metric_loss(h, p2, gm);
  CHECK(l == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("siamese metric loss matches loop reference and gradients") {
  RandomStream rng(9);
  nn::Mlp<double> gm({6, 6, 1});
  gm.reset_parameters(rng);
  Matrix<double> h = random_matrix(8, 6, rng);
  const PairingPlan plan = plan_for(8, rng);
  CHECK(std::fabs(losses::siamese_metric_loss(h, plan, gm) -
                  oracle::metric_loss(oracle::rows_of(h), plan.anchor, plan.positive, plan.negative, gm)) <= 1e-9);

  Matrix<double> gh;
  for (auto& l : gm.layers()) {
    l.weight().zero_grad();
    l.bias().zero_grad();
  }
  losses::siamese_metric_loss(h, plan, gm, &gh);
  auto f = [&] { return losses::siamese_metric_loss(h, plan, gm); };
  CHECK(oracle::relative_error(flat(gh), oracle::numeric_gradient(h.flat(), f)) <= 1e-6);
  for (auto& l : gm.layers()) {
    CHECK(oracle::relative_error(l.weight().grad, oracle::numeric_gradient(l.weight().value, f)) <= 1e-6);
    CHECK(oracle::relative_error(l.bias().grad, oracle::numeric_gradient(l.bias().value, f)) <= 1e-6);
  }
}

TEST_CASE("siamese metric loss rejects malformed plan") {
  nn::Mlp<double> gm({2, 2, 1});
  Matrix<double> h(4, 2, 1.0);
  CHECK_THROWS_AS(losses::siamese_metric_loss(h, PairingPlan{{0}, {}, {2}}, gm), ShapeError);
  CHECK_THROWS_AS(losses::siamese_metric_loss(h, PairingPlan{{0}, {9}, {2}}, gm), ShapeError);
  CHECK_THROWS_AS(losses::siamese_metric_loss(h, PairingPlan{}, gm), ShapeError);
}

TEST_CASE("prototypical CE") {
  nn::Mlp<double> gp({4, 512});
  for (auto& v : gp.layers()[0].weight().value) v = 0;
  Matrix<double> h(3, 4, 0.5);
  std::vector<int> y{0, 7, 511};
  CHECK(losses::prototypical_ce(h, y, gp) / 3 == doctest::Approx(std::log(512.0)));

  std::vector<int> bad{0, 1, 512};
  CHECK_THROWS_AS(losses::prototypical_ce(h, bad, gp), ShapeError);

  // one-hot aligned, large logits
  Matrix<double> logits(2, 3, -50.0);
  logits(0, 1) = 50;
  logits(1, 2) = 50;
  CHECK(losses::softmax_ce_logits<double>(logits, std::vector<int>{1, 2}, nullptr) < 1e-40);
}

TEST_CASE("prototypical CE matches reference and gradients") {
  RandomStream rng(21);
  nn::Mlp<double> gp({5, 7});
  gp.reset_parameters(rng);
  Matrix<double> h = random_matrix(6, 5, rng);
  std::vector<int> y{0, 0, 3, 3, 6, 6};
  Matrix<double> logits = gp.forward(h);
  CHECK(std::fabs(losses::prototypical_ce(h, y, gp) - oracle::cross_entropy(oracle::rows_of(logits), y)) <= 1e-9);

  Matrix<double> gh;
  gp.layers()[0].weight().zero_grad();
  gp.layers()[0].bias().zero_grad();
  losses::prototypical_ce(h, y, gp, &gh);
  auto f = [&] { return losses::prototypical_ce(h, y, gp); };
  CHECK(oracle::relative_error(flat(gh), oracle::numeric_gradient(h.flat(), f)) <= 1e-6);
  auto& L = gp.layers()[0];
  CHECK(oracle::relative_error(L.weight().grad, oracle::numeric_gradient(L.weight().value, f)) <= 1e-6);
  CHECK(oracle::relative_error(L.bias().grad, oracle::numeric_gradient(L.bias().value, f)) <= 1e-6);
}

TEST_CASE("symmetric CE") {
  Matrix<double> even(1, 2, 0.0);
  CHECK(losses::symmetric_ce_logits<double>(even, std::vector<int>{0}, 1, 1, -4, nullptr) ==
        doctest::Approx(std::log(2.0) + 2.0));
  Matrix<double> sure(1, 3, -800.0);
  sure(0, 2) = 800;
  CHECK(losses::symmetric_ce_logits<double>(sure, std::vector<int>{2}, 1, 1, -4, nullptr) == doctest::Approx(0.0));
  CHECK_THROWS_AS(losses::symmetric_ce_logits<double>(even, std::vector<int>{0}, 1, 1, 0.0, nullptr), NumericError);

  RandomStream rng(8);
  nn::Mlp<double> gp({4, 5});
  gp.reset_parameters(rng);
  Matrix<double> h = random_matrix(6, 4, rng);
  std::vector<int> y{1, 1, 4, 4, 0, 0};
  CHECK(losses::symmetric_prototypical_ce(h, y, gp, 0.7, 0.0, -4) ==
        doctest::Approx(0.7 * losses::prototypical_ce(h, y, gp)).epsilon(1e-14));
  const Matrix<double> logits = gp.forward(h);
  CHECK(std::fabs(losses::symmetric_prototypical_ce(h, y, gp, 0.5, 1.5, -3) -
                  oracle::symmetric_ce(oracle::rows_of(logits), y, 0.5, 1.5, -3)) <= 1e-9);

  Matrix<double> gh;
  gp.layers()[0].weight().zero_grad();
  gp.layers()[0].bias().zero_grad();
  losses::symmetric_prototypical_ce(h, y, gp, 0.5, 1.5, -3, &gh);
  auto f = [&] { return losses::symmetric_prototypical_ce(h, y, gp, 0.5, 1.5, -3); };
  CHECK(oracle::relative_error(flat(gh), oracle::numeric_gradient(h.flat(), f)) <= 1e-6);
  CHECK(oracle::relative_error(gp.layers()[0].weight().grad, oracle::numeric_gradient(gp.layers()[0].weight().value, f)) <= 1e-6);
}

TEST_CASE("total loss") {
  CHECK(losses::total_loss(2, 3, 4, {1, 1, 1}) == 9.0);
  CHECK(losses::total_loss(2, 3, 4, {1, 0, 0}) == 2.0);
  CHECK(losses::total_loss(2, 3, 4, {0.1, 1, 1}) == doctest::Approx(7.2));
  CHECK_THROWS_AS(losses::total_loss(NAN, 0, 0, {1, 1, 1}), NumericError);
  CHECK_THROWS_AS(losses::total_loss(0, INFINITY, 0, {1, 1, 1}), NumericError);
}

TEST_CASE("float and double paths agree") {
  RandomStream rng(2);
  const Matrix<double> zd = random_matrix(16, 8, rng);
  const Matrix<float> zf = zd.cast<float>();
  const auto sib = pair_siblings(16);
  CHECK(losses::nt_xent(zf, sib, 0.5, true) == doctest::Approx(losses::nt_xent(zd, sib, 0.5, true)).epsilon(1e-5));
}
