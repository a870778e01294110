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

#include <filesystem>
#include <fstream>

#include "spcl/common/digest.hpp"
#include "spcl/common/error.hpp"
#include "spcl/core/config.hpp"
#include "spcl/core/rng.hpp"

using namespace spcl;

TEST_CASE("derive_rng determinism and independence") {
  RandomStream a = derive_rng(7, "kmeans"), b = derive_rng(7, "kmeans");
  RandomStream c = derive_rng(7, "sampler"), d = derive_rng(8, "kmeans");
  bool differs_c = false, differs_d = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs_c |= x != c.next_u64();
    differs_d |= x != d.next_u64();
  }
  CHECK(differs_c);
  CHECK(differs_d);
}

TEST_CASE("random stream draws") {
  RandomStream r(3);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(r.below(7) < 7);
  }
  std::vector<int> v{1, 2, 3, 4, 5};
  r.shuffle(std::span<int>(v));
  std::sort(v.begin(), v.end());
  CHECK(v == std::vector<int>{1, 2, 3, 4, 5});
  double s = 0, s2 = 0;
  for (int i = 0; i < 20000; ++i) {
    const double x = r.normal();
    s += x;
    s2 += x * x;
  }
  CHECK(std::abs(s / 20000) < 0.05);
  CHECK(std::abs(s2 / 20000 - 1) < 0.05);
}

TEST_CASE("config defaults") {
  const TrainConfig c = parse_config("dataset_path = data.bin\n");
  CHECK(c.loss_weights == LossWeights{1.0, 1.0, 1.0});
  CHECK(c.temperature == 0.5);
  CHECK(c.exclude_positive_in_denominator);
  CHECK(c.reinit_scope == ReinitScope{});
  CHECK(c.proto_sampling_mode == ProtoSamplingMode::SingleQ);
  CHECK(c.optimizer.base_lr == 1.0);
  CHECK(c.optimizer.weight_decay == 1e-6);
  CHECK(c.optimizer.warmup_epochs == 10);
}

TEST_CASE("config errors name the key") {
  try {
    parse_config("temperature = 0\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "temperature");
  }
  try {
    parse_config("batch_size = 511\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "batch_size");
    CHECK(std::string(e.what()).find("batch_size must be even") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("no_such_key = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("epochs = 3\nepochs = 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("loss_weights = 0,0,0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("num_prototypes = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("epochs = 5\noptimizer.warmup_epochs = 5\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/path.cfg"), ConfigError);
}

TEST_CASE("config round trip") {
  const TrainConfig c = parse_config(
      "dataset_path = x.bin\nnum_prototypes = 32\nbatch_size = 128\ntemperature = 0.1\n"
      "loss_weights = 0.1,1,1\nreinit_scope = g_p\nproto_sampling_mode = mixed_q\n"
      "augmentation = crop(0.2,1,0.75,1.3333333);flip(0.5)\noptimizer.fallback = sgd_momentum\n"
      "symmetric_ce = true\nseed = 42\n");
  const std::string text = serialize_config(c);
  const TrainConfig back = parse_config(text);
  CHECK(back == c);
  CHECK(serialize_config(back) == text);
  CHECK(config_hash(back) == config_hash(c));
  TrainConfig d = c;
  d.seed = 43;
  CHECK(config_hash(d) != config_hash(c));
}

TEST_CASE("config file and overrides") {
  const auto path = std::filesystem::temp_directory_path() / "spcl_test_config.cfg";
  {
    std::ofstream f(path);
    f << "# comment\ndataset_path = d.bin   # trailing\nepochs = 12\n";
  }
  TrainConfig c = load_config(path);
  CHECK(c.epochs == 12);
  apply_override(c, "loss_weights", "1,0,0");
  CHECK(c.loss_weights == LossWeights{1, 0, 0});
  apply_override(c, "exclude_positive_in_denominator", "false");
  CHECK_FALSE(c.exclude_positive_in_denominator);
  CHECK_THROWS_AS(apply_override(c, "bogus", "1"), ConfigError);
  std::filesystem::remove(path);
}

TEST_CASE("augmentation spec text") {
  const auto s = AugmentationSpec::simclr();
  CHECK(AugmentationSpec::parse(s.to_string()) == s);
  CHECK(AugmentationSpec::parse("simclr") == s);
  CHECK(AugmentationSpec::parse("identity").is_identity());
  CHECK_THROWS(AugmentationSpec::parse("crop(2,1)"));
  CHECK_THROWS(AugmentationSpec::parse("sharpen(0.5)"));
}

TEST_CASE("sha256 known answer") {
  CHECK(to_hex(sha256(std::string_view("abc"))) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
