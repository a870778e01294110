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

#include "spcl/data/toy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "spcl/common/error.hpp"
#include "spcl/core/rng.hpp"

namespace spcl {

namespace {

struct Rgb {
  float r, g, b;
};

Rgb random_color(RandomStream& rng) {
  return {static_cast<float>(rng.uniform()), static_cast<float>(rng.uniform()),
          static_cast<float>(rng.uniform())};
}

float luminance(const Rgb& c) { return 0.299f * c.r + 0.587f * c.g + 0.114f * c.b; }

// Signed "insideness" of pixel (x, y) for each shape family, in a frame
// centred on the shape with radius r and rotation theta.
bool inside(int cls, double x, double y, double r, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  const double u = c * x + s * y;
  const double v = -s * x + c * y;
  switch (cls) {
    case 0:  // disk
      return u * u + v * v <= r * r;
    case 1:  // square
      return std::abs(u) <= 0.8 * r && std::abs(v) <= 0.8 * r;
    case 2: {  // triangle pointing along +v
      const double h = 1.5 * r;
      const double vt = v + 0.5 * r;
      if (vt < 0 || vt > h) return false;
      return std::abs(u) <= (h - vt) * 0.6;
    }
    case 3: {  // ring
      const double d2 = u * u + v * v;
      return d2 <= r * r && d2 >= 0.45 * r * r;
    }
    case 4:  // cross
      return (std::abs(u) <= 0.28 * r && std::abs(v) <= r) || (std::abs(v) <= 0.28 * r && std::abs(u) <= r);
    case 5:  // horizontal bar pair
      return std::abs(u) <= r && (std::abs(v - 0.5 * r) <= 0.2 * r || std::abs(v + 0.5 * r) <= 0.2 * r);
    case 6: {  // diamond outline
      const double d = std::abs(u) + std::abs(v);
      return d <= r && d >= 0.6 * r;
    }
    default: {  // half disk
      return u * u + v * v <= r * r && v >= 0;
    }
  }
}

void draw_sample(int cls, RandomStream& rng, std::span<float> img) {
  constexpr int H = 32, W = 32;
  const Rgb bg0 = random_color(rng);
  Rgb bg1 = random_color(rng);
  Rgb fg = random_color(rng);
  for (int tries = 0; tries < 16 && std::abs(luminance(fg) - luminance(bg0)) < 0.25f; ++tries) fg = random_color(rng);
  const double grad_angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double gx = std::cos(grad_angle), gy = std::sin(grad_angle);
  const double r = rng.uniform(6.5, 11.5);
  const double cx = 15.5 + rng.uniform(-5.0, 5.0);
  const double cy = 15.5 + rng.uniform(-5.0, 5.0);
  const double theta = (cls == 0 || cls == 3) ? 0.0 : rng.uniform(-0.35, 0.35);
  const double noise = 0.04;

  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const double t = 0.5 + 0.5 * ((x - 15.5) * gx + (y - 15.5) * gy) / 22.0;
      const float tf = static_cast<float>(std::clamp(t, 0.0, 1.0));
      Rgb px{bg0.r + (bg1.r - bg0.r) * 0.5f * tf, bg0.g + (bg1.g - bg0.g) * 0.5f * tf,
             bg0.b + (bg1.b - bg0.b) * 0.5f * tf};
      // 2x2 supersampling for soft edges.
      int hits = 0;
      for (int sy = 0; sy < 2; ++sy) {
        for (int sx = 0; sx < 2; ++sx) {
          if (inside(cls, x + 0.25 + 0.5 * sx - cx, y + 0.25 + 0.5 * sy - cy, r, theta)) ++hits;
        }
      }
      const float a = hits / 4.0f;
      px = {px.r + (fg.r - px.r) * a, px.g + (fg.g - px.g) * a, px.b + (fg.b - px.b) * a};
      const std::size_t o = static_cast<std::size_t>(y) * W + x;
      img[o] = std::clamp(px.r + static_cast<float>(noise * rng.normal()), 0.0f, 1.0f);
      img[H * W + o] = std::clamp(px.g + static_cast<float>(noise * rng.normal()), 0.0f, 1.0f);
      img[2 * H * W + o] = std::clamp(px.b + static_cast<float>(noise * rng.normal()), 0.0f, 1.0f);
    }
  }
}

}  // namespace

Dataset make_toy_dataset(std::size_t n_samples, int n_classes, std::uint64_t seed) {
  if (n_classes < 2 || n_classes > kToyMaxClasses) {
    throw DataError("toy dataset supports 2.." + std::to_string(kToyMaxClasses) + " classes");
  }
  const ImageShape shape{3, 32, 32};
  std::vector<int> labels(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) labels[i] = static_cast<int>(i % n_classes);
  RandomStream order = derive_rng(seed, "toy/order");
  order.shuffle(std::span<int>(labels));

  std::vector<float> pixels(n_samples * shape.numel());
  for (std::size_t i = 0; i < n_samples; ++i) {
    RandomStream rng = derive_rng(seed, "toy/sample/" + std::to_string(i));
    draw_sample(labels[i], rng, std::span<float>(pixels.data() + i * shape.numel(), shape.numel()));
  }
  return Dataset(shape, std::move(pixels), std::move(labels));
}

}  // namespace spcl
