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

#include "spcl/data/augment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "spcl/common/error.hpp"

namespace spcl {

namespace augment_ops {

void resized_crop(const ImageShape& shape, std::span<const float> src, std::span<float> dst, int top,
                  int left, int crop_h, int crop_w) {
  const int H = shape.height, W = shape.width;
  const double sy = static_cast<double>(crop_h) / H;
  const double sx = static_cast<double>(crop_w) / W;
  for (int c = 0; c < shape.channels; ++c) {
    const float* plane = src.data() + static_cast<std::size_t>(c) * H * W;
    float* out = dst.data() + static_cast<std::size_t>(c) * H * W;
    for (int y = 0; y < H; ++y) {
      // Half-pixel centres, as in align_corners=false bilinear resampling.
      const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, crop_h - 1.0);
      const int y0 = static_cast<int>(fy);
      const int y1 = std::min(y0 + 1, crop_h - 1);
      const float wy = static_cast<float>(fy - y0);
      for (int x = 0; x < W; ++x) {
        const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, crop_w - 1.0);
        const int x0 = static_cast<int>(fx);
        const int x1 = std::min(x0 + 1, crop_w - 1);
        const float wx = static_cast<float>(fx - x0);
        auto at = [&](int yy, int xx) { return plane[(top + yy) * W + (left + xx)]; };
        const float v0 = at(y0, x0) + (at(y0, x1) - at(y0, x0)) * wx;
        const float v1 = at(y1, x0) + (at(y1, x1) - at(y1, x0)) * wx;
        out[y * W + x] = v0 + (v1 - v0) * wy;
      }
    }
  }
}

void horizontal_flip(const ImageShape& shape, std::span<float> img) {
  for (int c = 0; c < shape.channels; ++c) {
    for (int y = 0; y < shape.height; ++y) {
      float* row = img.data() + (static_cast<std::size_t>(c) * shape.height + y) * shape.width;
      std::reverse(row, row + shape.width);
    }
  }
}

void adjust_brightness(std::span<float> img, double factor) {
  for (float& v : img) v = std::clamp(static_cast<float>(v * factor), 0.0f, 1.0f);
}

namespace {

std::size_t plane_size(const ImageShape& s) { return static_cast<std::size_t>(s.height) * s.width; }

void require_rgb(const ImageShape& shape) {
  if (shape.channels != 3) throw DataError("color transforms need 3-channel images");
}

float gray_at(std::span<const float> img, std::size_t n, std::size_t i) {
  return 0.299f * img[i] + 0.587f * img[n + i] + 0.114f * img[2 * n + i];
}

}  // namespace

void adjust_contrast(const ImageShape& shape, std::span<float> img, double factor) {
  std::size_t n = plane_size(shape);
  double mean = 0.0;
  if (shape.channels == 3) {
    for (std::size_t i = 0; i < n; ++i) mean += gray_at(img, n, i);
    mean /= static_cast<double>(n);
  } else {
    for (float v : img) mean += v;
    mean /= static_cast<double>(img.size());
  }
  const float f = static_cast<float>(factor);
  const float m = static_cast<float>(mean);
  for (float& v : img) v = std::clamp(f * v + (1.0f - f) * m, 0.0f, 1.0f);
}

void adjust_saturation(const ImageShape& shape, std::span<float> img, double factor) {
  require_rgb(shape);
  const std::size_t n = plane_size(shape);
  const float f = static_cast<float>(factor);
  for (std::size_t i = 0; i < n; ++i) {
    const float g = gray_at(img, n, i);
    for (int c = 0; c < 3; ++c) {
      float& v = img[c * n + i];
      v = std::clamp(f * v + (1.0f - f) * g, 0.0f, 1.0f);
    }
  }
}

void adjust_hue(const ImageShape& shape, std::span<float> img, double shift) {
  require_rgb(shape);
  const std::size_t n = plane_size(shape);
  for (std::size_t i = 0; i < n; ++i) {
    const float r = img[i], g = img[n + i], b = img[2 * n + i];
    const float maxc = std::max({r, g, b});
    const float minc = std::min({r, g, b});
    const float v = maxc;
    const float delta = maxc - minc;
    if (delta <= 0.0f) continue;  // achromatic: hue rotation is a no-op
    const float s = delta / maxc;
    float h;
    if (maxc == r) {
      h = (g - b) / delta;
    } else if (maxc == g) {
      h = 2.0f + (b - r) / delta;
    } else {
      h = 4.0f + (r - g) / delta;
    }
    h /= 6.0f;
    h += static_cast<float>(shift);
    h -= std::floor(h);
    const float h6 = h * 6.0f;
    const int sector = std::min(static_cast<int>(h6), 5);
    const float frac = h6 - sector;
    const float p = v * (1.0f - s);
    const float q = v * (1.0f - s * frac);
    const float t = v * (1.0f - s * (1.0f - frac));
    float rr, gg, bb;
    switch (sector) {
      case 0: rr = v, gg = t, bb = p; break;
      case 1: rr = q, gg = v, bb = p; break;
      case 2: rr = p, gg = v, bb = t; break;
      case 3: rr = p, gg = q, bb = v; break;
      case 4: rr = t, gg = p, bb = v; break;
      default: rr = v, gg = p, bb = q; break;
    }
    img[i] = rr;
    img[n + i] = gg;
    img[2 * n + i] = bb;
  }
}

void to_grayscale(const ImageShape& shape, std::span<float> img) {
  require_rgb(shape);
  const std::size_t n = plane_size(shape);
  for (std::size_t i = 0; i < n; ++i) {
    const float g = gray_at(img, n, i);
    img[i] = img[n + i] = img[2 * n + i] = g;
  }
}

void gaussian_blur(const ImageShape& shape, std::span<float> img, double sigma) {
  const int radius = std::clamp(static_cast<int>(std::ceil(2.0 * sigma)), 1, 4);
  std::vector<float> kernel(2 * radius + 1);
  float total = 0.0f;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = static_cast<float>(std::exp(-0.5 * i * i / (sigma * sigma)));
    total += kernel[i + radius];
  }
  for (float& k : kernel) k /= total;

  const int H = shape.height, W = shape.width;
  auto reflect = [](int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) i = i < 0 ? -i : 2 * (n - 1) - i;
    return i;
  };
  std::vector<float> tmp(plane_size(shape));
  for (int c = 0; c < shape.channels; ++c) {
    float* plane = img.data() + static_cast<std::size_t>(c) * H * W;
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        float acc = 0.0f;
        for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * plane[y * W + reflect(x + k, W)];
        tmp[y * W + x] = acc;
      }
    }
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        float acc = 0.0f;
        for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * tmp[reflect(y + k, H) * W + x];
        plane[y * W + x] = acc;
      }
    }
  }
}

}  // namespace augment_ops

namespace {

void random_resized_crop(const AugmentStep& step, const ImageShape& shape, std::span<const float> src,
                         std::span<float> dst, RandomStream& rng) {
  const int H = shape.height, W = shape.width;
  const double area = static_cast<double>(H) * W;
  const double log_r0 = std::log(step.params[2]);
  const double log_r1 = std::log(step.params[3]);
  for (int attempt = 0; attempt < 10; ++attempt) {
    const double target = area * rng.uniform(step.params[0], step.params[1]);
    const double aspect = std::exp(rng.uniform(log_r0, log_r1));
    const int w = static_cast<int>(std::lround(std::sqrt(target * aspect)));
    const int h = static_cast<int>(std::lround(std::sqrt(target / aspect)));
    if (w > 0 && h > 0 && w <= W && h <= H) {
      const int top = static_cast<int>(rng.below(static_cast<std::uint64_t>(H - h + 1)));
      const int left = static_cast<int>(rng.below(static_cast<std::uint64_t>(W - w + 1)));
      augment_ops::resized_crop(shape, src, dst, top, left, h, w);
      return;
    }
  }
  // Fallback: central crop at the nearest admissible aspect ratio.
  const double in_ratio = static_cast<double>(W) / H;
  int w = W, h = H;
  if (in_ratio < step.params[2]) {
    h = static_cast<int>(std::lround(w / step.params[2]));
  } else if (in_ratio > step.params[3]) {
    w = static_cast<int>(std::lround(h * step.params[3]));
  }
  augment_ops::resized_crop(shape, src, dst, (H - h) / 2, (W - w) / 2, h, w);
}

void color_jitter(const AugmentStep& step, const ImageShape& shape, std::span<float> img,
                  RandomStream& rng) {
  auto factor = [&rng](double amount) {
    return rng.uniform(std::max(0.0, 1.0 - amount), 1.0 + amount);
  };
  std::array<int, 4> order{0, 1, 2, 3};
  rng.shuffle(std::span<int>(order));
  for (int op : order) {
    const double amount = step.params[op];
    if (amount <= 0.0) continue;
    switch (op) {
      case 0: augment_ops::adjust_brightness(img, factor(amount)); break;
      case 1: augment_ops::adjust_contrast(shape, img, factor(amount)); break;
      case 2: augment_ops::adjust_saturation(shape, img, factor(amount)); break;
      default: augment_ops::adjust_hue(shape, img, rng.uniform(-amount, amount)); break;
    }
  }
}

}  // namespace

void augment_image(const AugmentationSpec& spec, const ImageShape& shape, std::span<const float> src,
                   std::span<float> dst, RandomStream& rng) {
  using K = AugmentStep::Kind;
  if (src.size() != shape.numel() || dst.size() != shape.numel()) {
    throw ShapeError("augment_image: buffer size does not match image shape");
  }
  for (float v : src) {
    if (!std::isfinite(v)) throw DataError("non-finite pixel in input image");
  }
  std::copy(src.begin(), src.end(), dst.begin());
  std::vector<float> scratch;
  for (const auto& step : spec.steps) {
    // Every step consumes its Bernoulli draw so the stream layout does not
    // depend on earlier outcomes.
    const bool apply = rng.uniform() < step.probability;
    if (!apply) continue;
    switch (step.kind) {
      case K::CropResize:
        scratch.assign(dst.begin(), dst.end());
        random_resized_crop(step, shape, scratch, dst, rng);
        break;
      case K::HorizontalFlip: augment_ops::horizontal_flip(shape, dst); break;
      case K::ColorJitter: color_jitter(step, shape, dst, rng); break;
      case K::Grayscale: augment_ops::to_grayscale(shape, dst); break;
      case K::GaussianBlur:
        augment_ops::gaussian_blur(shape, dst, rng.uniform(step.params[0], step.params[1]));
        break;
    }
  }
}

}  // namespace spcl
