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

#include <span>

#include "spcl/core/config.hpp"
#include "spcl/core/rng.hpp"
#include "spcl/data/dataset.hpp"

namespace spcl {

/// Draws one transform t ~ T from `spec` and writes t(src) into `dst`
/// (same shape). Identity specs copy the input unchanged. Color transforms
/// require three channels and throw DataError otherwise; non-finite input
/// pixels throw DataError.
void augment_image(const AugmentationSpec& spec, const ImageShape& shape, std::span<const float> src,
                   std::span<float> dst, RandomStream& rng);

namespace augment_ops {

// Exposed for tests. All operate on CHW float planes in [0, 1].
void resized_crop(const ImageShape& shape, std::span<const float> src, std::span<float> dst, int top,
                  int left, int crop_h, int crop_w);
void horizontal_flip(const ImageShape& shape, std::span<float> img);
void adjust_brightness(std::span<float> img, double factor);
void adjust_contrast(const ImageShape& shape, std::span<float> img, double factor);
void adjust_saturation(const ImageShape& shape, std::span<float> img, double factor);
void adjust_hue(const ImageShape& shape, std::span<float> img, double shift);
void to_grayscale(const ImageShape& shape, std::span<float> img);
void gaussian_blur(const ImageShape& shape, std::span<float> img, double sigma);

}  // namespace augment_ops

}  // namespace spcl
