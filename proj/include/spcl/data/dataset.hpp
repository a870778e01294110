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

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace spcl {

struct ImageShape {
  int channels = 3;
  int height = 32;
  int width = 32;

  std::size_t numel() const noexcept {
    return static_cast<std::size_t>(channels) * height * width;
  }
  friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

/// A contiguous run of CHW float images with values in [0, 1].
struct ImageBatch {
  ImageShape shape;
  std::size_t count = 0;
  std::vector<float> pixels;

  ImageBatch() = default;
  ImageBatch(ImageShape s, std::size_t n) : shape(s), count(n), pixels(n * s.numel(), 0.0f) {}

  std::span<float> image(std::size_t i) { return {pixels.data() + i * shape.numel(), shape.numel()}; }
  std::span<const float> image(std::size_t i) const {
    return {pixels.data() + i * shape.numel(), shape.numel()};
  }
};

/// Labeled image collection. Labels are ground truth and are only read by
/// evaluation code; pretraining never looks at them.
class Dataset {
 public:
  Dataset() = default;
  Dataset(ImageShape shape, std::vector<float> pixels, std::vector<int> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  const ImageShape& shape() const noexcept { return shape_; }
  std::span<const float> image(std::size_t i) const {
    return {pixels_.data() + i * shape_.numel(), shape_.numel()};
  }
  int label(std::size_t i) const { return labels_.at(i); }
  const std::vector<int>& labels() const noexcept { return labels_; }
  int num_classes() const noexcept;

  /// Copies the listed samples, in order, into a batch.
  ImageBatch gather(std::span<const std::size_t> indices) const;

  /// Samples [begin, end) as a new dataset.
  Dataset slice(std::size_t begin, std::size_t end) const;

 private:
  ImageShape shape_;
  std::vector<float> pixels_;
  std::vector<int> labels_;
};

/// Reads either the CIFAR-10 binary record layout (1 label byte followed by
/// 3x32x32 channel-planar bytes, repeated) or the headered variant written by
/// save_dataset ("SPCLDATA", then u32 channels, height, width, count, then the
/// same per-record layout). Throws DataError on truncation or bad headers.
Dataset load_dataset(const std::filesystem::path& path);

/// Writes the CIFAR-10 layout for 3x32x32 data with labels < 256, else the
/// headered variant. Pixels are quantized to bytes.
void save_dataset(const Dataset& data, const std::filesystem::path& path);

}  // namespace spcl
