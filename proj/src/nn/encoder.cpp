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

#include "spcl/nn/encoder.hpp"

#include <cmath>
#include <optional>
#include <string>

namespace spcl::nn {

ResNetLayout ResNetLayout::small() {
  ResNetLayout l;
  l.stem_channels = 16;
  l.stem_stride = 2;
  l.blocks = {{32, 0, 2}, {64, 0, 2}};
  return l;
}

ResNetLayout ResNetLayout::resnet50() {
  ResNetLayout l;
  l.stem_channels = 64;
  l.stem_stride = 1;
  const int counts[4] = {3, 4, 6, 3};
  const int widths[4] = {64, 128, 256, 512};
  for (int s = 0; s < 4; ++s) {
    for (int b = 0; b < counts[s]; ++b) {
      const int stride = (b == 0 && s > 0) ? 2 : 1;
      l.blocks.push_back({widths[s] * 4, widths[s], stride});
    }
  }
  return l;
}

namespace {

template <class T>
bool check_finite(const Matrix<T>& h) {
  return h.all_finite();
}

template <class T>
class IdentityEncoder final : public Encoder<T> {
 public:
  explicit IdentityEncoder(const ImageShape& input) : dim_(input.numel()) {}
  EncoderArch arch() const noexcept override { return EncoderArch::Identity; }
  std::size_t output_dim() const noexcept override { return dim_; }
  Matrix<T> forward(const ImageBatch& views, bool) override {
    if (views.shape.numel() != dim_) throw ShapeError("identity encoder: input size mismatch");
    Matrix<T> h(views.count, dim_);
    for (std::size_t i = 0; i < views.pixels.size(); ++i) h.data()[i] = static_cast<T>(views.pixels[i]);
    return h;
  }
  void backward(const Matrix<T>&) override {}
  void reset_parameters(RandomStream&) override {}
  void collect(std::vector<ParamGroup<T>>&) override {}
  std::unique_ptr<Encoder<T>> clone() const override { return std::make_unique<IdentityEncoder>(*this); }

 private:
  std::size_t dim_;
};

template <class T>
class LinearEncoder final : public Encoder<T> {
 public:
  LinearEncoder(const ImageShape& input, std::size_t embed_dim) : layer_(input.numel(), embed_dim, false) {}
  EncoderArch arch() const noexcept override { return EncoderArch::Linear; }
  std::size_t output_dim() const noexcept override { return layer_.out_features(); }
  Matrix<T> forward(const ImageBatch& views, bool) override {
    if (views.shape.numel() != layer_.in_features()) throw ShapeError("linear encoder: input size mismatch");
    Matrix<T> x(views.count, layer_.in_features());
    for (std::size_t i = 0; i < views.pixels.size(); ++i) x.data()[i] = static_cast<T>(views.pixels[i]);
    return layer_.forward(x);
  }
  void backward(const Matrix<T>& grad_h) override { layer_.backward(grad_h); }
  void reset_parameters(RandomStream& rng) override { layer_.reset_parameters(rng); }
  void collect(std::vector<ParamGroup<T>>& out) override { layer_.collect(out, "encoder.linear"); }
  std::unique_ptr<Encoder<T>> clone() const override { return std::make_unique<LinearEncoder>(*this); }
  Linear<T>& layer() noexcept { return layer_; }

 private:
  Linear<T> layer_;
};

// conv -> bn [-> relu] stages along the main path, plus an optional
// projection shortcut; the block output is relu(main + shortcut).
template <class T>
class ResidualBlock {
 public:
  ResidualBlock(int in, const ResNetLayout::Block& spec) {
    if (spec.mid_channels == 0) {
      convs_.emplace_back(in, spec.out_channels, 3, spec.stride, 1);
      convs_.emplace_back(spec.out_channels, spec.out_channels, 3, 1, 1);
      bns_.emplace_back(spec.out_channels);
      bns_.emplace_back(spec.out_channels);
    } else {
      convs_.emplace_back(in, spec.mid_channels, 1, 1, 0);
      convs_.emplace_back(spec.mid_channels, spec.mid_channels, 3, spec.stride, 1);
      convs_.emplace_back(spec.mid_channels, spec.out_channels, 1, 1, 0);
      bns_.emplace_back(spec.mid_channels);
      bns_.emplace_back(spec.mid_channels);
      bns_.emplace_back(spec.out_channels);
    }
    if (spec.stride != 1 || in != spec.out_channels) {
      shortcut_conv_.emplace(in, spec.out_channels, 1, spec.stride, 0);
      shortcut_bn_.emplace(spec.out_channels);
    }
  }

  void reset_parameters(RandomStream& rng) {
    for (auto& c : convs_) c.reset_parameters(rng);
    for (auto& b : bns_) b.reset_parameters();
    if (shortcut_conv_) {
      shortcut_conv_->reset_parameters(rng);
      shortcut_bn_->reset_parameters();
    }
  }

  FeatureMap<T> forward(const FeatureMap<T>& x, bool training) {
    if (training) relu_outputs_.clear();
    FeatureMap<T> h = x;
    for (std::size_t i = 0; i < convs_.size(); ++i) {
      h = bns_[i].forward(convs_[i].forward(h, training), training);
      if (i + 1 < convs_.size()) {
        relu_inplace(h.data);
        if (training) relu_outputs_.push_back(h.data);
      }
    }
    if (shortcut_conv_) {
      const FeatureMap<T> s = shortcut_bn_->forward(shortcut_conv_->forward(x, training), training);
      for (std::size_t i = 0; i < h.size(); ++i) h.data[i] += s.data[i];
    } else {
      for (std::size_t i = 0; i < h.size(); ++i) h.data[i] += x.data[i];
    }
    relu_inplace(h.data);
    if (training) output_ = h.data;
    return h;
  }

  FeatureMap<T> backward(FeatureMap<T> grad) {
    relu_backward_inplace(grad.data, output_);
    FeatureMap<T> g = grad;
    for (std::size_t i = convs_.size(); i-- > 0;) {
      if (i + 1 < convs_.size()) relu_backward_inplace(g.data, relu_outputs_[i]);
      g = convs_[i].backward(bns_[i].backward(g));
    }
    if (shortcut_conv_) {
      const FeatureMap<T> gs = shortcut_conv_->backward(shortcut_bn_->backward(grad));
      for (std::size_t i = 0; i < g.size(); ++i) g.data[i] += gs.data[i];
    } else {
      for (std::size_t i = 0; i < g.size(); ++i) g.data[i] += grad.data[i];
    }
    return g;
  }

  void collect(std::vector<ParamGroup<T>>& out, const std::string& name) {
    for (std::size_t i = 0; i < convs_.size(); ++i) {
      convs_[i].collect(out, name + ".conv" + std::to_string(i));
      bns_[i].collect(out, name + ".bn" + std::to_string(i));
    }
    if (shortcut_conv_) {
      shortcut_conv_->collect(out, name + ".shortcut.conv");
      shortcut_bn_->collect(out, name + ".shortcut.bn");
    }
  }

  void collect_buffers(std::vector<BufferRef<T>>& out, const std::string& name) {
    for (std::size_t i = 0; i < bns_.size(); ++i) bns_[i].collect_buffers(out, name + ".bn" + std::to_string(i));
    if (shortcut_bn_) shortcut_bn_->collect_buffers(out, name + ".shortcut.bn");
  }

 private:
  std::vector<Conv2d<T>> convs_;
  std::vector<BatchNorm2d<T>> bns_;
  std::optional<Conv2d<T>> shortcut_conv_;
  std::optional<BatchNorm2d<T>> shortcut_bn_;
  std::vector<std::vector<T>> relu_outputs_;
  std::vector<T> output_;
};

template <class T>
class ResNetEncoder final : public Encoder<T> {
 public:
  ResNetEncoder(const ResNetLayout& layout, const ImageShape& input, std::size_t embed_dim, EncoderArch arch)
      : arch_(arch), input_(input), stem_(input.channels, layout.stem_channels, 3, layout.stem_stride, 1),
        stem_bn_(layout.stem_channels) {
    int c = layout.stem_channels;
    for (const auto& b : layout.blocks) {
      blocks_.emplace_back(c, b);
      c = b.out_channels;
    }
    width_ = static_cast<std::size_t>(c);
    if (embed_dim != width_) fc_.emplace(width_, embed_dim, true);
    embed_dim_ = embed_dim;
  }

  EncoderArch arch() const noexcept override { return arch_; }
  std::size_t output_dim() const noexcept override { return embed_dim_; }

  Matrix<T> forward(const ImageBatch& views, bool training) override {
    if (!(views.shape == input_)) throw ShapeError("resnet encoder: input shape mismatch");
    const int n = static_cast<int>(views.count);
    FeatureMap<T> x(input_.channels, n, input_.height, input_.width);
    const std::size_t hw = static_cast<std::size_t>(input_.height) * input_.width;
    for (int i = 0; i < n; ++i) {
      for (int ch = 0; ch < input_.channels; ++ch) {
        const float* src = views.pixels.data() + (static_cast<std::size_t>(i) * input_.channels + ch) * hw;
        T* dst = x.data.data() + (static_cast<std::size_t>(ch) * n + i) * hw;
        for (std::size_t p = 0; p < hw; ++p) dst[p] = static_cast<T>((src[p] - 0.5f) * 4.0f);
      }
    }
    FeatureMap<T> h = stem_bn_.forward(stem_.forward(x, training), training);
    relu_inplace(h.data);
    if (training) stem_out_ = h.data;
    for (auto& b : blocks_) h = b.forward(h, training);

    const std::size_t spatial = static_cast<std::size_t>(h.height) * h.width;
    Matrix<T> pooled(static_cast<std::size_t>(n), width_);
    for (int ch = 0; ch < h.channels; ++ch) {
      for (int i = 0; i < n; ++i) {
        const T* src = h.data.data() + (static_cast<std::size_t>(ch) * n + i) * spatial;
        double s = 0.0;
        for (std::size_t p = 0; p < spatial; ++p) s += src[p];
        pooled(static_cast<std::size_t>(i), static_cast<std::size_t>(ch)) = static_cast<T>(s / spatial);
      }
    }
    if (training) {
      last_h_ = h.height;
      last_w_ = h.width;
      last_n_ = n;
    }
    if (fc_) return fc_->forward(pooled);
    return pooled;
  }

  void backward(const Matrix<T>& grad_h) override {
    Matrix<T> gp = fc_ ? fc_->backward(grad_h) : grad_h;
    const int n = last_n_;
    FeatureMap<T> g(static_cast<int>(width_), n, last_h_, last_w_);
    const std::size_t spatial = static_cast<std::size_t>(last_h_) * last_w_;
    const T scale = T(1) / static_cast<T>(spatial);
    for (std::size_t ch = 0; ch < width_; ++ch) {
      for (int i = 0; i < n; ++i) {
        const T v = gp(static_cast<std::size_t>(i), ch) * scale;
        T* dst = g.data.data() + (ch * n + i) * spatial;
        for (std::size_t p = 0; p < spatial; ++p) dst[p] = v;
      }
    }
    for (std::size_t b = blocks_.size(); b-- > 0;) g = blocks_[b].backward(std::move(g));
    relu_backward_inplace(g.data, stem_out_);
    stem_.backward(stem_bn_.backward(g), false);
  }

  void reset_parameters(RandomStream& rng) override {
    stem_.reset_parameters(rng);
    stem_bn_.reset_parameters();
    for (auto& b : blocks_) b.reset_parameters(rng);
    if (fc_) fc_->reset_parameters(rng);
  }

  void collect(std::vector<ParamGroup<T>>& out) override {
    stem_.collect(out, "encoder.stem.conv");
    stem_bn_.collect(out, "encoder.stem.bn");
    for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i].collect(out, "encoder.block" + std::to_string(i));
    if (fc_) fc_->collect(out, "encoder.fc");
  }

  void collect_buffers(std::vector<BufferRef<T>>& out) override {
    stem_bn_.collect_buffers(out, "encoder.stem.bn");
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      blocks_[i].collect_buffers(out, "encoder.block" + std::to_string(i));
    }
  }

  std::unique_ptr<Encoder<T>> clone() const override { return std::make_unique<ResNetEncoder>(*this); }

 private:
  EncoderArch arch_;
  ImageShape input_;
  Conv2d<T> stem_;
  BatchNorm2d<T> stem_bn_;
  std::vector<ResidualBlock<T>> blocks_;
  std::optional<Linear<T>> fc_;
  std::size_t width_ = 0;
  std::size_t embed_dim_ = 0;
  std::vector<T> stem_out_;
  int last_h_ = 0, last_w_ = 0, last_n_ = 0;
};

}  // namespace

template <class T>
std::unique_ptr<Encoder<T>> make_resnet_encoder(const ResNetLayout& layout, const ImageShape& input,
                                                std::size_t embed_dim) {
  return std::make_unique<ResNetEncoder<T>>(layout, input, embed_dim, EncoderArch::SmallResNet);
}

template <class T>
std::unique_ptr<Encoder<T>> make_encoder(EncoderArch arch, const ImageShape& input, std::size_t embed_dim) {
  switch (arch) {
    case EncoderArch::Identity:
      if (embed_dim != input.numel()) {
        throw ConfigError("embed_dim", "identity encoder requires embed_dim equal to the input size (" +
                                           std::to_string(input.numel()) + ")");
      }
      return std::make_unique<IdentityEncoder<T>>(input);
    case EncoderArch::Linear: return std::make_unique<LinearEncoder<T>>(input, embed_dim);
    case EncoderArch::SmallResNet:
      return std::make_unique<ResNetEncoder<T>>(ResNetLayout::small(), input, embed_dim, arch);
    case EncoderArch::ResNet50:
      return std::make_unique<ResNetEncoder<T>>(ResNetLayout::resnet50(), input, embed_dim, arch);
  }
  throw ConfigError("encoder_arch", "unknown architecture");
}

template <class T>
Linear<T>* linear_encoder_layer(Encoder<T>& encoder) {
  auto* lin = dynamic_cast<LinearEncoder<T>*>(&encoder);
  return lin != nullptr ? &lin->layer() : nullptr;
}

template std::unique_ptr<Encoder<float>> make_encoder<float>(EncoderArch, const ImageShape&, std::size_t);
template std::unique_ptr<Encoder<double>> make_encoder<double>(EncoderArch, const ImageShape&, std::size_t);
template std::unique_ptr<Encoder<float>> make_resnet_encoder<float>(const ResNetLayout&, const ImageShape&,
                                                                    std::size_t);
template std::unique_ptr<Encoder<double>> make_resnet_encoder<double>(const ResNetLayout&, const ImageShape&,
                                                                      std::size_t);
template Linear<float>* linear_encoder_layer<float>(Encoder<float>&);
template Linear<double>* linear_encoder_layer<double>(Encoder<double>&);

}  // namespace spcl::nn
