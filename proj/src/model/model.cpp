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

#include "spcl/model/model.hpp"

#include <cmath>

namespace spcl {

template <class T>
ModelBundle<T>::ModelBundle(const ModelBundle& other)
    : encoder(other.encoder ? other.encoder->clone() : nullptr),
      head_c(other.head_c),
      head_m(other.head_m),
      head_p(other.head_p) {}

template <class T>
ModelBundle<T>& ModelBundle<T>::operator=(const ModelBundle& other) {
  if (this != &other) {
    ModelBundle copy(other);
    *this = std::move(copy);
  }
  return *this;
}

template <class T>
std::vector<nn::ParamGroup<T>> ModelBundle<T>::parameters() {
  std::vector<nn::ParamGroup<T>> out;
  if (encoder) encoder->collect(out);
  head_c.collect(out, "g_c");
  head_m.collect(out, "g_m");
  head_p.collect(out, "g_p");
  return out;
}

template <class T>
std::vector<nn::BufferRef<T>> ModelBundle<T>::buffers() {
  std::vector<nn::BufferRef<T>> out;
  if (encoder) encoder->collect_buffers(out);
  return out;
}

template <class T>
std::size_t ModelBundle<T>::parameter_count() {
  return nn::count_parameters(parameters());
}

template <class T>
ModelBundle<T> build_model(const TrainConfig& config, EncoderArch arch, const ImageShape& input, std::uint64_t seed) {
  ModelBundle<T> b;
  const std::size_t de = static_cast<std::size_t>(config.embed_dim);
  b.encoder = nn::make_encoder<T>(arch, input, de);
  RandomStream enc_rng = derive_rng(seed, "init/f");
  b.encoder->reset_parameters(enc_rng);
  b.head_c = nn::Mlp<T>({de, de, static_cast<std::size_t>(config.proj_dim)});
  b.head_m = nn::Mlp<T>({de, de, 1});
  b.head_p = nn::Mlp<T>({de, static_cast<std::size_t>(config.num_prototypes)});
  reinit_heads(b, ReinitScope{}, seed, "init");
  return b;
}

template <class T>
EmbeddingBatch<T> encode(ModelBundle<T>& bundle, const ViewBatch& views, bool training) {
  if (!bundle.encoder) throw ShapeError("encode: bundle has no encoder");
  EmbeddingBatch<T> out;
  out.h = bundle.encoder->forward(views.views, training);
  if (out.h.rows() != views.size()) throw ShapeError("encode: encoder returned the wrong number of rows");
  for (std::size_t r = 0; r < out.h.rows(); ++r) {
    for (T v : out.h.row(r)) {
      if (!std::isfinite(v)) {
        throw NumericError("non-finite embedding for view " + std::to_string(r) +
                           (r < views.sample_id.size() ? " (sample " + std::to_string(views.sample_id[r]) + ")" : ""));
      }
    }
  }
  out.sibling = views.sibling;
  out.source_proto = views.source_proto;
  return out;
}

template <class T>
void reinit_heads(ModelBundle<T>& bundle, const ReinitScope& scope, std::uint64_t seed, const std::string& label_prefix) {
  if (scope.head_c) {
    RandomStream r = derive_rng(seed, label_prefix + "/g_c");
    bundle.head_c.reset_parameters(r);
  }
  if (scope.head_m) {
    RandomStream r = derive_rng(seed, label_prefix + "/g_m");
    bundle.head_m.reset_parameters(r);
  }
  if (scope.head_p) {
    RandomStream r = derive_rng(seed, label_prefix + "/g_p");
    bundle.head_p.reset_parameters(r);
  }
}

template struct ModelBundle<float>;
template struct ModelBundle<double>;
template ModelBundle<float> build_model<float>(const TrainConfig&, EncoderArch, const ImageShape&, std::uint64_t);
template ModelBundle<double> build_model<double>(const TrainConfig&, EncoderArch, const ImageShape&, std::uint64_t);
template EmbeddingBatch<float> encode<float>(ModelBundle<float>&, const ViewBatch&, bool);
template EmbeddingBatch<double> encode<double>(ModelBundle<double>&, const ViewBatch&, bool);
template void reinit_heads<float>(ModelBundle<float>&, const ReinitScope&, std::uint64_t, const std::string&);
template void reinit_heads<double>(ModelBundle<double>&, const ReinitScope&, std::uint64_t, const std::string&);

}  // namespace spcl
