/*
 * Copyright (c) 2026, The f2ind Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "f2ind/anfis.hpp"
#include "f2ind/data_model.hpp"
#include "f2ind/fusion.hpp"
#include "f2ind/losses.hpp"

namespace f2ind {

/// Replacement classifier for the ANFIS ablation: sigmoid(x . w + b).
struct AffineHead {
  Vector w;  // n
  Vector b;  // 1

  AffineHead zeros_like() const;
  std::vector<ParamView> blocks();
  std::size_t parameter_count() const { return static_cast<std::size_t>(w.size() + b.size()); }
};

struct ModelSpec {
  FusionDims dims;  // dims.head_out is the ANFIS input count n
  int mf_per_input = 2;
  double dropout_rate = 0.3;
  bool use_anfis = true;

  bool operator==(const ModelSpec&) const = default;
};

struct Model {
  ModelSpec spec;
  FusionParams fusion;
  AnfisParams anfis;   // populated iff spec.use_anfis
  AffineHead affine;   // populated iff !spec.use_anfis

  Model zeros_like() const;
  /// Fusion blocks first, then the active classifier head.
  std::vector<ParamView> blocks();
  std::size_t parameter_count() const;
};

using ModelGrads = Model;

/// Fusion seeded with derive_seed(seed, 1), the head with derive_seed(seed, 2).
Model init_model(const ModelSpec& spec, std::uint64_t seed);

struct Batch {
  Matrix text;   // B x text_dim
  Matrix image;  // B x image_dim, zero rows where absent
  std::vector<bool> has_image;
  Vector labels;  // 0/1 as doubles
  std::vector<std::uint64_t> ids;

  Eigen::Index size() const { return text.rows(); }
};

Batch make_batch(const Dataset& dataset, std::span<const std::size_t> indices);

struct ModelForward {
  Vector prob;
  Matrix attn_weights;  // B x 2, column 0 image, column 1 text
  Matrix head_input;    // B x n
  FusionCache fusion_cache;
  AnfisCache anfis_cache;
};

ModelForward model_forward(const Model& model, const Batch& batch, Rng* dropout_rng);

ModelGrads model_backward(const Model& model, const ModelForward& fwd,
                          const Vector& grad_prob);

struct LossAndGrad {
  double loss = 0.0;
  ModelForward forward;
  ModelGrads grads;
};

LossAndGrad loss_and_grad(const Model& model, const Batch& batch,
                          const LossConfig& loss, Rng* dropout_rng);

}  // namespace f2ind
