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
#include <optional>
#include <span>
#include <vector>

#include "f2ind/params.hpp"
#include "f2ind/rng.hpp"

namespace f2ind {

inline constexpr int kDefaultProjDim = 512;
inline constexpr int kDefaultAttnHidden = 128;
inline constexpr double kMaskedLogit = -1e9;

/// Modality order inside the stacked tensor: image first, then text.
inline constexpr int kImageSlot = 0;
inline constexpr int kTextSlot = 1;

struct FusionDims {
  int text_dim = 768;
  int image_dim = 2048;
  int proj_dim = kDefaultProjDim;
  int attn_hidden = kDefaultAttnHidden;
  int head_out = 4;

  bool operator==(const FusionDims&) const = default;
};

/// Projection, modality attention and the bounded head feeding ANFIS.
///
///   x_hat = x W_x + b_x                (image, B x P)
///   y_hat = drop(y) W_y + b_y          (text,  B x P)
///   logit_m = tanh(z_m A1 + a1) A2 + a2, shared across both modalities
///   a = softmax(logit_image, logit_text), image logit masked when absent
///   h = a_image x_hat + a_text y_hat
///   out = tanh(h H + h_b)             (B x n, in (-1, 1))
struct FusionParams {
  FusionDims dims;
  double dropout_rate = 0.3;

  Matrix w_image;  // image_dim x P
  Vector b_image;  // P
  Matrix w_text;   // text_dim x P
  Vector b_text;   // P
  Matrix attn_w1;  // P x hidden
  Vector attn_b1;  // hidden
  Vector attn_w2;  // hidden
  Vector attn_b2;  // 1
  Matrix head_w;   // P x n
  Vector head_b;   // n

  /// Same shapes, every entry zero. Used as the gradient container.
  FusionParams zeros_like() const;
  std::vector<ParamView> blocks();
  std::size_t parameter_count() const;
  bool all_finite() const;
};

using FusionGrads = FusionParams;

/// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
FusionParams init_fusion(const FusionDims& dims, double dropout_rate,
                         std::uint64_t seed);

struct FusionCache {
  Matrix image;        // B x image_dim, zero rows where absent
  Matrix text;         // B x text_dim, after dropout
  Matrix dropout_mask; // B x text_dim, scaled keep mask; empty when inactive
  std::vector<bool> has_image;
  Matrix proj_image;   // B x P
  Matrix proj_text;    // B x P
  Matrix attn_hidden[2];  // B x hidden, post-tanh
  Matrix logits;       // B x 2
  Matrix weights;      // B x 2
  Matrix fused;        // B x P
  Matrix out;          // B x n

  Eigen::Index batch() const { return out.rows(); }
};

struct FusionOutput {
  Matrix anfis_input;   // B x n
  Matrix attn_weights;  // B x 2
  FusionCache cache;
};

/// `image` must be B x image_dim; rows for has_image=false are ignored.
/// Dropout on the text path is active iff `dropout_rng` is non-null.
/// Errors: ShapeError, NumericError.
FusionOutput fusion_forward(const FusionParams& params, const Matrix& text,
                            const Matrix& image,
                            const std::vector<bool>& has_image,
                            Rng* dropout_rng);

struct FusionBackward {
  FusionGrads grads;
  Matrix grad_text;   // B x text_dim (w.r.t. the pre-dropout embedding)
  Matrix grad_image;  // B x image_dim
};

/// Errors: CacheError when the cache does not match params or the gradient.
FusionBackward fusion_backward(const FusionParams& params,
                               const FusionCache& cache,
                               const Matrix& grad_anfis_input,
                               bool input_grads = false);

}  // namespace f2ind
