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
#include "f2ind/fusion.hpp"

#include <cmath>
#include <sstream>

#include "f2ind/errors.hpp"

namespace f2ind {
namespace {

void fill_uniform(Matrix& m, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
}

void fill_uniform(Vector& v, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = dist(rng);
}

void check_dims(const FusionDims& d) {
  if (d.text_dim <= 0 || d.image_dim <= 0 || d.proj_dim <= 0 ||
      d.attn_hidden <= 0 || d.head_out <= 0) {
    throw ConfigError("fusion dimensions must be positive");
  }
}

[[noreturn]] void shape_error(const char* what, Eigen::Index got, Eigen::Index want) {
  std::ostringstream os;
  os << "fusion: " << what << " is " << got << ", expected " << want;
  throw ShapeError(os.str());
}

}  // namespace

FusionParams FusionParams::zeros_like() const {
  FusionParams z;
  z.dims = dims;
  z.dropout_rate = dropout_rate;
  z.w_image = Matrix::Zero(w_image.rows(), w_image.cols());
  z.b_image = Vector::Zero(b_image.size());
  z.w_text = Matrix::Zero(w_text.rows(), w_text.cols());
  z.b_text = Vector::Zero(b_text.size());
  z.attn_w1 = Matrix::Zero(attn_w1.rows(), attn_w1.cols());
  z.attn_b1 = Vector::Zero(attn_b1.size());
  z.attn_w2 = Vector::Zero(attn_w2.size());
  z.attn_b2 = Vector::Zero(attn_b2.size());
  z.head_w = Matrix::Zero(head_w.rows(), head_w.cols());
  z.head_b = Vector::Zero(head_b.size());
  return z;
}

std::vector<ParamView> FusionParams::blocks() {
  return {
      {"fusion.w_image", ParamGroup::kFusionProj, flat(w_image)},
      {"fusion.b_image", ParamGroup::kFusionProj, flat(b_image)},
      {"fusion.w_text", ParamGroup::kFusionProj, flat(w_text)},
      {"fusion.b_text", ParamGroup::kFusionProj, flat(b_text)},
      {"fusion.attn_w1", ParamGroup::kAttention, flat(attn_w1)},
      {"fusion.attn_b1", ParamGroup::kAttention, flat(attn_b1)},
      {"fusion.attn_w2", ParamGroup::kAttention, flat(attn_w2)},
      {"fusion.attn_b2", ParamGroup::kAttention, flat(attn_b2)},
      {"fusion.head_w", ParamGroup::kHead, flat(head_w)},
      {"fusion.head_b", ParamGroup::kHead, flat(head_b)},
  };
}

std::size_t FusionParams::parameter_count() const {
  return static_cast<std::size_t>(w_image.size() + b_image.size() + w_text.size() +
                                  b_text.size() + attn_w1.size() + attn_b1.size() +
                                  attn_w2.size() + attn_b2.size() + head_w.size() +
                                  head_b.size());
}

bool FusionParams::all_finite() const {
  return w_image.allFinite() && b_image.allFinite() && w_text.allFinite() &&
         b_text.allFinite() && attn_w1.allFinite() && attn_b1.allFinite() &&
         attn_w2.allFinite() && attn_b2.allFinite() && head_w.allFinite() &&
         head_b.allFinite();
}

FusionParams init_fusion(const FusionDims& dims, double dropout_rate,
                         std::uint64_t seed) {
  check_dims(dims);
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ConfigError("dropout_rate must lie in [0, 1)");
  }
  const int p = dims.proj_dim;
  FusionParams fp;
  fp.dims = dims;
  fp.dropout_rate = dropout_rate;
  fp.w_image.resize(dims.image_dim, p);
  fp.w_text.resize(dims.text_dim, p);
  fp.attn_w1.resize(p, dims.attn_hidden);
  fp.attn_w2.resize(dims.attn_hidden);
  fp.head_w.resize(p, dims.head_out);
  fp.b_image = Vector::Zero(p);
  fp.b_text = Vector::Zero(p);
  fp.attn_b1 = Vector::Zero(dims.attn_hidden);
  fp.attn_b2 = Vector::Zero(1);
  fp.head_b = Vector::Zero(dims.head_out);

  Rng rng(seed);
  fill_uniform(fp.w_image, 1.0 / std::sqrt(double(dims.image_dim)), rng);
  fill_uniform(fp.w_text, 1.0 / std::sqrt(double(dims.text_dim)), rng);
  fill_uniform(fp.attn_w1, 1.0 / std::sqrt(double(p)), rng);
  fill_uniform(fp.attn_w2, 1.0 / std::sqrt(double(dims.attn_hidden)), rng);
  fill_uniform(fp.head_w, 1.0 / std::sqrt(double(p)), rng);
  return fp;
}

FusionOutput fusion_forward(const FusionParams& params, const Matrix& text,
                            const Matrix& image,
                            const std::vector<bool>& has_image,
                            Rng* dropout_rng) {
  const FusionDims& d = params.dims;
  const Eigen::Index batch = text.rows();
  if (batch == 0) throw ShapeError("fusion: empty batch");
  if (text.cols() != d.text_dim) shape_error("text width", text.cols(), d.text_dim);
  if (image.cols() != d.image_dim) shape_error("image width", image.cols(), d.image_dim);
  if (image.rows() != batch) shape_error("image rows", image.rows(), batch);
  if (static_cast<Eigen::Index>(has_image.size()) != batch) {
    shape_error("has_image length", static_cast<Eigen::Index>(has_image.size()), batch);
  }
  if (!text.allFinite()) throw NumericError("fusion: non-finite text embedding");

  FusionOutput out;
  FusionCache& c = out.cache;
  c.has_image = has_image;
  c.image = image;
  for (Eigen::Index r = 0; r < batch; ++r) {
    if (!has_image[static_cast<std::size_t>(r)]) {
      c.image.row(r).setZero();
    } else if (!c.image.row(r).allFinite()) {
      throw NumericError("fusion: non-finite image embedding");
    }
  }

  c.text = text;
  if (dropout_rng != nullptr && params.dropout_rate > 0.0) {
    const double keep = 1.0 - params.dropout_rate;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    c.dropout_mask.resize(batch, d.text_dim);
    for (Eigen::Index i = 0; i < c.dropout_mask.size(); ++i) {
      c.dropout_mask.data()[i] = u(*dropout_rng) < keep ? 1.0 / keep : 0.0;
    }
    c.text.array() *= c.dropout_mask.array();
  }

  c.proj_image.noalias() = c.image * params.w_image;
  c.proj_image.rowwise() += params.b_image.transpose();
  c.proj_text.noalias() = c.text * params.w_text;
  c.proj_text.rowwise() += params.b_text.transpose();

  c.logits.resize(batch, 2);
  const Matrix* slots[2] = {&c.proj_image, &c.proj_text};
  for (int m = 0; m < 2; ++m) {
    Matrix pre = *slots[m] * params.attn_w1;
    pre.rowwise() += params.attn_b1.transpose();
    c.attn_hidden[m] = pre.array().tanh().matrix();
    c.logits.col(m) = (c.attn_hidden[m] * params.attn_w2).array() + params.attn_b2[0];
  }

  c.weights.resize(batch, 2);
  for (Eigen::Index r = 0; r < batch; ++r) {
    if (!has_image[static_cast<std::size_t>(r)]) {
      c.logits(r, kImageSlot) = kMaskedLogit;
      c.weights(r, kImageSlot) = 0.0;
      c.weights(r, kTextSlot) = 1.0;
      continue;
    }
    const double mx = std::max(c.logits(r, 0), c.logits(r, 1));
    const double e0 = std::exp(c.logits(r, 0) - mx);
    const double e1 = std::exp(c.logits(r, 1) - mx);
    const double s = e0 + e1;
    c.weights(r, 0) = e0 / s;
    c.weights(r, 1) = e1 / s;
  }

  c.fused = c.proj_image.array().colwise() * c.weights.col(kImageSlot).array() +
            c.proj_text.array().colwise() * c.weights.col(kTextSlot).array();

  Matrix pre_head = c.fused * params.head_w;
  pre_head.rowwise() += params.head_b.transpose();
  c.out = pre_head.array().tanh().matrix();

  out.anfis_input = c.out;
  out.attn_weights = c.weights;
  return out;
}

FusionBackward fusion_backward(const FusionParams& params,
                               const FusionCache& cache,
                               const Matrix& grad_out, bool input_grads) {
  const FusionDims& d = params.dims;
  const Eigen::Index batch = cache.batch();
  if (grad_out.rows() != batch || grad_out.cols() != d.head_out ||
      cache.image.cols() != d.image_dim || cache.text.cols() != d.text_dim ||
      cache.fused.cols() != d.proj_dim || cache.image.rows() != batch ||
      static_cast<Eigen::Index>(cache.has_image.size()) != batch) {
    throw CacheError("fusion: cache does not match parameters or gradient shape");
  }

  FusionBackward res;
  FusionGrads& g = res.grads;
  g = params.zeros_like();

  // out = tanh(pre_head)
  const Matrix d_pre_head =
      (grad_out.array() * (1.0 - cache.out.array().square())).matrix();
  g.head_w.noalias() = cache.fused.transpose() * d_pre_head;
  g.head_b = d_pre_head.colwise().sum().transpose();
  const Matrix d_fused = d_pre_head * params.head_w.transpose();

  // h = sum_m a_m z_m
  Matrix d_weights(batch, 2);
  d_weights.col(kImageSlot) = (d_fused.array() * cache.proj_image.array()).rowwise().sum();
  d_weights.col(kTextSlot) = (d_fused.array() * cache.proj_text.array()).rowwise().sum();

  Matrix d_proj[2];
  d_proj[kImageSlot] = d_fused.array().colwise() * cache.weights.col(kImageSlot).array();
  d_proj[kTextSlot] = d_fused.array().colwise() * cache.weights.col(kTextSlot).array();

  // softmax; masked rows have a constant image logit and a saturated text
  // weight, so both logit gradients vanish there.
  Matrix d_logits(batch, 2);
  for (Eigen::Index r = 0; r < batch; ++r) {
    if (!cache.has_image[static_cast<std::size_t>(r)]) {
      d_logits.row(r).setZero();
      continue;
    }
    const double dot = cache.weights(r, 0) * d_weights(r, 0) +
                       cache.weights(r, 1) * d_weights(r, 1);
    for (int m = 0; m < 2; ++m) {
      d_logits(r, m) = cache.weights(r, m) * (d_weights(r, m) - dot);
    }
  }

  const Matrix* slots[2] = {&cache.proj_image, &cache.proj_text};
  for (int m = 0; m < 2; ++m) {
    const Matrix& hid = cache.attn_hidden[m];
    g.attn_w2.noalias() += hid.transpose() * d_logits.col(m);
    g.attn_b2[0] += d_logits.col(m).sum();
    const Matrix d_pre =
        ((d_logits.col(m) * params.attn_w2.transpose()).array() *
         (1.0 - hid.array().square()))
            .matrix();
    g.attn_w1.noalias() += slots[m]->transpose() * d_pre;
    g.attn_b1 += d_pre.colwise().sum().transpose();
    d_proj[m].noalias() += d_pre * params.attn_w1.transpose();
  }

  for (Eigen::Index r = 0; r < batch; ++r) {
    if (!cache.has_image[static_cast<std::size_t>(r)]) d_proj[kImageSlot].row(r).setZero();
  }

  g.w_image.noalias() = cache.image.transpose() * d_proj[kImageSlot];
  g.b_image = d_proj[kImageSlot].colwise().sum().transpose();
  g.w_text.noalias() = cache.text.transpose() * d_proj[kTextSlot];
  g.b_text = d_proj[kTextSlot].colwise().sum().transpose();

  if (input_grads) {
    res.grad_image = d_proj[kImageSlot] * params.w_image.transpose();
    res.grad_text = d_proj[kTextSlot] * params.w_text.transpose();
    if (cache.dropout_mask.size() != 0) {
      res.grad_text.array() *= cache.dropout_mask.array();
    }
  }
  return res;
}

}  // namespace f2ind
