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
#include "f2ind/model.hpp"

#include <cmath>

#include "f2ind/errors.hpp"

namespace f2ind {
namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

AffineHead init_affine(int n, std::uint64_t seed) {
  AffineHead h;
  h.w.resize(n);
  h.b = Vector::Zero(1);
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(n));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index i = 0; i < n; ++i) h.w[i] = dist(rng);
  return h;
}

}  // namespace

AffineHead AffineHead::zeros_like() const {
  return {Vector::Zero(w.size()), Vector::Zero(b.size())};
}

std::vector<ParamView> AffineHead::blocks() {
  return {
      {"affine.w", ParamGroup::kAnfis, flat(w)},
      {"affine.b", ParamGroup::kAnfis, flat(b)},
  };
}

Model Model::zeros_like() const {
  Model z;
  z.spec = spec;
  z.fusion = fusion.zeros_like();
  if (spec.use_anfis) {
    z.anfis = anfis.zeros_like();
  } else {
    z.affine = affine.zeros_like();
  }
  return z;
}

std::vector<ParamView> Model::blocks() {
  std::vector<ParamView> out = fusion.blocks();
  std::vector<ParamView> head = spec.use_anfis ? anfis.blocks() : affine.blocks();
  out.insert(out.end(), head.begin(), head.end());
  return out;
}

std::size_t Model::parameter_count() const {
  return fusion.parameter_count() +
         (spec.use_anfis ? anfis.parameter_count() : affine.parameter_count());
}

Model init_model(const ModelSpec& spec, std::uint64_t seed) {
  Model m;
  m.spec = spec;
  m.fusion = init_fusion(spec.dims, spec.dropout_rate, derive_seed(seed, 1));
  if (spec.use_anfis) {
    m.anfis = init_anfis(spec.dims.head_out, spec.mf_per_input, derive_seed(seed, 2));
  } else {
    if (spec.dims.head_out <= 0) throw ConfigError("head width must be positive");
    m.affine = init_affine(spec.dims.head_out, derive_seed(seed, 2));
  }
  return m;
}

Batch make_batch(const Dataset& dataset, std::span<const std::size_t> indices) {
  const auto rows = static_cast<Eigen::Index>(indices.size());
  Batch b;
  b.text.resize(rows, dataset.text_dim);
  b.image = Matrix::Zero(rows, dataset.image_dim);
  b.has_image.resize(indices.size());
  b.labels.resize(rows);
  b.ids.resize(indices.size());
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::size_t idx = indices[static_cast<std::size_t>(r)];
    if (idx >= dataset.samples.size()) throw IndexError("batch index out of range");
    const Sample& s = dataset.samples[idx];
    for (std::uint32_t d = 0; d < dataset.text_dim; ++d) b.text(r, d) = s.text_emb[d];
    if (s.has_image) {
      for (std::uint32_t d = 0; d < dataset.image_dim; ++d) b.image(r, d) = s.image_emb[d];
    }
    b.has_image[static_cast<std::size_t>(r)] = s.has_image;
    b.labels[r] = s.label;
    b.ids[static_cast<std::size_t>(r)] = s.sample_id;
  }
  return b;
}

ModelForward model_forward(const Model& model, const Batch& batch, Rng* dropout_rng) {
  ModelForward out;
  FusionOutput fo = fusion_forward(model.fusion, batch.text, batch.image,
                                   batch.has_image, dropout_rng);
  out.head_input = std::move(fo.anfis_input);
  out.attn_weights = std::move(fo.attn_weights);
  out.fusion_cache = std::move(fo.cache);
  if (model.spec.use_anfis) {
    AnfisOutput ao = anfis_forward(model.anfis, out.head_input);
    out.prob = std::move(ao.prob);
    out.anfis_cache = std::move(ao.cache);
  } else {
    const Vector z = (out.head_input * model.affine.w).array() + model.affine.b[0];
    out.prob = z.unaryExpr([](double v) { return sigmoid(v); });
  }
  return out;
}

ModelGrads model_backward(const Model& model, const ModelForward& fwd,
                          const Vector& grad_prob) {
  ModelGrads g;
  g.spec = model.spec;
  Matrix grad_head_input;
  if (model.spec.use_anfis) {
    AnfisBackward ab = anfis_backward(model.anfis, fwd.anfis_cache, grad_prob);
    g.anfis = std::move(ab.grads);
    grad_head_input = std::move(ab.grad_input);
  } else {
    if (grad_prob.size() != fwd.prob.size()) throw CacheError("affine head: gradient length mismatch");
    const Vector dz = grad_prob.array() * fwd.prob.array() * (1.0 - fwd.prob.array());
    g.affine.w = fwd.head_input.transpose() * dz;
    g.affine.b = Vector::Constant(1, dz.sum());
    grad_head_input = dz * model.affine.w.transpose();
  }
  g.fusion = fusion_backward(model.fusion, fwd.fusion_cache, grad_head_input).grads;
  return g;
}

LossAndGrad loss_and_grad(const Model& model, const Batch& batch,
                          const LossConfig& loss, Rng* dropout_rng) {
  LossAndGrad res;
  res.forward = model_forward(model, batch, dropout_rng);
  const LossResult l = composite_loss(res.forward.prob, batch.labels, loss);
  res.loss = l.value;
  res.grads = model_backward(model, res.forward, l.grad);
  return res;
}

}  // namespace f2ind
