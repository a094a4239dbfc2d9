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
#include "f2ind/losses.hpp"

#include <algorithm>
#include <cmath>

#include "f2ind/errors.hpp"

namespace f2ind {
namespace {

void check_batch(const Vector& p, const Vector& y) {
  if (p.size() != y.size()) throw ShapeError("loss: prediction and label lengths differ");
  if (p.size() == 0) throw EmptyError("loss: empty batch");
}

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

}  // namespace

void LossConfig::validate() const {
  if (w_bce < 0.0 || w_huber < 0.0 || w_focal < 0.0) {
    throw ConfigError("loss weights must be non-negative");
  }
  if (w_bce == 0.0 && w_huber == 0.0 && w_focal == 0.0) {
    throw ConfigError("at least one loss weight must be positive");
  }
  if (!(huber_delta > 0.0)) throw ConfigError("huber_delta must be positive");
  if (!(focal_alpha > 0.0 && focal_alpha < 1.0)) {
    throw ConfigError("focal_alpha must lie in (0, 1)");
  }
  if (!(focal_gamma >= 0.0)) throw ConfigError("focal_gamma must be non-negative");
}

LossResult bce(const Vector& p, const Vector& y) {
  check_batch(p, y);
  const double inv = 1.0 / static_cast<double>(p.size());
  LossResult res;
  res.grad.resize(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double q = clamp_prob(p[i]);
    res.value -= y[i] * std::log(q) + (1.0 - y[i]) * std::log(1.0 - q);
    res.grad[i] = (-y[i] / q + (1.0 - y[i]) / (1.0 - q)) * inv;
  }
  res.value *= inv;
  return res;
}

LossResult huber(const Vector& p, const Vector& y, double delta, bool minority_only) {
  check_batch(p, y);
  if (!(delta > 0.0)) throw ConfigError("huber_delta must be positive");
  const double inv = 1.0 / static_cast<double>(p.size());
  LossResult res;
  res.grad = Vector::Zero(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (minority_only && y[i] < 0.5) continue;
    const double r = p[i] - y[i];
    if (std::abs(r) <= delta) {
      res.value += 0.5 * r * r;
      res.grad[i] = r * inv;
    } else {
      res.value += delta * (std::abs(r) - 0.5 * delta);
      res.grad[i] = (r > 0.0 ? delta : -delta) * inv;
    }
  }
  res.value *= inv;
  return res;
}

LossResult focal(const Vector& p, const Vector& y, double alpha, double gamma) {
  check_batch(p, y);
  const double inv = 1.0 / static_cast<double>(p.size());
  LossResult res;
  res.grad.resize(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double q = clamp_prob(p[i]);
    const double pt = y[i] * q + (1.0 - y[i]) * (1.0 - q);
    const double at = y[i] * alpha + (1.0 - y[i]) * (1.0 - alpha);
    const double one_minus = 1.0 - pt;
    const double log_pt = std::log(pt);
    const double mod = std::pow(one_minus, gamma);
    res.value -= at * mod * log_pt;
    // dL/dp_t for L = -a (1 - p_t)^g log p_t
    double d_pt = -at * mod / pt;
    if (gamma != 0.0) d_pt += at * gamma * std::pow(one_minus, gamma - 1.0) * log_pt;
    const double dpt_dp = 2.0 * y[i] - 1.0;
    res.grad[i] = d_pt * dpt_dp * inv;
  }
  res.value *= inv;
  return res;
}

LossResult composite_loss(const Vector& p, const Vector& y, const LossConfig& cfg) {
  cfg.validate();
  check_batch(p, y);
  LossResult res;
  res.grad = Vector::Zero(p.size());
  if (cfg.w_bce != 0.0) {
    const LossResult l = bce(p, y);
    res.value += cfg.w_bce * l.value;
    res.grad += cfg.w_bce * l.grad;
  }
  if (cfg.w_huber != 0.0) {
    const LossResult l = huber(p, y, cfg.huber_delta, cfg.huber_minority_only);
    res.value += cfg.w_huber * l.value;
    res.grad += cfg.w_huber * l.grad;
  }
  if (cfg.w_focal != 0.0) {
    const LossResult l = focal(p, y, cfg.focal_alpha, cfg.focal_gamma);
    res.value += cfg.w_focal * l.value;
    res.grad += cfg.w_focal * l.grad;
  }
  return res;
}

}  // namespace f2ind
