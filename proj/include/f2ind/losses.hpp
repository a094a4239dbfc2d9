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

#include "f2ind/params.hpp"

namespace f2ind {

inline constexpr double kProbClamp = 1e-7;

struct LossConfig {
  double w_bce = 1.0;
  double w_huber = 0.5;
  double w_focal = 1.0;
  double huber_delta = 1.0;
  double focal_alpha = 0.25;
  double focal_gamma = 2.0;
  /// Restrict the Huber term to fake (label 1) samples.
  bool huber_minority_only = false;

  /// Throws ConfigError.
  void validate() const;
};

/// Batch-mean loss and its gradient with respect to each probability.
struct LossResult {
  double value = 0.0;
  Vector grad;
};

// Probabilities are clamped to [kProbClamp, 1 - kProbClamp] before any log;
// the gradient is evaluated at the clamped point.

LossResult bce(const Vector& p, const Vector& y);
LossResult huber(const Vector& p, const Vector& y, double delta,
                 bool minority_only = false);
LossResult focal(const Vector& p, const Vector& y, double alpha, double gamma);
LossResult composite_loss(const Vector& p, const Vector& y, const LossConfig& cfg);

}  // namespace f2ind
