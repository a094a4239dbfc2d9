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

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "f2ind/params.hpp"

namespace f2ind {

inline constexpr double kSigmaMin = 1e-3;
inline constexpr std::size_t kRuleLimit = 4096;
inline constexpr double kFiringEps = 1e-12;
/// Above this many inputs the rule layer multiplies in log space.
inline constexpr int kLogSpaceInputThreshold = 8;

/// First-order Takagi-Sugeno ANFIS with Gaussian memberships and a
/// product t-norm over all f^n membership combinations.
///
/// Memberships are stored input-major: column i*f + j holds G(x_i; mu_ij,
/// sigma_ij). Rule k fires on membership digit assignment(k)[i] of input i,
/// where assignment is the base-f expansion of k with input 0 as the most
/// significant digit.
struct AnfisParams {
  int n = 4;
  int f = 2;
  Matrix mu;     // n x f
  Matrix sigma;  // n x f, >= kSigmaMin
  Matrix a;      // rules x n, consequent slopes
  Vector b;      // rules, consequent intercepts

  std::size_t rule_count() const noexcept { return static_cast<std::size_t>(b.size()); }
  AnfisParams zeros_like() const;
  std::vector<ParamView> blocks();
  std::size_t parameter_count() const;
  void clamp_sigma();
};

using AnfisGrads = AnfisParams;

/// f^n, or ConfigError if n < 1, f < 2 or f^n exceeds kRuleLimit.
std::size_t rule_count(int n, int f);

/// mu on the midpoints of f equal cells of [-1, 1]; sigma = 1;
/// a ~ U(-0.1, 0.1); b = 0.
AnfisParams init_anfis(int n, int f, std::uint64_t seed);

/// Base-f digits of k, most significant first. IndexError if out of range.
std::vector<int> rule_to_assignment(std::size_t k, int n, int f);
std::size_t assignment_to_rule(const std::vector<int>& assignment, int f);

/// B x (n*f)
Matrix fuzzify(const AnfisParams& params, const Matrix& x);

enum class FiringMode { kAuto, kDirect, kLogSpace };

/// B x f^n product of the assigned memberships.
Matrix rule_firing(const Matrix& memberships, int n, int f,
                   FiringMode mode = FiringMode::kAuto);

/// Row-wise f_k / (sum_i f_i + kFiringEps).
Matrix normalize_firing(const Matrix& firing);

struct AnfisCache {
  Matrix input;        // B x n
  Matrix memberships;  // B x (n*f)
  Matrix firing;       // B x R
  Matrix normalized;   // B x R
  Matrix consequents;  // B x R
  Vector z;            // B, pre-sigmoid
  Vector prob;         // B
};

struct AnfisOutput {
  Vector prob;
  AnfisCache cache;
};

/// Errors: ShapeError when x is not B x n.
AnfisOutput anfis_forward(const AnfisParams& params, const Matrix& x);

struct AnfisBackward {
  AnfisGrads grads;
  Matrix grad_input;  // B x n
};

/// Errors: CacheError on a mismatched cache or gradient length.
AnfisBackward anfis_backward(const AnfisParams& params, const AnfisCache& cache,
                             const Vector& grad_prob);

struct RuleReportRow {
  std::size_t rule_index;
  std::vector<int> assignment;
  double mean_norm_firing;
  double mean_contribution;  // mean over the batch of f_hat_k * z_k
};

std::vector<RuleReportRow> rule_report(const AnfisParams& params, const Matrix& x);

/// Tab-separated, header line first:
/// rule_index, assignment, mean_norm_firing, mean_contribution.
std::string rule_report_tsv(const std::vector<RuleReportRow>& rows);

}  // namespace f2ind
