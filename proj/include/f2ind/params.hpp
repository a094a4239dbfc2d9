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
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace f2ind {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Optimizer parameter groups; each carries its own learning-rate scale.
enum class ParamGroup : int { kFusionProj = 0, kAttention = 1, kHead = 2, kAnfis = 3 };
inline constexpr int kParamGroupCount = 4;

std::string_view param_group_name(ParamGroup group) noexcept;
/// Throws ConfigError on an unknown name.
ParamGroup param_group_from_name(std::string_view name);

/// Flat, mutable view of one parameter block. Blocks are enumerated in a
/// fixed order so that parameters, gradients, optimizer moments and
/// checkpoints line up index by index.
struct ParamView {
  std::string name;
  ParamGroup group;
  std::span<double> values;
  /// Box constraint applied after every optimizer step.
  double lower_bound = -std::numeric_limits<double>::infinity();
};

inline std::span<double> flat(Matrix& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
inline std::span<double> flat(Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

inline std::size_t total_size(const std::vector<ParamView>& blocks) {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.values.size();
  return n;
}

}  // namespace f2ind
