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

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "f2ind/params.hpp"

namespace f2ind {

struct ScheduleConfig {
  double max_lr = 3e-4;
  std::size_t total_steps = 2;
  double pct_start = 0.3;
  double div_factor = 25.0;
  double final_div_factor = 1e4;

  void validate() const;
  /// round(pct_start * total_steps), kept inside [1, total_steps - 1].
  std::size_t peak_step() const;
};

/// One-cycle cosine schedule as a multiplier of max_lr: rises from
/// 1/div_factor to 1 at peak_step(), then falls to 1/final_div_factor at
/// total_steps. ScheduleError if step > total_steps.
double onecycle_lr(std::size_t step, const ScheduleConfig& cfg);

/// Per-group multipliers on the scheduled learning rate.
struct GroupScales {
  std::array<double, kParamGroupCount> scale{1.0, 1.0, 1.0, 5.0};

  double& operator[](ParamGroup g) { return scale[static_cast<std::size_t>(g)]; }
  double operator[](ParamGroup g) const { return scale[static_cast<std::size_t>(g)]; }
  void validate() const;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig cfg;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::uint64_t t = 0;
};

AdamState make_adam_state(const std::vector<ParamView>& params,
                          const AdamConfig& cfg = {});

/// Bias-corrected Adam update of every block, then each block's lower
/// bound is enforced. `lr` is indexed by ParamGroup. If any gradient is
/// non-finite nothing is modified and NumericError names the block.
void adam_step(AdamState& state, const std::vector<ParamView>& params,
               const std::vector<ParamView>& grads,
               const std::array<double, kParamGroupCount>& lr);

}  // namespace f2ind
