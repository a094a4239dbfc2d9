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
#include "f2ind/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "f2ind/errors.hpp"

namespace f2ind {

std::string_view param_group_name(ParamGroup group) noexcept {
  switch (group) {
    case ParamGroup::kFusionProj: return "fusion_proj";
    case ParamGroup::kAttention: return "attention";
    case ParamGroup::kHead: return "head";
    case ParamGroup::kAnfis: return "anfis";
  }
  return "?";
}

ParamGroup param_group_from_name(std::string_view name) {
  for (int g = 0; g < kParamGroupCount; ++g) {
    if (param_group_name(static_cast<ParamGroup>(g)) == name) return static_cast<ParamGroup>(g);
  }
  throw ConfigError("unknown parameter group: " + std::string(name));
}

void ScheduleConfig::validate() const {
  if (!(max_lr > 0.0) || !std::isfinite(max_lr)) throw ConfigError("max_lr must be positive");
  if (total_steps < 2) throw ConfigError("schedule total_steps must be at least 2");
  if (!(pct_start > 0.0 && pct_start < 1.0)) throw ConfigError("pct_start must lie in (0, 1)");
  if (!(div_factor >= 1.0)) throw ConfigError("div_factor must be >= 1");
  if (!(final_div_factor >= 1.0)) throw ConfigError("final_div_factor must be >= 1");
}

std::size_t ScheduleConfig::peak_step() const {
  const auto raw = static_cast<std::size_t>(
      std::llround(pct_start * static_cast<double>(total_steps)));
  return std::clamp<std::size_t>(raw, 1, total_steps - 1);
}

double onecycle_lr(std::size_t step, const ScheduleConfig& cfg) {
  cfg.validate();
  if (step > cfg.total_steps) {
    std::ostringstream os;
    os << "schedule step " << step << " beyond total_steps " << cfg.total_steps;
    throw ScheduleError(os.str());
  }
  const std::size_t peak = cfg.peak_step();
  const double start = 1.0 / cfg.div_factor;
  const double end = 1.0 / cfg.final_div_factor;
  if (step <= peak) {
    const double t = static_cast<double>(step) / static_cast<double>(peak);
    return start + (1.0 - start) * 0.5 * (1.0 - std::cos(std::numbers::pi * t));
  }
  const double t = static_cast<double>(step - peak) /
                   static_cast<double>(cfg.total_steps - peak);
  return end + (1.0 - end) * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

void GroupScales::validate() const {
  for (double s : scale) {
    if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("lr scales must be positive");
  }
}

AdamState make_adam_state(const std::vector<ParamView>& params, const AdamConfig& cfg) {
  AdamState st;
  st.cfg = cfg;
  st.m.reserve(params.size());
  st.v.reserve(params.size());
  for (const auto& block : params) {
    st.m.emplace_back(block.values.size(), 0.0);
    st.v.emplace_back(block.values.size(), 0.0);
  }
  return st;
}

void adam_step(AdamState& state, const std::vector<ParamView>& params,
               const std::vector<ParamView>& grads,
               const std::array<double, kParamGroupCount>& lr) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw ShapeError("adam: parameter, gradient and state block counts differ");
  }
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (params[b].values.size() != grads[b].values.size() ||
        params[b].values.size() != state.m[b].size()) {
      throw ShapeError("adam: block size mismatch for " + params[b].name);
    }
    for (double g : grads[b].values) {
      if (!std::isfinite(g)) {
        throw NumericError("adam: non-finite gradient in " + params[b].name);
      }
    }
  }
  for (double r : lr) {
    if (!(r > 0.0)) throw ConfigError("adam: learning rates must be positive");
  }

  const AdamConfig& c = state.cfg;
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t b = 0; b < params.size(); ++b) {
    const double rate = lr[static_cast<std::size_t>(params[b].group)];
    const double lower = params[b].lower_bound;
    auto& m = state.m[b];
    auto& v = state.v[b];
    const auto& g = grads[b].values;
    auto& x = params[b].values;
    for (std::size_t i = 0; i < x.size(); ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      x[i] -= rate * m_hat / (std::sqrt(v_hat) + c.eps);
      if (x[i] < lower) x[i] = lower;
    }
  }
}

}  // namespace f2ind
