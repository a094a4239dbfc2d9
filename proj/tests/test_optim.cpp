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
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "f2ind/errors.hpp"
#include "f2ind/optim.hpp"

namespace f2ind {
namespace {

ScheduleConfig schedule(std::size_t total) {
  ScheduleConfig cfg;
  cfg.total_steps = total;
  return cfg;
}

TEST(OneCycle, Endpoints) {
  const ScheduleConfig cfg = schedule(500);
  EXPECT_NEAR(onecycle_lr(0, cfg), 0.04, 1e-15);
  EXPECT_EQ(cfg.peak_step(), 150u);
  EXPECT_NEAR(onecycle_lr(150, cfg), 1.0, 1e-15);
  EXPECT_NEAR(onecycle_lr(500, cfg), 1e-4, 1e-15);
  EXPECT_THROW(onecycle_lr(501, cfg), ScheduleError);
}

TEST(OneCycle, CosineShapeMatchesFormula) {
  const ScheduleConfig cfg = schedule(100);
  const double lo = 1.0 / 25.0, end = 1e-4;
  for (std::size_t s = 0; s <= 100; ++s) {
    double expect;
    if (s <= 30) {
      expect = lo + (1 - lo) * (1 - std::cos(std::numbers::pi * s / 30.0)) / 2;
    } else {
      expect = end + (1 - end) * (1 + std::cos(std::numbers::pi * (s - 30) / 70.0)) / 2;
    }
    EXPECT_NEAR(onecycle_lr(s, cfg), expect, 1e-12) << s;
  }
}

TEST(OneCycle, SingleBoundedSteps) {
  for (std::size_t total : {2u, 3u, 7u, 100u, 1000u}) {
    const ScheduleConfig cfg = schedule(total);
    const std::size_t peak = cfg.peak_step();
    EXPECT_GE(peak, 1u);
    EXPECT_LE(peak, total - 1);
    const double up_slope = (1.0 - 1.0 / 25.0) * std::numbers::pi / 2.0 / peak;
    const double down_slope = (1.0 - 1e-4) * std::numbers::pi / 2.0 / (total - peak);
    double prev = onecycle_lr(0, cfg);
    for (std::size_t s = 1; s <= total; ++s) {
      const double cur = onecycle_lr(s, cfg);
      EXPECT_LE(std::abs(cur - prev), std::max(up_slope, down_slope) + 1e-12);
      if (s <= peak) EXPECT_GE(cur, prev);
      else EXPECT_LE(cur, prev);
      EXPECT_GT(cur, 0.0);
      EXPECT_LE(cur, 1.0);
      prev = cur;
    }
    EXPECT_LT(onecycle_lr(total, cfg), onecycle_lr(0, cfg));
  }
}

TEST(OneCycle, Validation) {
  ScheduleConfig cfg = schedule(1);
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = schedule(10);
  cfg.pct_start = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = schedule(10);
  cfg.max_lr = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

struct Toy {
  Vector x = Vector::Zero(3);
  Vector s = Vector::Ones(2);
  std::vector<ParamView> blocks(ParamGroup gx = ParamGroup::kFusionProj) {
    return {{"toy.x", gx, flat(x)}, {"toy.s", ParamGroup::kAnfis, flat(s), 0.5}};
  }
};

std::array<double, kParamGroupCount> uniform_lr(double lr) { return {lr, lr, lr, lr}; }

TEST(Adam, FirstStepMovesByLearningRate) {
  Toy p, g;
  g.x << 1.0, -3.0, 0.0;
  g.s.setZero();
  auto state = make_adam_state(p.blocks());
  adam_step(state, p.blocks(), g.blocks(), uniform_lr(0.01));
  EXPECT_EQ(state.t, 1u);
  EXPECT_NEAR(p.x(0), -0.01 / (1 + 1e-8), 1e-15);
  EXPECT_NEAR(p.x(1), 0.01 / (1 + 1e-8 / 3), 1e-15);
  EXPECT_EQ(p.x(2), 0.0);
  EXPECT_EQ(p.s, Vector::Ones(2));
}

TEST(Adam, ZeroGradientsOnlyAdvanceTheClock) {
  Toy p, g;
  g.x.setZero();
  g.s.setZero();
  auto state = make_adam_state(p.blocks());
  for (int i = 0; i < 3; ++i) adam_step(state, p.blocks(), g.blocks(), uniform_lr(0.1));
  EXPECT_EQ(state.t, 3u);
  EXPECT_TRUE(p.x.isZero(0.0));
}

TEST(Adam, MatchesReferenceRecurrence) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  Toy p, g;
  p.s.setConstant(5.0);
  auto state = make_adam_state(p.blocks());
  std::vector<double> theta = {0, 0, 0}, m = {0, 0, 0}, v = {0, 0, 0};
  for (int t = 1; t <= 25; ++t) {
    for (int i = 0; i < 3; ++i) g.x(i) = n(rng);
    g.s.setZero();
    const double lr = 0.003 * t;
    adam_step(state, p.blocks(), g.blocks(), uniform_lr(lr));
    for (int i = 0; i < 3; ++i) {
      m[i] = 0.9 * m[i] + 0.1 * g.x(i);
      v[i] = 0.999 * v[i] + 0.001 * g.x(i) * g.x(i);
      const double mh = m[i] / (1 - std::pow(0.9, t));
      const double vh = v[i] / (1 - std::pow(0.999, t));
      theta[i] -= lr * mh / (std::sqrt(vh) + 1e-8);
      EXPECT_NEAR(p.x(i), theta[i], 1e-12);
    }
  }
}

TEST(Adam, GroupScalesScaleUpdates) {
  Toy a, b, g;
  g.x << 0.5, -0.2, 2.0;
  g.s << 0.1, 0.1;
  auto sa = make_adam_state(a.blocks(ParamGroup::kHead));
  auto sb = make_adam_state(b.blocks(ParamGroup::kHead));
  std::array<double, kParamGroupCount> lr_a = {1e-3, 1e-3, 1e-3, 1e-3};
  std::array<double, kParamGroupCount> lr_b = lr_a;
  lr_b[static_cast<int>(ParamGroup::kHead)] = 1e-4;
  adam_step(sa, a.blocks(ParamGroup::kHead), g.blocks(ParamGroup::kHead), lr_a);
  adam_step(sb, b.blocks(ParamGroup::kHead), g.blocks(ParamGroup::kHead), lr_b);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(b.x(i), 0.1 * a.x(i), 1e-15);
  EXPECT_EQ(a.s, b.s);
}

TEST(Adam, LowerBoundIsEnforced) {
  Toy p, g;
  p.s << 0.55, 3.0;
  g.x.setZero();
  g.s << 1.0, 1.0;
  auto state = make_adam_state(p.blocks());
  for (int i = 0; i < 20; ++i) adam_step(state, p.blocks(), g.blocks(), uniform_lr(0.05));
  EXPECT_EQ(p.s(0), 0.5);
  EXPECT_GT(p.s(1), 0.5);
}

TEST(Adam, NonFiniteGradientAbortsWithoutSideEffects) {
  Toy p, g;
  g.x << 1.0, 1.0, 1.0;
  g.s << 0.0, std::numeric_limits<double>::quiet_NaN();
  auto state = make_adam_state(p.blocks());
  try {
    adam_step(state, p.blocks(), g.blocks(), uniform_lr(0.1));
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("toy.s"), std::string::npos);
  }
  EXPECT_EQ(state.t, 0u);
  EXPECT_TRUE(p.x.isZero(0.0));
  EXPECT_EQ(state.m[0], std::vector<double>(3, 0.0));
}

TEST(Adam, RejectsMismatchedBlocks) {
  Toy p;
  Vector other = Vector::Zero(2);
  auto state = make_adam_state(p.blocks());
  std::vector<ParamView> bad = {{"toy.x", ParamGroup::kFusionProj, flat(other)},
                                {"toy.s", ParamGroup::kAnfis, flat(other)}};
  EXPECT_THROW(adam_step(state, p.blocks(), bad, uniform_lr(0.1)), ShapeError);
}

TEST(ParamGroups, NamesRoundTrip) {
  for (int i = 0; i < kParamGroupCount; ++i) {
    const auto g = static_cast<ParamGroup>(i);
    EXPECT_EQ(param_group_from_name(param_group_name(g)), g);
  }
  EXPECT_EQ(param_group_name(ParamGroup::kFusionProj), "fusion_proj");
  EXPECT_THROW(param_group_from_name("backbone"), ConfigError);
  GroupScales s;
  EXPECT_EQ(s[ParamGroup::kAnfis], 5.0);
  EXPECT_EQ(s[ParamGroup::kAttention], 1.0);
}

}  // namespace
}  // namespace f2ind
