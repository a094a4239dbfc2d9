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
#include <string>
#include <vector>

#include "f2ind/trainer.hpp"

namespace f2ind {

struct GradcheckOptions {
  int batch = 3;
  double step = 1e-4;
  double tolerance = 1e-4;
  /// Coordinates checked per block; 0 checks every coordinate. Large blocks
  /// are sampled, always including coordinate 0.
  std::size_t max_coords_per_block = 32;
  /// Denominator floor of the relative error, for blocks whose true
  /// gradient vanishes (e.g. the shared attention output bias).
  double denominator_floor = 1e-6;
  /// Fault injection: add `fault_offset` to coordinate 0 of this block's
  /// analytic gradient before comparing.
  std::optional<std::string> fault_block;
  double fault_offset = 2.0;
};

struct BlockCheck {
  std::string name;
  std::size_t size = 0;
  std::size_t checked = 0;
  double rel_error = 0.0;   // ||analytic - numeric|| / max(||analytic||, ||numeric||, floor)
  double max_abs_error = 0.0;
  bool passed = true;
};

struct GradcheckReport {
  std::uint64_t seed = 0;
  std::vector<BlockCheck> blocks;
  double max_rel_error = 0.0;
  std::string worst_block;
  bool passed = true;
};

/// Central finite differences over the composed fusion -> head -> composite
/// loss graph, on a random micro-batch in double precision with dropout off.
/// The batch mixes image-present and image-absent rows. Failures are
/// reported, never thrown.
GradcheckReport gradcheck(const TrainConfig& cfg, std::uint32_t text_dim,
                          std::uint32_t image_dim, std::uint64_t seed,
                          const GradcheckOptions& opts = {});

}  // namespace f2ind
