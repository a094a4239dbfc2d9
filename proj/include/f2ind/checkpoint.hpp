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

#include <filesystem>

#include "json.hpp"

#include "f2ind/model.hpp"

namespace f2ind {

// F2CKP1 checkpoint (little-endian):
//   magic "F2CKP1" | u32 format_version | u32 meta_len | meta JSON (UTF-8)
//   u32 block_count | per block: u32 name_len | name | u64 count | f64 x count
// The meta JSON carries the model spec under "model" plus caller metadata.

inline constexpr char kCheckpointMagic[6] = {'F', '2', 'C', 'K', 'P', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  Model model;
  nlohmann::json meta;
};

nlohmann::json to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, Model& model,
                     const nlohmann::json& meta = nlohmann::json::object());

/// Errors: IoError, FormatError, TruncatedError, CorruptError.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace f2ind
