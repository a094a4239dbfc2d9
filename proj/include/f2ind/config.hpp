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
#include <string>

#include "json.hpp"

#include "f2ind/data_model.hpp"
#include "f2ind/metrics.hpp"
#include "f2ind/trainer.hpp"

namespace f2ind {

inline constexpr int kReportFormatVersion = 1;

// Config readers overlay the given JSON object onto `base`; unknown keys
// and wrongly typed values raise ConfigError.

nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

nlohmann::json to_json(const SynthConfig& cfg);
SynthConfig synth_config_from_json(const nlohmann::json& j, SynthConfig base = {});

/// NaN metrics serialize as null.
nlohmann::json to_json(const MetricsReport& report);
nlohmann::json to_json(const FoldResult& fold);
nlohmann::json to_json(const CVReport& report);
nlohmann::json to_json(const AblationReport& report);

/// Writes <stem>cv_report.json, <stem>cv_report.txt and one
/// <stem>fold_<k>.f2ckp checkpoint per fold into `dir` (created if needed).
/// Returns the JSON report, including the checkpoint paths.
nlohmann::json write_cv_outputs(CVReport& report, const std::filesystem::path& dir,
                                const std::string& stem = "");

/// Fixed-width table: one row per fold plus mean and std rows.
std::string format_cv_table(const CVReport& report);

}  // namespace f2ind
