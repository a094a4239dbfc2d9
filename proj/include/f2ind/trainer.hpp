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
#include <optional>
#include <string>
#include <vector>

#include "f2ind/data_model.hpp"
#include "f2ind/losses.hpp"
#include "f2ind/metrics.hpp"
#include "f2ind/model.hpp"
#include "f2ind/optim.hpp"

namespace f2ind {

enum class EpochSelection { kBestMacroF1, kFinal };

struct TrainConfig {
  std::uint64_t seed = 42;
  int k_folds = 5;
  int epochs = 5;
  int batch_size = 16;
  int n_anfis_inputs = 4;
  int mf_per_input = 2;
  int proj_dim = kDefaultProjDim;
  int attn_hidden = kDefaultAttnHidden;
  double dropout_rate = 0.3;
  bool use_anfis = true;
  double threshold = 0.5;
  EpochSelection epoch_selection = EpochSelection::kBestMacroF1;
  bool pool_predictions = false;
  int parallel_folds = 1;
  LossConfig loss;
  /// total_steps is derived per fold; the configured value is ignored.
  ScheduleConfig schedule;
  GroupScales lr_scales;

  /// Throws ConfigError.
  void validate() const;
  ModelSpec model_spec(std::uint32_t text_dim, std::uint32_t image_dim) const;
};

struct EpochStats {
  double train_loss = 0.0;  // mean over the epoch's batches
  double val_macro_f1 = 0.0;
  double val_accuracy = 0.0;
};

struct FoldResult {
  int fold = 0;
  MetricsReport metrics;          // validation split, selected epoch
  std::vector<EpochStats> epochs;
  int selected_epoch = 0;         // 0 = untrained parameters
  std::size_t optimizer_steps = 0;
  double final_lr_multiplier = 0.0;
  Model model;                    // parameter snapshot of the selected epoch
  std::vector<std::size_t> val_indices;
  std::vector<double> val_scores;
  double seconds = 0.0;
};

struct MetricSummary {
  MetricsReport mean;
  MetricsReport stddev;  // population standard deviation over folds
};

struct CVReport {
  TrainConfig config;
  std::uint32_t text_dim = 0;
  std::uint32_t image_dim = 0;
  std::size_t parameter_count = 0;
  std::vector<FoldResult> folds;
  MetricSummary summary;
  std::optional<MetricsReport> pooled;
};

struct AblationReport {
  CVReport with_anfis;
  CVReport without_anfis;
};

/// Seeds derived from TrainConfig::seed; fixed so that evaluation tools can
/// rebuild the exact fold splits.
std::uint64_t fold_split_seed(const TrainConfig& cfg);
std::uint64_t fold_model_seed(const TrainConfig& cfg, int fold);

/// ceil(train / batch) * epochs
std::size_t planned_steps(std::size_t train_size, const TrainConfig& cfg);

/// Forward pass without dropout over `indices` (all rows when empty).
struct Predictions {
  std::vector<std::uint64_t> ids;
  std::vector<std::uint8_t> labels;
  std::vector<double> prob;
  std::vector<double> attn_image;
  std::vector<double> attn_text;
};
Predictions predict(const Model& model, const Dataset& dataset,
                    std::span<const std::size_t> indices = {},
                    std::size_t batch_size = 256);

FoldResult train_fold(const Dataset& dataset, const FoldSplit& split,
                      const TrainConfig& cfg, int fold_index = 0);

CVReport cross_validate(const Dataset& dataset, const TrainConfig& cfg);

/// Runs cross_validate twice, identical except for use_anfis.
AblationReport ablate_anfis(const Dataset& dataset, const TrainConfig& cfg);

MetricSummary summarize(const std::vector<FoldResult>& folds);

}  // namespace f2ind
