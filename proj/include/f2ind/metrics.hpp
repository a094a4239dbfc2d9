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
#include <span>
#include <string>

namespace f2ind {

/// Positive class is fake news (label 1).
struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

/// Predicted positive iff score >= threshold. EmptyError on empty input.
ConfusionCounts confusion(std::span<const double> scores,
                          std::span<const std::uint8_t> labels,
                          double threshold = 0.5);

/// A zero denominator yields 0 and sets the matching flag.
struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

struct PrecisionRecallF1 {
  ClassScores fake;
  ClassScores real;
  double macro_f1 = 0.0;
};

PrecisionRecallF1 prf1(const ConfusionCounts& counts);

/// Mann-Whitney AUC with half credit for ties.
/// UndefinedMetricError unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Step-wise average precision over a ranking by descending score, ties
/// broken by ascending index. UndefinedMetricError without positives.
double pr_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;  // fake class
  double recall = 0.0;     // fake class
  double f1_fake = 0.0;
  double f1_true = 0.0;
  double macro_f1 = 0.0;
  double roc_auc = 0.0;    // NaN when undefined
  double pr_auc = 0.0;     // NaN when undefined
  double precision_true = 0.0;
  double recall_true = 0.0;
  ConfusionCounts counts;
  bool f1_fake_undefined = false;
  bool f1_true_undefined = false;
};

MetricsReport evaluate_scores(std::span<const double> scores,
                              std::span<const std::uint8_t> labels,
                              double threshold = 0.5);

/// One `key=value` line per metric, full round-trip precision.
std::string to_key_value(const MetricsReport& report);

}  // namespace f2ind
