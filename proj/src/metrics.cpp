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
#include "f2ind/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include "f2ind/errors.hpp"

namespace f2ind {
namespace {

void check_inputs(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw ShapeError("metrics: score/label length mismatch");
  if (scores.empty()) throw EmptyError("metrics: empty input");
  for (double s : scores) {
    if (std::isnan(s)) throw NumericError("metrics: NaN score");
  }
  for (std::uint8_t l : labels) {
    if (l > 1) throw ShapeError("metrics: labels must be 0 or 1");
  }
}

ClassScores class_scores(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  ClassScores s;
  if (tp + fp == 0) {
    s.precision_undefined = true;
  } else {
    s.precision = double(tp) / double(tp + fp);
  }
  if (tp + fn == 0) {
    s.recall_undefined = true;
  } else {
    s.recall = double(tp) / double(tp + fn);
  }
  if (s.precision + s.recall == 0.0) {
    s.f1_undefined = true;
  } else {
    s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  }
  return s;
}

std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

ConfusionCounts confusion(std::span<const double> scores,
                          std::span<const std::uint8_t> labels, double threshold) {
  check_inputs(scores, labels);
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i] == 1) {
      (predicted ? c.tp : c.fn) += 1;
    } else {
      (predicted ? c.fp : c.tn) += 1;
    }
  }
  return c;
}

PrecisionRecallF1 prf1(const ConfusionCounts& counts) {
  PrecisionRecallF1 r;
  r.fake = class_scores(counts.tp, counts.fp, counts.fn);
  // Swap roles: true news as the positive class.
  r.real = class_scores(counts.tn, counts.fn, counts.fp);
  r.macro_f1 = 0.5 * (r.fake.f1 + r.real.f1);
  return r;
}

double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_inputs(scores, labels);
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw UndefinedMetricError("roc_auc needs both classes present");
  }
  const std::vector<std::size_t> order = descending_order(scores);
  // Sweep thresholds from high to low, one step per distinct score, and
  // integrate TPR over FPR with the trapezoid rule.
  double area = 0.0;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    std::uint64_t dtp = 0;
    std::uint64_t dfp = 0;
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] == 1 ? dtp : dfp) += 1;
      ++i;
    }
    area += double(dfp) * (double(tp) + 0.5 * double(dtp));
    tp += dtp;
    fp += dfp;
  }
  return area / (double(positives) * double(negatives));
}

double pr_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_inputs(scores, labels);
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (positives == 0) throw UndefinedMetricError("pr_auc needs at least one positive");
  const std::vector<std::size_t> order = descending_order(scores);
  double ap = 0.0;
  std::size_t tp = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (labels[order[rank]] != 1) continue;
    ++tp;
    ap += double(tp) / double(rank + 1);
  }
  return ap / double(positives);
}

MetricsReport evaluate_scores(std::span<const double> scores,
                              std::span<const std::uint8_t> labels, double threshold) {
  MetricsReport r;
  r.counts = confusion(scores, labels, threshold);
  const PrecisionRecallF1 p = prf1(r.counts);
  r.accuracy = double(r.counts.tp + r.counts.tn) / double(r.counts.total());
  r.precision = p.fake.precision;
  r.recall = p.fake.recall;
  r.f1_fake = p.fake.f1;
  r.f1_true = p.real.f1;
  r.macro_f1 = p.macro_f1;
  r.precision_true = p.real.precision;
  r.recall_true = p.real.recall;
  r.f1_fake_undefined = p.fake.f1_undefined;
  r.f1_true_undefined = p.real.f1_undefined;
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  try {
    r.roc_auc = roc_auc(scores, labels);
  } catch (const UndefinedMetricError&) {
    r.roc_auc = nan;
  }
  try {
    r.pr_auc = pr_auc(scores, labels);
  } catch (const UndefinedMetricError&) {
    r.pr_auc = nan;
  }
  return r;
}

std::string to_key_value(const MetricsReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "accuracy=" << r.accuracy << '\n'
     << "precision=" << r.precision << '\n'
     << "recall=" << r.recall << '\n'
     << "f1_fake=" << r.f1_fake << '\n'
     << "f1_true=" << r.f1_true << '\n'
     << "macro_f1=" << r.macro_f1 << '\n'
     << "roc_auc=" << r.roc_auc << '\n'
     << "pr_auc=" << r.pr_auc << '\n'
     << "precision_true=" << r.precision_true << '\n'
     << "recall_true=" << r.recall_true << '\n'
     << "tp=" << r.counts.tp << '\n'
     << "fp=" << r.counts.fp << '\n'
     << "tn=" << r.counts.tn << '\n'
     << "fn=" << r.counts.fn << '\n';
  return os.str();
}

}  // namespace f2ind
