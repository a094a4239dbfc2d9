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
#include "f2ind/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <sstream>
#include <thread>

#include "f2ind/errors.hpp"
#include "f2ind/log.hpp"
#include "f2ind/rng.hpp"

namespace f2ind {
namespace {

constexpr std::uint64_t kSplitStream = 0;
constexpr std::uint64_t kModelStream = 100;
constexpr std::uint64_t kDropoutStream = 200;
constexpr std::uint64_t kShuffleStream = 300;

std::array<double, kParamGroupCount> group_rates(const TrainConfig& cfg, double multiplier) {
  std::array<double, kParamGroupCount> lr{};
  for (int g = 0; g < kParamGroupCount; ++g) {
    lr[static_cast<std::size_t>(g)] =
        cfg.schedule.max_lr * multiplier * cfg.lr_scales.scale[static_cast<std::size_t>(g)];
  }
  return lr;
}

MetricsReport evaluate_split(const Model& model, const Dataset& dataset,
                             std::span<const std::size_t> indices, double threshold,
                             std::vector<double>* scores_out) {
  const Predictions pred = predict(model, dataset, indices);
  if (scores_out != nullptr) *scores_out = pred.prob;
  return evaluate_scores(pred.prob, pred.labels, threshold);
}

void check_disjoint(const FoldSplit& split, std::size_t n) {
  std::vector<char> seen(n, 0);
  for (std::size_t i : split.train_indices) {
    if (i >= n) throw IndexError("train index out of range");
    seen[i] = 1;
  }
  for (std::size_t i : split.val_indices) {
    if (i >= n) throw IndexError("validation index out of range");
    if (seen[i] != 0) throw ConfigError("validation index also appears in training split");
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (k_folds < 2) throw ConfigError("folds must be >= 2");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batch_size <= 0) throw ConfigError("batch_size must be positive");
  rule_count(n_anfis_inputs, mf_per_input);
  if (proj_dim <= 0 || attn_hidden <= 0) throw ConfigError("fusion widths must be positive");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("threshold must lie in [0, 1]");
  if (parallel_folds < 1) throw ConfigError("parallel_folds must be >= 1");
  loss.validate();
  ScheduleConfig probe = schedule;
  probe.total_steps = 2;
  probe.validate();
  lr_scales.validate();
}

ModelSpec TrainConfig::model_spec(std::uint32_t text_dim, std::uint32_t image_dim) const {
  ModelSpec spec;
  spec.dims.text_dim = static_cast<int>(text_dim);
  spec.dims.image_dim = static_cast<int>(image_dim);
  spec.dims.proj_dim = proj_dim;
  spec.dims.attn_hidden = attn_hidden;
  spec.dims.head_out = n_anfis_inputs;
  spec.mf_per_input = mf_per_input;
  spec.dropout_rate = dropout_rate;
  spec.use_anfis = use_anfis;
  return spec;
}

std::uint64_t fold_split_seed(const TrainConfig& cfg) {
  return derive_seed(cfg.seed, kSplitStream);
}

std::uint64_t fold_model_seed(const TrainConfig& cfg, int fold) {
  return derive_seed(cfg.seed, kModelStream + static_cast<std::uint64_t>(fold));
}

std::size_t planned_steps(std::size_t train_size, const TrainConfig& cfg) {
  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  return static_cast<std::size_t>(cfg.epochs) * ((train_size + bs - 1) / bs);
}

Predictions predict(const Model& model, const Dataset& dataset,
                    std::span<const std::size_t> indices, std::size_t batch_size) {
  std::vector<std::size_t> all;
  if (indices.empty()) {
    all.resize(dataset.samples.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    indices = all;
  }
  Predictions out;
  out.ids.reserve(indices.size());
  out.labels.reserve(indices.size());
  out.prob.reserve(indices.size());
  out.attn_image.reserve(indices.size());
  out.attn_text.reserve(indices.size());
  for (std::size_t start = 0; start < indices.size(); start += batch_size) {
    const std::size_t len = std::min(batch_size, indices.size() - start);
    const Batch batch = make_batch(dataset, indices.subspan(start, len));
    const ModelForward fwd = model_forward(model, batch, nullptr);
    for (Eigen::Index r = 0; r < batch.size(); ++r) {
      out.ids.push_back(batch.ids[static_cast<std::size_t>(r)]);
      out.labels.push_back(static_cast<std::uint8_t>(batch.labels[r]));
      out.prob.push_back(fwd.prob[r]);
      out.attn_image.push_back(fwd.attn_weights(r, kImageSlot));
      out.attn_text.push_back(fwd.attn_weights(r, kTextSlot));
    }
  }
  return out;
}

FoldResult train_fold(const Dataset& dataset, const FoldSplit& split,
                      const TrainConfig& cfg, int fold_index) {
  cfg.validate();
  if (dataset.samples.empty()) throw ConfigError("cannot train on an empty dataset");
  if (split.train_indices.empty() || split.val_indices.empty()) {
    throw ConfigError("fold split needs non-empty train and validation sets");
  }
  check_disjoint(split, dataset.samples.size());
  const auto t0 = std::chrono::steady_clock::now();

  FoldResult res;
  res.fold = fold_index;
  res.val_indices = split.val_indices;

  Model model = init_model(cfg.model_spec(dataset.text_dim, dataset.image_dim),
                           fold_model_seed(cfg, fold_index));
  Rng dropout_rng(derive_seed(cfg.seed, kDropoutStream + static_cast<std::uint64_t>(fold_index)));
  const std::uint64_t shuffle_base =
      derive_seed(cfg.seed, kShuffleStream + static_cast<std::uint64_t>(fold_index));

  const std::size_t total = planned_steps(split.train_indices.size(), cfg);
  ScheduleConfig sched = cfg.schedule;
  sched.total_steps = std::max<std::size_t>(total, 2);

  std::vector<ParamView> param_blocks = model.blocks();
  AdamState adam = make_adam_state(param_blocks);

  Model best = model;
  std::vector<double> best_scores;
  MetricsReport best_metrics = evaluate_split(model, dataset, split.val_indices,
                                              cfg.threshold, &best_scores);
  int best_epoch = 0;
  double best_f1 = -1.0;

  std::size_t step = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto batches = make_batches(split.train_indices, cfg.batch_size, true,
                                      derive_seed(shuffle_base, static_cast<std::uint64_t>(epoch)));
    double loss_sum = 0.0;
    for (const auto& idx : batches) {
      const Batch batch = make_batch(dataset, idx);
      LossAndGrad lg = loss_and_grad(model, batch, cfg.loss, &dropout_rng);
      if (!std::isfinite(lg.loss)) {
        std::ostringstream os;
        os << "non-finite loss in fold " << fold_index << ", epoch " << epoch
           << ", step " << step;
        throw NumericError(os.str());
      }
      const double mult = onecycle_lr(std::min(step, sched.total_steps), sched);
      try {
        adam_step(adam, param_blocks, lg.grads.blocks(), group_rates(cfg, mult));
      } catch (const NumericError& e) {
        std::ostringstream os;
        os << e.what() << " (fold " << fold_index << ", epoch " << epoch << ", step "
           << step << ")";
        throw NumericError(os.str());
      }
      res.final_lr_multiplier = mult;
      loss_sum += lg.loss;
      ++step;
    }

    EpochStats stats;
    stats.train_loss = batches.empty() ? 0.0 : loss_sum / static_cast<double>(batches.size());
    std::vector<double> scores;
    const MetricsReport m =
        evaluate_split(model, dataset, split.val_indices, cfg.threshold, &scores);
    stats.val_macro_f1 = m.macro_f1;
    stats.val_accuracy = m.accuracy;
    res.epochs.push_back(stats);
    log::info("fold ", fold_index, " epoch ", epoch, " loss ", stats.train_loss,
              " val_acc ", m.accuracy, " val_macro_f1 ", m.macro_f1);

    const bool take = cfg.epoch_selection == EpochSelection::kFinal
                          ? epoch == cfg.epochs
                          : m.macro_f1 > best_f1;
    if (take) {
      best_f1 = m.macro_f1;
      best = model;
      best_metrics = m;
      best_scores = std::move(scores);
      best_epoch = epoch;
    }
  }

  res.optimizer_steps = step;
  res.model = std::move(best);
  res.metrics = best_metrics;
  res.val_scores = std::move(best_scores);
  res.selected_epoch = best_epoch;
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

MetricSummary summarize(const std::vector<FoldResult>& folds) {
  MetricSummary s;
  if (folds.empty()) return s;
  const double k = static_cast<double>(folds.size());
  // Shifted by the first fold so identical folds give exactly zero spread.
  auto apply = [&](auto member) {
    const double ref = folds.front().metrics.*member;
    double sum = 0.0;
    double sq = 0.0;
    for (const auto& f : folds) {
      const double d = f.metrics.*member - ref;
      sum += d;
      sq += d * d;
    }
    s.mean.*member = ref + sum / k;
    s.stddev.*member = std::sqrt(std::max(0.0, sq - sum * sum / k) / k);
  };
  apply(&MetricsReport::accuracy);
  apply(&MetricsReport::precision);
  apply(&MetricsReport::recall);
  apply(&MetricsReport::f1_fake);
  apply(&MetricsReport::f1_true);
  apply(&MetricsReport::macro_f1);
  apply(&MetricsReport::roc_auc);
  apply(&MetricsReport::pr_auc);
  apply(&MetricsReport::precision_true);
  apply(&MetricsReport::recall_true);
  for (const auto& f : folds) {
    s.mean.counts.tp += f.metrics.counts.tp;
    s.mean.counts.fp += f.metrics.counts.fp;
    s.mean.counts.tn += f.metrics.counts.tn;
    s.mean.counts.fn += f.metrics.counts.fn;
  }
  return s;
}

CVReport cross_validate(const Dataset& dataset, const TrainConfig& cfg) {
  cfg.validate();
  const std::vector<FoldSplit> splits =
      stratified_kfold(dataset, cfg.k_folds, fold_split_seed(cfg));

  CVReport report;
  report.config = cfg;
  report.text_dim = dataset.text_dim;
  report.image_dim = dataset.image_dim;
  report.folds.resize(splits.size());

  const int workers = std::min<int>(cfg.parallel_folds, static_cast<int>(splits.size()));
  if (workers <= 1) {
    for (std::size_t f = 0; f < splits.size(); ++f) {
      report.folds[f] = train_fold(dataset, splits[f], cfg, static_cast<int>(f));
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(splits.size());
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t f = next++; f < splits.size(); f = next++) {
          try {
            report.folds[f] = train_fold(dataset, splits[f], cfg, static_cast<int>(f));
          } catch (...) {
            errors[f] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  report.parameter_count = report.folds.front().model.parameter_count();
  report.summary = summarize(report.folds);
  if (cfg.pool_predictions) {
    std::vector<double> scores;
    std::vector<std::uint8_t> labels;
    for (const auto& f : report.folds) {
      for (std::size_t i = 0; i < f.val_indices.size(); ++i) {
        scores.push_back(f.val_scores[i]);
        labels.push_back(dataset.samples[f.val_indices[i]].label);
      }
    }
    report.pooled = evaluate_scores(scores, labels, cfg.threshold);
  }
  return report;
}

AblationReport ablate_anfis(const Dataset& dataset, const TrainConfig& cfg) {
  AblationReport out;
  TrainConfig with = cfg;
  with.use_anfis = true;
  TrainConfig without = cfg;
  without.use_anfis = false;
  out.with_anfis = cross_validate(dataset, with);
  out.without_anfis = cross_validate(dataset, without);
  return out;
}

}  // namespace f2ind
