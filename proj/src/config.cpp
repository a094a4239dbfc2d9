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
#include "f2ind/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <string_view>

#include "f2ind/checkpoint.hpp"
#include "f2ind/errors.hpp"

namespace f2ind {
namespace {

using nlohmann::json;

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> known,
                    const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (auto k : known) ok = ok || it.key() == k;
    if (!ok) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

std::string path_of(const std::string& where, const char* key) {
  return where.empty() ? std::string(key) : where + "." + key;
}

void read(const json& j, const char* key, double& out, const std::string& where) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(path_of(where, key) + " must be a number");
  out = v.get<double>();
}

void read(const json& j, const char* key, int& out, const std::string& where) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(path_of(where, key) + " must be an integer");
  out = v.get<int>();
}

void read(const json& j, const char* key, std::uint64_t& out, const std::string& where) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_number_unsigned()) {
    throw ConfigError(path_of(where, key) + " must be a non-negative integer");
  }
  out = v.get<std::uint64_t>();
}

void read(const json& j, const char* key, std::uint32_t& out, const std::string& where) {
  std::uint64_t wide = out;
  read(j, key, wide, where);
  if (wide > UINT32_MAX) throw ConfigError(path_of(where, key) + " is too large");
  out = static_cast<std::uint32_t>(wide);
}

void read(const json& j, const char* key, bool& out, const std::string& where) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError(path_of(where, key) + " must be true or false");
  out = v.get<bool>();
}

const char* selection_name(EpochSelection s) {
  return s == EpochSelection::kFinal ? "final" : "best_macro_f1";
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json to_json(const TrainConfig& c) {
  json scales = json::object();
  for (int g = 0; g < kParamGroupCount; ++g) {
    scales[std::string(param_group_name(static_cast<ParamGroup>(g)))] =
        c.lr_scales.scale[static_cast<std::size_t>(g)];
  }
  return {
      {"seed", c.seed},
      {"folds", c.k_folds},
      {"epochs", c.epochs},
      {"batch_size", c.batch_size},
      {"n_anfis_inputs", c.n_anfis_inputs},
      {"mf_per_input", c.mf_per_input},
      {"proj_dim", c.proj_dim},
      {"attn_hidden", c.attn_hidden},
      {"dropout", c.dropout_rate},
      {"use_anfis", c.use_anfis},
      {"threshold", c.threshold},
      {"epoch_selection", selection_name(c.epoch_selection)},
      {"pool_predictions", c.pool_predictions},
      {"parallel_folds", c.parallel_folds},
      {"loss",
       {{"w_bce", c.loss.w_bce},
        {"w_huber", c.loss.w_huber},
        {"w_focal", c.loss.w_focal},
        {"huber_delta", c.loss.huber_delta},
        {"focal_alpha", c.loss.focal_alpha},
        {"focal_gamma", c.loss.focal_gamma},
        {"huber_minority_only", c.loss.huber_minority_only}}},
      {"schedule",
       {{"max_lr", c.schedule.max_lr},
        {"pct_start", c.schedule.pct_start},
        {"div_factor", c.schedule.div_factor},
        {"final_div_factor", c.schedule.final_div_factor}}},
      {"lr_scales", scales},
  };
}

TrainConfig train_config_from_json(const json& j, TrainConfig c) {
  require_object(j, "config");
  reject_unknown(j,
                 {"seed", "folds", "epochs", "batch_size", "n_anfis_inputs", "mf_per_input",
                  "proj_dim", "attn_hidden", "dropout", "use_anfis", "threshold",
                  "epoch_selection", "pool_predictions", "parallel_folds", "loss",
                  "schedule", "lr_scales"},
                 "config");
  const std::string w;
  read(j, "seed", c.seed, w);
  read(j, "folds", c.k_folds, w);
  read(j, "epochs", c.epochs, w);
  read(j, "batch_size", c.batch_size, w);
  read(j, "n_anfis_inputs", c.n_anfis_inputs, w);
  read(j, "mf_per_input", c.mf_per_input, w);
  read(j, "proj_dim", c.proj_dim, w);
  read(j, "attn_hidden", c.attn_hidden, w);
  read(j, "dropout", c.dropout_rate, w);
  read(j, "use_anfis", c.use_anfis, w);
  read(j, "threshold", c.threshold, w);
  read(j, "pool_predictions", c.pool_predictions, w);
  read(j, "parallel_folds", c.parallel_folds, w);
  if (j.contains("epoch_selection")) {
    const json& v = j.at("epoch_selection");
    if (v == "best_macro_f1") {
      c.epoch_selection = EpochSelection::kBestMacroF1;
    } else if (v == "final") {
      c.epoch_selection = EpochSelection::kFinal;
    } else {
      throw ConfigError("epoch_selection must be \"best_macro_f1\" or \"final\"");
    }
  }
  if (j.contains("loss")) {
    const json& l = j.at("loss");
    require_object(l, "loss");
    reject_unknown(l,
                   {"w_bce", "w_huber", "w_focal", "huber_delta", "focal_alpha",
                    "focal_gamma", "huber_minority_only"},
                   "loss");
    read(l, "w_bce", c.loss.w_bce, "loss");
    read(l, "w_huber", c.loss.w_huber, "loss");
    read(l, "w_focal", c.loss.w_focal, "loss");
    read(l, "huber_delta", c.loss.huber_delta, "loss");
    read(l, "focal_alpha", c.loss.focal_alpha, "loss");
    read(l, "focal_gamma", c.loss.focal_gamma, "loss");
    read(l, "huber_minority_only", c.loss.huber_minority_only, "loss");
  }
  if (j.contains("schedule")) {
    const json& s = j.at("schedule");
    require_object(s, "schedule");
    reject_unknown(s, {"max_lr", "pct_start", "div_factor", "final_div_factor"}, "schedule");
    read(s, "max_lr", c.schedule.max_lr, "schedule");
    read(s, "pct_start", c.schedule.pct_start, "schedule");
    read(s, "div_factor", c.schedule.div_factor, "schedule");
    read(s, "final_div_factor", c.schedule.final_div_factor, "schedule");
  }
  if (j.contains("lr_scales")) {
    const json& s = j.at("lr_scales");
    require_object(s, "lr_scales");
    for (auto it = s.begin(); it != s.end(); ++it) {
      const ParamGroup g = param_group_from_name(it.key());
      if (!it.value().is_number()) throw ConfigError("lr_scales." + it.key() + " must be a number");
      c.lr_scales[g] = it.value().get<double>();
    }
  }
  c.validate();
  return c;
}

json to_json(const SynthConfig& c) {
  return {
      {"n", c.n},
      {"fake_fraction", c.fake_fraction},
      {"missing_image_fraction", c.missing_image_fraction},
      {"separation", c.separation},
      {"seed", c.seed},
      {"text_dim", c.text_dim},
      {"image_dim", c.image_dim},
  };
}

SynthConfig synth_config_from_json(const json& j, SynthConfig c) {
  require_object(j, "synth config");
  reject_unknown(j,
                 {"n", "fake_fraction", "missing_image_fraction", "separation", "seed",
                  "text_dim", "image_dim"},
                 "synth config");
  const std::string w;
  std::uint64_t n = c.n;
  read(j, "n", n, w);
  c.n = static_cast<std::size_t>(n);
  read(j, "fake_fraction", c.fake_fraction, w);
  read(j, "missing_image_fraction", c.missing_image_fraction, w);
  read(j, "separation", c.separation, w);
  read(j, "seed", c.seed, w);
  read(j, "text_dim", c.text_dim, w);
  read(j, "image_dim", c.image_dim, w);
  return c;
}

json to_json(const MetricsReport& r) {
  return {
      {"accuracy", nullable(r.accuracy)},
      {"precision", nullable(r.precision)},
      {"recall", nullable(r.recall)},
      {"f1_fake", nullable(r.f1_fake)},
      {"f1_true", nullable(r.f1_true)},
      {"macro_f1", nullable(r.macro_f1)},
      {"roc_auc", nullable(r.roc_auc)},
      {"pr_auc", nullable(r.pr_auc)},
  };
}

namespace {

json per_class(const MetricsReport& r) {
  return {
      {"fake", {{"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1_fake},
                {"f1_undefined", r.f1_fake_undefined}}},
      {"true", {{"precision", r.precision_true}, {"recall", r.recall_true},
                {"f1", r.f1_true}, {"f1_undefined", r.f1_true_undefined}}},
      {"confusion", {{"tp", r.counts.tp}, {"fp", r.counts.fp},
                     {"tn", r.counts.tn}, {"fn", r.counts.fn}}},
  };
}

}  // namespace

json to_json(const FoldResult& f) {
  json epochs = json::array();
  for (const auto& e : f.epochs) {
    epochs.push_back({{"train_loss", e.train_loss},
                      {"val_macro_f1", e.val_macro_f1},
                      {"val_accuracy", e.val_accuracy}});
  }
  return {
      {"fold", f.fold},
      {"metrics", to_json(f.metrics)},
      {"per_class", per_class(f.metrics)},
      {"selected_epoch", f.selected_epoch},
      {"epochs", epochs},
      {"optimizer_steps", f.optimizer_steps},
      {"final_lr_multiplier", f.final_lr_multiplier},
      {"val_size", f.val_indices.size()},
      {"seconds", f.seconds},
  };
}

json to_json(const CVReport& r) {
  json folds = json::array();
  for (const auto& f : r.folds) folds.push_back(to_json(f));
  json out = {
      {"format_version", kReportFormatVersion},
      {"config", to_json(r.config)},
      {"data", {{"text_dim", r.text_dim}, {"image_dim", r.image_dim}}},
      {"parameter_count", r.parameter_count},
      {"folds", folds},
      {"mean", to_json(r.summary.mean)},
      {"std", to_json(r.summary.stddev)},
  };
  if (r.pooled) out["pooled"] = to_json(*r.pooled);
  return out;
}

json to_json(const AblationReport& r) {
  const auto with = static_cast<long long>(r.with_anfis.parameter_count);
  const auto without = static_cast<long long>(r.without_anfis.parameter_count);
  return {
      {"format_version", kReportFormatVersion},
      {"with_anfis", to_json(r.with_anfis)},
      {"without_anfis", to_json(r.without_anfis)},
      {"parameter_count_difference", with - without},
  };
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

json write_cv_outputs(CVReport& report, const std::filesystem::path& dir,
                      const std::string& stem) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  json out = to_json(report);
  json paths = json::array();
  for (auto& fold : report.folds) {
    const auto path = dir / (stem + "fold_" + std::to_string(fold.fold) + ".f2ckp");
    json meta = {
        {"format_version", kReportFormatVersion},
        {"config", to_json(report.config)},
        {"fold", fold.fold},
        {"selected_epoch", fold.selected_epoch},
        {"metrics", to_json(fold.metrics)},
    };
    save_checkpoint(path, fold.model, meta);
    paths.push_back(path.string());
  }
  out["checkpoints"] = paths;
  write_text(dir / (stem + "cv_report.json"), out.dump(2) + "\n");
  write_text(dir / (stem + "cv_report.txt"), format_cv_table(report));
  return out;
}

std::string format_cv_table(const CVReport& r) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-6s %8s %8s %8s %8s %8s %8s %8s %8s\n", "fold",
                "acc", "prec", "recall", "f1_fake", "f1_true", "macroF1", "roc_auc",
                "pr_auc");
  out += line;
  auto row = [&](const std::string& label, const MetricsReport& m) {
    std::snprintf(line, sizeof(line),
                  "%-6s %8.4f %8.4f %8.4f %8.4f %8.4f %8.4f %8.4f %8.4f\n", label.c_str(),
                  m.accuracy, m.precision, m.recall, m.f1_fake, m.f1_true, m.macro_f1,
                  m.roc_auc, m.pr_auc);
    out += line;
  };
  for (const auto& f : r.folds) row(std::to_string(f.fold), f.metrics);
  row("mean", r.summary.mean);
  row("std", r.summary.stddev);
  if (r.pooled) row("pooled", *r.pooled);
  std::snprintf(line, sizeof(line), "parameters: %zu (use_anfis=%s)\n", r.parameter_count,
                r.config.use_anfis ? "true" : "false");
  out += line;
  return out;
}

}  // namespace f2ind
