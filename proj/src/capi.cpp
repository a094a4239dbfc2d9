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
#include "f2ind/f2ind.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <utility>

#include "f2ind/anfis.hpp"
#include "f2ind/checkpoint.hpp"
#include "f2ind/config.hpp"
#include "f2ind/data_model.hpp"
#include "f2ind/errors.hpp"
#include "f2ind/gradcheck.hpp"
#include "f2ind/trainer.hpp"

struct f2ind_dataset {
  f2ind::Dataset data;
};

struct f2ind_model {
  f2ind::Checkpoint checkpoint;
};

namespace {

thread_local std::string g_last_error;

int fail(f2ind::ErrorCode code, const std::string& message) {
  g_last_error = message;
  return static_cast<int>(code);
}

template <typename Fn>
int guarded(Fn&& fn) noexcept {
  try {
    g_last_error.clear();
    fn();
    return F2IND_OK;
  } catch (const f2ind::Error& e) {
    return fail(e.code(), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(f2ind::ErrorCode::kConfig, std::string("invalid JSON: ") + e.what());
  } catch (const std::bad_alloc&) {
    return fail(f2ind::ErrorCode::kInternal, "out of memory");
  } catch (const std::exception& e) {
    return fail(f2ind::ErrorCode::kInternal, e.what());
  } catch (...) {
    return fail(f2ind::ErrorCode::kInternal, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw f2ind::Error(f2ind::ErrorCode::kInvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

nlohmann::json parse_config(const char* config_json) {
  if (config_json == nullptr || *config_json == '\0') return nlohmann::json::object();
  try {
    return nlohmann::json::parse(config_json);
  } catch (const nlohmann::json::parse_error& e) {
    throw f2ind::ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

f2ind::TrainConfig checkpoint_config(const f2ind::Checkpoint& ck) {
  if (ck.meta.contains("config")) return f2ind::train_config_from_json(ck.meta.at("config"));
  return {};
}

}  // namespace

extern "C" {

F2IND_API const char* f2ind_version(void) { return "1.0.0"; }

F2IND_API const char* f2ind_last_error(void) { return g_last_error.c_str(); }

F2IND_API const char* f2ind_status_name(int status) {
  return f2ind::error_code_name(static_cast<f2ind::ErrorCode>(status));
}

F2IND_API void f2ind_string_free(char* s) { std::free(s); }

F2IND_API int f2ind_dataset_read(const char* path, f2ind_dataset** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path and out must be non-null");
    auto ds = std::make_unique<f2ind_dataset>();
    ds->data = f2ind::read_embeddings(path);
    *out = ds.release();
  });
}

F2IND_API int f2ind_dataset_write(const f2ind_dataset* ds, const char* path) {
  return guarded([&] {
    require(ds != nullptr && path != nullptr, "dataset and path must be non-null");
    f2ind::write_embeddings(ds->data, path);
  });
}

F2IND_API int f2ind_dataset_synth(const char* config_json, f2ind_dataset** out) {
  return guarded([&] {
    require(out != nullptr, "out must be non-null");
    const auto cfg = f2ind::synth_config_from_json(parse_config(config_json));
    auto ds = std::make_unique<f2ind_dataset>();
    ds->data = f2ind::generate_synthetic(cfg);
    *out = ds.release();
  });
}

F2IND_API int f2ind_dataset_info_get(const f2ind_dataset* ds, f2ind_dataset_info* out) {
  return guarded([&] {
    require(ds != nullptr && out != nullptr, "dataset and out must be non-null");
    out->n_samples = ds->data.size();
    out->n_fake = ds->data.count_label(1);
    out->n_true = ds->data.count_label(0);
    out->n_missing_image = ds->data.count_missing_images();
    out->text_dim = ds->data.text_dim;
    out->image_dim = ds->data.image_dim;
  });
}

F2IND_API int f2ind_dataset_fold(const f2ind_dataset* ds, const char* config_json, int fold,
                                 int validation, f2ind_dataset** out) {
  return guarded([&] {
    require(ds != nullptr && out != nullptr, "dataset and out must be non-null");
    const auto cfg = f2ind::train_config_from_json(parse_config(config_json));
    const auto splits = f2ind::stratified_kfold(ds->data, cfg.k_folds, f2ind::fold_split_seed(cfg));
    if (fold < 0 || fold >= static_cast<int>(splits.size())) {
      throw f2ind::IndexError("fold index out of range");
    }
    const auto& split = splits[static_cast<std::size_t>(fold)];
    auto sub = std::make_unique<f2ind_dataset>();
    sub->data = ds->data.subset(validation != 0 ? split.val_indices : split.train_indices);
    *out = sub.release();
  });
}

F2IND_API void f2ind_dataset_free(f2ind_dataset* ds) { delete ds; }

F2IND_API int f2ind_default_config(char** config_json) {
  return guarded([&] {
    require(config_json != nullptr, "out must be non-null");
    *config_json = dup_string(f2ind::to_json(f2ind::TrainConfig{}).dump(2));
  });
}

F2IND_API int f2ind_train(const f2ind_dataset* ds, const char* config_json,
                          const char* out_dir, char** report_json) {
  return guarded([&] {
    require(ds != nullptr, "dataset must be non-null");
    const auto cfg = f2ind::train_config_from_json(parse_config(config_json));
    f2ind::CVReport report = f2ind::cross_validate(ds->data, cfg);
    nlohmann::json j = out_dir != nullptr ? f2ind::write_cv_outputs(report, out_dir)
                                          : f2ind::to_json(report);
    if (report_json != nullptr) *report_json = dup_string(j.dump(2));
  });
}

F2IND_API int f2ind_ablate(const f2ind_dataset* ds, const char* config_json,
                           const char* out_dir, char** report_json) {
  return guarded([&] {
    require(ds != nullptr, "dataset must be non-null");
    const auto cfg = f2ind::train_config_from_json(parse_config(config_json));
    f2ind::AblationReport report = f2ind::ablate_anfis(ds->data, cfg);
    nlohmann::json j = f2ind::to_json(report);
    if (out_dir != nullptr) {
      j["with_anfis"] = f2ind::write_cv_outputs(report.with_anfis, out_dir, "with_anfis_");
      j["without_anfis"] =
          f2ind::write_cv_outputs(report.without_anfis, out_dir, "without_anfis_");
      const std::string path = (std::filesystem::path(out_dir) / "ablation_report.json").string();
      std::ofstream f(path, std::ios::trunc);
      if (!f) throw f2ind::IoError("cannot open for writing: " + path);
      f << j.dump(2) << '\n';
      if (!f) throw f2ind::IoError("write failed: " + path);
    }
    if (report_json != nullptr) *report_json = dup_string(j.dump(2));
  });
}

F2IND_API int f2ind_model_load(const char* path, f2ind_model** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path and out must be non-null");
    auto m = std::make_unique<f2ind_model>();
    m->checkpoint = f2ind::load_checkpoint(path);
    *out = m.release();
  });
}

F2IND_API int f2ind_model_meta(const f2ind_model* model, char** meta_json) {
  return guarded([&] {
    require(model != nullptr && meta_json != nullptr, "model and out must be non-null");
    *meta_json = dup_string(model->checkpoint.meta.dump(2));
  });
}

F2IND_API void f2ind_model_free(f2ind_model* model) { delete model; }

F2IND_API int f2ind_evaluate(const f2ind_model* model, const f2ind_dataset* ds,
                             double threshold, char** report_json) {
  return guarded([&] {
    require(model != nullptr && ds != nullptr && report_json != nullptr,
            "model, dataset and out must be non-null");
    const auto& ck = model->checkpoint;
    const double thr = threshold < 0.0 ? checkpoint_config(ck).threshold : threshold;
    const f2ind::Predictions pred = f2ind::predict(ck.model, ds->data);
    const f2ind::MetricsReport m = f2ind::evaluate_scores(pred.prob, pred.labels, thr);
    nlohmann::json j = {
        {"format_version", f2ind::kReportFormatVersion},
        {"threshold", thr},
        {"n_samples", pred.prob.size()},
        {"metrics", f2ind::to_json(m)},
        {"key_value", f2ind::to_key_value(m)},
    };
    if (ck.meta.contains("config")) j["config"] = ck.meta.at("config");
    *report_json = dup_string(j.dump(2));
  });
}

F2IND_API int f2ind_predict(const f2ind_model* model, const f2ind_dataset* ds,
                            f2ind_prediction* out, size_t capacity, size_t* written) {
  return guarded([&] {
    require(model != nullptr && ds != nullptr && written != nullptr,
            "model, dataset and written must be non-null");
    require(out != nullptr || capacity == 0, "out must be non-null when capacity > 0");
    const f2ind::Predictions pred = f2ind::predict(model->checkpoint.model, ds->data);
    const std::size_t n = std::min(capacity, pred.prob.size());
    for (std::size_t i = 0; i < n; ++i) {
      out[i].sample_id = pred.ids[i];
      out[i].label = pred.labels[i];
      out[i].prob = pred.prob[i];
      out[i].attn_image = pred.attn_image[i];
      out[i].attn_text = pred.attn_text[i];
    }
    *written = pred.prob.size();
  });
}

F2IND_API int f2ind_inspect(const f2ind_model* model, const f2ind_dataset* ds,
                            char** rule_tsv) {
  return guarded([&] {
    require(model != nullptr && ds != nullptr && rule_tsv != nullptr,
            "model, dataset and out must be non-null");
    const f2ind::Model& m = model->checkpoint.model;
    if (!m.spec.use_anfis) throw f2ind::ConfigError("checkpoint has no ANFIS head (ablation model)");
    if (ds->data.samples.empty()) throw f2ind::EmptyError("inspect needs at least one sample");
    f2ind::Matrix inputs(static_cast<Eigen::Index>(ds->data.size()), m.spec.dims.head_out);
    Eigen::Index row = 0;
    for (std::size_t start = 0; start < ds->data.size(); start += 256) {
      std::vector<std::size_t> idx;
      for (std::size_t i = start; i < std::min(ds->data.size(), start + 256); ++i) idx.push_back(i);
      const f2ind::Batch batch = f2ind::make_batch(ds->data, idx);
      const f2ind::ModelForward fwd = f2ind::model_forward(m, batch, nullptr);
      inputs.middleRows(row, fwd.head_input.rows()) = fwd.head_input;
      row += fwd.head_input.rows();
    }
    *rule_tsv = dup_string(f2ind::rule_report_tsv(f2ind::rule_report(m.anfis, inputs)));
  });
}

F2IND_API int f2ind_gradcheck(const char* config_json, uint32_t text_dim, uint32_t image_dim,
                              uint64_t seed, const char* fault_block, int* passed,
                              char** report_json) {
  return guarded([&] {
    require(passed != nullptr, "passed must be non-null");
    const auto cfg = f2ind::train_config_from_json(parse_config(config_json));
    f2ind::GradcheckOptions opts;
    if (fault_block != nullptr) opts.fault_block = fault_block;
    const f2ind::GradcheckReport r = f2ind::gradcheck(cfg, text_dim, image_dim, seed, opts);
    *passed = r.passed ? 1 : 0;
    if (report_json != nullptr) {
      nlohmann::json blocks = nlohmann::json::array();
      for (const auto& b : r.blocks) {
        blocks.push_back({{"name", b.name},
                          {"size", b.size},
                          {"checked", b.checked},
                          {"rel_error", b.rel_error},
                          {"max_abs_error", b.max_abs_error},
                          {"passed", b.passed}});
      }
      nlohmann::json j = {
          {"format_version", f2ind::kReportFormatVersion},
          {"seed", r.seed},
          {"passed", r.passed},
          {"max_rel_error", r.max_rel_error},
          {"worst_block", r.worst_block},
          {"tolerance", opts.tolerance},
          {"step", opts.step},
          {"blocks", blocks},
          {"config", f2ind::to_json(cfg)},
      };
      *report_json = dup_string(j.dump(2));
    }
  });
}

}  // extern "C"
