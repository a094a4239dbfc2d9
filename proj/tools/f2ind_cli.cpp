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
// f2ind command-line tool. Talks to the library only through f2ind.h.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "f2ind/f2ind.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitVerify = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kFormatVersion = 1;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ApiError : std::runtime_error {
  int status;
  ApiError(int s, const std::string& what) : std::runtime_error(what), status(s) {}
};

void check(int status, const char* what) {
  if (status != F2IND_OK) {
    throw ApiError(status, std::string(what) + ": " + f2ind_status_name(status) + ": " +
                               f2ind_last_error());
  }
}

int exit_code_for(int status) {
  switch (status) {
    case F2IND_ERR_CONFIG:
    case F2IND_ERR_INVALID_ARGUMENT:
      return kExitUsage;
    case F2IND_ERR_IO:
    case F2IND_ERR_FORMAT:
    case F2IND_ERR_TRUNCATED:
    case F2IND_ERR_CORRUPT:
      return kExitIo;
    default:
      return kExitVerify;
  }
}

struct DatasetDeleter {
  void operator()(f2ind_dataset* d) const { f2ind_dataset_free(d); }
};
struct ModelDeleter {
  void operator()(f2ind_model* m) const { f2ind_model_free(m); }
};
struct StringDeleter {
  void operator()(char* s) const { f2ind_string_free(s); }
};
using DatasetPtr = std::unique_ptr<f2ind_dataset, DatasetDeleter>;
using ModelPtr = std::unique_ptr<f2ind_model, ModelDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

DatasetPtr load_dataset(const std::string& path) {
  f2ind_dataset* ds = nullptr;
  check(f2ind_dataset_read(path.c_str(), &ds), "reading embeddings");
  return DatasetPtr(ds);
}

ModelPtr load_model(const std::string& path) {
  f2ind_model* m = nullptr;
  check(f2ind_model_load(path.c_str(), &m), "loading checkpoint");
  return ModelPtr(m);
}

json take_json(char* raw) {
  StringPtr owned(raw);
  return json::parse(owned.get());
}

json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ApiError(F2IND_ERR_IO, "cannot open config file " + path);
  try {
    json j = json::parse(in);
    if (!j.is_object()) throw UsageError("config file must hold a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw UsageError("config file " + path + " is not valid JSON: " + e.what());
  }
}

// Path-like keys the CLI consumes itself; everything else goes to the library.
std::optional<std::string> take_string(json& cfg, const char* key) {
  if (!cfg.contains(key)) return std::nullopt;
  if (!cfg[key].is_string()) throw UsageError(std::string("config key '") + key + "' must be a string");
  std::string v = cfg[key].get<std::string>();
  cfg.erase(key);
  return v;
}

struct TrainFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> folds;
  std::optional<int> epochs;
  std::optional<int> batch_size;
  std::optional<int> n_inputs;
  std::optional<int> mf;
  std::optional<int> proj_dim;
  std::optional<int> attn_hidden;
  std::optional<double> dropout;
  std::optional<double> max_lr;
  std::optional<int> parallel_folds;
  std::string loss_weights;
  bool no_anfis = false;
  bool pool = false;
  std::string epoch_selection;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Master seed");
  cmd->add_option("--folds", f.folds, "Number of stratified folds");
  cmd->add_option("--epochs", f.epochs, "Epochs per fold");
  cmd->add_option("--batch-size", f.batch_size, "Mini-batch size");
  cmd->add_option("--n-anfis-inputs", f.n_inputs, "ANFIS input count n");
  cmd->add_option("--mf-per-input", f.mf, "Gaussian membership functions per input");
  cmd->add_option("--proj-dim", f.proj_dim, "Shared projection width");
  cmd->add_option("--attn-hidden", f.attn_hidden, "Attention MLP hidden width");
  cmd->add_option("--dropout", f.dropout, "Dropout on the text embedding");
  cmd->add_option("--max-lr", f.max_lr, "Peak learning rate of the one-cycle schedule");
  cmd->add_option("--parallel-folds", f.parallel_folds, "Folds trained concurrently");
  cmd->add_option("--loss-weights", f.loss_weights, "Weights bce,huber,focal");
  cmd->add_option("--epoch-selection", f.epoch_selection, "best_macro_f1 or final");
  cmd->add_flag("--no-anfis", f.no_anfis, "Replace the ANFIS head with an affine map");
  cmd->add_flag("--pool", f.pool, "Also report metrics over pooled fold predictions");
}

// Merges config file and flags; returns the library config plus CLI paths.
json build_train_config(const TrainFlags& f, json* paths) {
  json cfg = f.config_path.empty() ? json::object() : read_config_file(f.config_path);
  json p = json::object();
  for (const char* key : {"data", "out", "checkpoint"}) {
    if (auto v = take_string(cfg, key)) p[key] = *v;
  }
  if (f.seed) cfg["seed"] = *f.seed;
  if (f.folds) cfg["folds"] = *f.folds;
  if (f.epochs) cfg["epochs"] = *f.epochs;
  if (f.batch_size) cfg["batch_size"] = *f.batch_size;
  if (f.n_inputs) cfg["n_anfis_inputs"] = *f.n_inputs;
  if (f.mf) cfg["mf_per_input"] = *f.mf;
  if (f.proj_dim) cfg["proj_dim"] = *f.proj_dim;
  if (f.attn_hidden) cfg["attn_hidden"] = *f.attn_hidden;
  if (f.dropout) cfg["dropout"] = *f.dropout;
  if (f.parallel_folds) cfg["parallel_folds"] = *f.parallel_folds;
  if (f.max_lr) cfg["schedule"]["max_lr"] = *f.max_lr;
  if (f.no_anfis) cfg["use_anfis"] = false;
  if (f.pool) cfg["pool_predictions"] = true;
  if (!f.epoch_selection.empty()) cfg["epoch_selection"] = f.epoch_selection;
  if (!f.loss_weights.empty()) {
    std::vector<double> w;
    std::stringstream ss(f.loss_weights);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        w.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw UsageError("--loss-weights expects three numbers bce,huber,focal");
      }
    }
    if (w.size() != 3) throw UsageError("--loss-weights expects three numbers bce,huber,focal");
    cfg["loss"]["w_bce"] = w[0];
    cfg["loss"]["w_huber"] = w[1];
    cfg["loss"]["w_focal"] = w[2];
  }
  if (paths != nullptr) *paths = p;
  return cfg;
}

void print_summary(const json& report, std::ostream& os) {
  const json& mean = report.at("mean");
  os << "use_anfis=" << report.at("config").at("use_anfis")
     << " parameters=" << report.at("parameter_count") << '\n';
  for (const auto& fold : report.at("folds")) {
    const json& m = fold.at("metrics");
    os << "fold " << fold.at("fold") << ": accuracy=" << m.at("accuracy")
       << " macro_f1=" << m.at("macro_f1") << " roc_auc=" << m.at("roc_auc")
       << " pr_auc=" << m.at("pr_auc") << '\n';
  }
  os << "mean: accuracy=" << mean.at("accuracy") << " macro_f1=" << mean.at("macro_f1")
     << " roc_auc=" << mean.at("roc_auc") << " pr_auc=" << mean.at("pr_auc") << '\n';
}

std::string config_comment(const json& cfg) {
  return "# format_version=" + std::to_string(kFormatVersion) + "\n# config=" + cfg.dump() + "\n";
}

json checkpoint_meta(const f2ind_model* model) {
  char* raw = nullptr;
  check(f2ind_model_meta(model, &raw), "reading checkpoint metadata");
  return take_json(raw);
}

// The validation split the checkpoint's fold was scored on.
DatasetPtr validation_split(const f2ind_dataset* ds, const json& meta) {
  if (!meta.contains("fold") || !meta.contains("config")) {
    throw UsageError("checkpoint carries no fold information; drop --val-split");
  }
  f2ind_dataset* sub = nullptr;
  const std::string cfg = meta.at("config").dump();
  check(f2ind_dataset_fold(ds, cfg.c_str(), meta.at("fold").get<int>(), 1, &sub),
        "rebuilding validation split");
  return DatasetPtr(sub);
}

int run(int argc, char** argv) {
  CLI::App app{"f2ind: attention-fused neuro-fuzzy classifier over text/image embeddings"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(f2ind_version()));

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic embedding file");
  std::string synth_config;
  std::string synth_out;
  std::optional<std::uint64_t> synth_n;
  std::optional<double> synth_fake;
  std::optional<double> synth_missing;
  std::optional<double> synth_sep;
  std::optional<std::uint64_t> synth_seed;
  std::optional<std::uint32_t> synth_text_dim;
  std::optional<std::uint32_t> synth_image_dim;
  synth->add_option("--config", synth_config, "JSON config file")->check(CLI::ExistingFile);
  synth->add_option("--out", synth_out, "Output F2EMB1 file");
  synth->add_option("--n", synth_n, "Number of samples");
  synth->add_option("--fake-fraction", synth_fake, "Fraction of fake samples, in (0,1)");
  synth->add_option("--missing-image-fraction", synth_missing,
                    "Fraction of samples without an image, in [0,1]");
  synth->add_option("--separation", synth_sep, "Class mean shift along one direction");
  synth->add_option("--seed", synth_seed, "Random seed");
  synth->add_option("--text-dim", synth_text_dim, "Text embedding width");
  synth->add_option("--image-dim", synth_image_dim, "Image embedding width");

  // train
  auto* train = app.add_subcommand("train", "Stratified k-fold training and evaluation");
  TrainFlags train_flags;
  std::string train_data;
  std::string train_out;
  bool train_ablate = false;
  add_train_flags(train, train_flags);
  train->add_option("--data", train_data, "Input F2EMB1 file");
  train->add_option("--out", train_out, "Output directory for reports and checkpoints");
  train->add_flag("--ablate", train_ablate, "Run both the ANFIS and the affine head");

  // eval
  auto* eval = app.add_subcommand("eval", "Score a checkpoint on an embedding file");
  std::string eval_ckpt;
  std::string eval_data;
  bool eval_val_split = false;
  double eval_threshold = -1.0;
  eval->add_option("--checkpoint", eval_ckpt, "F2CKP1 checkpoint")->required();
  eval->add_option("--data", eval_data, "F2EMB1 file")->required();
  eval->add_flag("--val-split", eval_val_split,
                 "Restrict to the validation split of the checkpoint's fold");
  eval->add_option("--threshold", eval_threshold, "Decision threshold (default: checkpoint's)");

  // predict
  auto* predict = app.add_subcommand("predict", "Per-sample probabilities and attention");
  std::string pred_ckpt;
  std::string pred_data;
  std::string pred_out;
  predict->add_option("--checkpoint", pred_ckpt, "F2CKP1 checkpoint")->required();
  predict->add_option("--data", pred_data, "F2EMB1 file")->required();
  predict->add_option("--out", pred_out, "Write TSV here instead of stdout");

  // gradcheck
  auto* grad = app.add_subcommand("gradcheck", "Finite-difference gradient verification");
  TrainFlags grad_flags;
  int grad_seeds = 1;
  std::uint32_t grad_text_dim = 768;
  std::uint32_t grad_image_dim = 2048;
  std::string grad_fault;
  add_train_flags(grad, grad_flags);
  grad->add_option("--seeds", grad_seeds, "Number of consecutive seeds to check")
      ->check(CLI::PositiveNumber);
  grad->add_option("--text-dim", grad_text_dim, "Text embedding width");
  grad->add_option("--image-dim", grad_image_dim, "Image embedding width");
  grad->add_option("--inject-fault", grad_fault,
                   "Corrupt this parameter block's gradient (e.g. anfis.b)");

  // inspect
  auto* inspect = app.add_subcommand("inspect", "Per-rule firing and contribution table");
  std::string insp_ckpt;
  std::string insp_data;
  inspect->add_option("--checkpoint", insp_ckpt, "F2CKP1 checkpoint")->required();
  inspect->add_option("--data", insp_data, "F2EMB1 file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (synth->parsed()) {
    json cfg = synth_config.empty() ? json::object() : read_config_file(synth_config);
    std::string out = take_string(cfg, "out").value_or("");
    if (cfg.contains("synth")) cfg = cfg.at("synth");
    if (!synth_out.empty()) out = synth_out;
    if (out.empty()) throw UsageError("synth: --out is required");
    if (synth_n) cfg["n"] = *synth_n;
    if (synth_fake) {
      if (!(*synth_fake > 0.0 && *synth_fake < 1.0)) {
        throw UsageError("--fake-fraction must lie in (0, 1)");
      }
      cfg["fake_fraction"] = *synth_fake;
    }
    if (synth_missing) {
      if (!(*synth_missing >= 0.0 && *synth_missing <= 1.0)) {
        throw UsageError("--missing-image-fraction must lie in [0, 1]");
      }
      cfg["missing_image_fraction"] = *synth_missing;
    }
    if (synth_sep) cfg["separation"] = *synth_sep;
    if (synth_seed) cfg["seed"] = *synth_seed;
    if (synth_text_dim) cfg["text_dim"] = *synth_text_dim;
    if (synth_image_dim) cfg["image_dim"] = *synth_image_dim;
    f2ind_dataset* raw = nullptr;
    check(f2ind_dataset_synth(cfg.dump().c_str(), &raw), "generating synthetic data");
    DatasetPtr ds(raw);
    check(f2ind_dataset_write(ds.get(), out.c_str()), "writing embeddings");
    f2ind_dataset_info info{};
    check(f2ind_dataset_info_get(ds.get(), &info), "dataset info");
    std::cout << "wrote " << out << ": " << info.n_samples << " samples (" << info.n_fake
              << " fake, " << info.n_missing_image << " without image), format F2EMB1\n"
              << "config=" << cfg.dump() << '\n';
    return kExitOk;
  }

  if (train->parsed()) {
    json paths;
    const json cfg = build_train_config(train_flags, &paths);
    std::string data = paths.value("data", "");
    std::string out = paths.value("out", "f2ind-out");
    if (!train_data.empty()) data = train_data;
    if (!train_out.empty()) out = train_out;
    if (data.empty()) throw UsageError("train: --data is required");
    DatasetPtr ds = load_dataset(data);
    const std::string cfg_text = cfg.dump();
    char* raw = nullptr;
    if (train_ablate) {
      check(f2ind_ablate(ds.get(), cfg_text.c_str(), out.c_str(), &raw), "ablation");
      const json report = take_json(raw);
      std::cout << "== with ANFIS\n";
      print_summary(report.at("with_anfis"), std::cout);
      std::cout << "== without ANFIS\n";
      print_summary(report.at("without_anfis"), std::cout);
      std::cout << "parameter_count_difference=" << report.at("parameter_count_difference")
                << "\nreport: " << out << "/ablation_report.json\n";
    } else {
      check(f2ind_train(ds.get(), cfg_text.c_str(), out.c_str(), &raw), "training");
      const json report = take_json(raw);
      print_summary(report, std::cout);
      std::cout << "report: " << out << "/cv_report.json\n";
    }
    return kExitOk;
  }

  if (eval->parsed()) {
    ModelPtr model = load_model(eval_ckpt);
    DatasetPtr ds = load_dataset(eval_data);
    if (eval_val_split) ds = validation_split(ds.get(), checkpoint_meta(model.get()));
    char* raw = nullptr;
    check(f2ind_evaluate(model.get(), ds.get(), eval_threshold, &raw), "evaluation");
    const json report = take_json(raw);
    std::cout << "format_version=" << report.at("format_version") << '\n'
              << "threshold=" << report.at("threshold") << '\n'
              << "n_samples=" << report.at("n_samples") << '\n'
              << report.at("key_value").get<std::string>();
    if (report.contains("config")) std::cout << "config=" << report.at("config").dump() << '\n';
    return kExitOk;
  }

  if (predict->parsed()) {
    ModelPtr model = load_model(pred_ckpt);
    DatasetPtr ds = load_dataset(pred_data);
    f2ind_dataset_info info{};
    check(f2ind_dataset_info_get(ds.get(), &info), "dataset info");
    std::vector<f2ind_prediction> rows(info.n_samples);
    std::size_t written = 0;
    check(f2ind_predict(model.get(), ds.get(), rows.data(), rows.size(), &written), "prediction");
    std::ostringstream os;
    const json meta = checkpoint_meta(model.get());
    os << config_comment(meta.value("config", json::object()));
    os << "sample_id\tlabel\tprob\tattn_image\tattn_text\n";
    os.precision(17);
    for (const auto& r : rows) {
      os << r.sample_id << '\t' << int(r.label) << '\t' << r.prob << '\t' << r.attn_image
         << '\t' << r.attn_text << '\n';
    }
    if (pred_out.empty()) {
      std::cout << os.str();
    } else {
      std::ofstream f(pred_out, std::ios::trunc);
      if (!(f << os.str())) throw ApiError(F2IND_ERR_IO, "cannot write " + pred_out);
    }
    return kExitOk;
  }

  if (grad->parsed()) {
    const json cfg = build_train_config(grad_flags, nullptr);
    const std::string cfg_text = cfg.dump();
    const std::uint64_t first = grad_flags.seed.value_or(0);
    bool all_passed = true;
    json effective = json::object();
    for (int s = 0; s < grad_seeds; ++s) {
      int passed = 0;
      char* raw = nullptr;
      check(f2ind_gradcheck(cfg_text.c_str(), grad_text_dim, grad_image_dim,
                            first + static_cast<std::uint64_t>(s),
                            grad_fault.empty() ? nullptr : grad_fault.c_str(), &passed, &raw),
            "gradcheck");
      const json report = take_json(raw);
      effective = report.at("config");
      std::cout << "seed " << report.at("seed") << ": " << (passed ? "PASS" : "FAIL")
                << " max_rel_error=" << report.at("max_rel_error")
                << " worst_block=" << report.at("worst_block").get<std::string>() << '\n';
      if (!passed) {
        for (const auto& b : report.at("blocks")) {
          if (!b.at("passed").get<bool>()) {
            std::cout << "  failed block " << b.at("name").get<std::string>()
                      << " rel_error=" << b.at("rel_error") << '\n';
          }
        }
      }
      all_passed = all_passed && passed != 0;
    }
    std::cout << "gradcheck " << (all_passed ? "passed" : "FAILED") << '\n'
              << config_comment(effective);
    return all_passed ? kExitOk : kExitVerify;
  }

  if (inspect->parsed()) {
    ModelPtr model = load_model(insp_ckpt);
    DatasetPtr ds = load_dataset(insp_data);
    char* raw = nullptr;
    check(f2ind_inspect(model.get(), ds.get(), &raw), "inspect");
    StringPtr tsv(raw);
    const json meta = checkpoint_meta(model.get());
    std::cout << config_comment(meta.value("config", json::object())) << tsv.get();
    return kExitOk;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ApiError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.status);
  } catch (const json::exception& e) {
    std::cerr << "error: malformed JSON from library: " << e.what() << '\n';
    return kExitVerify;
  }
}
