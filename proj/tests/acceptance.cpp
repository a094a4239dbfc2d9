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
// Acceptance checks. Each criterion runs in its own process and prints one
// line "criterion N: PASS|FAIL ..." followed by details; exit status 0 iff
// the criterion passed.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "anfis_oracle.hpp"
#include "f2ind/anfis.hpp"
#include "f2ind/data_model.hpp"
#include "f2ind/fusion.hpp"
#include "f2ind/gradcheck.hpp"
#include "f2ind/metrics.hpp"
#include "metric_oracles.hpp"

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Collects the verdict and the detail lines of one criterion.
class Verdict {
 public:
  void check(bool ok, const std::string& what) {
    passed_ = passed_ && ok;
    details_ << "  " << (ok ? "ok   " : "FAIL ") << what << '\n';
  }
  void note(const std::string& what) { details_ << "  " << what << '\n'; }
  int finish(int criterion, const std::string& title) const {
    std::cout << "criterion " << criterion << ": " << (passed_ ? "PASS" : "FAIL") << " - "
              << title << '\n'
              << details_.str() << std::flush;
    return passed_ ? 0 : 1;
  }

 private:
  bool passed_ = true;
  std::ostringstream details_;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

// --- 1: composed-graph gradient check at full width -------------------------

int gradients() {
  Verdict v;
  const f2ind::TrainConfig cfg;  // default widths: 768/2048 -> 512 -> 4 inputs, 2 MFs
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = f2ind::gradcheck(cfg, 768, 2048, seed);
    worst = std::max(worst, r.max_rel_error);
    v.check(r.passed && r.max_rel_error <= 1e-4,
            "seed " + std::to_string(seed) + ": max_rel_error=" + fmt(r.max_rel_error) +
                " worst_block=" + r.worst_block);
  }
  const double secs = seconds_since(t0);
  v.check(secs < 60.0, "runtime " + fmt(secs) + " s < 60 s");
  v.note("overall max_rel_error=" + fmt(worst) + " (h=1e-4, double precision, B=3)");
  return v.finish(1, "gradient check, 10 seeds");
}

// --- 2: ANFIS vs brute-force rule enumeration -------------------------------

int anfis_oracle() {
  Verdict v;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::uniform_real_distribution<double> s(0.2, 2.0);
  double worst = 0.0;
  for (int draw = 0; draw < 1000; ++draw) {
    const int n = 1 + static_cast<int>(rng() % 4);
    const int f = 2 + static_cast<int>(rng() % 2);  // at least two MFs per input
    f2ind::AnfisParams p = f2ind::init_anfis(n, f, rng());
    for (Eigen::Index i = 0; i < p.mu.size(); ++i) {
      p.mu.data()[i] = u(rng);
      p.sigma.data()[i] = s(rng);
    }
    for (Eigen::Index i = 0; i < p.a.size(); ++i) p.a.data()[i] = u(rng);
    for (Eigen::Index i = 0; i < p.b.size(); ++i) p.b.data()[i] = u(rng);
    f2ind::Matrix x(1, n);
    for (int i = 0; i < n; ++i) x(0, i) = u(rng);
    const double got = f2ind::anfis_forward(p, x).prob(0);
    const double want = f2ind::oracle::anfis_prob(p.mu, p.sigma, p.a, p.b, x.row(0), n, f);
    worst = std::max(worst, std::abs(got - want));
  }
  v.check(worst <= 1e-9, "1000 draws (n in 1..4, f in 2..3): max |layered - brute force| = " + fmt(worst));
  return v.finish(2, "ANFIS oracle equivalence");
}

// --- 3: partition-of-unity invariants --------------------------------------

int normalization() {
  Verdict v;
  constexpr int kRows = 10000;
  constexpr int kBatch = 500;
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g(0.0, 1.0);
  std::bernoulli_distribution has(0.7);
  const f2ind::FusionDims dims;  // full width
  const f2ind::FusionParams fusion = f2ind::init_fusion(dims, 0.3, 5);
  const f2ind::AnfisParams anfis = f2ind::init_anfis(dims.head_out, 2, 6);

  double attn_dev = 0.0;
  double firing_dev = 0.0;
  std::size_t masked = 0;
  std::size_t masked_exact = 0;
  for (int start = 0; start < kRows; start += kBatch) {
    f2ind::Matrix text(kBatch, dims.text_dim);
    f2ind::Matrix image(kBatch, dims.image_dim);
    for (Eigen::Index i = 0; i < text.size(); ++i) text.data()[i] = g(rng);
    for (Eigen::Index i = 0; i < image.size(); ++i) image.data()[i] = g(rng);
    std::vector<bool> mask(kBatch);
    for (int b = 0; b < kBatch; ++b) mask[b] = has(rng);
    const auto out = f2ind::fusion_forward(fusion, text, image, mask, nullptr);
    const auto head = f2ind::anfis_forward(anfis, out.anfis_input);
    for (int b = 0; b < kBatch; ++b) {
      attn_dev = std::max(attn_dev, std::abs(out.attn_weights.row(b).sum() - 1.0));
      firing_dev = std::max(firing_dev, std::abs(head.cache.normalized.row(b).sum() - 1.0));
      if (!mask[b]) {
        ++masked;
        masked_exact += out.attn_weights(b, 0) == 0.0 && out.attn_weights(b, 1) == 1.0;
      }
    }
  }
  v.check(attn_dev <= 1e-6, "attention rows: max |sum - 1| = " + fmt(attn_dev));
  v.check(firing_dev <= 1e-6, "normalized firing rows: max |sum - 1| = " + fmt(firing_dev));
  v.check(masked > 0 && masked_exact == masked,
          std::to_string(masked_exact) + "/" + std::to_string(masked) +
              " masked rows have image weight exactly 0");
  v.note(std::to_string(kRows) + " random rows through the full-width fusion and ANFIS head");
  return v.finish(3, "normalization invariants");
}

// --- 4: ranking metrics vs brute force --------------------------------------

int metric_oracles() {
  Verdict v;
  std::mt19937_64 rng(4242);
  double roc_worst = 0.0;
  double pr_worst = 0.0;
  int tie_heavy = 0;
  for (int set = 0; set < 200; ++set) {
    auto [scores, labels] = f2ind::oracle::random_scores(rng, 100);
    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end());
    tie_heavy += std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
    roc_worst = std::max(roc_worst,
                         std::abs(f2ind::roc_auc(scores, labels) - f2ind::oracle::pairwise_auc(scores, labels)));
    pr_worst = std::max(pr_worst,
                        std::abs(f2ind::pr_auc(scores, labels) - f2ind::oracle::rank_walk_ap(scores, labels)));
  }
  v.check(roc_worst <= 1e-9, "ROC-AUC vs pairwise oracle: max diff " + fmt(roc_worst));
  v.check(pr_worst <= 1e-9, "PR-AUC vs rank-walk oracle: max diff " + fmt(pr_worst));
  v.check(tie_heavy > 0, std::to_string(tie_heavy) + " of 200 sets contain tied scores");
  return v.finish(4, "metric oracles");
}

// --- 5 and 6: end-to-end runs through the command-line tool -----------------

struct CliRun {
  int code = -1;
  std::string out;
  double seconds = 0.0;
};

CliRun cli(const std::string& exe, const std::string& args) {
  CliRun r;
  const auto t0 = Clock::now();
  FILE* p = popen((exe + " " + args + " 2>&1").c_str(), "r");
  if (p == nullptr) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.seconds = seconds_since(t0);
  return r;
}

json read_json(const fs::path& p) {
  std::ifstream f(p);
  return json::parse(f);
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

bool synth_data(const std::string& exe, const fs::path& data, Verdict& v) {
  const CliRun r = cli(exe, "synth --out " + q(data) +
                                " --n 2000 --fake-fraction 0.05 --separation 6");
  v.check(r.code == 0, "synth --n 2000 --fake-fraction 0.05 --separation 6 (exit " +
                           std::to_string(r.code) + ")");
  if (r.code != 0) v.note(r.out);
  return r.code == 0;
}

int end_to_end(const std::string& exe, const fs::path& work) {
  Verdict v;
  fs::remove_all(work);
  fs::create_directories(work);
  const fs::path data = work / "synthetic.f2e";
  if (!synth_data(exe, data, v)) return v.finish(5, "end-to-end synthetic run");

  // Paired run: defaults with the ANFIS head, then the affine head.
  const CliRun r = cli(exe, "train --data " + q(data) + " --out " + q(work / "run") + " --ablate");
  v.check(r.code == 0, "train --ablate with default settings (exit " + std::to_string(r.code) + ")");
  if (r.code != 0) {
    v.note(r.out);
    return v.finish(5, "end-to-end synthetic run");
  }
  v.check(r.seconds < 600.0, "both variants together took " + fmt(r.seconds) + " s < 600 s");
  const fs::path paired = work / "run" / "ablation_report.json";
  v.check(fs::exists(paired), "paired report emitted: " + paired.string());
  const json rep = read_json(paired);

  const json& with = rep.at("with_anfis");
  const json& cfg = with.at("config");
  v.note("settings: folds=" + cfg.at("folds").dump() + " epochs=" + cfg.at("epochs").dump() +
         " batch_size=" + cfg.at("batch_size").dump() + " max_lr=" +
         cfg.at("schedule").at("max_lr").dump());
  for (const auto& [label, report] : {std::pair{"with ANFIS", with},
                                      std::pair{"without ANFIS", rep.at("without_anfis")}}) {
    double secs = 0.0;
    for (const auto& f : report.at("folds")) secs += f.at("seconds").get<double>();
    v.check(report.at("folds").size() == 5 && secs < 600.0,
            std::string(label) + ": 5 folds completed in " + fmt(secs) + " s");
  }
  for (const auto& f : with.at("folds")) {
    const json& m = f.at("metrics");
    const double acc = m.at("accuracy").is_number() ? m.at("accuracy").get<double>() : 0.0;
    const double mf1 = m.at("macro_f1").is_number() ? m.at("macro_f1").get<double>() : 0.0;
    const std::string fold = "fold " + f.at("fold").dump();
    v.check(acc >= 0.95, fold + ": accuracy " + fmt(acc) + " >= 0.95");
    v.check(mf1 >= 0.90, fold + ": macro-F1 " + fmt(mf1) + " >= 0.90");
  }
  const json& without = rep.at("without_anfis");
  for (const auto& f : without.at("folds")) {
    const json& m = f.at("metrics");
    v.note("without ANFIS fold " + f.at("fold").dump() + ": accuracy " + m.at("accuracy").dump() +
           " macro-F1 " + m.at("macro_f1").dump());
  }
  return v.finish(5, "end-to-end synthetic run");
}

int determinism(const std::string& exe, const fs::path& work) {
  Verdict v;
  fs::remove_all(work);
  fs::create_directories(work);
  const fs::path data = work / "synthetic.f2e";
  if (!synth_data(exe, data, v)) return v.finish(6, "determinism");
  json reports[2];
  for (int i = 0; i < 2; ++i) {
    const fs::path out = work / ("run" + std::to_string(i));
    const CliRun r = cli(exe, "train --data " + q(data) + " --out " + q(out));
    v.check(r.code == 0, "run " + std::to_string(i + 1) + " (exit " + std::to_string(r.code) +
                             ", " + fmt(r.seconds) + " s)");
    if (r.code != 0) {
      v.note(r.out);
      return v.finish(6, "determinism");
    }
    reports[i] = read_json(out / "cv_report.json");
  }
  // Compare every metric value bit for bit; timings are excluded.
  std::size_t compared = 0;
  std::size_t mismatched = 0;
  auto same = [&](const json& a, const json& b) {
    for (auto it = a.begin(); it != a.end(); ++it) {
      ++compared;
      const json& other = b.at(it.key());
      const bool eq = it->is_number() && other.is_number()
                          ? std::bit_cast<std::uint64_t>(it->get<double>()) ==
                                std::bit_cast<std::uint64_t>(other.get<double>())
                          : *it == other;
      mismatched += !eq;
    }
  };
  for (std::size_t k = 0; k < reports[0].at("folds").size(); ++k) {
    same(reports[0]["folds"][k]["metrics"], reports[1]["folds"][k]["metrics"]);
    const json& e0 = reports[0]["folds"][k]["epochs"];
    const json& e1 = reports[1]["folds"][k]["epochs"];
    for (std::size_t e = 0; e < e0.size(); ++e) same(e0[e], e1[e]);
  }
  same(reports[0]["mean"], reports[1]["mean"]);
  same(reports[0]["std"], reports[1]["std"]);
  v.check(mismatched == 0 && compared > 0,
          std::to_string(compared - mismatched) + "/" + std::to_string(compared) +
              " metric and loss values bitwise identical");
  return v.finish(6, "determinism");
}

// --- 7: embedding file round trip -------------------------------------------

int round_trip(const fs::path& work) {
  Verdict v;
  fs::create_directories(work);
  f2ind::SynthConfig s;
  s.n = 1000;
  s.fake_fraction = 0.3;
  s.missing_image_fraction = 0.4;
  s.seed = 17;
  f2ind::Dataset ds = f2ind::generate_synthetic(s);
  // Awkward values: signed zero, subnormals, extremes, sparse ids.
  ds.samples[0].text_emb[0] = -0.0f;
  ds.samples[1].text_emb[1] = std::numeric_limits<float>::denorm_min();
  ds.samples[2].text_emb[2] = std::numeric_limits<float>::max();
  ds.samples[3].sample_id = std::numeric_limits<std::uint64_t>::max();
  std::size_t missing = 0;
  for (const auto& smp : ds.samples) missing += !smp.has_image;

  const fs::path a = work / "a.f2e";
  const fs::path b = work / "b.f2e";
  f2ind::write_embeddings(ds, a);
  const f2ind::Dataset back = f2ind::read_embeddings(a);
  f2ind::write_embeddings(back, b);
  auto slurp = [](const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
  };
  const std::string ba = slurp(a);
  const std::string bb = slurp(b);
  v.check(!ba.empty() && ba == bb, "write -> read -> write is byte-identical (" +
                                       std::to_string(ba.size()) + " bytes)");
  v.note("1000 samples, " + std::to_string(missing) + " without image, " +
         std::to_string(ds.count_label(1)) + " fake");
  fs::remove_all(work);
  return v.finish(7, "embedding format round trip");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"f2ind acceptance checks"};
  int criterion = 0;
  std::string exe;
  std::string work = (fs::temp_directory_path() / "f2ind_acceptance").string();
  app.add_option("criterion", criterion, "criterion number 1-7")->required()->check(CLI::Range(1, 7));
  app.add_option("--cli", exe, "path to the f2ind executable (criteria 5 and 6)");
  app.add_option("--workdir", work, "scratch directory");
  CLI11_PARSE(app, argc, argv);

  const fs::path dir = fs::path(work) / ("criterion_" + std::to_string(criterion));
  try {
    switch (criterion) {
      case 1: return gradients();
      case 2: return anfis_oracle();
      case 3: return normalization();
      case 4: return metric_oracles();
      case 5: return end_to_end(exe, dir);
      case 6: return determinism(exe, dir);
      case 7: return round_trip(dir);
    }
  } catch (const std::exception& e) {
    std::cout << "criterion " << criterion << ": FAIL - unexpected error: " << e.what() << '\n';
  }
  return 1;
}
