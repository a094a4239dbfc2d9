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
#include "f2ind/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "f2ind/errors.hpp"
#include "f2ind/rng.hpp"

namespace f2ind {
namespace {

std::vector<std::size_t> pick_coords(std::size_t size, std::size_t limit, Rng& rng) {
  std::vector<std::size_t> all(size);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (limit == 0 || size <= limit) return all;
  std::shuffle(all.begin() + 1, all.end(), rng);
  all.resize(limit);
  std::sort(all.begin(), all.end());
  return all;
}

Batch random_batch(std::uint32_t text_dim, std::uint32_t image_dim,
                   int rows, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  Batch b;
  b.text.resize(rows, text_dim);
  b.image = Matrix::Zero(rows, image_dim);
  b.has_image.resize(static_cast<std::size_t>(rows));
  b.labels.resize(rows);
  b.ids.resize(static_cast<std::size_t>(rows));
  for (int r = 0; r < rows; ++r) {
    for (Eigen::Index d = 0; d < b.text.cols(); ++d) b.text(r, d) = normal(rng);
    // Row 0 always has an image, row 1 never does; the rest are random.
    const bool has = r == 0 ? true : (r == 1 ? false : coin(rng));
    b.has_image[static_cast<std::size_t>(r)] = has;
    if (has) {
      for (Eigen::Index d = 0; d < b.image.cols(); ++d) b.image(r, d) = normal(rng);
    }
    b.labels[r] = r % 2 == 0 ? 1.0 : 0.0;
    b.ids[static_cast<std::size_t>(r)] = static_cast<std::uint64_t>(r);
  }
  return b;
}

}  // namespace

GradcheckReport gradcheck(const TrainConfig& cfg, std::uint32_t text_dim,
                          std::uint32_t image_dim, std::uint64_t seed,
                          const GradcheckOptions& opts) {
  cfg.validate();
  if (opts.batch < 1) throw ConfigError("gradcheck batch must be >= 1");
  GradcheckReport report;
  report.seed = seed;

  Model model = init_model(cfg.model_spec(text_dim, image_dim), derive_seed(seed, 1));
  Rng rng(derive_seed(seed, 2));
  const Batch batch = random_batch(text_dim, image_dim, opts.batch, rng);

  LossAndGrad analytic = loss_and_grad(model, batch, cfg.loss, nullptr);
  std::vector<ParamView> grads = analytic.grads.blocks();
  std::vector<ParamView> params = model.blocks();

  if (opts.fault_block) {
    auto it = std::find_if(grads.begin(), grads.end(),
                           [&](const ParamView& g) { return g.name == *opts.fault_block; });
    if (it == grads.end()) throw ConfigError("gradcheck: unknown fault block " + *opts.fault_block);
    it->values[0] += opts.fault_offset;
  }

  auto loss_at = [&]() {
    const ModelForward fwd = model_forward(model, batch, nullptr);
    return composite_loss(fwd.prob, batch.labels, cfg.loss).value;
  };

  for (std::size_t b = 0; b < params.size(); ++b) {
    BlockCheck check;
    check.name = params[b].name;
    check.size = params[b].values.size();
    const auto coords = pick_coords(check.size, opts.max_coords_per_block, rng);
    double diff2 = 0.0;
    double ana2 = 0.0;
    double num2 = 0.0;
    for (std::size_t i : coords) {
      double& x = params[b].values[i];
      const double saved = x;
      x = saved + opts.step;
      const double up = loss_at();
      x = saved - opts.step;
      const double down = loss_at();
      x = saved;
      const double numeric = (up - down) / (2.0 * opts.step);
      const double a = grads[b].values[i];
      diff2 += (a - numeric) * (a - numeric);
      ana2 += a * a;
      num2 += numeric * numeric;
      check.max_abs_error = std::max(check.max_abs_error, std::abs(a - numeric));
    }
    check.checked = coords.size();
    const double denom = std::max({std::sqrt(ana2), std::sqrt(num2), opts.denominator_floor});
    check.rel_error = std::sqrt(diff2) / denom;
    check.passed = check.rel_error <= opts.tolerance;
    if (check.rel_error > report.max_rel_error || report.worst_block.empty()) {
      report.max_rel_error = std::max(report.max_rel_error, check.rel_error);
      report.worst_block = check.name;
    }
    report.passed = report.passed && check.passed;
    report.blocks.push_back(std::move(check));
  }
  return report;
}

}  // namespace f2ind
