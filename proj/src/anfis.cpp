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
#include "f2ind/anfis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "f2ind/errors.hpp"
#include "f2ind/rng.hpp"

namespace f2ind {
namespace {

// rules x n table of membership indices.
std::vector<int> assignment_table(int n, int f) {
  const std::size_t rules = rule_count(n, f);
  std::vector<int> table(rules * static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < rules; ++k) {
    std::size_t rest = k;
    for (int i = n - 1; i >= 0; --i) {
      table[k * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] =
          static_cast<int>(rest % static_cast<std::size_t>(f));
      rest /= static_cast<std::size_t>(f);
    }
  }
  return table;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

std::size_t rule_count(int n, int f) {
  if (n < 1) throw ConfigError("ANFIS needs at least one input");
  if (f < 2) throw ConfigError("ANFIS needs at least two membership functions per input");
  std::size_t rules = 1;
  for (int i = 0; i < n; ++i) {
    rules *= static_cast<std::size_t>(f);
    if (rules > kRuleLimit) {
      std::ostringstream os;
      os << "f^n = " << f << "^" << n << " exceeds the rule limit of " << kRuleLimit;
      throw ConfigError(os.str());
    }
  }
  return rules;
}

AnfisParams AnfisParams::zeros_like() const {
  AnfisParams z;
  z.n = n;
  z.f = f;
  z.mu = Matrix::Zero(mu.rows(), mu.cols());
  z.sigma = Matrix::Zero(sigma.rows(), sigma.cols());
  z.a = Matrix::Zero(a.rows(), a.cols());
  z.b = Vector::Zero(b.size());
  return z;
}

std::vector<ParamView> AnfisParams::blocks() {
  return {
      {"anfis.mu", ParamGroup::kAnfis, flat(mu)},
      {"anfis.sigma", ParamGroup::kAnfis, flat(sigma), kSigmaMin},
      {"anfis.a", ParamGroup::kAnfis, flat(a)},
      {"anfis.b", ParamGroup::kAnfis, flat(b)},
  };
}

std::size_t AnfisParams::parameter_count() const {
  return static_cast<std::size_t>(mu.size() + sigma.size() + a.size() + b.size());
}

void AnfisParams::clamp_sigma() {
  sigma = sigma.cwiseMax(kSigmaMin);
}

AnfisParams init_anfis(int n, int f, std::uint64_t seed) {
  const std::size_t rules = rule_count(n, f);
  AnfisParams p;
  p.n = n;
  p.f = f;
  p.mu.resize(n, f);
  for (int j = 0; j < f; ++j) {
    const double center = -1.0 + (2.0 * j + 1.0) / f;
    p.mu.col(j).setConstant(center);
  }
  p.sigma = Matrix::Constant(n, f, 1.0);
  p.a.resize(static_cast<Eigen::Index>(rules), n);
  Rng rng(seed);
  std::uniform_real_distribution<double> dist(-0.1, 0.1);
  for (Eigen::Index i = 0; i < p.a.size(); ++i) p.a.data()[i] = dist(rng);
  p.b = Vector::Zero(static_cast<Eigen::Index>(rules));
  return p;
}

std::vector<int> rule_to_assignment(std::size_t k, int n, int f) {
  const std::size_t rules = rule_count(n, f);
  if (k >= rules) {
    std::ostringstream os;
    os << "rule index " << k << " out of range [0, " << rules << ")";
    throw IndexError(os.str());
  }
  std::vector<int> digits(static_cast<std::size_t>(n));
  for (int i = n - 1; i >= 0; --i) {
    digits[static_cast<std::size_t>(i)] = static_cast<int>(k % static_cast<std::size_t>(f));
    k /= static_cast<std::size_t>(f);
  }
  return digits;
}

std::size_t assignment_to_rule(const std::vector<int>& assignment, int f) {
  std::size_t k = 0;
  for (int digit : assignment) {
    if (digit < 0 || digit >= f) throw IndexError("membership index out of range");
    k = k * static_cast<std::size_t>(f) + static_cast<std::size_t>(digit);
  }
  return k;
}

Matrix fuzzify(const AnfisParams& params, const Matrix& x) {
  const int n = params.n;
  const int f = params.f;
  if (x.cols() != n) throw ShapeError("fuzzify: input width differs from n");
  Matrix mem(x.rows(), n * f);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < f; ++j) {
        const double diff = x(r, i) - params.mu(i, j);
        const double s = params.sigma(i, j);
        mem(r, i * f + j) = std::exp(-(diff * diff) / (2.0 * s * s));
      }
    }
  }
  return mem;
}

Matrix rule_firing(const Matrix& memberships, int n, int f, FiringMode mode) {
  if (memberships.cols() != n * f) throw ShapeError("rule_firing: membership width differs from n*f");
  const std::vector<int> table = assignment_table(n, f);
  const auto rules = static_cast<Eigen::Index>(table.size() / static_cast<std::size_t>(n));
  const bool log_space =
      mode == FiringMode::kLogSpace || (mode == FiringMode::kAuto && n > kLogSpaceInputThreshold);
  Matrix firing(memberships.rows(), rules);
  for (Eigen::Index r = 0; r < memberships.rows(); ++r) {
    for (Eigen::Index k = 0; k < rules; ++k) {
      const int* digits = &table[static_cast<std::size_t>(k) * static_cast<std::size_t>(n)];
      if (log_space) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += std::log(memberships(r, i * f + digits[i]));
        firing(r, k) = std::exp(acc);
      } else {
        double acc = 1.0;
        for (int i = 0; i < n; ++i) acc *= memberships(r, i * f + digits[i]);
        firing(r, k) = acc;
      }
    }
  }
  return firing;
}

Matrix normalize_firing(const Matrix& firing) {
  const Vector denom = firing.rowwise().sum().array() + kFiringEps;
  return firing.array().colwise() / denom.array();
}

AnfisOutput anfis_forward(const AnfisParams& params, const Matrix& x) {
  if (x.cols() != params.n) {
    std::ostringstream os;
    os << "anfis: input width " << x.cols() << " differs from n=" << params.n;
    throw ShapeError(os.str());
  }
  AnfisOutput out;
  AnfisCache& c = out.cache;
  c.input = x;
  c.memberships = fuzzify(params, x);
  c.firing = rule_firing(c.memberships, params.n, params.f);
  c.normalized = normalize_firing(c.firing);
  c.consequents = x * params.a.transpose();
  c.consequents.rowwise() += params.b.transpose();
  c.z = (c.normalized.array() * c.consequents.array()).rowwise().sum();
  c.prob = c.z.unaryExpr([](double z) { return sigmoid(z); });
  out.prob = c.prob;
  return out;
}

AnfisBackward anfis_backward(const AnfisParams& params, const AnfisCache& cache,
                             const Vector& grad_prob) {
  const int n = params.n;
  const int f = params.f;
  const Eigen::Index batch = cache.prob.size();
  const auto rules = static_cast<Eigen::Index>(params.rule_count());
  if (grad_prob.size() != batch || cache.input.rows() != batch ||
      cache.input.cols() != n || cache.memberships.cols() != n * f ||
      cache.firing.cols() != rules || cache.normalized.cols() != rules) {
    throw CacheError("anfis: cache does not match parameters or gradient shape");
  }

  AnfisBackward res;
  AnfisGrads& g = res.grads;
  g = params.zeros_like();
  res.grad_input = Matrix::Zero(batch, n);

  const std::vector<int> table = assignment_table(n, f);
  Matrix d_mem = Matrix::Zero(batch, n * f);
  std::vector<double> prefix(static_cast<std::size_t>(n) + 1);
  std::vector<double> suffix(static_cast<std::size_t>(n) + 1);

  for (Eigen::Index r = 0; r < batch; ++r) {
    const double p = cache.prob[r];
    const double dz = grad_prob[r] * p * (1.0 - p);

    // z = sum_k f_hat_k z_k
    const auto fhat = cache.normalized.row(r);
    const auto zk = cache.consequents.row(r);
    const Eigen::RowVectorXd d_zk = dz * fhat;
    g.a.noalias() += d_zk.transpose() * cache.input.row(r);
    g.b += d_zk.transpose();
    res.grad_input.row(r) += d_zk * params.a;

    // f_hat_k = f_k / S, S = sum f + eps
    const double denom = cache.firing.row(r).sum() + kFiringEps;
    const Eigen::RowVectorXd d_fhat = dz * zk;
    const double weighted = d_fhat.dot(fhat);
    const Eigen::RowVectorXd d_firing = (d_fhat.array() - weighted) / denom;

    // f_k = prod_i G(i, digit_i(k)); leave-one-out products avoid dividing
    // by memberships that may have underflowed.
    for (Eigen::Index k = 0; k < rules; ++k) {
      const int* digits = &table[static_cast<std::size_t>(k) * static_cast<std::size_t>(n)];
      prefix[0] = 1.0;
      for (int i = 0; i < n; ++i) {
        prefix[static_cast<std::size_t>(i) + 1] =
            prefix[static_cast<std::size_t>(i)] * cache.memberships(r, i * f + digits[i]);
      }
      suffix[static_cast<std::size_t>(n)] = 1.0;
      for (int i = n - 1; i >= 0; --i) {
        suffix[static_cast<std::size_t>(i)] =
            suffix[static_cast<std::size_t>(i) + 1] * cache.memberships(r, i * f + digits[i]);
      }
      for (int i = 0; i < n; ++i) {
        d_mem(r, i * f + digits[i]) +=
            d_firing[k] * prefix[static_cast<std::size_t>(i)] *
            suffix[static_cast<std::size_t>(i) + 1];
      }
    }

    // G = exp(-(x - mu)^2 / (2 sigma^2))
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < f; ++j) {
        const double gval = cache.memberships(r, i * f + j);
        const double diff = cache.input(r, i) - params.mu(i, j);
        const double s = params.sigma(i, j);
        const double upstream = d_mem(r, i * f + j) * gval;
        g.mu(i, j) += upstream * diff / (s * s);
        g.sigma(i, j) += upstream * diff * diff / (s * s * s);
        res.grad_input(r, i) -= upstream * diff / (s * s);
      }
    }
  }
  return res;
}

std::vector<RuleReportRow> rule_report(const AnfisParams& params, const Matrix& x) {
  const AnfisOutput out = anfis_forward(params, x);
  const auto& c = out.cache;
  const std::size_t rules = params.rule_count();
  const double inv_batch = x.rows() > 0 ? 1.0 / static_cast<double>(x.rows()) : 0.0;
  std::vector<RuleReportRow> rows;
  rows.reserve(rules);
  for (std::size_t k = 0; k < rules; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    RuleReportRow row;
    row.rule_index = k;
    row.assignment = rule_to_assignment(k, params.n, params.f);
    row.mean_norm_firing = c.normalized.col(kk).sum() * inv_batch;
    row.mean_contribution =
        (c.normalized.col(kk).array() * c.consequents.col(kk).array()).sum() * inv_batch;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string rule_report_tsv(const std::vector<RuleReportRow>& rows) {
  std::ostringstream os;
  os << "rule_index\tassignment\tmean_norm_firing\tmean_contribution\n";
  os << std::setprecision(12);
  for (const auto& row : rows) {
    os << row.rule_index << '\t';
    for (std::size_t i = 0; i < row.assignment.size(); ++i) {
      if (i != 0) os << ',';
      os << row.assignment[i];
    }
    os << '\t' << row.mean_norm_firing << '\t' << row.mean_contribution << '\n';
  }
  return os.str();
}

}  // namespace f2ind
