// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Posterior-predictive quantities for the restricted regression and
// credible intervals obtained by drawing subsets from a fitted DPP.

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <vector>

#include "divsel/dpp.hpp"
#include "divsel/regression.hpp"

namespace divsel {

struct Prediction {
  Vector mean;
  Vector variance;  // (b_N / a_N) (1 + x Lambda_N^{-1} x^T), the Student-t scale^2
  double dof = 0;   // 2 a_N
};

inline Matrix restrict_columns(const Matrix& x, const Subset& gamma) {
  Matrix out(x.rows(), static_cast<Index>(gamma.size()));
  for (std::size_t j = 0; j < gamma.size(); ++j) out.col(static_cast<Index>(j)) = x.col(gamma[j]);
  return out;
}

inline Prediction predict(const RestrictedPosterior& post, const Matrix& x_new) {
  Prediction out;
  const double scale = post.b_n / post.a_n;
  out.dof = 2.0 * post.a_n;
  if (post.gamma.empty()) {
    out.mean = Vector::Zero(x_new.rows());
    out.variance = Vector::Constant(x_new.rows(), scale);
    return out;
  }
  const Matrix xg = restrict_columns(x_new, post.gamma);
  out.mean = xg * post.mu_n;
  const Matrix sol = post.chol.solve(xg.transpose());
  out.variance = scale * (1.0 + (xg.transpose().array() * sol.array()).colwise().sum().transpose());
  return out;
}

inline Prediction predict(const SpikeSlabModel& model, const Subset& gamma, const Matrix& x_new) {
  if (x_new.cols() != model.features()) {
    throw InvalidArgument("predict: x_new has " + std::to_string(x_new.cols()) + " columns, model has " +
                          std::to_string(model.features()));
  }
  return predict(posterior_beta(model, gamma), x_new);
}

struct CredibleInterval {
  Vector mean;            // mean over draws of the per-draw predictive mean
  Vector lower;
  Vector upper;
  Vector between_var;     // variance across subset draws of the predictive mean
  Vector within_var;      // average within-subset predictive variance
  double level = 0;
  long n_draws = 0;
};

// Draws gamma ~ q, then y ~ p(y | x_new, gamma, data) (Student-t), and
// reports the symmetric quantile interval of those predictive draws.
inline CredibleInterval credible_interval(const LEnsemble& q_posterior, const SpikeSlabModel& model,
                                          const Matrix& x_new, long n_draws, double level, Rng& rng) {
  if (n_draws < 100) throw InvalidArgument("credible_interval: need at least 100 draws");
  if (!(level > 0 && level < 1)) throw InvalidArgument("credible_interval: level must be in (0, 1)");
  if (q_posterior.size() != model.features()) throw InvalidArgument("credible_interval: kernel/model size mismatch");
  if (x_new.cols() != model.features()) throw InvalidArgument("credible_interval: x_new column mismatch");

  const Index p = x_new.rows();
  std::unordered_map<Subset, Prediction, SubsetHash> cache;
  Matrix draws(p, n_draws);
  Matrix means(p, n_draws);
  Vector within = Vector::Zero(p);
  for (long s = 0; s < n_draws; ++s) {
    const Subset g = sample(q_posterior, rng);
    auto it = cache.find(g);
    if (it == cache.end()) it = cache.emplace(g, predict(model, g, x_new)).first;
    const Prediction& pr = it->second;
    std::chi_squared_distribution<double> chi(pr.dof);
    for (Index i = 0; i < p; ++i) {
      const double t = rng.normal() / std::sqrt(chi(rng.engine()) / pr.dof);
      draws(i, s) = pr.mean(i) + std::sqrt(pr.variance(i)) * t;
    }
    means.col(s) = pr.mean;
    within += pr.variance;
  }
  CredibleInterval out;
  out.level = level;
  out.n_draws = n_draws;
  out.mean = means.rowwise().mean();
  out.between_var = (means.colwise() - out.mean).array().square().rowwise().sum() / static_cast<double>(n_draws);
  out.within_var = within / static_cast<double>(n_draws);
  out.lower.resize(p);
  out.upper.resize(p);
  const double lo_q = 0.5 * (1.0 - level), hi_q = 0.5 * (1.0 + level);
  std::vector<double> row(static_cast<std::size_t>(n_draws));
  for (Index i = 0; i < p; ++i) {
    for (long s = 0; s < n_draws; ++s) row[static_cast<std::size_t>(s)] = draws(i, s);
    std::sort(row.begin(), row.end());
    auto quant = [&](double q) {
      const double pos = q * static_cast<double>(n_draws - 1);
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      const auto hi = std::min(lo + 1, row.size() - 1);
      const double f = pos - static_cast<double>(lo);
      return row[lo] * (1 - f) + row[hi] * f;
    };
    out.lower(i) = quant(lo_q);
    out.upper(i) = quant(hi_q);
  }
  return out;
}

}  // namespace divsel
