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

// Reference selectors: orthogonal matching pursuit, greedy forward
// selection on the Bayesian evidence, and the mean-field spike-and-slab fit.

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "divsel/learner.hpp"
#include "divsel/regression.hpp"
#include "divsel/select.hpp"

namespace divsel {

struct BaselineResult {
  Subset selected;
  std::vector<std::pair<Index, double>> path;  // (feature, score when selected)
  std::string method;
  std::string diagnostic;  // set when the method stopped early
};

// Columns are scaled to unit norm; the score is |<x_j, r>| at selection.
inline BaselineResult omp(const Matrix& x, const Vector& y, Index k) {
  const Index n = x.rows(), m = x.cols();
  if (y.size() != n) throw InvalidArgument("omp: response length mismatch");
  if (k < 1 || k > std::min(m, n)) throw InvalidArgument("omp: k must be in [1, min(M, N)]");
  Vector norms = x.colwise().norm();
  if ((norms.array() <= 0).any()) throw InvalidArgument("omp: design has an all-zero column");
  const Matrix xn = x * norms.cwiseInverse().asDiagonal();

  BaselineResult out;
  out.method = "omp";
  std::vector<Index> sel;
  std::vector<char> used(static_cast<std::size_t>(m), 0);
  Vector r = y;
  const double scale = std::max(y.norm(), 1e-300);
  while (static_cast<Index>(sel.size()) < k) {
    const Vector corr = xn.transpose() * r;
    Index best = -1;
    double best_score = -1;
    for (Index j = 0; j < m; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const double sc = std::abs(corr(j));
      if (sc > best_score) {
        best = j;
        best_score = sc;
      }
    }
    if (best < 0 || best_score <= 1e-12 * scale) {
      out.diagnostic = "residual orthogonal to remaining columns after " + std::to_string(sel.size()) + " picks";
      break;
    }
    std::vector<Index> trial = sel;
    trial.push_back(best);
    Matrix xs(n, static_cast<Index>(trial.size()));
    for (std::size_t j = 0; j < trial.size(); ++j) xs.col(static_cast<Index>(j)) = xn.col(trial[j]);
    Eigen::ColPivHouseholderQR<Matrix> qr(xs);
    if (qr.rank() < xs.cols()) {
      out.diagnostic = "selected columns became rank deficient at feature " + std::to_string(best);
      break;
    }
    sel = std::move(trial);
    used[static_cast<std::size_t>(best)] = 1;
    out.path.emplace_back(best, best_score);
    r = y - xs * qr.solve(y);
  }
  out.selected = Subset::from_unsorted(sel);
  return out;
}

// Greedy forward selection maximizing restricted_marginal_loglik; the
// score is the evidence after adding the feature.
inline BaselineResult forward_select(const SpikeSlabModel& model, Index k) {
  const Index m = model.features();
  if (k < 1 || k > std::min(m, model.observations())) {
    throw InvalidArgument("forward_select: k must be in [1, min(M, N)]");
  }
  BaselineResult out;
  out.method = "forward-selection";
  std::vector<Index> sel;
  std::vector<char> used(static_cast<std::size_t>(m), 0);
  double current = restricted_marginal_loglik(model, Subset());
  while (static_cast<Index>(sel.size()) < k) {
    Index best = -1;
    double best_val = kNegInf;
    for (Index j = 0; j < m; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      std::vector<Index> trial = sel;
      trial.push_back(j);
      const double v = restricted_marginal_loglik(model, Subset::from_unsorted(trial));
      if (v > best_val) {
        best = j;
        best_val = v;
      }
    }
    if (best < 0 || !(best_val > current)) {
      out.diagnostic = "no addition improves the evidence after " + std::to_string(sel.size()) + " picks";
      break;
    }
    sel.push_back(best);
    used[static_cast<std::size_t>(best)] = 1;
    out.path.emplace_back(best, best_val);
    current = best_val;
  }
  out.selected = Subset::from_unsorted(sel);
  return out;
}

// Top-k items by marginal (ties: lowest index).
inline Subset top_k_by_marginal(const Vector& marginals, Index k) {
  std::vector<Index> order(static_cast<std::size_t>(marginals.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return marginals(a) > marginals(b); });
  order.resize(static_cast<std::size_t>(std::min<Index>(k, marginals.size())));
  return Subset::from_unsorted(order);
}

// Mean-field spike-and-slab: the learner with Phi = I and a Bernoulli prior.
// Marginals above 1/2 are selected. With a target the threshold is moved
// until exactly `target` items pass, which is the top `target` by marginal.
inline BaselineResult meanfield_select(const SpikeSlabModel& model, LearnerConfig config,
                                       std::optional<Index> target = std::nullopt, Vector* marginals_out = nullptr) {
  config.mode = Mode::kBernoulliDpp;
  const Selection sel = select(model, SimilarityFactor::identity(model.features()), config, std::nullopt, 0, 0);
  // Rank by logit: marginals saturate at 1 long before theta does.
  const Vector& theta = sel.fit.theta;
  BaselineResult out;
  out.method = "spike-slab";
  out.selected = target ? top_k_by_marginal(theta, *target) : threshold_map(theta);
  for (Index i : out.selected) out.path.emplace_back(i, sel.marginals(i));
  std::stable_sort(out.path.begin(), out.path.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (marginals_out) *marginals_out = sel.marginals;
  return out;
}

}  // namespace divsel
