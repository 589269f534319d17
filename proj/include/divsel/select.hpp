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

#include <algorithm>
#include <map>
#include <optional>
#include <vector>

#include "divsel/dpp.hpp"
#include "divsel/learner.hpp"

namespace divsel {

struct AlternativeSubset {
  Subset subset;
  double log_prob = 0;  // under the fitted q
};

struct Selection {
  Mode mode = Mode::kBernoulliDpp;
  LearnerResult fit;
  LEnsemble q;  // fitted posterior; identity similarity in dpp-bernoulli mode
  Subset map;
  double map_log_prob = 0;
  Vector marginals;
  std::vector<AlternativeSubset> alternatives;
};

// Distinct draws from q ranked by q-probability (ties: lexicographic).
inline std::vector<AlternativeSubset> alternative_subsets(const LEnsemble& q, long n_draws, std::size_t top, Rng& rng) {
  std::map<Subset, double> seen;
  for (long s = 0; s < n_draws; ++s) {
    Subset g = sample(q, rng);
    if (!seen.count(g)) seen.emplace(g, subset_log_prob(q, g, true));
  }
  std::vector<AlternativeSubset> out;
  for (auto& [g, lp] : seen) out.push_back({g, lp});
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.log_prob > b.log_prob; });
  if (out.size() > top) out.resize(top);
  return out;
}

inline Subset threshold_map(const Vector& theta) {
  std::vector<Index> idx;
  for (Index i = 0; i < theta.size(); ++i) {
    if (theta(i) > 0.0) idx.push_back(i);
  }
  return Subset(std::move(idx));
}

inline Selection select(const SpikeSlabModel& model, const SimilarityFactor& phi, const LearnerConfig& config,
                        std::optional<LEnsemble> prior_kernel = std::nullopt, long n_alternative_draws = 500,
                        std::size_t n_alternatives = 5) {
  LearnerProblem problem = make_problem(model, phi, config, std::move(prior_kernel));
  const SubsetPrior& prior = problem.prior;
  JointLogFn fn = [&model, &prior](const Subset& s) { return joint_log(model, s, prior); };
  LearnerResult fit = run(*problem.family, fn, config);
  LEnsemble q = problem.family->ensemble(fit.theta);
  Selection out{config.mode, std::move(fit), q, {}, 0.0, {}, {}};
  out.map = config.mode == Mode::kBernoulliDpp ? greedy_map(q) : threshold_map(out.fit.theta);
  out.map_log_prob = subset_log_prob(q, out.map, true);
  out.marginals = inclusion_probabilities(q);
  Rng alt_rng = Rng(config.seed).split(0xa17);
  out.alternatives = alternative_subsets(q, n_alternative_draws, n_alternatives, alt_rng);
  return out;
}

}  // namespace divsel
