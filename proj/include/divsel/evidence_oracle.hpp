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

// Brute-force Monte Carlo estimate of p(y | gamma) by sampling
// (sigma^2, beta) from the prior and averaging the Gaussian likelihood.
// Shares nothing with the closed-form evidence beyond the model data.

#include <cmath>
#include <vector>

#include "divsel/numeric.hpp"
#include "divsel/regression.hpp"
#include "divsel/rng.hpp"

namespace divsel {

struct EvidenceEstimate {
  double estimate = 0;  // log of the mean likelihood
  double std_err = 0;   // delta-method standard error of the log
  bool degenerate = false;
};

inline EvidenceEstimate mc_evidence_oracle(const SpikeSlabModel& model, const Subset& gamma, long n_samples, Rng& rng) {
  if (n_samples < 10000) throw InvalidArgument("mc_evidence_oracle: need at least 1e4 samples");
  gamma.check_bound(model.features());
  const auto& h = model.hyper();
  const Index n = model.observations();
  const Index k = static_cast<Index>(gamma.size());
  Matrix xg(n, k);
  for (Index j = 0; j < k; ++j) xg.col(j) = model.design().col(gamma[static_cast<std::size_t>(j)]);
  const Vector& y = model.response();

  std::vector<double> logw(static_cast<std::size_t>(n_samples));
  Vector beta(k);
  const double log2pi = std::log(2.0 * M_PI);
  for (long s = 0; s < n_samples; ++s) {
    const double precision = rng.gamma(h.a0, 1.0 / h.b0);
    const double var = 1.0 / precision;
    const double sd_beta = std::sqrt(var / h.ridge_scale);
    for (Index j = 0; j < k; ++j) beta(j) = sd_beta * rng.normal();
    const double rss = k ? (y - xg * beta).squaredNorm() : y.squaredNorm();
    logw[static_cast<std::size_t>(s)] =
        -0.5 * static_cast<double>(n) * (log2pi + std::log(var)) - 0.5 * rss / var;
  }
  double mx = kNegInf;
  for (double v : logw) mx = std::max(mx, v);
  double m1 = 0, m2 = 0;
  for (double v : logw) {
    const double w = std::exp(v - mx);
    m1 += w;
    m2 += w * w;
  }
  const double ns = static_cast<double>(n_samples);
  m1 /= ns;
  m2 /= ns;
  EvidenceEstimate out;
  out.estimate = mx + std::log(m1);
  const double var_w = std::max(m2 - m1 * m1, 0.0);
  out.std_err = std::sqrt(var_w / ns) / m1;
  // A handful of draws dominating the mean makes the delta method meaningless.
  const double ess = m2 > 0 ? ns * m1 * m1 / m2 : 0.0;
  out.degenerate = !std::isfinite(out.std_err) || ess < 50.0;
  return out;
}

}  // namespace divsel
