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

// Seeded synthetic regression problems shared by the tests, the benchmark
// and the CLI.

#include <cmath>
#include <span>
#include <vector>

#include "divsel/regression.hpp"
#include "divsel/rng.hpp"

namespace divsel::experiments {

struct SyntheticData {
  Matrix x;
  Vector y;
  Index n_train = 0;  // rows [0, n_train) train, the rest are held out

  Matrix x_train() const { return x.topRows(n_train); }
  Vector y_train() const { return y.head(n_train); }
  Matrix x_test() const { return x.bottomRows(x.rows() - n_train); }
  Vector y_test() const { return y.tail(y.size() - n_train); }
};

inline Index train_rows(Index n, double train_fraction) {
  if (!(train_fraction > 0 && train_fraction <= 1)) throw InvalidArgument("train fraction must be in (0, 1]");
  return std::max<Index>(1, static_cast<Index>(std::floor(train_fraction * static_cast<double>(n))));
}

// Small enough to enumerate all 2^M subsets: Gaussian design, four nonzero
// coefficients (1, -0.8, 0.5, 0.3), unit noise. All rows are training rows.
inline SyntheticData enumerable_regression(std::uint64_t seed = 42, Index n = 40, Index m = 8) {
  if (m < 4) throw InvalidArgument("enumerable_regression: need at least four features");
  Rng rng(seed);
  SyntheticData d;
  d.x.resize(n, m);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < m; ++j) d.x(i, j) = rng.normal();
  }
  Vector beta = Vector::Zero(m);
  beta.head(4) << 1.0, -0.8, 0.5, 0.3;
  d.y = d.x * beta;
  for (Index i = 0; i < n; ++i) d.y(i) += rng.normal();
  d.n_train = n;
  return d;
}

// Exact posterior inclusion marginals of exp(joint_log) over all 2^M subsets.
inline Vector exact_posterior_marginals(const SpikeSlabModel& model, const SubsetPrior& prior) {
  const Index m = model.features();
  if (m > 20) throw InvalidArgument("exact_posterior_marginals: M too large to enumerate");
  const std::uint64_t count = std::uint64_t{1} << m;
  std::vector<double> lps(count);
  for (std::uint64_t b = 0; b < count; ++b) lps[b] = joint_log(model, Subset::from_bits(b, m), prior);
  const double z = logsumexp(lps);
  Vector marg = Vector::Zero(m);
  for (std::uint64_t b = 0; b < count; ++b) {
    const double p = std::exp(lps[b] - z);
    for (Index j = 0; j < m; ++j) {
      if ((b >> j) & 1U) marg(j) += p;
    }
  }
  return marg;
}

// Two groups of near-duplicate relevant features plus independent noise.
// Group g's members are z_g + tau * eps; y = beta_a z_a + beta_b z_b + N(0, 1).
// Features [0, group_size) are group A, [group_size, 2 group_size) group B.
struct CollinearityConfig {
  Index n_total = 400;
  Index group_size = 3;
  Index n_noise = 20;
  double tau = 0.005;
  double beta_a = 16.0;
  double beta_b = 0.35;
  double noise_sd = 1.0;
  double train_fraction = 0.7;
};

inline SyntheticData collinearity_data(const CollinearityConfig& c, std::uint64_t seed) {
  if (c.group_size < 2 || c.n_noise < 0 || c.n_total < 4) throw InvalidArgument("collinearity_data: degenerate config");
  Rng rng(seed);
  const Index m = 2 * c.group_size + c.n_noise;
  SyntheticData d;
  d.x.resize(c.n_total, m);
  d.y.resize(c.n_total);
  for (Index i = 0; i < c.n_total; ++i) {
    const double za = rng.normal(), zb = rng.normal();
    for (Index j = 0; j < c.group_size; ++j) {
      d.x(i, j) = za + c.tau * rng.normal();
      d.x(i, c.group_size + j) = zb + c.tau * rng.normal();
    }
    for (Index j = 2 * c.group_size; j < m; ++j) d.x(i, j) = rng.normal();
    d.y(i) = c.beta_a * za + c.beta_b * zb + c.noise_sd * rng.normal();
  }
  d.n_train = train_rows(c.n_total, c.train_fraction);
  return d;
}

}  // namespace divsel::experiments
