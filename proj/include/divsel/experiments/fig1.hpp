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

// Six-item block kernel: items 0-2 form one rank-2 block with eigenvalues
// (lambda1, lambda2), items 3-5 are mutually orthogonal singletons. As the
// block's spectrum concentrates the block behaves more and more like a
// single item.

#include <cmath>
#include <optional>
#include <ostream>
#include <vector>

#include "divsel/dpp.hpp"
#include "divsel/rng.hpp"

namespace divsel::experiments {

struct Fig1Config {
  std::vector<double> ratios{1.0, 10.0, 100.0, 1000.0};  // lambda1 / lambda2
  double eigen_sum = 2.0;                                 // lambda1 + lambda2, held fixed
  std::optional<double> singleton_eigenvalue;             // default: eigen_sum
  long n_samples = 20000;
  std::uint64_t seed = 0;
};

struct Fig1Row {
  double ratio = 0, lambda1 = 0, lambda2 = 0;
  double exact_block = 0, empirical_block = 0, se_block = 0;
  double exact_singleton = 0, empirical_singleton = 0, se_singleton = 0;
};

inline LEnsemble fig1_ensemble(double lambda1, double lambda2, double singleton) {
  Matrix phi = Matrix::Zero(6, 5);
  const double a = std::sqrt(lambda1 / 3.0), b = std::sqrt(lambda2 / 2.0);
  phi.row(0) << a, b, 0, 0, 0;
  phi.row(1) << a, -b, 0, 0, 0;
  phi.row(2) << a, 0, 0, 0, 0;
  for (Index i = 0; i < 3; ++i) phi(3 + i, 2 + i) = std::sqrt(singleton);
  return LEnsemble(SimilarityFactor(std::move(phi)), Vector::Zero(6));
}

inline std::vector<Fig1Row> demo_fig1(const Fig1Config& cfg) {
  if (cfg.n_samples < 2) throw InvalidArgument("demo_fig1: need at least two samples");
  if (!(cfg.eigen_sum > 0)) throw InvalidArgument("demo_fig1: eigenvalue sum must be positive");
  const double single = cfg.singleton_eigenvalue.value_or(cfg.eigen_sum);
  std::vector<Fig1Row> rows;
  const Rng root(cfg.seed);
  for (std::size_t r = 0; r < cfg.ratios.size(); ++r) {
    const double ratio = cfg.ratios[r];
    if (!(ratio >= 1.0)) throw InvalidArgument("demo_fig1: ratios must be >= 1");
    Fig1Row row;
    row.ratio = ratio;
    row.lambda2 = cfg.eigen_sum / (1.0 + ratio);
    row.lambda1 = cfg.eigen_sum - row.lambda2;
    const LEnsemble l = fig1_ensemble(row.lambda1, row.lambda2, single);
    const Vector k = inclusion_probabilities(l);
    row.exact_block = k.head(3).sum();
    row.exact_singleton = k.tail(3).mean();

    Rng rng = root.split(r);
    double sb = 0, sb2 = 0, ss = 0, ss2 = 0;
    for (long s = 0; s < cfg.n_samples; ++s) {
      double nb = 0, ns = 0;
      for (Index i : sample(l, rng)) (i < 3 ? nb : ns) += 1.0;
      ns /= 3.0;
      sb += nb;
      sb2 += nb * nb;
      ss += ns;
      ss2 += ns * ns;
    }
    const double n = static_cast<double>(cfg.n_samples);
    row.empirical_block = sb / n;
    row.empirical_singleton = ss / n;
    row.se_block = std::sqrt(std::max(0.0, sb2 / n - row.empirical_block * row.empirical_block) / (n - 1.0));
    row.se_singleton = std::sqrt(std::max(0.0, ss2 / n - row.empirical_singleton * row.empirical_singleton) / (n - 1.0));
    rows.push_back(row);
  }
  return rows;
}

inline void write_fig1_csv(std::ostream& out, const std::vector<Fig1Row>& rows) {
  out << "ratio,lambda1,lambda2,exact_block,empirical_block,se_block,exact_singleton,empirical_singleton,se_singleton\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.ratio << ',' << r.lambda1 << ',' << r.lambda2 << ',' << r.exact_block << ',' << r.empirical_block << ','
        << r.se_block << ',' << r.exact_singleton << ',' << r.empirical_singleton << ',' << r.se_singleton << '\n';
  }
}

}  // namespace divsel::experiments
