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

#include <optional>

#include <Eigen/Cholesky>

#include "divsel/dpp.hpp"

namespace divsel {

struct DiversityMetrics {
  double logdet = 0;                             // -inf when the minor is singular
  std::optional<double> mean_pairwise_distance;  // only with coordinates
};

// Mean Euclidean distance over pairs of selected rows of `coords`.
inline double subset_mean_distance(const Matrix& coords, const Subset& gamma) {
  gamma.check_bound(coords.rows());
  const auto& idx = gamma.indices();
  if (idx.size() < 2) return 0.0;
  double total = 0;
  long pairs = 0;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      total += (coords.row(idx[a]) - coords.row(idx[b])).norm();
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

// log det of a dense kernel's principal minor.
inline double kernel_logdet(const Matrix& kernel, const Subset& gamma) {
  gamma.check_bound(kernel.rows());
  const auto& idx = gamma.indices();
  const auto k = static_cast<Index>(idx.size());
  if (k == 0) return 0.0;
  Matrix sub(k, k);
  for (Index a = 0; a < k; ++a) {
    for (Index b = 0; b < k; ++b) sub(a, b) = kernel(idx[a], idx[b]);
  }
  Eigen::LLT<Matrix> llt(sub);
  if (llt.info() != Eigen::Success) return kNegInf;
  const Vector d = llt.matrixLLT().diagonal();
  const double scale = sub.diagonal().cwiseAbs().maxCoeff();
  if ((d.array().square() <= 1e-14 * scale).any()) return kNegInf;
  return 2.0 * d.array().log().sum();
}

inline DiversityMetrics metrics_diversity(const Matrix& kernel, const Subset& gamma,
                                          const Matrix* coords = nullptr) {
  DiversityMetrics out;
  out.logdet = kernel_logdet(kernel, gamma);
  if (coords) out.mean_pairwise_distance = subset_mean_distance(*coords, gamma);
  return out;
}

// Same, with the kernel given by its factor (Phi Phi^T).
inline DiversityMetrics metrics_diversity(const SimilarityFactor& phi, const Subset& gamma,
                                          const Matrix* coords = nullptr) {
  DiversityMetrics out;
  gamma.check_bound(phi.items());
  out.logdet = log_det_rows(phi.matrix(), gamma);
  if (coords) out.mean_pairwise_distance = subset_mean_distance(*coords, gamma);
  return out;
}

inline double mean_squared_error(const Vector& predicted, const Vector& observed) {
  if (observed.size() == 0) return 0.0;
  return (predicted - observed).squaredNorm() / static_cast<double>(observed.size());
}

}  // namespace divsel
