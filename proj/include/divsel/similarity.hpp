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
#include <string>

#include <Eigen/Eigenvalues>

#include "divsel/dpp.hpp"
#include "divsel/error.hpp"

namespace divsel {

enum class SimilaritySource { kGramOfDesign, kRbfSideInfo, kIdentity };

inline std::string to_string(SimilaritySource s) {
  switch (s) {
    case SimilaritySource::kGramOfDesign:
      return "gram_of_design";
    case SimilaritySource::kRbfSideInfo:
      return "rbf_side_info";
    case SimilaritySource::kIdentity:
      break;
  }
  return "identity";
}

inline SimilaritySource parse_similarity_source(const std::string& s) {
  if (s == "gram_of_design" || s == "gram" || s == "design") return SimilaritySource::kGramOfDesign;
  if (s == "rbf_side_info" || s == "rbf") return SimilaritySource::kRbfSideInfo;
  if (s == "identity") return SimilaritySource::kIdentity;
  throw InvalidArgument("unknown similarity source '" + s + "' (expected gram, rbf or identity)");
}

struct SimilaritySpec {
  SimilaritySource source = SimilaritySource::kGramOfDesign;
  std::optional<std::string> side_info_path;
  std::optional<double> sigma;  // RBF bandwidth; default mean pairwise distance
  Index rank_d = 0;             // starting rank for the RBF factor; 0 starts at 1
  double max_relative_error = 0.01;
};

struct SimilarityBuild {
  SimilarityFactor phi;
  Index rank = 0;
  double sigma = 0;           // RBF only
  double relative_error = 0;  // ||Phi Phi^T - L||_F / ||L||_F, RBF only
};

// Items are columns of X, each scaled to unit norm.
inline SimilarityFactor normalized_design_factor(const Matrix& design) {
  const Vector norms = design.colwise().norm();
  for (Index j = 0; j < norms.size(); ++j) {
    if (!(norms(j) > 0)) throw DataError("similarity: design column " + std::to_string(j) + " is all zero");
  }
  return SimilarityFactor(Matrix((design * norms.cwiseInverse().asDiagonal()).transpose()));
}

inline double mean_pairwise_distance(const Matrix& points) {
  const Index n = points.rows();
  if (n < 2) return 0.0;
  double total = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) total += (points.row(i) - points.row(j)).norm();
  }
  return total / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

inline Matrix rbf_kernel(const Matrix& profiles, double sigma) {
  const Index n = profiles.rows();
  Matrix l(n, n);
  for (Index i = 0; i < n; ++i) {
    l(i, i) = 1.0;
    for (Index j = i + 1; j < n; ++j) {
      const double d2 = (profiles.row(i) - profiles.row(j)).squaredNorm();
      l(i, j) = l(j, i) = std::exp(-d2 / (sigma * sigma));
    }
  }
  return l;
}

// L_ij = exp(-||f_i - f_j||^2 / sigma^2), factored as U_d diag(sqrt(lambda_d))
// at the smallest rank whose Frobenius error is within spec.max_relative_error.
inline SimilarityBuild rbf_similarity(const Matrix& profiles, const SimilaritySpec& spec) {
  const Index m = profiles.rows();
  if (m < 1 || profiles.cols() < 1) throw DataError("similarity: empty side-info matrix");
  if (!profiles.allFinite()) throw DataError("similarity: non-finite side-info entry");
  SimilarityBuild out{SimilarityFactor::identity(1), 0, 0, 0};
  out.sigma = spec.sigma.value_or(mean_pairwise_distance(profiles));
  if (!(out.sigma > 0)) {
    throw DataError("similarity: RBF bandwidth must be positive (all side-info rows identical?)");
  }
  const Matrix l = rbf_kernel(profiles, out.sigma);
  Eigen::SelfAdjointEigenSolver<Matrix> es(l);
  if (es.info() != Eigen::Success) throw NumericalError("similarity: RBF eigendecomposition failed");
  const Vector& ev = es.eigenvalues();  // ascending
  const double total = l.norm();
  Index d = std::clamp<Index>(spec.rank_d > 0 ? spec.rank_d : 1, 1, m);
  for (;; ++d) {
    Matrix phi(m, d);
    for (Index k = 0; k < d; ++k) {
      const Index src = m - 1 - k;
      phi.col(k) = es.eigenvectors().col(src) * std::sqrt(std::max(ev(src), 0.0));
    }
    const double err = (phi * phi.transpose() - l).norm() / total;
    if (err <= spec.max_relative_error || d == m) {
      out.phi = SimilarityFactor(std::move(phi));
      out.rank = d;
      out.relative_error = err;
      return out;
    }
  }
}

inline SimilarityBuild build_similarity(const SimilaritySpec& spec, const Matrix& design,
                                        const std::optional<Matrix>& side_info = std::nullopt) {
  const Index m = design.cols();
  switch (spec.source) {
    case SimilaritySource::kIdentity:
      return {SimilarityFactor::identity(m), m, 0, 0};
    case SimilaritySource::kGramOfDesign: {
      SimilarityFactor phi = normalized_design_factor(design);
      const Index d = phi.dims();
      return {std::move(phi), d, 0, 0};
    }
    case SimilaritySource::kRbfSideInfo:
      break;
  }
  if (!side_info) throw InvalidArgument("similarity: rbf_side_info needs side-info profiles");
  if (side_info->rows() != m) {
    throw DataError("similarity: side info has " + std::to_string(side_info->rows()) + " rows for " +
                    std::to_string(m) + " features");
  }
  return rbf_similarity(*side_info, spec);
}

}  // namespace divsel
