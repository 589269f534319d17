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

// Low-rank L-ensemble DPPs: L = diag(e^{theta/2}) Phi Phi^T diag(e^{theta/2}).
// All spectral work happens on the d x d dual matrix
// B^T B = Phi^T diag(e^theta) Phi, where B = diag(e^{theta/2}) Phi.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "divsel/error.hpp"
#include "divsel/numeric.hpp"
#include "divsel/rng.hpp"
#include "divsel/subset.hpp"

namespace divsel {

// Dual eigenvalues below this fraction of the largest are treated as zero.
inline constexpr double kEigenClamp = 1e-10;

// Row m is the similarity feature phi(m) of item m.
class SimilarityFactor {
 public:
  explicit SimilarityFactor(Matrix phi) : phi_(std::move(phi)) {
    if (phi_.rows() < 1 || phi_.cols() < 1) {
      throw InvalidArgument("SimilarityFactor: need at least one item and one dimension");
    }
    if (!phi_.allFinite()) throw InvalidArgument("SimilarityFactor: non-finite entry");
  }

  static SimilarityFactor identity(Index m) {
    SimilarityFactor f(Matrix::Identity(m, m));
    f.identity_ = true;
    return f;
  }

  Index items() const { return phi_.rows(); }
  Index dims() const { return phi_.cols(); }
  const Matrix& matrix() const { return phi_; }
  bool is_identity() const { return identity_; }

  Matrix gram() const { return phi_ * phi_.transpose(); }

  // Equivalent factor with at most min(M, d) columns (same Phi Phi^T).
  SimilarityFactor compacted() const {
    if (identity_ || phi_.cols() <= phi_.rows()) return *this;
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram());
    const Vector& ev = es.eigenvalues();
    const double top = std::max(ev.maxCoeff(), 0.0);
    std::vector<Index> keep;
    for (Index i = ev.size() - 1; i >= 0; --i) {
      if (ev(i) > kEigenClamp * top && ev(i) > 0) keep.push_back(i);
    }
    if (keep.empty()) return SimilarityFactor(Matrix::Zero(phi_.rows(), 1));
    Matrix out(phi_.rows(), static_cast<Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) {
      out.col(static_cast<Index>(j)) = es.eigenvectors().col(keep[j]) * std::sqrt(ev(keep[j]));
    }
    return SimilarityFactor(std::move(out));
  }

 private:
  Matrix phi_;
  bool identity_ = false;
};

// Nonzero dual eigenpairs, largest first. For an identity factor the
// eigenpairs are kept in item order.
struct DualSpectrum {
  Vector eigenvalues;
  Matrix eigenvectors;  // d x rank
  Index rank() const { return eigenvalues.size(); }
};

struct MarginalKernel {
  Matrix k;
};

class LEnsemble {
 public:
  LEnsemble(SimilarityFactor factor, Vector log_quality)
      : factor_(std::move(factor)), theta_(std::move(log_quality)) {
    if (theta_.size() != factor_.items()) {
      throw InvalidArgument("LEnsemble: theta has length " + std::to_string(theta_.size()) +
                            " but there are " + std::to_string(factor_.items()) + " items");
    }
    if (!theta_.allFinite()) throw InvalidArgument("LEnsemble: non-finite log-quality");
    scaled_ = (theta_.array() * 0.5).exp().matrix().asDiagonal() * factor_.matrix();
    cache_ = std::make_shared<Cache>();
  }

  Index size() const { return factor_.items(); }
  const SimilarityFactor& factor() const { return factor_; }
  const Vector& log_quality() const { return theta_; }

  // B = diag(e^{theta/2}) Phi, so L = B B^T.
  const Matrix& scaled_factor() const { return scaled_; }

  Matrix kernel() const { return scaled_ * scaled_.transpose(); }

  // Same similarity, new qualities; never shares the cached spectrum.
  LEnsemble with_log_quality(Vector theta) const { return LEnsemble(factor_, std::move(theta)); }

  const DualSpectrum& spectrum() const {
    std::call_once(cache_->once, [this] { cache_->spectrum = compute_spectrum(); });
    return cache_->spectrum;
  }

 private:
  struct Cache {
    std::once_flag once;
    DualSpectrum spectrum;
  };

  DualSpectrum compute_spectrum() const {
    DualSpectrum out;
    if (factor_.is_identity()) {
      out.eigenvalues = theta_.array().exp();
      out.eigenvectors = Matrix::Identity(size(), size());
      return out;
    }
    Matrix dual = scaled_.transpose() * scaled_;
    Eigen::SelfAdjointEigenSolver<Matrix> es(dual);
    if (es.info() != Eigen::Success) throw NumericalError("LEnsemble: dual eigendecomposition failed");
    const Vector& ev = es.eigenvalues();
    const double top = ev.size() ? std::max(ev.maxCoeff(), 0.0) : 0.0;
    std::vector<Index> keep;
    for (Index i = ev.size() - 1; i >= 0; --i) {
      if (ev(i) > 0 && ev(i) >= kEigenClamp * top) keep.push_back(i);
    }
    out.eigenvalues.resize(static_cast<Index>(keep.size()));
    out.eigenvectors.resize(dual.rows(), static_cast<Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) {
      out.eigenvalues(static_cast<Index>(j)) = ev(keep[j]);
      out.eigenvectors.col(static_cast<Index>(j)) = es.eigenvectors().col(keep[j]);
    }
    return out;
  }

  SimilarityFactor factor_;
  Vector theta_;
  Matrix scaled_;
  std::shared_ptr<Cache> cache_;
};

inline LEnsemble build_lensemble(const SimilarityFactor& phi, const Vector& theta) {
  return LEnsemble(phi, theta);
}

// log det(L + I) = sum_i log(1 + lambda_i) over the dual spectrum.
inline double log_normalizer(const LEnsemble& l) {
  const Vector& ev = l.spectrum().eigenvalues;
  double s = 0.0;
  for (Index i = 0; i < ev.size(); ++i) s += std::log1p(ev(i));
  return s;
}

// log det of the Gram matrix of the given rows of `rows`; -inf when the
// rows are linearly dependent. The empty set has determinant 1.
inline double log_det_rows(const Matrix& rows, const Subset& gamma) {
  const Index k = static_cast<Index>(gamma.size());
  if (k == 0) return 0.0;
  if (k > rows.cols()) return kNegInf;
  Matrix a(rows.cols(), k);
  for (Index j = 0; j < k; ++j) a.col(j) = rows.row(gamma[static_cast<std::size_t>(j)]).transpose();
  Eigen::HouseholderQR<Matrix> qr(a);
  const Matrix& r = qr.matrixQR();
  double s = 0.0;
  for (Index j = 0; j < k; ++j) {
    const double rjj = r(j, j) * r(j, j);
    const double col = a.col(j).squaredNorm();
    if (rjj <= 1e-14 * col || rjj == 0.0) return kNegInf;
    s += std::log(rjj);
  }
  return s;
}

inline double subset_log_prob(const LEnsemble& l, const Subset& gamma, bool normalized) {
  gamma.check_bound(l.size());
  double lp;
  if (l.factor().is_identity()) {
    lp = 0.0;
    for (Index i : gamma) lp += l.log_quality()(i);
  } else {
    lp = log_det_rows(l.scaled_factor(), gamma);
  }
  return normalized ? lp - log_normalizer(l) : lp;
}

// Columns B v_i / sqrt(lambda_i): orthonormal eigenvectors of L.
inline Matrix primal_eigenvectors(const LEnsemble& l, const std::vector<Index>& which) {
  const DualSpectrum& sp = l.spectrum();
  Matrix u(l.size(), static_cast<Index>(which.size()));
  for (std::size_t j = 0; j < which.size(); ++j) {
    const Index i = which[j];
    u.col(static_cast<Index>(j)) = l.scaled_factor() * sp.eigenvectors.col(i) / std::sqrt(sp.eigenvalues(i));
  }
  return u;
}

// K = L (L + I)^{-1} = B V diag(1/(1+lambda)) V^T B^T.
inline MarginalKernel marginal_kernel(const LEnsemble& l) {
  const DualSpectrum& sp = l.spectrum();
  if (l.factor().is_identity()) {
    Vector d(l.size());
    for (Index i = 0; i < l.size(); ++i) d(i) = sigmoid(l.log_quality()(i));
    return {d.asDiagonal().toDenseMatrix()};
  }
  Matrix w = l.scaled_factor() * sp.eigenvectors;
  Vector inv = (1.0 + sp.eigenvalues.array()).inverse();
  return {w * inv.asDiagonal() * w.transpose()};
}

// diag(K) in O(M d rank) without forming K.
inline Vector inclusion_probabilities(const LEnsemble& l) {
  if (l.factor().is_identity()) {
    Vector d(l.size());
    for (Index i = 0; i < l.size(); ++i) d(i) = sigmoid(l.log_quality()(i));
    return d;
  }
  const DualSpectrum& sp = l.spectrum();
  Matrix w = l.scaled_factor() * sp.eigenvectors;
  Vector inv = (1.0 + sp.eigenvalues.array()).inverse();
  return (w.array().square().matrix() * inv);
}

inline double expected_cardinality(const LEnsemble& l) {
  if (l.factor().is_identity()) {
    double s = 0.0;
    for (Index i = 0; i < l.size(); ++i) s += sigmoid(l.log_quality()(i));
    return s;
  }
  const Vector& ev = l.spectrum().eigenvalues;
  double s = 0.0;
  for (Index i = 0; i < ev.size(); ++i) s += ev(i) / (1.0 + ev(i));
  return s;
}

// Solves sum_i e^t lambda_i / (1 + e^t lambda_i) = kappa for the scalar t,
// lambda_i the eigenvalues of Phi Phi^T.
inline double calibrate_theta0(const SimilarityFactor& phi, double kappa) {
  const LEnsemble base(phi, Vector::Zero(phi.items()));
  const Vector& ev = base.spectrum().eigenvalues;
  const double rank = static_cast<double>(ev.size());
  if (!(kappa > 0.0) || !(kappa < rank)) {
    throw InvalidArgument("calibrate_theta0: kappa=" + std::to_string(kappa) +
                          " must lie strictly between 0 and rank " + std::to_string(ev.size()));
  }
  Vector log_ev = ev.array().log();
  auto card = [&](double t) {
    double s = 0.0;
    for (Index i = 0; i < log_ev.size(); ++i) s += sigmoid(t + log_ev(i));
    return s;
  };
  double lo = -1.0, hi = 1.0, width = 2.0;
  while (card(lo) > kappa) {
    width *= 2.0;
    lo = hi - width;
  }
  while (card(hi) < kappa) {
    width *= 2.0;
    hi = lo + width;
  }
  for (int it = 0; it < 400 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (card(mid) < kappa) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double t = 0.5 * (lo + hi);
  if (std::abs(card(t) - kappa) > 1e-10) {
    throw NumericalError("calibrate_theta0: bisection did not reach the target cardinality");
  }
  return t;
}

namespace detail {

// Draws items from the span of the orthonormal columns of u, one per column.
inline Subset project_and_draw(Matrix u, Rng& rng) {
  const Index m = u.rows();
  std::vector<Index> picked;
  std::vector<char> taken(static_cast<std::size_t>(m), 0);
  while (u.cols() > 0) {
    Vector w = u.rowwise().squaredNorm();
    for (Index i : picked) w(i) = 0.0;
    const double total = w.sum();
    double target = rng.uniform() * total;
    Index item = -1, last_positive = -1;
    for (Index i = 0; i < m; ++i) {
      if (w(i) <= 0.0) continue;
      last_positive = i;
      target -= w(i);
      if (target < 0.0) {
        item = i;
        break;
      }
    }
    if (item < 0) item = last_positive;
    if (item < 0) throw NumericalError("DPP sampler: projection collapsed");
    picked.push_back(item);
    taken[static_cast<std::size_t>(item)] = 1;
    if (u.cols() == 1) break;

    // Restrict the span to vectors vanishing at `item`.
    Index pivot = 0;
    u.row(item).cwiseAbs().maxCoeff(&pivot);
    const Vector pcol = u.col(pivot);
    const double pval = pcol(item);
    Matrix next(m, u.cols() - 1);
    for (Index j = 0, c = 0; j < u.cols(); ++j) {
      if (j == pivot) continue;
      next.col(c++) = u.col(j) - pcol * (u(item, j) / pval);
    }
    // Two passes of modified Gram-Schmidt.
    for (int pass = 0; pass < 2; ++pass) {
      for (Index j = 0; j < next.cols(); ++j) {
        for (Index q = 0; q < j; ++q) next.col(j) -= next.col(q).dot(next.col(j)) * next.col(q);
        const double nrm = next.col(j).norm();
        if (nrm > 0) next.col(j) /= nrm;
      }
    }
    u = std::move(next);
  }
  return Subset::from_unsorted(std::move(picked));
}

}  // namespace detail

// Exact DPP sample via the dual spectral algorithm.
inline Subset sample(const LEnsemble& l, Rng& rng) {
  const DualSpectrum& sp = l.spectrum();
  std::vector<Index> chosen;
  for (Index i = 0; i < sp.rank(); ++i) {
    const double lam = sp.eigenvalues(i);
    if (rng.uniform() < lam / (1.0 + lam)) chosen.push_back(i);
  }
  if (chosen.empty()) return {};
  // Identity similarity: eigenvectors are coordinate axes, no projection needed.
  if (l.factor().is_identity()) return Subset(std::move(chosen));
  return detail::project_and_draw(primal_eigenvectors(l, chosen), rng);
}

// Table E(j, n) = e_j(lambda_1..lambda_n), j = 0..k_max, n = 0..size.
inline Matrix elementary_symmetric_table(const Vector& lambdas, Index k_max) {
  const Index n = lambdas.size();
  Matrix e = Matrix::Zero(k_max + 1, n + 1);
  e.row(0).setOnes();
  for (Index c = 1; c <= n; ++c) {
    for (Index j = 1; j <= k_max; ++j) e(j, c) = e(j, c - 1) + lambdas(c - 1) * e(j - 1, c - 1);
  }
  return e;
}

inline Vector elementary_symmetric(const Vector& lambdas, Index k_max) {
  if ((lambdas.array() < 0).any() || !lambdas.allFinite()) {
    throw InvalidArgument("elementary_symmetric: lambdas must be finite and nonnegative");
  }
  return elementary_symmetric_table(lambdas, k_max).col(lambdas.size());
}

// Sample from the DPP conditioned on |gamma| = k.
inline Subset sample_k(const LEnsemble& l, Index k, Rng& rng) {
  const DualSpectrum& sp = l.spectrum();
  if (k < 1 || k > sp.rank()) {
    throw InvalidArgument("sample_k: k=" + std::to_string(k) + " must be in [1, rank=" +
                          std::to_string(sp.rank()) + "]");
  }
  // Selection ratios are scale-invariant; normalizing avoids overflow.
  const Vector lam = sp.eigenvalues / sp.eigenvalues.maxCoeff();
  const Matrix e = elementary_symmetric_table(lam, k);
  std::vector<Index> chosen;
  Index remaining = k;
  for (Index n = lam.size(); n >= 1 && remaining > 0; --n) {
    const double p = (n == remaining) ? 1.0 : lam(n - 1) * e(remaining - 1, n - 1) / e(remaining, n);
    if (rng.uniform() < p) {
      chosen.push_back(n - 1);
      --remaining;
    }
  }
  std::sort(chosen.begin(), chosen.end());
  if (l.factor().is_identity()) return Subset(std::move(chosen));
  return detail::project_and_draw(primal_eigenvectors(l, chosen), rng);
}

// Greedy MAP by incremental Cholesky. The best single item is always taken
// (when it has nonzero quality); after that an item is added only while the
// best log-det gain is strictly positive. Ties go to the lowest index.
inline Subset greedy_map(const LEnsemble& l) {
  const Index m = l.size();
  const Matrix& b = l.scaled_factor();
  Vector d2 = b.rowwise().squaredNorm();
  std::vector<Vector> rows(static_cast<std::size_t>(m));  // incremental Cholesky rows
  std::vector<char> used(static_cast<std::size_t>(m), 0);
  std::vector<Index> picked;
  while (static_cast<Index>(picked.size()) < m) {
    Index best = -1;
    double best_d2 = 0.0;
    for (Index i = 0; i < m; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      if (best < 0 || d2(i) > best_d2) {
        best = i;
        best_d2 = d2(i);
      }
    }
    if (best < 0) break;
    const double diag_best = b.row(best).squaredNorm();
    const bool degenerate = !(best_d2 > 1e-14 * diag_best) || best_d2 <= 0.0;
    if (degenerate) break;
    if (!picked.empty() && !(std::log(best_d2) > 0.0)) break;
    picked.push_back(best);
    used[static_cast<std::size_t>(best)] = 1;
    const double dj = std::sqrt(best_d2);
    const Vector& cj = rows[static_cast<std::size_t>(best)];
    for (Index i = 0; i < m; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      Vector& ci = rows[static_cast<std::size_t>(i)];
      const double lij = b.row(best).dot(b.row(i));
      const double dot = cj.size() ? cj.dot(ci) : 0.0;
      const double ei = (lij - dot) / dj;
      ci.conservativeResize(ci.size() + 1);
      ci(ci.size() - 1) = ei;
      d2(i) -= ei * ei;
    }
  }
  return Subset::from_unsorted(std::move(picked));
}

// Exhaustive argmax of det[L]_gamma; ties go to the lexicographically
// smallest index list (the empty set first).
inline Subset exact_map_enumerate(const LEnsemble& l, Index m_limit = 20) {
  const Index m = l.size();
  if (m > m_limit) {
    throw InvalidArgument("exact_map_enumerate: " + std::to_string(m) + " items exceeds the limit of " +
                          std::to_string(m_limit));
  }
  Subset best;
  double best_lp = 0.0;
  const std::uint64_t count = 1ULL << m;
  for (std::uint64_t bits = 1; bits < count; ++bits) {
    Subset s = Subset::from_bits(bits, m);
    const double lp = subset_log_prob(l, s, false);
    if (lp > best_lp || (lp == best_lp && s < best)) {
      best = std::move(s);
      best_lp = lp;
    }
  }
  return best;
}

}  // namespace divsel
