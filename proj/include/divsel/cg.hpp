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

#include <cmath>
#include <string>

#include <Eigen/Cholesky>

#include "divsel/error.hpp"
#include "divsel/numeric.hpp"

namespace divsel {

struct CgResult {
  Vector x;
  int iterations = 0;         // summed over all attempts
  int ridge_escalations = 0;  // 0 when the unregularized solve converged
  double ridge = 0;
  double relative_residual = 0;
};

namespace detail {

// Jacobi-preconditioned CG on (c + ridge I) x = g + ridge x0.
inline bool pcg(const Matrix& c, const Vector& g, const Vector& x0, double ridge, double tol, int max_iters,
                Vector& x, int& iters, double& rel) {
  const Index n = g.size();
  const Vector rhs = ridge > 0 ? Vector(g + ridge * x0) : g;
  const double bnorm = rhs.norm();
  Vector diag = c.diagonal().array() + ridge;
  Vector pinv(n);
  for (Index i = 0; i < n; ++i) pinv(i) = diag(i) > 0 ? 1.0 / diag(i) : 1.0;
  auto apply = [&](const Vector& v) -> Vector {
    Vector out = c * v;
    if (ridge > 0) out += ridge * v;
    return out;
  };
  x = x0;
  Vector r = rhs - apply(x);
  rel = r.norm() / bnorm;
  if (rel <= tol) return true;
  Vector z = pinv.cwiseProduct(r);
  Vector p = z;
  double rz = r.dot(z);
  for (int it = 0; it < max_iters; ++it) {
    ++iters;
    const Vector ap = apply(p);
    const double pap = p.dot(ap);
    if (!(pap > 0) || !std::isfinite(pap)) return false;
    const double a = rz / pap;
    x += a * p;
    r -= a * ap;
    rel = r.norm() / bnorm;
    if (!std::isfinite(rel)) return false;
    if (rel <= tol) {
      // Confirm against the true residual; recursion drift can overstate progress.
      rel = (rhs - apply(x)).norm() / bnorm;
      if (rel <= tol) return true;
      r = rhs - apply(x);
    }
    z = pinv.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  return false;
}

}  // namespace detail

// Solves c x = g by conjugate gradient from a warm start. If CG stagnates,
// retries on (c + r I) x = g + r x0 with r = ridge_eps tr(c) / n, growing
// r tenfold up to three more times.
inline CgResult solve_linear(const Matrix& c_mat, const Vector& g_vec, const Vector& warm_start, double cg_tolerance,
                             int cg_max_iters, double ridge_eps) {
  const Index n = g_vec.size();
  if (c_mat.rows() != n || c_mat.cols() != n || warm_start.size() != n) {
    throw InvalidArgument("solve_linear: dimension mismatch");
  }
  CgResult out;
  if (g_vec.norm() == 0.0) {
    out.x = Vector::Zero(n);
    return out;
  }
  Vector x;
  double rel = 0;
  if (detail::pcg(c_mat, g_vec, warm_start, 0.0, cg_tolerance, cg_max_iters, x, out.iterations, rel)) {
    out.x = std::move(x);
    out.relative_residual = rel;
    return out;
  }
  const double trace = c_mat.trace();
  double ridge = ridge_eps * (trace > 0 ? trace : 1.0) / static_cast<double>(n);
  for (int attempt = 0; attempt < 4; ++attempt, ridge *= 10.0) {
    ++out.ridge_escalations;
    if (detail::pcg(c_mat, g_vec, warm_start, ridge, cg_tolerance, cg_max_iters, x, out.iterations, rel)) {
      out.x = std::move(x);
      out.ridge = ridge;
      out.relative_residual = (c_mat * out.x - g_vec).norm() / g_vec.norm();
      return out;
    }
  }
  throw NumericalError("solve_linear: conjugate gradient failed to converge (residual " + fmt_g(rel) +
                       ") after ridge escalation to " + fmt_g(ridge / 10.0));
}

// Direct alternative for systems where CG needs more than ~n/6 iterations:
// Cholesky of (c + r I) x = g + r x0 with the smallest ridge of solve_linear. The
// proximal term pins directions c cannot resolve to the warm start.
inline CgResult solve_dense(const Matrix& c_mat, const Vector& g_vec, const Vector& warm_start, double ridge_eps) {
  const Index n = g_vec.size();
  if (c_mat.rows() != n || c_mat.cols() != n || warm_start.size() != n) {
    throw InvalidArgument("solve_dense: dimension mismatch");
  }
  CgResult out;
  if (g_vec.norm() == 0.0) {
    out.x = Vector::Zero(n);
    return out;
  }
  const double trace = c_mat.trace();
  double ridge = ridge_eps * (trace > 0 ? trace : 1.0) / static_cast<double>(n);
  for (int attempt = 0; attempt < 4; ++attempt, ridge *= 10.0) {
    Matrix a = c_mat;
    a.diagonal().array() += ridge;
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) {
      ++out.ridge_escalations;
      continue;
    }
    Vector x = llt.solve(g_vec + ridge * warm_start);
    if (!x.allFinite()) {
      ++out.ridge_escalations;
      continue;
    }
    out.x = std::move(x);
    out.ridge = ridge;
    out.relative_residual = (c_mat * out.x - g_vec).norm() / g_vec.norm();
    return out;
  }
  throw NumericalError("solve_dense: factorization failed after ridge escalation to " + fmt_g(ridge / 10.0));
}

}  // namespace divsel
