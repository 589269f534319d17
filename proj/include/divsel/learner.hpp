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

// Stochastic fixed-form variational fit of q(gamma) proportional to
// exp(theta^T gamma) nu(gamma). The augmented parameter [theta; theta0]
// solves C theta~ = g with C = E_q[g~ g~^T], g = E_q[g~ log p(gamma, y)],
// g~ = [gamma; 1], both tracked by single-sample running averages.

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "divsel/cg.hpp"
#include "divsel/dpp.hpp"
#include "divsel/regression.hpp"
#include "divsel/rng.hpp"

namespace divsel {

enum class Mode { kBernoulliDpp, kDppBernoulli };
enum class CEstimator { kEmpiricalOuterProduct, kMarginalKernel };
enum class LinearSolver { kConjugateGradient, kDense };

inline std::string to_string(Mode m) { return m == Mode::kBernoulliDpp ? "bernoulli-dpp" : "dpp-bernoulli"; }
inline std::string to_string(CEstimator c) {
  return c == CEstimator::kEmpiricalOuterProduct ? "empirical" : "marginal-kernel";
}

inline std::string to_string(LinearSolver s) { return s == LinearSolver::kConjugateGradient ? "cg" : "dense"; }

inline Mode parse_mode(const std::string& s) {
  if (s == "bernoulli-dpp" || s == "bernoulli_dpp") return Mode::kBernoulliDpp;
  if (s == "dpp-bernoulli" || s == "dpp_bernoulli") return Mode::kDppBernoulli;
  throw InvalidArgument("unknown mode '" + s + "' (expected bernoulli-dpp or dpp-bernoulli)");
}

inline CEstimator parse_c_estimator(const std::string& s) {
  if (s == "empirical" || s == "empirical_outer_product") return CEstimator::kEmpiricalOuterProduct;
  if (s == "marginal-kernel" || s == "marginal_kernel_K" || s == "kernel") return CEstimator::kMarginalKernel;
  throw InvalidArgument("unknown C estimator '" + s + "' (expected empirical or marginal-kernel)");
}

inline LinearSolver parse_linear_solver(const std::string& s) {
  if (s == "cg") return LinearSolver::kConjugateGradient;
  if (s == "dense") return LinearSolver::kDense;
  throw InvalidArgument("unknown linear solver '" + s + "' (expected cg or dense)");
}

struct LearnerConfig {
  Mode mode = Mode::kBernoulliDpp;
  long n_iters = 2000;
  double kappa = 5.0;
  std::optional<double> step_size;  // default 1/sqrt(n_iters)
  CEstimator c_estimator = CEstimator::kEmpiricalOuterProduct;
  std::uint64_t seed = 0;
  double cg_tolerance = 1e-8;
  int cg_max_iters = 0;  // 0: max(100, 2 (M + 1))
  double ridge_eps = 1e-8;
  LinearSolver solver = LinearSolver::kConjugateGradient;
  double theta_clamp = 15.0;
  // Fit exp(theta^T gamma + theta0) to p(gamma, y) / det[Phi Phi^T]_gamma
  // instead of p(gamma, y), i.e. measure the target against q's base measure.
  bool subtract_base_measure = false;

  double step() const { return step_size ? *step_size : 1.0 / std::sqrt(static_cast<double>(n_iters)); }

  void validate() const {
    if (n_iters < 2) throw InvalidArgument("LearnerConfig: n_iters must be at least 2");
    const double w = step();
    if (!(w >= 0.0 && w <= 1.0)) throw InvalidArgument("LearnerConfig: step size must lie in [0, 1]");
    if (!(cg_tolerance > 0)) throw InvalidArgument("LearnerConfig: cg_tolerance must be positive");
    if (!(kappa > 0)) throw InvalidArgument("LearnerConfig: kappa must be positive");
  }
};

// The approximating family: sampling plus the moments the updates need.
class VariationalFamily {
 public:
  virtual ~VariationalFamily() = default;
  virtual Index size() const = 0;
  virtual Subset sample(const Vector& theta, Rng& rng) const = 0;
  virtual Vector inclusion(const Vector& theta) const = 0;
  // E_q[gamma gamma^T].
  virtual Matrix second_moment(const Vector& theta) const = 0;
  virtual double log_base_measure(const Subset& gamma) const = 0;
  virtual const SimilarityFactor& similarity() const = 0;
  virtual LEnsemble ensemble(const Vector& theta) const = 0;
};

// q is a DPP with L = diag(e^{theta/2}) Phi Phi^T diag(e^{theta/2}).
class DppFamily final : public VariationalFamily {
 public:
  explicit DppFamily(SimilarityFactor phi) : phi_(phi.compacted()) {}
  Index size() const override { return phi_.items(); }
  LEnsemble ensemble(const Vector& theta) const override { return LEnsemble(phi_, theta); }
  Subset sample(const Vector& theta, Rng& rng) const override { return divsel::sample(ensemble(theta), rng); }
  Vector inclusion(const Vector& theta) const override { return inclusion_probabilities(ensemble(theta)); }
  Matrix second_moment(const Vector& theta) const override {
    // P(i, j in gamma) = K_ii K_jj - K_ij^2 off the diagonal, K_ii on it.
    const Matrix k = marginal_kernel(ensemble(theta)).k;
    const Vector d = k.diagonal();
    Matrix p = d * d.transpose() - k.cwiseAbs2();
    p.diagonal() = d;
    return p;
  }
  double log_base_measure(const Subset& gamma) const override {
    return phi_.is_identity() ? 0.0 : log_det_rows(phi_.matrix(), gamma);
  }
  const SimilarityFactor& similarity() const override { return phi_; }

 private:
  SimilarityFactor phi_;
};

// Fully factorized q: gamma_m ~ Bernoulli(sigmoid(theta_m)).
class BernoulliFamily final : public VariationalFamily {
 public:
  explicit BernoulliFamily(Index m) : phi_(SimilarityFactor::identity(m)) {}
  Index size() const override { return phi_.items(); }
  LEnsemble ensemble(const Vector& theta) const override { return LEnsemble(phi_, theta); }
  Subset sample(const Vector& theta, Rng& rng) const override {
    std::vector<Index> idx;
    for (Index i = 0; i < theta.size(); ++i) {
      if (rng.uniform() < sigmoid(theta(i))) idx.push_back(i);
    }
    return Subset(std::move(idx));
  }
  Vector inclusion(const Vector& theta) const override {
    return theta.unaryExpr([](double t) { return sigmoid(t); });
  }
  Matrix second_moment(const Vector& theta) const override {
    const Vector p = inclusion(theta);
    Matrix out = p * p.transpose();
    out.diagonal() = p;
    return out;
  }
  double log_base_measure(const Subset&) const override { return 0.0; }
  const SimilarityFactor& similarity() const override { return phi_; }

 private:
  SimilarityFactor phi_;
};

struct LearnerState {
  Vector theta_tilde;  // [theta; theta0], theta0 relative to `baseline`
  Matrix c_mat;
  Vector g_vec;    // centered: running mean of g~ (log p - baseline), plus the initial g_1
  Vector g_ones;   // running mean of g~ over the samples (no initial term)
  long iter = 0;   // completed steps
  Matrix avg_c;    // second-half sums
  Vector avg_g;
  Vector avg_ones;
  long avg_count = 0;
  double baseline = 0;  // running mean of the observed log p(gamma, y)
  long baseline_count = 0;

  Index features() const { return theta_tilde.size() - 1; }
  Vector theta() const { return theta_tilde.head(features()); }
  // g in the uncentered parameterization.
  Vector uncentered_g() const { return g_vec + baseline * g_ones; }
};

struct StepInfo {
  Subset gamma;
  double joint = 0;
  int cg_iterations = 0;
  int ridge_escalations = 0;
  bool clamped = false;
  bool floored = false;
  double residual = 0;
};

using JointLogFn = std::function<double(const Subset&)>;

// Stand-in for log p = -inf so a zero-prior draw still pushes theta down.
inline constexpr double kLogFloorGap = 1000.0;

inline LearnerState init_state(const VariationalFamily& family, const LearnerConfig& config) {
  config.validate();
  const Index m = family.size();
  const double theta0 = calibrate_theta0(family.similarity(), config.kappa);
  LearnerState s;
  s.theta_tilde = Vector::Constant(m + 1, theta0);
  const Vector k = family.inclusion(s.theta_tilde.head(m));
  s.c_mat = Matrix::Zero(m + 1, m + 1);
  s.c_mat.diagonal().head(m) = k;
  s.c_mat(m, m) = 1.0;
  s.g_vec = s.c_mat * s.theta_tilde;
  s.g_ones = Vector::Zero(m + 1);
  s.avg_c = Matrix::Zero(m + 1, m + 1);
  s.avg_g = Vector::Zero(m + 1);
  s.avg_ones = Vector::Zero(m + 1);
  return s;
}

inline LearnerState init_state(const SimilarityFactor& phi, const LearnerConfig& config) {
  if (config.mode == Mode::kBernoulliDpp) return init_state(DppFamily(phi), config);
  return init_state(BernoulliFamily(phi.items()), config);
}

namespace detail {

inline int cg_budget(const LearnerConfig& config, Index n) {
  return config.cg_max_iters > 0 ? config.cg_max_iters : std::max<int>(100, static_cast<int>(2 * n));
}

inline CgResult solve(const LearnerConfig& config, const Matrix& c, const Vector& g, const Vector& warm) {
  if (config.solver == LinearSolver::kDense) return solve_dense(c, g, warm, config.ridge_eps);
  return solve_linear(c, g, warm, config.cg_tolerance, cg_budget(config, g.size()), config.ridge_eps);
}

inline bool clamp_theta(Vector& theta_tilde, double bound) {
  bool hit = false;
  const Index m = theta_tilde.size() - 1;
  for (Index i = 0; i < m; ++i) {
    if (theta_tilde(i) > bound) {
      theta_tilde(i) = bound;
      hit = true;
    } else if (theta_tilde(i) < -bound) {
      theta_tilde(i) = -bound;
      hit = true;
    }
  }
  return hit;
}

}  // namespace detail

// One iteration: draw gamma* ~ q, fold g~ log p and the C estimate into the
// running averages with weight w, re-solve C theta~ = g by warm-started CG.
inline StepInfo step(LearnerState& state, const JointLogFn& joint_log_fn, const VariationalFamily& family,
                     const LearnerConfig& config, Rng& rng) {
  const Index m = state.features();
  const double w = config.step();
  StepInfo info;
  info.gamma = family.sample(state.theta(), rng);

  double lp = joint_log_fn(info.gamma);
  if (config.subtract_base_measure && std::isfinite(lp)) lp -= family.log_base_measure(info.gamma);
  if (!std::isfinite(lp)) {
    if (!std::isnan(lp) && lp < 0) {
      lp = (state.baseline_count ? state.baseline : 0.0) - kLogFloorGap;
      info.floored = true;
    } else {
      throw NumericalError("learner: joint log-density is not finite for " + to_string(info.gamma));
    }
  }
  info.joint = lp;
  if (!info.floored) {
    const double next = state.baseline + (lp - state.baseline) / static_cast<double>(state.baseline_count + 1);
    const double shift = next - state.baseline;
    state.g_vec -= shift * state.g_ones;
    state.avg_g -= shift * state.avg_ones;
    state.baseline = next;
    ++state.baseline_count;
  }
  const double centered = lp - state.baseline;

  const std::vector<Index>& idx = info.gamma.indices();
  const bool averaging = state.iter + 1 > config.n_iters / 2;

  state.g_vec *= (1.0 - w);
  state.g_ones *= (1.0 - w);
  state.c_mat *= (1.0 - w);
  if (config.c_estimator == CEstimator::kEmpiricalOuterProduct) {
    // g~ is the indicator of idx plus the constant coordinate.
    for (Index i : idx) {
      state.g_vec(i) += w * centered;
      state.g_ones(i) += w;
    }
    state.g_vec(m) += w * centered;
    state.g_ones(m) += w;
    for (Index a : idx) {
      for (Index b : idx) state.c_mat(a, b) += w;
      state.c_mat(a, m) += w;
      state.c_mat(m, a) += w;
    }
    state.c_mat(m, m) += w;
    if (averaging) {
      for (Index a : idx) {
        state.avg_g(a) += centered;
        state.avg_ones(a) += 1.0;
        for (Index b : idx) state.avg_c(a, b) += 1.0;
        state.avg_c(a, m) += 1.0;
        state.avg_c(m, a) += 1.0;
      }
      state.avg_g(m) += centered;
      state.avg_ones(m) += 1.0;
      state.avg_c(m, m) += 1.0;
    }
  } else {
    // C_hat is the exact second moment of g~ under the current q. The g
    // sample is paired with it as g~ (log p - g~^T theta~) + C_hat theta~,
    // which has the same expectation but carries only the residual noise.
    // theta~ there is the new iterate (implicit update), which turns the
    // solve into (1 - w) C_t + w g~ g~^T and keeps it stable when q is
    // sharply peaked.
    const Vector th = state.theta();
    Matrix c_hat(m + 1, m + 1);
    c_hat.topLeftCorner(m, m) = family.second_moment(th);
    const Vector inc = family.inclusion(th);
    c_hat.col(m).head(m) = inc;
    c_hat.row(m).head(m) = inc.transpose();
    c_hat(m, m) = 1.0;
    const Vector gt = info.gamma.augmented(m);
    Matrix a = state.c_mat;
    a.noalias() += w * gt * gt.transpose();
    const Vector b = state.g_vec + w * centered * gt;
    CgResult sol = detail::solve(config, a, b, state.theta_tilde);
    const Vector g_hat = gt * (centered - gt.dot(sol.x)) + c_hat * sol.x;
    // Re-centering moves theta0 and log p together, so the shift direction
    // is C_hat's last column.
    const Vector ones_hat = c_hat.col(m);
    state.g_vec += w * g_hat;
    state.g_ones += w * ones_hat;
    state.c_mat += w * c_hat;
    if (averaging) {
      state.avg_g += g_hat;
      state.avg_ones += ones_hat;
      state.avg_c += c_hat;
      ++state.avg_count;
    }
    state.theta_tilde = std::move(sol.x);
    info.cg_iterations = sol.iterations;
    info.ridge_escalations = sol.ridge_escalations;
    info.residual = sol.relative_residual;
    info.clamped = detail::clamp_theta(state.theta_tilde, config.theta_clamp);
    ++state.iter;
    return info;
  }
  if (averaging) ++state.avg_count;

  CgResult sol = detail::solve(config, state.c_mat, state.g_vec, state.theta_tilde);
  state.theta_tilde = std::move(sol.x);
  info.cg_iterations = sol.iterations;
  info.ridge_escalations = sol.ridge_escalations;
  info.residual = sol.relative_residual;
  info.clamped = detail::clamp_theta(state.theta_tilde, config.theta_clamp);
  ++state.iter;
  return info;
}

struct LearnerReport {
  std::vector<double> theta_norm_trajectory;  // ||theta_t|| after each step
  long cg_iterations_total = 0;
  int cg_iterations_max = 0;
  long ridge_escalations = 0;
  long clamp_events = 0;
  bool final_clamped = false;
  long empty_draws = 0;
  long floored_draws = 0;
  long distinct_subsets = 0;  // joint-log evaluations actually computed
  double initial_theta0 = 0;
  double final_expected_cardinality = 0;
  double final_residual = 0;  // ||C_bar theta~ - g_bar|| / ||g_bar||
  double final_c_corner = 0;  // last diagonal entry of C after N steps
  double baseline = 0;
};

struct LearnerResult {
  Vector theta;         // first M coordinates of C_bar^{-1} g_bar
  double theta0 = 0;    // augmented coordinate, uncentered
  Vector theta_tilde;   // full averaged solution, uncentered
  LearnerReport report;
};

// Memoizes joint_log per subset.
class JointLogCache {
 public:
  explicit JointLogCache(JointLogFn fn) : fn_(std::move(fn)) {}
  double operator()(const Subset& s) {
    auto it = cache_.find(s);
    if (it != cache_.end()) return it->second;
    const double v = fn_(s);
    cache_.emplace(s, v);
    return v;
  }
  std::size_t size() const { return cache_.size(); }

 private:
  JointLogFn fn_;
  std::unordered_map<Subset, double, SubsetHash> cache_;
};

inline LearnerResult run(const VariationalFamily& family, const JointLogFn& joint_log_fn, const LearnerConfig& config) {
  config.validate();
  LearnerState state = init_state(family, config);
  const Index m = family.size();
  JointLogCache cache(joint_log_fn);
  JointLogFn cached = [&cache](const Subset& s) { return cache(s); };
  Rng rng(config.seed);

  LearnerResult out;
  LearnerReport& rep = out.report;
  rep.initial_theta0 = state.theta_tilde(m);
  rep.theta_norm_trajectory.reserve(static_cast<std::size_t>(config.n_iters));
  for (long t = 0; t < config.n_iters; ++t) {
    const StepInfo info = step(state, cached, family, config, rng);
    rep.theta_norm_trajectory.push_back(state.theta().norm());
    rep.cg_iterations_total += info.cg_iterations;
    rep.cg_iterations_max = std::max(rep.cg_iterations_max, info.cg_iterations);
    rep.ridge_escalations += info.ridge_escalations;
    rep.clamp_events += info.clamped ? 1 : 0;
    rep.empty_draws += info.gamma.empty() ? 1 : 0;
    rep.floored_draws += info.floored ? 1 : 0;
  }
  rep.distinct_subsets = static_cast<long>(cache.size());
  rep.final_c_corner = state.c_mat(m, m);
  rep.baseline = state.baseline;

  CgResult fin = detail::solve(config, state.avg_c, state.avg_g, state.theta_tilde);
  rep.cg_iterations_total += fin.iterations;
  rep.ridge_escalations += fin.ridge_escalations;
  Vector tt = std::move(fin.x);
  rep.final_residual = state.avg_g.norm() > 0 ? (state.avg_c * tt - state.avg_g).norm() / state.avg_g.norm() : 0.0;
  rep.final_clamped = detail::clamp_theta(tt, config.theta_clamp);
  out.theta = tt.head(m);
  out.theta0 = tt(m) + state.baseline;
  out.theta_tilde = tt;
  out.theta_tilde(m) = out.theta0;
  rep.final_expected_cardinality = expected_cardinality(family.ensemble(out.theta));
  return out;
}

// Everything the learner needs for one of the two prior/posterior pairings.
struct LearnerProblem {
  std::unique_ptr<VariationalFamily> family;
  SubsetPrior prior;
};

// bernoulli-dpp: DPP posterior over phi, Bernoulli(alpha) prior.
// dpp-bernoulli: factorized posterior, DPP prior over phi whose log-quality
// is calibrated so that its expected cardinality is kappa (unless given).
inline LearnerProblem make_problem(const SpikeSlabModel& model, const SimilarityFactor& phi, const LearnerConfig& config,
                                   std::optional<LEnsemble> prior_kernel = std::nullopt) {
  if (phi.items() != model.features()) {
    throw InvalidArgument("learner: similarity has " + std::to_string(phi.items()) + " items, model has " +
                          std::to_string(model.features()) + " features");
  }
  if (config.mode == Mode::kBernoulliDpp) {
    return {std::make_unique<DppFamily>(phi), BernoulliPrior{model.hyper().alpha}};
  }
  if (!prior_kernel) {
    const double t0 = calibrate_theta0(phi, config.kappa);
    prior_kernel = LEnsemble(phi.compacted(), Vector::Constant(phi.items(), t0));
  }
  return {std::make_unique<BernoulliFamily>(phi.items()), DppPrior{*prior_kernel}};
}

inline LearnerResult run(const SpikeSlabModel& model, const SimilarityFactor& phi, const LearnerConfig& config,
                         std::optional<LEnsemble> prior_kernel = std::nullopt) {
  LearnerProblem problem = make_problem(model, phi, config, std::move(prior_kernel));
  const SubsetPrior& prior = problem.prior;
  JointLogFn fn = [&model, &prior](const Subset& s) { return joint_log(model, s, prior); };
  return run(*problem.family, fn, config);
}

}  // namespace divsel
