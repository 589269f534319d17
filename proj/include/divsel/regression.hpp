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

// Spike-and-slab linear regression with conjugate normal / inverse-gamma
// priors: beta | sigma^2 ~ N(0, sigma^2 / c I), sigma^2 ~ IG(a0, b0),
// gamma_m ~ Bernoulli(alpha) (or a DPP prior).

#include <cmath>
#include <string>
#include <variant>

#include <Eigen/Dense>

#include "divsel/dpp.hpp"
#include "divsel/error.hpp"
#include "divsel/numeric.hpp"
#include "divsel/subset.hpp"

namespace divsel {

struct Hyperparameters {
  double ridge_scale = 1.0;  // c, with Lambda_0 = c I
  double a0 = 0.01;
  double b0 = 0.01;
  double alpha = 0.5;
};

class SpikeSlabModel {
 public:
  SpikeSlabModel(Matrix design, Vector response, Hyperparameters hyper = {})
      : x_(std::move(design)), y_(std::move(response)), hyper_(hyper) {
    if (x_.rows() < 1 || x_.cols() < 1) throw InvalidArgument("SpikeSlabModel: empty design");
    if (y_.size() != x_.rows()) {
      throw InvalidArgument("SpikeSlabModel: response has " + std::to_string(y_.size()) + " rows, design has " +
                            std::to_string(x_.rows()));
    }
    if (!x_.allFinite() || !y_.allFinite()) throw InvalidArgument("SpikeSlabModel: non-finite data");
    if (!(hyper_.ridge_scale > 0) || !(hyper_.a0 > 0) || !(hyper_.b0 > 0)) {
      throw InvalidArgument("SpikeSlabModel: c, a0 and b0 must be positive");
    }
    if (!(hyper_.alpha > 0 && hyper_.alpha < 1)) throw InvalidArgument("SpikeSlabModel: alpha must be in (0, 1)");
    gram_ = x_.transpose() * x_;
    xty_ = x_.transpose() * y_;
    yty_ = y_.squaredNorm();
  }

  Index observations() const { return x_.rows(); }
  Index features() const { return x_.cols(); }
  const Matrix& design() const { return x_; }
  const Vector& response() const { return y_; }
  const Hyperparameters& hyper() const { return hyper_; }
  const Matrix& gram() const { return gram_; }
  const Vector& xty() const { return xty_; }
  double yty() const { return yty_; }

  SpikeSlabModel with_alpha(double alpha) const {
    Hyperparameters h = hyper_;
    h.alpha = alpha;
    return SpikeSlabModel(x_, y_, h);
  }

 private:
  Matrix x_;
  Vector y_;
  Hyperparameters hyper_;
  Matrix gram_;
  Vector xty_;
  double yty_;
};

struct RestrictedPosterior {
  Subset gamma;
  Vector mu_n;
  Matrix lambda_n;
  Eigen::LLT<Matrix> chol;  // of lambda_n
  double a_n = 0;
  double b_n = 0;
};

inline RestrictedPosterior posterior_beta(const SpikeSlabModel& model, const Subset& gamma) {
  gamma.check_bound(model.features());
  const auto& h = model.hyper();
  const Index k = static_cast<Index>(gamma.size());
  RestrictedPosterior post;
  post.gamma = gamma;
  post.a_n = h.a0 + 0.5 * static_cast<double>(model.observations());
  if (k == 0) {
    post.b_n = h.b0 + 0.5 * model.yty();
    return post;
  }
  Matrix lam(k, k);
  Vector rhs(k);
  for (Index i = 0; i < k; ++i) {
    rhs(i) = model.xty()(gamma[static_cast<std::size_t>(i)]);
    for (Index j = 0; j < k; ++j) lam(i, j) = model.gram()(gamma[static_cast<std::size_t>(i)], gamma[static_cast<std::size_t>(j)]);
  }
  lam.diagonal().array() += h.ridge_scale;
  Eigen::LLT<Matrix> llt(lam);
  if (llt.info() != Eigen::Success) {
    // One jittered retry.
    lam.diagonal().array() += 1e-10 * lam.trace() / static_cast<double>(k);
    llt.compute(lam);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("posterior_beta: restricted precision is not positive definite for " + to_string(gamma));
    }
  }
  post.mu_n = llt.solve(rhs);
  post.b_n = h.b0 + 0.5 * (model.yty() - rhs.dot(post.mu_n));
  post.lambda_n = std::move(lam);
  post.chol = std::move(llt);
  if (!(post.b_n > 0) || !std::isfinite(post.b_n) || !post.mu_n.allFinite()) {
    throw NumericalError("posterior_beta: non-finite or non-positive b_N for " + to_string(gamma));
  }
  return post;
}

// log p(y | gamma) with beta and sigma^2 integrated out.
inline double restricted_marginal_loglik(const SpikeSlabModel& model, const Subset& gamma) {
  const RestrictedPosterior post = posterior_beta(model, gamma);
  const auto& h = model.hyper();
  const double n = static_cast<double>(model.observations());
  const Index k = static_cast<Index>(gamma.size());
  double logdet_ratio = 0.0;
  if (k > 0) {
    const auto& lm = post.chol.matrixLLT();
    double logdet_n = 0.0;
    for (Index i = 0; i < k; ++i) logdet_n += 2.0 * std::log(lm(i, i));
    logdet_ratio = static_cast<double>(k) * std::log(h.ridge_scale) - logdet_n;
  }
  const double out = -0.5 * n * std::log(2.0 * M_PI) + 0.5 * logdet_ratio + h.a0 * std::log(h.b0) -
                     post.a_n * std::log(post.b_n) + std::lgamma(post.a_n) - std::lgamma(h.a0);
  if (!std::isfinite(out)) throw NumericalError("restricted_marginal_loglik: non-finite value for " + to_string(gamma));
  return out;
}

inline double bernoulli_log_prior(const Subset& gamma, double alpha, Index m) {
  if (!(alpha > 0 && alpha < 1)) throw InvalidArgument("bernoulli_log_prior: alpha must be in (0, 1)");
  gamma.check_bound(m);
  const double k = static_cast<double>(gamma.size());
  return k * std::log(alpha) + (static_cast<double>(m) - k) * std::log1p(-alpha);
}

inline double dpp_log_prior(const Subset& gamma, const LEnsemble& prior_kernel) {
  return subset_log_prob(prior_kernel, gamma, true);
}

struct BernoulliPrior {
  double alpha;
};

struct DppPrior {
  LEnsemble kernel;
};

using SubsetPrior = std::variant<BernoulliPrior, DppPrior>;

inline double log_prior(const Subset& gamma, const SubsetPrior& prior, Index m) {
  return std::visit(
      [&](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, BernoulliPrior>) {
          return bernoulli_log_prior(gamma, p.alpha, m);
        } else {
          return dpp_log_prior(gamma, p.kernel);
        }
      },
      prior);
}

// log p(y | gamma) + log p(gamma).
inline double joint_log(const SpikeSlabModel& model, const Subset& gamma, const SubsetPrior& prior) {
  const double lp = log_prior(gamma, prior, model.features());
  if (lp == kNegInf) return kNegInf;
  return restricted_marginal_loglik(model, gamma) + lp;
}

}  // namespace divsel
