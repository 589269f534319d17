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


#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "divsel/evidence_oracle.hpp"
#include "divsel/predictive.hpp"
#include "divsel/regression.hpp"
#include "test_util.hpp"

namespace divsel {
namespace {

// Marginal of y under gamma = {} : multivariate t with 2 a0 dof, scale b0/a0.
double student_t_null(const Vector& y, double a0, double b0) {
  const double n = static_cast<double>(y.size());
  return std::lgamma(a0 + n / 2) - std::lgamma(a0) - 0.5 * n * std::log(2 * std::numbers::pi * b0) -
         (a0 + n / 2) * std::log1p(y.squaredNorm() / (2 * b0));
}

// Draws y from the model's own prior so prior sampling is efficient.
SpikeSlabModel prior_predictive_instance(Index n, Index m, const Subset& gamma, Hyperparameters h, Rng& rng) {
  const Matrix x = testing::random_matrix(n, m, rng);
  const double var = 1.0 / rng.gamma(h.a0, 1.0 / h.b0);
  Vector y = Vector::Zero(n);
  for (Index j : gamma) y += std::sqrt(var / h.ridge_scale) * rng.normal() * x.col(j);
  for (Index i = 0; i < n; ++i) y(i) += std::sqrt(var) * rng.normal();
  return SpikeSlabModel(x, y, h);
}

TEST(EvidenceTest, EmptyModelZeroResponse) {
  const SpikeSlabModel model(Matrix::Ones(2, 1), Vector::Zero(2), Hyperparameters{1.0, 1.0, 1.0, 0.5});
  EXPECT_NEAR(restricted_marginal_loglik(model, Subset()), -std::log(2 * std::numbers::pi), 1e-12);
}

TEST(EvidenceTest, NullModelIsStudentT) {
  Rng rng(1);
  for (int rep = 0; rep < 5; ++rep) {
    const Hyperparameters h{1.0, 0.5 + 3 * rng.uniform(), 0.5 + 3 * rng.uniform(), 0.5};
    const SpikeSlabModel model(testing::random_matrix(12, 3, rng), testing::random_vector(12, rng), h);
    EXPECT_NEAR(restricted_marginal_loglik(model, Subset()), student_t_null(model.response(), h.a0, h.b0), 1e-10);
  }
}

TEST(EvidenceTest, AgreesWithPriorSamplingOracle) {
  Rng rng(2);
  const Hyperparameters h{1.0, 3.0, 3.0, 0.5};
  const Subset gamma({0, 2});
  const SpikeSlabModel model = prior_predictive_instance(15, 4, gamma, h, rng);
  const EvidenceEstimate est = mc_evidence_oracle(model, gamma, 1000000, rng);
  ASSERT_FALSE(est.degenerate);
  EXPECT_LT(std::abs(restricted_marginal_loglik(model, gamma) - est.estimate), 3 * est.std_err);
}

TEST(EvidenceTest, OracleRecoversStudentTNull) {
  Rng rng(3);
  const Hyperparameters h{1.0, 2.0, 2.0, 0.5};
  const SpikeSlabModel model = prior_predictive_instance(10, 2, Subset(), h, rng);
  const EvidenceEstimate est = mc_evidence_oracle(model, Subset(), 200000, rng);
  EXPECT_LT(std::abs(student_t_null(model.response(), h.a0, h.b0) - est.estimate), 3 * est.std_err);
}

TEST(EvidenceTest, OracleErrorShrinksLikeRootN) {
  Rng rng(4);
  const Hyperparameters h{1.0, 3.0, 3.0, 0.5};
  const Subset gamma({1});
  const SpikeSlabModel model = prior_predictive_instance(10, 3, gamma, h, rng);
  const double a = mc_evidence_oracle(model, gamma, 100000, rng).std_err;
  const double b = mc_evidence_oracle(model, gamma, 200000, rng).std_err;
  EXPECT_NEAR(b / a, 1 / std::sqrt(2.0), 0.1);
}

TEST(EvidenceTest, UnusedColumnsDoNotMatter) {
  Rng rng(5);
  const Matrix x = testing::random_matrix(10, 3, rng);
  const Vector y = testing::random_vector(10, rng);
  Matrix wider(10, 4);
  wider << x, Vector::Zero(10);
  const SpikeSlabModel a(x, y), b(wider, y);
  EXPECT_NEAR(restricted_marginal_loglik(a, Subset({0, 2})), restricted_marginal_loglik(b, Subset({0, 2})), 1e-12);
}

TEST(PriorTest, BernoulliHandValues) {
  EXPECT_NEAR(bernoulli_log_prior(Subset({1, 4, 7}), 0.5, 10), 10 * std::log(0.5), 1e-12);
  EXPECT_NEAR(bernoulli_log_prior(Subset(), 0.1, 3), 3 * std::log(0.9), 1e-12);
  EXPECT_THROW(bernoulli_log_prior(Subset(), 1.0, 3), InvalidArgument);
}

TEST(PriorTest, PriorsNormalize) {
  double total = 0;
  for (std::uint64_t b = 0; b < 4096; ++b) total += std::exp(bernoulli_log_prior(Subset::from_bits(b, 12), 0.23, 12));
  EXPECT_NEAR(total, 1.0, 1e-10);
  Rng rng(6);
  const LEnsemble k = testing::random_ensemble(10, 4, rng);
  total = 0;
  for (std::uint64_t b = 0; b < 1024; ++b) total += std::exp(dpp_log_prior(Subset::from_bits(b, 10), k));
  EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST(PriorTest, DppHandValues) {
  const LEnsemble id(SimilarityFactor::identity(2), Vector::Zero(2));
  EXPECT_NEAR(dpp_log_prior(Subset({0}), id), std::log(0.25), 1e-12);
  const LEnsemble dup(SimilarityFactor(Matrix::Ones(2, 1)), Vector::Zero(2));
  EXPECT_EQ(dpp_log_prior(Subset({0, 1}), dup), kNegInf);
}

TEST(JointLogTest, SumOfParts) {
  Rng rng(7);
  const SpikeSlabModel model(testing::random_matrix(20, 5, rng), testing::random_vector(20, rng),
                             Hyperparameters{1.0, 0.01, 0.01, 0.3});
  const SubsetPrior prior = BernoulliPrior{0.3};
  for (std::uint64_t b = 0; b < 32; ++b) {
    const Subset s = Subset::from_bits(b, 5);
    EXPECT_DOUBLE_EQ(joint_log(model, s, prior), restricted_marginal_loglik(model, s) + bernoulli_log_prior(s, 0.3, 5));
  }
}

TEST(JointLogTest, UniformPriorKeepsEvidenceArgmax) {
  Rng rng(8);
  const SpikeSlabModel model(testing::random_matrix(20, 6, rng), testing::random_vector(20, rng));
  const SubsetPrior prior = BernoulliPrior{0.5};
  std::uint64_t best_j = 0, best_e = 0;
  for (std::uint64_t b = 1; b < 64; ++b) {
    const Subset s = Subset::from_bits(b, 6);
    if (joint_log(model, s, prior) > joint_log(model, Subset::from_bits(best_j, 6), prior)) best_j = b;
    if (restricted_marginal_loglik(model, s) > restricted_marginal_loglik(model, Subset::from_bits(best_e, 6))) best_e = b;
  }
  EXPECT_EQ(best_j, best_e);
}

TEST(PosteriorTest, LimitsInRidgeScale) {
  Rng rng(9);
  const Vector y = testing::random_vector(3, rng);
  const Matrix x = Matrix::Identity(3, 3);
  const Subset all({0, 1, 2});
  const auto loose = posterior_beta(SpikeSlabModel(x, y, Hyperparameters{1e-9, 1, 1, 0.5}), all);
  EXPECT_LT((loose.mu_n - y).norm(), 1e-6);
  const auto tight = posterior_beta(SpikeSlabModel(x, y, Hyperparameters{1e9, 1, 1, 0.5}), all);
  EXPECT_LT(tight.mu_n.norm(), 1e-6);
}

TEST(PosteriorTest, MatchesDenseSolveAndResidualIdentity) {
  Rng rng(10);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix x = testing::random_matrix(25, 6, rng);
    const Vector y = testing::random_vector(25, rng);
    const Hyperparameters h{0.5 + rng.uniform(), 0.5, 0.7, 0.5};
    const SpikeSlabModel model(x, y, h);
    const Subset g({0, 3, 5});
    const auto post = posterior_beta(model, g);
    const Matrix xg = restrict_columns(x, g);
    const Matrix lam = xg.transpose() * xg + h.ridge_scale * Matrix::Identity(3, 3);
    const Vector mu = lam.partialPivLu().solve(xg.transpose() * y);
    EXPECT_LT((post.mu_n - mu).norm(), 1e-10 * (1 + mu.norm()));
    // b_N = b0 + (|y - X mu|^2 + c |mu|^2) / 2, which exceeds b0 unless the fit is exact.
    const double expect = h.b0 + 0.5 * ((y - xg * mu).squaredNorm() + h.ridge_scale * mu.squaredNorm());
    EXPECT_NEAR(post.b_n, expect, 1e-10 * expect);
    EXPECT_GT(post.b_n, h.b0);
  }
}

TEST(ModelTest, RejectsBadInputs) {
  EXPECT_THROW(SpikeSlabModel(Matrix::Ones(3, 2), Vector::Ones(2)), InvalidArgument);
  EXPECT_THROW(SpikeSlabModel(Matrix::Ones(3, 2), Vector::Ones(3), Hyperparameters{0.0, 1, 1, 0.5}), InvalidArgument);
  EXPECT_THROW(SpikeSlabModel(Matrix::Ones(3, 2), Vector::Ones(3), Hyperparameters{1.0, 1, 1, 1.5}), InvalidArgument);
  const SpikeSlabModel ok(Matrix::Ones(3, 2), Vector::Ones(3));
  EXPECT_THROW(restricted_marginal_loglik(ok, Subset({2})), InvalidArgument);
}

TEST(PredictTest, EmptySubsetAndInterpolation) {
  Rng rng(11);
  const Matrix x = testing::random_matrix(30, 3, rng);
  const Vector y = x * Eigen::Vector3d(1.0, -2.0, 0.5);
  const SpikeSlabModel model(x, y, Hyperparameters{1e-6, 0.01, 1e-8, 0.5});
  const Prediction empty = predict(model, Subset(), x.topRows(2));
  const auto post0 = posterior_beta(model, Subset());
  EXPECT_TRUE(empty.mean.isZero());
  EXPECT_NEAR(empty.variance(0), post0.b_n / post0.a_n, 1e-12);
  const Prediction full = predict(model, Subset({0, 1, 2}), x.topRows(5));
  EXPECT_LT((full.mean - y.head(5)).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(PredictTest, VarianceGrowsAwayFromData) {
  Rng rng(12);
  const Matrix x = 0.1 * testing::random_matrix(40, 2, rng);
  const SpikeSlabModel model(x, x.col(0) + 0.1 * testing::random_vector(40, rng));
  Matrix near(1, 2), far(1, 2);
  near << 0.05, 0.05;
  far << 5.0, 5.0;
  const Subset g({0, 1});
  EXPECT_GT(predict(model, g, far).variance(0), predict(model, g, near).variance(0));
}

TEST(CredibleIntervalTest, NestedLevelsAndPointMass) {
  Rng rng(13);
  const Matrix x = testing::random_matrix(40, 4, rng);
  const Vector y = x.col(1) * 2.0 + 0.3 * testing::random_vector(40, rng);
  const SpikeSlabModel model(x, y);
  Vector theta = Vector::Constant(4, -30.0);
  theta(1) = 30.0;  // q puts essentially all mass on {1}
  const LEnsemble q(SimilarityFactor::identity(4), theta);
  Rng r1(5), r2(5);
  const CredibleInterval wide = credible_interval(q, model, x.topRows(6), 2000, 0.95, r1);
  const CredibleInterval narrow = credible_interval(q, model, x.topRows(6), 2000, 0.5, r2);
  for (Index i = 0; i < 6; ++i) {
    EXPECT_LE(wide.lower(i), narrow.lower(i));
    EXPECT_GE(wide.upper(i), narrow.upper(i));
    EXPECT_LT(wide.between_var(i), 1e-20);
  }
  EXPECT_THROW(credible_interval(q, model, x.topRows(2), 50, 0.95, r1), InvalidArgument);
}

TEST(CredibleIntervalTest, CoverageOnKnownModel) {
  Rng rng(14);
  const Index n = 200, m = 6;
  const Matrix x = testing::random_matrix(n, m, rng);
  Vector beta = Vector::Zero(m);
  beta << 1.5, 0, -1.0, 0, 0, 0;
  const Vector y = x * beta + testing::random_vector(n, rng);
  const SpikeSlabModel model(x.topRows(100), y.head(100));
  Vector theta = Vector::Constant(m, -3.0);
  theta(0) = theta(2) = 3.0;
  const LEnsemble q(SimilarityFactor::identity(m), theta);
  const CredibleInterval ci = credible_interval(q, model, x.bottomRows(100), 2000, 0.95, rng);
  int hit = 0;
  for (Index i = 0; i < 100; ++i) hit += (y(100 + i) >= ci.lower(i) && y(100 + i) <= ci.upper(i));
  EXPECT_GE(hit, 85);
}

}  // namespace
}  // namespace divsel
