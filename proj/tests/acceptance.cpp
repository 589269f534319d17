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


// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "divsel/divsel.hpp"
#include "divsel/experiments/collinearity.hpp"
#include "divsel/experiments/fig1.hpp"
#include "divsel/experiments/spatial.hpp"
#include "test_util.hpp"

namespace {

using namespace divsel;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::uint64_t bits_of(const Subset& s) {
  std::uint64_t b = 0;
  for (Index i : s) b |= std::uint64_t{1} << i;
  return b;
}

Outcome normalization_identity() {
  Clock clock;
  Rng rng(101);
  const Index dims[] = {2, 3, 5};
  double worst = 0;
  for (int rep = 0; rep < 25; ++rep) {
    const LEnsemble l = testing::random_ensemble(10, dims[rep % 3], rng);
    const Matrix k = l.kernel();
    double sum = 0;
    for (std::uint64_t b = 0; b < 1024; ++b) sum += testing::dense_det(k, Subset::from_bits(b, 10));
    const double z = std::exp(log_normalizer(l));
    worst = std::max(worst, std::abs(sum - z) / z);
  }
  const double t = clock.seconds();
  return {worst <= 1e-8 && t < 10, "max relative error " + fmt("%.2e", worst) + ", " + fmt("%.2f", t) + " s"};
}

Outcome marginal_kernel_exact() {
  Rng rng(202);
  double worst_k = 0, worst_pair = 0, worst_identity = 0;
  for (Index m : {6, 8, 10}) {
    for (int rep = 0; rep < 3; ++rep) {
      const LEnsemble l = testing::random_ensemble(m, 1 + rep * 2, rng);
      const std::vector<double> p = testing::enumerate_probabilities(l);
      Matrix joint = Matrix::Zero(m, m);
      for (std::uint64_t b = 0; b < p.size(); ++b) {
        for (Index i = 0; i < m; ++i) {
          if (!((b >> i) & 1U)) continue;
          for (Index j = 0; j < m; ++j) {
            if ((b >> j) & 1U) joint(i, j) += p[b];
          }
        }
      }
      const Matrix k = marginal_kernel(l).k;
      worst_k = std::max(worst_k, (k.diagonal() - joint.diagonal()).cwiseAbs().maxCoeff());
      for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < m; ++j) {
          if (i == j) continue;
          const double identity = k(i, i) * k(j, j) - k(i, j) * k(i, j);
          worst_identity = std::max(worst_identity, std::abs(identity - joint(i, j)));
          if (j < i) continue;
          const double lp = subset_log_prob(l, Subset({i, j}), true);
          worst_pair = std::max(worst_pair, std::abs(std::exp(lp) - p[(std::uint64_t{1} << i) | (std::uint64_t{1} << j)]));
        }
      }
    }
  }
  const double worst = std::max({worst_k, worst_identity, worst_pair});
  return {worst <= 1e-9, "diag " + fmt("%.2e", worst_k) + ", co-inclusion " + fmt("%.2e", worst_identity) +
                             ", pair probability " + fmt("%.2e", worst_pair)};
}

Outcome sampler_exact() {
  Clock clock;
  Rng rng(303);
  // Rank 3 keeps the support near 90 subsets. An exact sampler's empirical TV
  // is about sum_b sqrt(2 p_b / (pi n)) / 2, which approaches 0.02 by itself
  // once the support passes ~150 subsets at this draw count.
  const LEnsemble l = testing::random_ensemble(8, 3, rng);
  const std::vector<double> p = testing::enumerate_probabilities(l);
  std::vector<double> freq(p.size(), 0.0);
  const long draws = 50000;
  for (long s = 0; s < draws; ++s) freq[bits_of(sample(l, rng))] += 1.0;
  double tv = 0, noise = 0;
  for (std::size_t b = 0; b < p.size(); ++b) {
    tv += std::abs(freq[b] / draws - p[b]);
    noise += std::sqrt(2 * p[b] * (1 - p[b]) / (M_PI * draws));
  }
  tv /= 2;
  noise /= 2;

  // k-DPP: cardinality is always k; pair frequencies against det[L]_pair / e_2.
  const Index k = 2;
  const Matrix kern = l.kernel();
  std::vector<double> pair_p(p.size(), 0.0), pair_f(p.size(), 0.0);
  double e2 = 0;
  for (Index i = 0; i < 8; ++i) {
    for (Index j = i + 1; j < 8; ++j) {
      const std::uint64_t b = (std::uint64_t{1} << i) | (std::uint64_t{1} << j);
      pair_p[b] = testing::dense_det(kern, Subset({i, j}));
      e2 += pair_p[b];
    }
  }
  bool card_ok = true;
  const long kdraws = 20000;
  for (long s = 0; s < kdraws; ++s) {
    const Subset g = sample_k(l, k, rng);
    card_ok = card_ok && static_cast<Index>(g.size()) == k;
    pair_f[bits_of(g)] += 1.0;
  }
  double worst_z = 0;
  for (std::size_t b = 0; b < p.size(); ++b) {
    if (pair_p[b] == 0) continue;
    const double q = pair_p[b] / e2;
    const double se = std::sqrt(q * (1 - q) / kdraws);
    worst_z = std::max(worst_z, std::abs(pair_f[b] / kdraws - q) / se);
  }
  const double t = clock.seconds();
  return {tv <= 0.02 && card_ok && worst_z <= 3 && t < 60,
          "TV " + fmt("%.4f", tv) + " (exact-sampler noise " + fmt("%.4f", noise) + "), k-DPP cardinality " + (card_ok ? "always k" : "WRONG") + ", worst pair z " +
              fmt("%.2f", worst_z) + ", " + fmt("%.1f", t) + " s"};
}

Outcome fig1_reproduction() {
  experiments::Fig1Config cfg;
  const auto rows = experiments::demo_fig1(cfg);
  bool decreasing = true, above = true, gap_shrinks = true, within = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    above = above && r.exact_block > r.exact_singleton;
    within = within && std::abs(r.empirical_block - r.exact_block) <= 3 * r.se_block &&
             std::abs(r.empirical_singleton - r.exact_singleton) <= 3 * r.se_singleton;
    if (i > 0) {
      decreasing = decreasing && r.exact_block < rows[i - 1].exact_block;
      gap_shrinks = gap_shrinks && r.exact_block - r.exact_singleton < rows[i - 1].exact_block - rows[i - 1].exact_singleton;
    }
  }
  std::string counts;
  for (const auto& r : rows) counts += (counts.empty() ? "" : " ") + fmt("%.4f", r.exact_block);
  return {decreasing && above && gap_shrinks && within,
          "block counts " + counts + " vs singleton " + fmt("%.4f", rows.back().exact_singleton) +
              (within ? ", empirical within 3 SE" : ", empirical OUTSIDE 3 SE")};
}

Outcome evidence_formula() {
  Rng rng(505);
  int ok = 0;
  double worst_z = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const Index n = 5 + static_cast<Index>(rng.uniform() * 16);  // 5..20
    const Index m = 4;
    const Index k = static_cast<Index>(rng.uniform() * 4);        // 0..3
    const Hyperparameters h{0.5 + rng.uniform(), 2.0 + 2 * rng.uniform(), 2.0 + 2 * rng.uniform(), 0.5};
    const Matrix x = testing::random_matrix(n, m, rng);
    std::vector<Index> idx;
    for (Index j = 0; j < k; ++j) idx.push_back(j);
    const Subset gamma(idx);
    // y from the model's own prior keeps prior sampling efficient.
    const double var = 1.0 / rng.gamma(h.a0, 1.0 / h.b0);
    Vector y = Vector::Zero(n);
    for (Index j : gamma) y += std::sqrt(var / h.ridge_scale) * rng.normal() * x.col(j);
    for (Index i = 0; i < n; ++i) y(i) += std::sqrt(var) * rng.normal();
    const SpikeSlabModel model(x, y, h);
    const EvidenceEstimate est = mc_evidence_oracle(model, gamma, 1000000, rng);
    const double z = std::abs(restricted_marginal_loglik(model, gamma) - est.estimate) / est.std_err;
    worst_z = std::max(worst_z, z);
    ok += (!est.degenerate && z <= 3) ? 1 : 0;
  }
  double worst_null = 0;
  for (int rep = 0; rep < 5; ++rep) {
    const Hyperparameters h{1.0, 0.5 + rng.uniform() * 3, 0.5 + rng.uniform() * 3, 0.5};
    const SpikeSlabModel model(testing::random_matrix(15, 3, rng), testing::random_vector(15, rng), h);
    const double nn = 15, yy = model.response().squaredNorm();
    const double t = std::lgamma(h.a0 + nn / 2) - std::lgamma(h.a0) - 0.5 * nn * std::log(2 * M_PI * h.b0) -
                     (h.a0 + nn / 2) * std::log1p(yy / (2 * h.b0));
    worst_null = std::max(worst_null, std::abs(restricted_marginal_loglik(model, Subset()) - t));
  }
  return {ok == 20 && worst_null <= 1e-9, std::to_string(ok) + "/20 within 3 SE (worst " + fmt("%.2f", worst_z) +
                                              " SE), null model vs Student-t " + fmt("%.1e", worst_null)};
}

Outcome cardinality_calibration() {
  Rng rng(606);
  double worst = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const Index m = 5 + static_cast<Index>(rng.uniform() * 20);
    const Index d = 1 + static_cast<Index>(rng.uniform() * std::min<Index>(m, 8));
    const SimilarityFactor phi(testing::random_matrix(m, d, rng));
    const double kappa = (0.05 + 0.9 * rng.uniform()) * static_cast<double>(d);
    const double t0 = calibrate_theta0(phi, kappa);
    worst = std::max(worst, std::abs(expected_cardinality(LEnsemble(phi, Vector::Constant(m, t0))) - kappa));
  }
  return {worst <= 1e-8, "max |E|gamma| - kappa| " + fmt("%.2e", worst)};
}

Outcome learner_fidelity() {
  const experiments::SyntheticData data = experiments::enumerable_regression();
  const double kappa = 3.0;
  const SpikeSlabModel model(data.x, data.y, Hyperparameters{1.0, 1.0, 1.0, kappa / 8});
  const SimilarityFactor phis[] = {normalized_design_factor(data.x), SimilarityFactor::identity(8)};
  double worst = 0, slowest = 0;
  int runs = 0;
  for (Mode mode : {Mode::kBernoulliDpp, Mode::kDppBernoulli}) {
    for (CEstimator ce : {CEstimator::kEmpiricalOuterProduct, CEstimator::kMarginalKernel}) {
      for (const SimilarityFactor& phi : phis) {
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
          LearnerConfig c;
          c.mode = mode;
          c.c_estimator = ce;
          c.kappa = kappa;
          c.seed = seed;
          c.n_iters = 2000;
          const LearnerProblem problem = make_problem(model, phi, c);
          const Vector exact = experiments::exact_posterior_marginals(model, problem.prior);
          Clock clock;
          const LearnerResult r = run(model, phi, c);
          slowest = std::max(slowest, clock.seconds());
          worst = std::max(worst, (problem.family->inclusion(r.theta) - exact).cwiseAbs().maxCoeff());
          ++runs;
        }
      }
    }
  }
  return {worst <= 0.05 && slowest < 120, std::to_string(runs) + " runs, max marginal error " + fmt("%.4f", worst) +
                                              ", slowest " + fmt("%.2f", slowest) + " s"};
}

Outcome diversity_end_to_end() {
  experiments::CollinearityBenchConfig cfg;
  cfg.methods = {"bernoulli-dpp", "spike-slab"};
  const experiments::CollinearityBench b = experiments::bench_collinearity(cfg);
  const long n = static_cast<long>(b.runs.size());
  const auto ratio = b.mse_ratio();
  const bool pass = b.groups_ok * 5 >= n * 4 && b.logdet_wins * 5 >= n * 4 && ratio && *ratio <= 1.1;
  return {pass, "groups " + std::to_string(b.groups_ok) + "/" + std::to_string(n) + ", logdet wins " +
                    std::to_string(b.logdet_wins) + "/" + std::to_string(n) + ", MSE ratio " +
                    (ratio ? fmt("%.3f", *ratio) : std::string("n/a"))};
}

Outcome spatial_demo() {
  Clock clock;
  const experiments::SpatialDemo d = experiments::demo_spatial(experiments::SpatialConfig{});
  const double t = clock.seconds();
  const auto ratio = d.mse_ratio();
  const bool pass = d.distance_wins * 2 > static_cast<long>(d.runs.size()) && ratio && *ratio <= 1.2 && t < 300;
  return {pass, "distance wins " + std::to_string(d.distance_wins) + "/" + std::to_string(d.runs.size()) +
                    ", MSE ratio " + (ratio ? fmt("%.3f", *ratio) : std::string("n/a")) + ", " + fmt("%.0f", t) + " s"};
}

Outcome greedy_map_quality() {
  Rng rng(1010);
  bool always = true;
  double ratio_sum = 0, ratio_min = 1;
  for (int rep = 0; rep < 50; ++rep) {
    const LEnsemble l = testing::random_ensemble(12, 1 + rep % 6, rng, 1.0);
    const double g = subset_log_prob(l, greedy_map(l), true);
    double best_single = kNegInf;
    for (Index i = 0; i < 12; ++i) best_single = std::max(best_single, subset_log_prob(l, Subset({i}), true));
    always = always && g >= best_single - 1e-12;
    const double r = std::exp(g - subset_log_prob(l, exact_map_enumerate(l), true));
    ratio_sum += r;
    ratio_min = std::min(ratio_min, r);
  }
  return {always, std::string(always ? "greedy >= best singleton in 50/50" : "greedy BELOW best singleton") +
                      "; P(greedy)/P(exact MAP) mean " + fmt("%.4f", ratio_sum / 50) + ", min " + fmt("%.4f", ratio_min)};
}

std::string read_masked(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  static const std::regex stamp(R"("generated_at": "[^"]*")");
  return std::regex_replace(ss.str(), stamp, "\"generated_at\": \"\"");
}

Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / ("divsel_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  {
    Rng rng(1111);
    std::ofstream out(root / "data.csv");
    out.precision(17);
    out << "a,b,c,d,e,y\n";
    for (int i = 0; i < 50; ++i) {
      double x[5];
      for (double& v : x) v = rng.normal();
      out << x[0] << ',' << x[1] << ',' << x[2] << ',' << x[3] << ',' << x[4] << ',' << x[0] - x[3] + 0.3 * rng.normal()
          << '\n';
    }
  }
  const std::string data = (root / "data.csv").string();
  struct Invocation {
    std::string args;
    std::vector<std::string> files;
  };
  const std::vector<Invocation> calls = {
      {"select --data " + data + " --iters 300 --kappa 2 --train-fraction 0.8 --methods bernoulli-dpp,dpp-bernoulli,spike-slab,omp,forward-selection",
       {"report.json", "model.json"}},
      {"map --model MODEL", {"map.json"}},
      {"sample --model MODEL --draws 300 --data " + data + " --predict " + data, {"samples.json", "intervals.csv"}},
      {"demo fig1 --samples 500", {"fig1.csv"}},
      {"demo spatial --seeds 2 --iters 60 --lattice 4 --scales 0.1 --sensors 40 --alt-draws 20",
       {"report.json", "spatial.csv"}},
      {"bench collinearity --seeds 2 --iters 100 --n 120", {"report.json", "collinearity.csv"}},
  };
  int identical = 0;
  std::string failed;
  for (std::size_t c = 0; c < calls.size(); ++c) {
    std::string outs[2];
    bool ran = true;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path dir = root / ("call" + std::to_string(c) + "_" + std::to_string(rep));
      std::string args = calls[c].args;
      const std::string model = (root / "call0_0" / "model.json").string();
      for (auto pos = args.find("MODEL"); pos != std::string::npos; pos = args.find("MODEL")) args.replace(pos, 5, model);
      const std::string cmd = std::string(DIVSEL_CLI_PATH) + " --seed 17 --output " + dir.string() + " " + args +
                              " > " + (dir.string() + ".log") + " 2>&1";
      const int status = std::system(cmd.c_str());
      ran = ran && WIFEXITED(status) && WEXITSTATUS(status) == 0;
      for (const auto& f : calls[c].files) {
        if (!fs::exists(dir / f)) ran = false;
        outs[rep] += read_masked(dir / f) + '\x1f';
      }
    }
    if (ran && outs[0] == outs[1]) {
      ++identical;
    } else {
      failed += " [" + calls[c].args.substr(0, calls[c].args.find(' ', calls[c].args.find(' ') + 1)) + "]";
    }
  }
  fs::remove_all(root);
  return {identical == static_cast<int>(calls.size()),
          std::to_string(identical) + "/" + std::to_string(calls.size()) + " invocations byte-identical" +
              (failed.empty() ? "" : "; differing:" + failed)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"normalization identity", normalization_identity},
      {"marginal kernel", marginal_kernel_exact},
      {"sampler exactness", sampler_exact},
      {"block-kernel selection counts", fig1_reproduction},
      {"evidence formula", evidence_formula},
      {"cardinality calibration", cardinality_calibration},
      {"learner fidelity", learner_fidelity},
      {"diversity end to end", diversity_end_to_end},
      {"spatial demo", spatial_demo},
      {"greedy MAP quality", greedy_map_quality},
      {"CLI determinism", cli_determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("[%s] %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures ? 1 : 0;
}
