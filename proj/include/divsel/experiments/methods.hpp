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

// Runs the main method and the baselines on one train/test split and turns
// each into a SelectionReport. Baselines are matched to the cardinality of
// the bernoulli-dpp MAP when that method is part of the run.

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "divsel/baselines.hpp"
#include "divsel/metrics.hpp"
#include "divsel/predictive.hpp"
#include "divsel/report.hpp"
#include "divsel/select.hpp"

namespace divsel::experiments {

inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> m{"bernoulli-dpp", "dpp-bernoulli", "spike-slab", "omp", "forward-selection"};
  return m;
}

inline void check_methods(const std::vector<std::string>& methods) {
  if (methods.empty()) throw InvalidArgument("no methods requested");
  for (const auto& m : methods) {
    if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end()) {
      throw InvalidArgument("unknown method '" + m + "'");
    }
  }
}

struct MethodsInput {
  const SpikeSlabModel* model = nullptr;
  const SimilarityFactor* phi = nullptr;  // similarity used by the DPP and for diversity_logdet
  const Matrix* x_test = nullptr;
  const Vector* y_test = nullptr;
  const Matrix* coords = nullptr;  // item coordinates for mean pairwise distance
  const std::vector<std::string>* names = nullptr;
  LearnerConfig learner;
  std::vector<std::string> methods{"bernoulli-dpp", "spike-slab", "omp", "forward-selection"};
  std::optional<Index> k;  // cardinality when bernoulli-dpp is not run
  long n_alternative_draws = 500;
  std::size_t n_alternatives = 5;
  long credible_draws = 0;  // 0 skips credible intervals
  double credible_level = 0.95;
};

struct MethodsOutput {
  std::vector<SelectionReport> reports;
  std::optional<Selection> dpp;         // the bernoulli-dpp fit, when run
  std::optional<Selection> factorized;  // the dpp-bernoulli fit, when run
};

namespace detail {

inline void fill_metrics(SelectionReport& r, const MethodsInput& in) {
  const DiversityMetrics dm = metrics_diversity(*in.phi, r.selected, in.coords);
  r.diversity_logdet = dm.logdet;
  r.mean_pairwise_distance = dm.mean_pairwise_distance;
  if (in.names) {
    for (Index i : r.selected) r.selected_names.push_back((*in.names)[static_cast<std::size_t>(i)]);
  }
  if (in.x_test && in.y_test && in.x_test->rows() > 0) {
    r.heldout_mse = mean_squared_error(predict(*in.model, r.selected, *in.x_test).mean, *in.y_test);
  }
}

inline Json selection_diagnostics(const Selection& s) {
  Json d = to_json(s.fit.report);
  d["theta0"] = s.fit.theta0;
  return d;
}

inline SelectionReport from_selection(const Selection& s, const std::string& method, const MethodsInput& in,
                                      const Subset& chosen, std::uint64_t ci_tag) {
  SelectionReport r;
  r.method = method;
  r.selected = chosen;
  r.marginals = s.marginals;
  r.map_log_prob = subset_log_prob(s.q, chosen, true);
  r.alternatives = s.alternatives;
  r.diagnostics = selection_diagnostics(s);
  if (in.credible_draws > 0 && in.x_test && in.x_test->rows() > 0) {
    Rng rng = Rng(in.learner.seed).split(ci_tag);
    const CredibleInterval ci =
        credible_interval(s.q, *in.model, *in.x_test, in.credible_draws, in.credible_level, rng);
    r.credible = summarize(ci, in.y_test);
  }
  fill_metrics(r, in);
  return r;
}

inline SelectionReport from_baseline(const BaselineResult& b, const MethodsInput& in) {
  SelectionReport r;
  r.method = b.method;
  r.selected = b.selected;
  r.path = b.path;
  if (!b.diagnostic.empty()) r.diagnostics["stopped_early"] = b.diagnostic;
  fill_metrics(r, in);
  return r;
}

}  // namespace detail

inline MethodsOutput run_methods(const MethodsInput& in) {
  if (!in.model || !in.phi) throw InvalidArgument("run_methods: model and similarity are required");
  check_methods(in.methods);
  auto wants = [&](const char* m) { return std::find(in.methods.begin(), in.methods.end(), m) != in.methods.end(); };
  MethodsOutput out;
  std::optional<Index> k = in.k;
  if (wants("bernoulli-dpp")) {
    LearnerConfig c = in.learner;
    c.mode = Mode::kBernoulliDpp;
    out.dpp = select(*in.model, *in.phi, c, std::nullopt, in.n_alternative_draws, in.n_alternatives);
    k = static_cast<Index>(out.dpp->map.size());
  }
  const Index m = in.model->features();
  const Index k_fit = std::clamp<Index>(k.value_or(static_cast<Index>(std::lround(in.learner.kappa))), 1,
                                        std::min(m, in.model->observations()));
  for (const auto& method : in.methods) {
    if (method == "bernoulli-dpp") {
      SelectionReport r = detail::from_selection(*out.dpp, method, in, out.dpp->map, 0xc1);
      r.run["matched_cardinality"] = nullptr;
      out.reports.push_back(std::move(r));
    } else if (method == "dpp-bernoulli") {
      LearnerConfig c = in.learner;
      c.mode = Mode::kDppBernoulli;
      out.factorized = select(*in.model, *in.phi, c, std::nullopt, in.n_alternative_draws, in.n_alternatives);
      const Selection& s = *out.factorized;
      const Subset chosen = k ? top_k_by_marginal(s.fit.theta, k_fit) : s.map;
      SelectionReport r = detail::from_selection(s, method, in, chosen, 0xc2);
      r.run["matched_cardinality"] = k ? Json(k_fit) : Json(nullptr);
      out.reports.push_back(std::move(r));
    } else if (method == "spike-slab") {
      Vector marg;
      const BaselineResult b =
          meanfield_select(*in.model, in.learner, k ? std::optional<Index>(k_fit) : std::nullopt, &marg);
      SelectionReport r = detail::from_baseline(b, in);
      r.marginals = marg;
      r.run["matched_cardinality"] = k ? Json(k_fit) : Json(nullptr);
      out.reports.push_back(std::move(r));
    } else if (method == "omp") {
      SelectionReport r = detail::from_baseline(omp(in.model->design(), in.model->response(), k_fit), in);
      r.run["matched_cardinality"] = k_fit;
      out.reports.push_back(std::move(r));
    } else {
      SelectionReport r = detail::from_baseline(forward_select(*in.model, k_fit), in);
      r.run["matched_cardinality"] = k_fit;
      out.reports.push_back(std::move(r));
    }
  }
  return out;
}

// Runs body(i) for i in [0, n) on up to `threads` workers. Each index owns
// its own state, so results do not depend on the thread count. The first
// exception is rethrown after all workers finish.
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace divsel::experiments
