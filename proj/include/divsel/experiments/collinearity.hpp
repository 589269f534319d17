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

// Grouped-collinearity benchmark: does the DPP posterior keep one or two
// members of each near-duplicate group where the mean-field posterior
// spends its budget on a single group?

#include <ostream>
#include <vector>

#include "divsel/experiments/methods.hpp"
#include "divsel/experiments/synthetic.hpp"
#include "divsel/similarity.hpp"

namespace divsel::experiments {

struct CollinearityBenchConfig {
  CollinearityConfig data;
  double kappa = 3.0;
  long n_iters = 2000;
  long n_seeds = 20;
  std::uint64_t data_seed_base = 1000;  // run s draws data from data_seed_base + s, learns with seed s
  std::uint64_t seed_offset = 0;        // added to every learner seed
  std::vector<std::string> methods{"bernoulli-dpp", "spike-slab", "omp", "forward-selection"};
  LearnerConfig learner;                // mode, kappa, n_iters and seed are overwritten per run
  Hyperparameters hyper;                // alpha is overwritten: kappa / M
  unsigned threads = 1;
  // Logdets closer than this are a tie; several selections differ only by
  // roundoff (e.g. two singletons of unit-norm rows).
  double logdet_tie_tolerance = 1e-9;
};

struct CollinearityRun {
  std::uint64_t data_seed = 0;
  std::uint64_t learner_seed = 0;
  std::vector<SelectionReport> reports;
  Index group_a = 0, group_b = 0;   // bernoulli-dpp MAP members per group
  bool groups_ok = false;           // 1 or 2 members from each group
  std::optional<bool> logdet_win;   // strictly above spike-slab beyond the tie tolerance
};

struct CollinearityBench {
  std::vector<CollinearityRun> runs;
  long groups_ok = 0;
  long logdet_wins = 0;
  long compared = 0;
  std::optional<double> mse_dpp, mse_meanfield;  // means over runs

  std::optional<double> mse_ratio() const {
    if (!mse_dpp || !mse_meanfield || !(*mse_meanfield > 0)) return std::nullopt;
    return *mse_dpp / *mse_meanfield;
  }
};

inline const SelectionReport* find_report(const std::vector<SelectionReport>& rs, const std::string& method) {
  for (const auto& r : rs) {
    if (r.method == method) return &r;
  }
  return nullptr;
}

inline CollinearityBench bench_collinearity(const CollinearityBenchConfig& cfg) {
  check_methods(cfg.methods);
  if (cfg.n_seeds < 1) throw InvalidArgument("bench_collinearity: need at least one seed");
  CollinearityBench out;
  out.runs.resize(static_cast<std::size_t>(cfg.n_seeds));
  const Index g = cfg.data.group_size;
  parallel_for(out.runs.size(), cfg.threads, [&](std::size_t s) {
    CollinearityRun& run = out.runs[s];
    run.data_seed = cfg.data_seed_base + s;
    run.learner_seed = cfg.seed_offset + s;
    const SyntheticData d = collinearity_data(cfg.data, run.data_seed);
    const Matrix xtr = d.x_train(), xte = d.x_test();
    const Vector ytr = d.y_train(), yte = d.y_test();
    Hyperparameters h = cfg.hyper;
    h.alpha = cfg.kappa / static_cast<double>(xtr.cols());
    const SpikeSlabModel model(xtr, ytr, h);
    const SimilarityFactor phi = normalized_design_factor(xtr);
    MethodsInput in;
    in.model = &model;
    in.phi = &phi;
    in.x_test = &xte;
    in.y_test = &yte;
    in.methods = cfg.methods;
    in.learner = cfg.learner;
    in.learner.kappa = cfg.kappa;
    in.learner.n_iters = cfg.n_iters;
    in.learner.seed = run.learner_seed;
    in.k = static_cast<Index>(std::lround(cfg.kappa));
    run.reports = run_methods(in).reports;
    for (auto& r : run.reports) {
      r.run["data_seed"] = run.data_seed;
      r.run["learner_seed"] = run.learner_seed;
    }
    if (const SelectionReport* dpp = find_report(run.reports, "bernoulli-dpp")) {
      for (Index i : dpp->selected) {
        if (i < g) ++run.group_a;
        else if (i < 2 * g) ++run.group_b;
      }
      run.groups_ok = run.group_a >= 1 && run.group_a <= 2 && run.group_b >= 1 && run.group_b <= 2;
      if (const SelectionReport* mf = find_report(run.reports, "spike-slab")) {
        run.logdet_win = dpp->diversity_logdet > mf->diversity_logdet + cfg.logdet_tie_tolerance;
      }
    }
  });
  double sd = 0, sm = 0;
  long nd = 0, nm = 0;
  for (const auto& run : out.runs) {
    out.groups_ok += run.groups_ok ? 1 : 0;
    if (run.logdet_win) {
      ++out.compared;
      out.logdet_wins += *run.logdet_win ? 1 : 0;
    }
    if (const auto* r = find_report(run.reports, "bernoulli-dpp"); r && r->heldout_mse) {
      sd += *r->heldout_mse;
      ++nd;
    }
    if (const auto* r = find_report(run.reports, "spike-slab"); r && r->heldout_mse) {
      sm += *r->heldout_mse;
      ++nm;
    }
  }
  if (nd) out.mse_dpp = sd / static_cast<double>(nd);
  if (nm) out.mse_meanfield = sm / static_cast<double>(nm);
  return out;
}

inline void write_collinearity_csv(std::ostream& out, const CollinearityBench& b) {
  out << "data_seed,learner_seed,method,cardinality,selected,diversity_logdet,heldout_mse\n";
  out.precision(17);
  for (const auto& run : b.runs) {
    for (const auto& r : run.reports) {
      std::string sel;
      for (Index i : r.selected) sel += (sel.empty() ? "" : " ") + std::to_string(i);
      out << run.data_seed << ',' << run.learner_seed << ',' << r.method << ',' << r.selected.size() << ",\"" << sel
          << "\"," << r.diversity_logdet << ',' << (r.heldout_mse ? *r.heldout_mse : std::nan("")) << '\n';
    }
  }
}

inline Json to_json(const CollinearityBench& b) {
  return Json{{"runs", b.runs.size()},
              {"groups_ok", b.groups_ok},
              {"logdet_wins", b.logdet_wins},
              {"logdet_compared", b.compared},
              {"mse_bernoulli_dpp", b.mse_dpp ? Json(*b.mse_dpp) : Json(nullptr)},
              {"mse_spike_slab", b.mse_meanfield ? Json(*b.mse_meanfield) : Json(nullptr)},
              {"mse_ratio", b.mse_ratio() ? Json(*b.mse_ratio()) : Json(nullptr)}};
}

}  // namespace divsel::experiments
