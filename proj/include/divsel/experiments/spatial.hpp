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

// Choosing grid points for a process-convolution model: each candidate
// feature is a Gaussian bump k(s - w_m) at a lattice center w_m and one of
// several scales, evaluated at the sensor locations. The observed field is
// a fixed mixture of Gaussian sources plus noise.

#include <cmath>
#include <vector>

#include "divsel/experiments/methods.hpp"
#include "divsel/experiments/synthetic.hpp"
#include "divsel/similarity.hpp"

namespace divsel::experiments {

struct GaussianSource {
  double x = 0, y = 0;  // center, relative to the domain ([0, 1] along each side)
  double width = 0.1;   // absolute bandwidth
  double amplitude = 1;
};

struct SpatialConfig {
  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  Index lattice = 12;                                  // candidate centers per side, per scale
  std::vector<double> scale_fractions{0.25, 0.125, 0.0625};  // of the domain diagonal
  Index n_sensors = 120;
  std::optional<Matrix> sensors;                       // n x 2; drawn uniformly when absent
  std::vector<GaussianSource> sources{{0.2, 0.3, 0.12, 1.5},
                                      {0.7, 0.8, 0.08, -1.2},
                                      {0.75, 0.25, 0.15, 1.0},
                                      {0.3, 0.75, 0.06, 0.8},
                                      {0.5, 0.5, 0.2, -0.6}};
  double noise_sd = 0.1;
  double train_fraction = 0.7;
  double kappa = 10;
  long n_iters = 500;
  LinearSolver solver = LinearSolver::kDense;
  long n_alternative_draws = 100;
  std::vector<std::string> methods{"bernoulli-dpp", "spike-slab", "omp", "forward-selection"};
  long n_seeds = 20;
  std::uint64_t sensor_seed_base = 7000;  // run s draws sensors and noise from sensor_seed_base + s
  std::uint64_t seed_offset = 0;          // added to every learner seed
  unsigned threads = 1;

  double diagonal() const { return std::hypot(x_max - x_min, y_max - y_min); }

  void validate() const {
    if (!(x_max > x_min) || !(y_max > y_min)) throw InvalidArgument("spatial: empty domain");
    if (lattice < 1) throw InvalidArgument("spatial: lattice must be positive");
    if (scale_fractions.empty()) throw InvalidArgument("spatial: need at least one scale");
    for (double s : scale_fractions) {
      if (!(s > 0)) throw InvalidArgument("spatial: bump scales must be positive");
    }
    const Index n = sensors ? sensors->rows() : n_sensors;
    if (n < 20) throw InvalidArgument("spatial: need at least 20 sensors");
    if (sensors && sensors->cols() != 2) throw InvalidArgument("spatial: sensors must have two columns");
    if (!(noise_sd >= 0)) throw InvalidArgument("spatial: noise_sd must be non-negative");
    if (n_seeds < 1) throw InvalidArgument("spatial: need at least one seed");
    check_methods(methods);
  }
};

struct SpatialDesign {
  Matrix centers;  // M x 2, repeated once per scale
  Vector scales;   // M absolute bandwidths
};

// Scale-major: all lattice centers at the first scale, then the second, ...
inline SpatialDesign spatial_candidates(const SpatialConfig& c) {
  const Index per = c.lattice * c.lattice;
  const auto ns = static_cast<Index>(c.scale_fractions.size());
  SpatialDesign d{Matrix(per * ns, 2), Vector(per * ns)};
  Index col = 0;
  for (Index k = 0; k < ns; ++k) {
    for (Index a = 0; a < c.lattice; ++a) {
      for (Index b = 0; b < c.lattice; ++b, ++col) {
        d.centers(col, 0) = c.x_min + (c.x_max - c.x_min) * (static_cast<double>(a) + 0.5) / static_cast<double>(c.lattice);
        d.centers(col, 1) = c.y_min + (c.y_max - c.y_min) * (static_cast<double>(b) + 0.5) / static_cast<double>(c.lattice);
        d.scales(col) = c.scale_fractions[static_cast<std::size_t>(k)] * c.diagonal();
      }
    }
  }
  return d;
}

inline double gaussian_bump(double dx, double dy, double width) {
  return std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
}

inline Matrix bump_design(const Matrix& sensors, const SpatialDesign& d) {
  Matrix x(sensors.rows(), d.centers.rows());
  for (Index j = 0; j < x.cols(); ++j) {
    for (Index i = 0; i < x.rows(); ++i) {
      x(i, j) = gaussian_bump(sensors(i, 0) - d.centers(j, 0), sensors(i, 1) - d.centers(j, 1), d.scales(j));
    }
  }
  return x;
}

inline double spatial_field(const SpatialConfig& c, double x, double y) {
  double f = 0;
  for (const auto& s : c.sources) {
    const double sx = c.x_min + s.x * (c.x_max - c.x_min), sy = c.y_min + s.y * (c.y_max - c.y_min);
    f += s.amplitude * gaussian_bump(x - sx, y - sy, s.width);
  }
  return f;
}

struct SpatialRun {
  std::uint64_t sensor_seed = 0;
  std::uint64_t learner_seed = 0;
  std::vector<SelectionReport> reports;
};

struct SpatialDemo {
  std::vector<SpatialRun> runs;
  long distance_wins = 0;  // bernoulli-dpp mean pairwise distance >= spike-slab's
  long compared = 0;
  std::optional<double> mse_dpp, mse_meanfield;

  std::optional<double> mse_ratio() const {
    if (!mse_dpp || !mse_meanfield || !(*mse_meanfield > 0)) return std::nullopt;
    return *mse_dpp / *mse_meanfield;
  }
};

inline SpatialRun spatial_run(const SpatialConfig& c, std::size_t s) {
  SpatialRun run;
  run.sensor_seed = c.sensor_seed_base + s;
  run.learner_seed = c.seed_offset + s;
  Rng rng(run.sensor_seed);
  Matrix sensors;
  if (c.sensors) {
    sensors = *c.sensors;
  } else {
    sensors.resize(c.n_sensors, 2);
    for (Index i = 0; i < c.n_sensors; ++i) {
      sensors(i, 0) = c.x_min + (c.x_max - c.x_min) * rng.uniform();
      sensors(i, 1) = c.y_min + (c.y_max - c.y_min) * rng.uniform();
    }
  }
  if ((sensors.rowwise() - sensors.row(0)).rowwise().norm().maxCoeff() == 0.0) {
    throw DataError("spatial: all sensors are collocated");
  }
  const SpatialDesign cand = spatial_candidates(c);
  const Matrix x = bump_design(sensors, cand);
  Vector y(sensors.rows());
  for (Index i = 0; i < y.size(); ++i) y(i) = spatial_field(c, sensors(i, 0), sensors(i, 1)) + c.noise_sd * rng.normal();

  const Index ntr = train_rows(sensors.rows(), c.train_fraction);
  const Matrix xtr = x.topRows(ntr), xte = x.bottomRows(x.rows() - ntr);
  const Vector ytr = y.head(ntr), yte = y.tail(y.size() - ntr);
  Hyperparameters h;
  h.alpha = c.kappa / static_cast<double>(x.cols());
  const SpikeSlabModel model(xtr, ytr, h);
  const SimilarityFactor phi = normalized_design_factor(xtr);
  std::vector<std::string> names;
  for (Index j = 0; j < x.cols(); ++j) {
    names.push_back("bump_" + fmt_g(cand.centers(j, 0)) + "_" + fmt_g(cand.centers(j, 1)) + "_" + fmt_g(cand.scales(j)));
  }
  MethodsInput in;
  in.model = &model;
  in.phi = &phi;
  in.x_test = &xte;
  in.y_test = &yte;
  in.coords = &cand.centers;
  in.names = &names;
  in.methods = c.methods;
  in.learner.kappa = c.kappa;
  in.learner.n_iters = c.n_iters;
  in.learner.solver = c.solver;
  in.learner.seed = run.learner_seed;
  in.k = static_cast<Index>(std::lround(c.kappa));
  in.n_alternative_draws = c.n_alternative_draws;
  run.reports = run_methods(in).reports;
  for (auto& r : run.reports) {
    r.run["sensor_seed"] = run.sensor_seed;
    r.run["learner_seed"] = run.learner_seed;
    r.run["distance_convention"] = "pairwise distance between selected centers; scale ignored";
  }
  return run;
}

inline SpatialDemo demo_spatial(const SpatialConfig& c) {
  c.validate();
  SpatialDemo out;
  out.runs.resize(static_cast<std::size_t>(c.n_seeds));
  parallel_for(out.runs.size(), c.threads, [&](std::size_t s) { out.runs[s] = spatial_run(c, s); });
  double sd = 0, sm = 0;
  long nd = 0, nm = 0;
  for (const auto& run : out.runs) {
    const auto* dpp = find_report(run.reports, "bernoulli-dpp");
    const auto* mf = find_report(run.reports, "spike-slab");
    if (dpp && mf) {
      ++out.compared;
      out.distance_wins += *dpp->mean_pairwise_distance >= *mf->mean_pairwise_distance ? 1 : 0;
    }
    if (dpp && dpp->heldout_mse) {
      sd += *dpp->heldout_mse;
      ++nd;
    }
    if (mf && mf->heldout_mse) {
      sm += *mf->heldout_mse;
      ++nm;
    }
  }
  if (nd) out.mse_dpp = sd / static_cast<double>(nd);
  if (nm) out.mse_meanfield = sm / static_cast<double>(nm);
  return out;
}

inline Json to_json(const SpatialDemo& d) {
  return Json{{"runs", d.runs.size()},
              {"distance_wins", d.distance_wins},
              {"distance_compared", d.compared},
              {"mse_bernoulli_dpp", d.mse_dpp ? Json(*d.mse_dpp) : Json(nullptr)},
              {"mse_spike_slab", d.mse_meanfield ? Json(*d.mse_meanfield) : Json(nullptr)},
              {"mse_ratio", d.mse_ratio() ? Json(*d.mse_ratio()) : Json(nullptr)},
              {"distance_convention", "pairwise distance between selected centers; scale ignored"}};
}

}  // namespace divsel::experiments
