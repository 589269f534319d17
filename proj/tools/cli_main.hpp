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

// divsel command-line interface. Exit codes: 0 success, 1 usage error,
// 2 data error, 3 numerical failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "divsel/artifact.hpp"
#include "divsel/csv.hpp"
#include "divsel/experiments/collinearity.hpp"
#include "divsel/experiments/fig1.hpp"
#include "divsel/experiments/spatial.hpp"

namespace divsel::cli {

inline constexpr const char* kVersion = "1.0.0";

// Reads --config files as JSON. Objects keyed by a subcommand name hold that
// subcommand's options; other top-level keys go to the subcommand being run,
// except the global ones. Underscores in keys are read as dashes.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* root) : root_(root) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}\n"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    Json j;
    try {
      j = Json::parse(in);
    } catch (const Json::parse_error& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
    std::vector<std::string> active;
    for (const CLI::App* a = root_; !a->get_subcommands().empty();) {
      a = a->get_subcommands().front();
      active.push_back(a->get_name());
    }
    std::vector<CLI::ConfigItem> items;
    flatten(j, root_, {}, active, items);
    return items;
  }

 private:
  static std::string dashed(std::string s) {
    for (char& c : s) c = c == '_' ? '-' : c;
    return s;
  }

  static std::string scalar(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_null()) throw CLI::ConversionError("config values cannot be null");
    return v.dump();
  }

  static void flatten(const Json& obj, const CLI::App* app, const std::vector<std::string>& parents,
                      const std::vector<std::string>& active, std::vector<CLI::ConfigItem>& items) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      const CLI::App* sub = nullptr;
      try {
        sub = app->get_subcommand(it.key());
      } catch (const CLI::OptionNotFound&) {
        sub = nullptr;
      }
      if (sub && it.value().is_object()) {
        std::vector<std::string> p = parents;
        p.push_back(it.key());
        flatten(it.value(), sub, p, active, items);
        continue;
      }
      CLI::ConfigItem item;
      item.name = dashed(it.key());
      item.parents = parents;
      if (parents.empty() && !app->get_option_no_throw("--" + item.name)) item.parents = active;
      if (it.value().is_array()) {
        for (const auto& v : it.value()) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(it.value()));
      }
      items.push_back(std::move(item));
    }
  }

  const CLI::App* root_;
};

struct Globals {
  std::uint64_t seed = 0;
  std::string output = ".";
};

inline std::filesystem::path output_path(const Globals& g, const std::string& file) {
  std::error_code ec;
  std::filesystem::create_directories(g.output, ec);
  if (ec) throw DataError("cannot create output directory " + g.output + ": " + ec.message());
  return std::filesystem::path(g.output) / file;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

inline void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

// Report documents are validated before they are written.
inline void write_report(const std::filesystem::path& path, const Json& doc) {
  const auto errors = validate_report(doc);
  if (!errors.empty()) throw NumericalError("internal: report failed schema validation: " + errors.front());
  write_json(path, doc);
}

inline Json provenance(std::uint64_t seed, Json config) {
  return Json{{"seed", seed}, {"tool", "divsel"}, {"version", kVersion}, {"config", std::move(config)}};
}

// ---------------------------------------------------------------- select

struct SelectOptions {
  std::string data;
  std::string response = "y";
  std::string mode = "bernoulli-dpp";
  double kappa = 5;
  long iters = 2000;
  std::string c_estimator = "empirical";
  std::string solver = "cg";
  std::optional<double> step_size;
  double theta_clamp = 15;
  bool subtract_base_measure = false;
  std::string similarity = "gram_of_design";
  std::optional<std::string> side_info;
  std::optional<double> sigma;
  Index rank = 0;
  double ridge_scale = 1.0;
  double a0 = 0.01;
  double b0 = 0.01;
  std::optional<double> alpha;
  double train_fraction = 1.0;
  std::vector<std::string> methods;
  long alt_draws = 500;
  std::size_t alternatives = 5;
  long credible_draws = 1000;
  double level = 0.95;
};

inline void add_learner_flags(CLI::App* c, double& kappa, long& iters) {
  c->add_option("--kappa", kappa, "Expected cardinality used to calibrate the initial log-quality")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c->add_option("--iters", iters, "Stochastic-approximation steps")->check(CLI::PositiveNumber)->capture_default_str();
}

inline CLI::App* add_select(CLI::App& app, SelectOptions& o) {
  auto* c = app.add_subcommand("select", "Fit the variational posterior on a CSV data set and write model.json + report.json");
  c->add_option("--data", o.data, "Input CSV (header row, numeric cells)")->required();
  c->add_option("--response", o.response, "Response column name")->capture_default_str();
  c->add_option("--mode", o.mode, "bernoulli-dpp or dpp-bernoulli")
      ->check(CLI::IsMember({"bernoulli-dpp", "dpp-bernoulli"}))
      ->capture_default_str();
  add_learner_flags(c, o.kappa, o.iters);
  c->add_option("--c-estimator", o.c_estimator, "empirical or marginal-kernel")
      ->check(CLI::IsMember({"empirical", "marginal-kernel"}))
      ->capture_default_str();
  c->add_option("--solver", o.solver, "Linear solver for C theta = g: cg or dense")
      ->check(CLI::IsMember({"cg", "dense"}))
      ->capture_default_str();
  c->add_option("--step-size", o.step_size, "Constant step size (default 1/sqrt(iters))")->check(CLI::Range(0.0, 1.0));
  c->add_option("--theta-clamp", o.theta_clamp, "Bound on |theta| per step")->check(CLI::PositiveNumber)->capture_default_str();
  c->add_flag("--subtract-base-measure", o.subtract_base_measure,
              "Remove the similarity log-determinant from the stochastic gradient");
  c->add_option("--similarity", o.similarity, "gram_of_design, rbf_side_info or identity")
      ->check(CLI::IsMember({"gram_of_design", "rbf_side_info", "identity"}))
      ->capture_default_str();
  c->add_option("--side-info", o.side_info, "Side-info CSV: feature name, then profile columns");
  c->add_option("--sigma", o.sigma, "RBF bandwidth (default mean pairwise distance)")->check(CLI::PositiveNumber);
  c->add_option("--rank", o.rank, "Starting rank of the RBF factor")->check(CLI::NonNegativeNumber);
  c->add_option("--ridge-scale", o.ridge_scale, "Prior precision scale c")->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--a0", o.a0, "Inverse-gamma shape")->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--b0", o.b0, "Inverse-gamma scale")->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--alpha", o.alpha, "Bernoulli prior inclusion probability (default kappa / M)")->check(CLI::Range(0.0, 1.0));
  c->add_option("--train-fraction", o.train_fraction, "Leading fraction of rows used for fitting; the rest are held out")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  c->add_option("--methods", o.methods,
                "Methods to report: bernoulli-dpp, dpp-bernoulli, spike-slab, omp, forward-selection (default: --mode)")
      ->delimiter(',');
  c->add_option("--alt-draws", o.alt_draws, "Posterior draws used to rank alternative subsets")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  c->add_option("--alternatives", o.alternatives, "Alternative subsets to report")->capture_default_str();
  c->add_option("--credible-draws", o.credible_draws, "Draws for credible intervals on held-out rows (0 disables)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  c->add_option("--level", o.level, "Credible level")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  return c;
}

inline LearnerConfig learner_from(const SelectOptions& o, std::uint64_t seed) {
  LearnerConfig c;
  c.mode = parse_mode(o.mode);
  c.kappa = o.kappa;
  c.n_iters = o.iters;
  c.c_estimator = parse_c_estimator(o.c_estimator);
  c.solver = parse_linear_solver(o.solver);
  c.step_size = o.step_size;
  c.theta_clamp = o.theta_clamp;
  c.subtract_base_measure = o.subtract_base_measure;
  c.seed = seed;
  return c;
}

inline int run_select(const SelectOptions& o, const Globals& g) {
  const Dataset data = ingest_csv(o.data, o.response);
  const Index n = data.x.rows(), m = data.x.cols();
  if (o.credible_draws > 0 && o.credible_draws < 100) throw InvalidArgument("--credible-draws must be 0 or at least 100");
  const Index ntr = experiments::train_rows(n, o.train_fraction);
  const Matrix xtr = data.x.topRows(ntr), xte = data.x.bottomRows(n - ntr);
  const Vector ytr = data.y.head(ntr), yte = data.y.tail(n - ntr);

  const LearnerConfig learner = learner_from(o, g.seed);
  if (!(o.kappa < static_cast<double>(m))) throw InvalidArgument("--kappa must be below the number of features");
  Hyperparameters hyper{o.ridge_scale, o.a0, o.b0, o.alpha.value_or(o.kappa / static_cast<double>(m))};
  const SpikeSlabModel model(xtr, ytr, hyper);

  SimilaritySpec spec;
  spec.source = parse_similarity_source(o.similarity);
  spec.side_info_path = o.side_info;
  spec.sigma = o.sigma;
  spec.rank_d = o.rank;
  std::optional<Matrix> side;
  if (spec.source == SimilaritySource::kRbfSideInfo) {
    if (!o.side_info) throw InvalidArgument("--similarity rbf_side_info needs --side-info");
    side = align_side_info(read_side_info(*o.side_info), data.feature_names);
  }
  const SimilarityBuild sim = build_similarity(spec, xtr, side);

  experiments::MethodsInput in;
  in.model = &model;
  in.phi = &sim.phi;
  in.x_test = &xte;
  in.y_test = &yte;
  in.names = &data.feature_names;
  in.learner = learner;
  in.methods = o.methods.empty() ? std::vector<std::string>{o.mode} : o.methods;
  if (std::find(in.methods.begin(), in.methods.end(), o.mode) == in.methods.end()) in.methods.insert(in.methods.begin(), o.mode);
  in.n_alternative_draws = o.alt_draws;
  in.n_alternatives = o.alternatives;
  in.credible_draws = o.credible_draws;
  in.credible_level = o.level;
  const experiments::MethodsOutput res = experiments::run_methods(in);
  const Selection& fit = learner.mode == Mode::kBernoulliDpp ? *res.dpp : *res.factorized;

  Json sim_json = to_json(spec);
  sim_json["rank"] = spec.source == SimilaritySource::kRbfSideInfo ? Json(sim.rank) : Json(nullptr);
  sim_json["sigma_used"] = spec.source == SimilaritySource::kRbfSideInfo ? Json(sim.sigma) : Json(nullptr);
  sim_json["relative_error"] = sim.relative_error;

  ModelArtifact art;
  art.mode = learner.mode;
  art.theta = fit.fit.theta;
  art.theta0 = fit.fit.theta0;
  art.kappa = learner.kappa;
  art.seed = learner.seed;
  art.n_iters = learner.n_iters;
  art.phi_source = spec;
  art.phi_identity = fit.q.factor().is_identity();
  if (!art.phi_identity) art.phi = fit.q.factor().matrix();
  art.feature_names = data.feature_names;
  art.response_name = data.response_name;
  art.config = learner;
  art.hyper = hyper;
  art.diagnostics = experiments::detail::selection_diagnostics(fit);
  write_json(output_path(g, "model.json"), to_json(art));

  Json config;
  config["data"] = o.data;
  config["response"] = o.response;
  config["feature_names"] = data.feature_names;
  config["rows"] = n;
  config["train_rows"] = ntr;
  config["learner"] = to_json(learner);
  config["hyperparameters"] = to_json(hyper);
  config["similarity"] = sim_json;
  config["methods"] = in.methods;
  config["alt_draws"] = o.alt_draws;
  config["alternatives"] = o.alternatives;
  config["credible_draws"] = o.credible_draws;
  config["level"] = o.level;
  write_report(output_path(g, "report.json"),
               make_report_document("select", provenance(g.seed, std::move(config)), res.reports));

  const SelectionReport& main = res.reports.front();
  std::cout << main.method << ": selected " << main.selected.size() << " of " << m << " features:";
  for (const auto& s : main.selected_names) std::cout << ' ' << s;
  std::cout << '\n';
  return 0;
}

// ---------------------------------------------------------------- map

struct MapOptions {
  std::string model;
  std::string method = "auto";
};

inline int run_map(const MapOptions& o, const Globals& g) {
  const ModelArtifact art = load_artifact(o.model);
  const LEnsemble q = art.ensemble();
  std::string method = o.method;
  if (method == "auto") method = art.mode == Mode::kBernoulliDpp ? "greedy" : "threshold";
  Subset map;
  if (method == "greedy") {
    map = greedy_map(q);
  } else if (method == "exact") {
    map = exact_map_enumerate(q);
  } else {
    map = threshold_map(art.theta);
  }
  Json j;
  j["schema"] = "divsel.map";
  j["schema_version"] = "1.0.0";
  j["model"] = o.model;
  j["mode"] = to_string(art.mode);
  j["method"] = method;
  j["map"] = to_json(map);
  std::vector<std::string> names;
  for (Index i : map) names.push_back(art.feature_names[static_cast<std::size_t>(i)]);
  j["map_names"] = names;
  j["log_prob"] = number_or_null(subset_log_prob(q, map, true));
  j["marginals"] = to_json(inclusion_probabilities(q));
  write_json(output_path(g, "map.json"), j);
  std::cout << to_string(map) << '\n';
  return 0;
}

// ---------------------------------------------------------------- sample

struct SampleOptions {
  std::string model;
  long draws = 100;
  std::optional<Index> k;
  std::optional<std::string> data;
  std::string response = "y";
  std::optional<std::string> predict;
  double level = 0.95;
};

inline int run_sample(const SampleOptions& o, const Globals& g) {
  const ModelArtifact art = load_artifact(o.model);
  const LEnsemble q = art.ensemble();
  Rng rng(g.seed);
  Json subsets = Json::array();
  for (long s = 0; s < o.draws; ++s) {
    const Subset d = o.k ? sample_k(q, *o.k, rng) : sample(q, rng);
    subsets.push_back(Json{{"subset", to_json(d)}, {"log_prob", number_or_null(subset_log_prob(q, d, true))}});
  }
  Json j;
  j["schema"] = "divsel.samples";
  j["schema_version"] = "1.0.0";
  j["model"] = o.model;
  j["seed"] = g.seed;
  j["k"] = o.k ? Json(*o.k) : Json(nullptr);
  j["draws"] = std::move(subsets);
  write_json(output_path(g, "samples.json"), j);

  if (o.predict) {
    if (!o.data) throw InvalidArgument("--predict needs the training data via --data");
    const Dataset train = ingest_csv(*o.data, o.response);
    if (train.feature_names != art.feature_names) throw DataError("--data columns do not match the model's features");
    const Dataset pred = parse_design(csv::read_file(*o.predict), art.feature_names, o.response);
    const Matrix& xp = pred.x;
    const std::optional<Vector> yp = pred.y.size() ? std::optional<Vector>(pred.y) : std::nullopt;
    const SpikeSlabModel model(train.x, train.y, art.hyper);
    Rng ci_rng = Rng(g.seed).split(0xc1);
    const CredibleInterval ci = credible_interval(q, model, xp, std::max(o.draws, 100L), o.level, ci_rng);
    std::ostringstream out;
    out.precision(17);
    out << "row,mean,lower,upper,between_var,within_var" << (yp ? ",observed" : "") << '\n';
    for (Index i = 0; i < ci.mean.size(); ++i) {
      out << i << ',' << ci.mean(i) << ',' << ci.lower(i) << ',' << ci.upper(i) << ',' << ci.between_var(i) << ','
          << ci.within_var(i);
      if (yp) out << ',' << (*yp)(i);
      out << '\n';
    }
    write_text(output_path(g, "intervals.csv"), out.str());
  }
  std::cout << "wrote " << o.draws << " draws\n";
  return 0;
}

// ---------------------------------------------------------------- demos

struct Fig1Options {
  long samples = 20000;
  std::vector<double> ratios{1, 10, 100, 1000};
  double eigen_sum = 2.0;
  std::optional<double> singleton;
};

inline int run_fig1(const Fig1Options& o, const Globals& g) {
  experiments::Fig1Config c;
  c.ratios = o.ratios;
  c.eigen_sum = o.eigen_sum;
  c.singleton_eigenvalue = o.singleton;
  c.n_samples = o.samples;
  c.seed = g.seed;
  const auto rows = experiments::demo_fig1(c);
  std::ostringstream out;
  experiments::write_fig1_csv(out, rows);
  write_text(output_path(g, "fig1.csv"), out.str());
  std::cout << out.str();
  return 0;
}

struct SpatialOptions {
  experiments::SpatialConfig cfg;
  std::string solver = "dense";
};

inline int run_spatial(SpatialOptions o, const Globals& g) {
  o.cfg.solver = parse_linear_solver(o.solver);
  o.cfg.seed_offset = g.seed;
  o.cfg.sensor_seed_base += g.seed;
  const experiments::SpatialDemo d = experiments::demo_spatial(o.cfg);
  const auto& c = o.cfg;
  Json config{{"domain", {c.x_min, c.x_max, c.y_min, c.y_max}},
              {"lattice", c.lattice},
              {"scale_fractions", c.scale_fractions},
              {"n_sensors", c.n_sensors},
              {"noise_sd", c.noise_sd},
              {"train_fraction", c.train_fraction},
              {"kappa", c.kappa},
              {"n_iters", c.n_iters},
              {"solver", to_string(c.solver)},
              {"alt_draws", c.n_alternative_draws},
              {"methods", c.methods},
              {"n_seeds", c.n_seeds},
              {"sensor_seed_base", c.sensor_seed_base},
              {"seed_offset", c.seed_offset}};
  Json sources = Json::array();
  for (const auto& s : c.sources) sources.push_back({{"x", s.x}, {"y", s.y}, {"width", s.width}, {"amplitude", s.amplitude}});
  config["sources"] = std::move(sources);
  std::vector<SelectionReport> all;
  std::ostringstream csv;
  csv.precision(17);
  csv << "sensor_seed,learner_seed,method,cardinality,mean_pairwise_distance,heldout_mse\n";
  for (const auto& run : d.runs) {
    for (const auto& r : run.reports) {
      all.push_back(r);
      csv << run.sensor_seed << ',' << run.learner_seed << ',' << r.method << ',' << r.selected.size() << ','
          << r.mean_pairwise_distance.value_or(0.0) << ',' << r.heldout_mse.value_or(std::nan("")) << '\n';
    }
  }
  write_report(output_path(g, "report.json"), make_report_document("demo spatial", provenance(g.seed, config), all, to_json(d)));
  write_text(output_path(g, "spatial.csv"), csv.str());
  std::cout << to_json(d).dump(2) << '\n';
  return 0;
}

struct CollinearityOptions {
  experiments::CollinearityBenchConfig cfg;
};

inline int run_collinearity(CollinearityOptions o, const Globals& g) {
  o.cfg.seed_offset = g.seed;
  o.cfg.data_seed_base += g.seed;
  const experiments::CollinearityBench b = experiments::bench_collinearity(o.cfg);
  const auto& c = o.cfg;
  Json config{{"n_total", c.data.n_total},
              {"group_size", c.data.group_size},
              {"n_noise", c.data.n_noise},
              {"tau", c.data.tau},
              {"beta_a", c.data.beta_a},
              {"beta_b", c.data.beta_b},
              {"noise_sd", c.data.noise_sd},
              {"train_fraction", c.data.train_fraction},
              {"kappa", c.kappa},
              {"n_iters", c.n_iters},
              {"n_seeds", c.n_seeds},
              {"data_seed_base", c.data_seed_base},
              {"seed_offset", c.seed_offset},
              {"methods", c.methods},
              {"logdet_tie_tolerance", c.logdet_tie_tolerance}};
  std::vector<SelectionReport> all;
  for (const auto& run : b.runs) all.insert(all.end(), run.reports.begin(), run.reports.end());
  write_report(output_path(g, "report.json"),
               make_report_document("bench collinearity", provenance(g.seed, config), all, to_json(b)));
  std::ostringstream csv;
  experiments::write_collinearity_csv(csv, b);
  write_text(output_path(g, "collinearity.csv"), csv.str());
  std::cout << to_json(b).dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------- main

inline int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Diverse Bayesian feature selection with determinantal point processes", "divsel"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--output", g.output, "Output directory")->capture_default_str();
  app.set_config("--config", "", "JSON file of option values; explicit flags take precedence");
  app.config_formatter(std::make_shared<JsonConfig>(&app));

  SelectOptions sel;
  auto* select_cmd = add_select(app, sel);

  MapOptions mp;
  auto* map_cmd = app.add_subcommand("map", "Extract the MAP subset from a saved model");
  map_cmd->add_option("--model", mp.model, "model.json written by select")->required();
  map_cmd->add_option("--method", mp.method, "auto, greedy, exact or threshold")
      ->check(CLI::IsMember({"auto", "greedy", "exact", "threshold"}))
      ->capture_default_str();

  SampleOptions sp;
  auto* sample_cmd = app.add_subcommand("sample", "Draw subsets from a saved model; optionally credible intervals");
  sample_cmd->add_option("--model", sp.model, "model.json written by select")->required();
  sample_cmd->add_option("--draws", sp.draws, "Number of draws")->check(CLI::PositiveNumber)->capture_default_str();
  sample_cmd->add_option("--k", sp.k, "Draw from the k-DPP instead")->check(CLI::PositiveNumber);
  sample_cmd->add_option("--data", sp.data, "Training CSV, needed for --predict");
  sample_cmd->add_option("--response", sp.response, "Response column name")->capture_default_str();
  sample_cmd->add_option("--predict", sp.predict, "CSV of rows to predict (same columns as --data)");
  sample_cmd->add_option("--level", sp.level, "Credible level")->check(CLI::Range(0.0, 1.0))->capture_default_str();

  auto* demo = app.add_subcommand("demo", "Reproduction demos");
  demo->require_subcommand(1);
  Fig1Options f1;
  auto* fig1_cmd = demo->add_subcommand("fig1", "Block-kernel selection counts; writes fig1.csv");
  fig1_cmd->add_option("--samples", f1.samples, "Draws per ratio")->check(CLI::Range(2L, 100000000L))->capture_default_str();
  fig1_cmd->add_option("--ratios", f1.ratios, "lambda1 / lambda2 values")->delimiter(',')->capture_default_str();
  fig1_cmd->add_option("--eigen-sum", f1.eigen_sum, "lambda1 + lambda2")->check(CLI::PositiveNumber)->capture_default_str();
  fig1_cmd->add_option("--singleton-eigenvalue", f1.singleton, "Eigenvalue of each singleton (default --eigen-sum)")
      ->check(CLI::PositiveNumber);

  SpatialOptions so;
  auto* spatial_cmd = demo->add_subcommand("spatial", "Sensor gridding on a synthetic field; writes report.json and spatial.csv");
  auto& sc = so.cfg;
  spatial_cmd->add_option("--seeds", sc.n_seeds, "Repetitions")->check(CLI::PositiveNumber)->capture_default_str();
  spatial_cmd->add_option("--sensors", sc.n_sensors, "Sensors per repetition")->check(CLI::Range(20L, 100000L))->capture_default_str();
  spatial_cmd->add_option("--lattice", sc.lattice, "Candidate centers per side")->check(CLI::PositiveNumber)->capture_default_str();
  spatial_cmd->add_option("--scales", sc.scale_fractions, "Bump bandwidths as fractions of the domain diagonal")
      ->delimiter(',')
      ->capture_default_str();
  spatial_cmd->add_option("--noise", sc.noise_sd, "Observation noise sd")->check(CLI::NonNegativeNumber)->capture_default_str();
  spatial_cmd->add_option("--train-fraction", sc.train_fraction, "Fraction of sensors used for fitting")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  add_learner_flags(spatial_cmd, sc.kappa, sc.n_iters);
  spatial_cmd->add_option("--solver", so.solver, "cg or dense")->check(CLI::IsMember({"cg", "dense"}))->capture_default_str();
  spatial_cmd->add_option("--alt-draws", sc.n_alternative_draws, "Posterior draws for alternative subsets")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  spatial_cmd->add_option("--methods", sc.methods, "Methods to run")->delimiter(',')->capture_default_str();
  spatial_cmd->add_option("--threads", sc.threads, "Worker threads over seeds")->check(CLI::PositiveNumber)->capture_default_str();

  auto* bench = app.add_subcommand("bench", "Benchmarks");
  bench->require_subcommand(1);
  CollinearityOptions co;
  auto* col_cmd = bench->add_subcommand("collinearity", "Grouped near-duplicate features; writes report.json and collinearity.csv");
  auto& cc = co.cfg;
  col_cmd->add_option("--seeds", cc.n_seeds, "Repetitions")->check(CLI::PositiveNumber)->capture_default_str();
  col_cmd->add_option("--n", cc.data.n_total, "Rows per data set")->check(CLI::Range(4L, 10000000L))->capture_default_str();
  col_cmd->add_option("--noise-features", cc.data.n_noise, "Independent noise features")->check(CLI::NonNegativeNumber)->capture_default_str();
  col_cmd->add_option("--tau", cc.data.tau, "Within-group perturbation sd")->check(CLI::NonNegativeNumber)->capture_default_str();
  col_cmd->add_option("--beta-a", cc.data.beta_a, "Effect of group A")->capture_default_str();
  col_cmd->add_option("--beta-b", cc.data.beta_b, "Effect of group B")->capture_default_str();
  col_cmd->add_option("--train-fraction", cc.data.train_fraction, "Fraction of rows used for fitting")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  add_learner_flags(col_cmd, cc.kappa, cc.n_iters);
  col_cmd->add_option("--methods", cc.methods, "Methods to run")->delimiter(',')->capture_default_str();
  col_cmd->add_option("--threads", cc.threads, "Worker threads over seeds")->check(CLI::PositiveNumber)->capture_default_str();

  auto* schema_cmd = app.add_subcommand("schema", "Print the report JSON schema");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (select_cmd->parsed()) return run_select(sel, g);
    if (map_cmd->parsed()) return run_map(mp, g);
    if (sample_cmd->parsed()) return run_sample(sp, g);
    if (fig1_cmd->parsed()) return run_fig1(f1, g);
    if (spatial_cmd->parsed()) return run_spatial(so, g);
    if (col_cmd->parsed()) return run_collinearity(co, g);
    if (schema_cmd->parsed()) {
      std::cout << report_schema().dump(2) << '\n';
      return 0;
    }
  } catch (const InvalidArgument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  std::cerr << app.help();
  return 1;
}

}  // namespace divsel::cli
