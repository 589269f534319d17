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

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "divsel/learner.hpp"
#include "divsel/metrics.hpp"
#include "divsel/predictive.hpp"
#include "divsel/regression.hpp"
#include "divsel/select.hpp"
#include "divsel/similarity.hpp"

namespace divsel {

using Json = nlohmann::ordered_json;

inline constexpr const char* kReportSchemaId = "divsel.selection_report";
inline constexpr const char* kReportSchemaVersion = "1.0.0";

// -inf and nan have no JSON spelling; they are written as null.
inline Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json to_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(number_or_null(v(i)));
  return a;
}

inline Json to_json(const Subset& s) {
  Json a = Json::array();
  for (Index i : s) a.push_back(i);
  return a;
}

inline Vector vector_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) throw DataError(what + ": expected an array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw DataError(what + ": entry " + std::to_string(i) + " is not a number");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

inline Json to_json(const LearnerConfig& c) {
  Json j;
  j["mode"] = to_string(c.mode);
  j["n_iters"] = c.n_iters;
  j["kappa"] = c.kappa;
  j["step_size"] = c.step();
  j["step_size_rule"] = c.step_size ? "constant" : "inverse_sqrt_n";
  j["c_estimator"] = to_string(c.c_estimator);
  j["seed"] = c.seed;
  j["cg_tolerance"] = c.cg_tolerance;
  j["cg_max_iters"] = c.cg_max_iters;
  j["ridge_eps"] = c.ridge_eps;
  j["solver"] = to_string(c.solver);
  j["theta_clamp"] = c.theta_clamp;
  j["subtract_base_measure"] = c.subtract_base_measure;
  return j;
}

inline LearnerConfig learner_config_from_json(const Json& j) {
  LearnerConfig c;
  c.mode = parse_mode(j.at("mode").get<std::string>());
  c.n_iters = j.at("n_iters").get<long>();
  c.kappa = j.at("kappa").get<double>();
  if (j.value("step_size_rule", "inverse_sqrt_n") == "constant") c.step_size = j.at("step_size").get<double>();
  c.c_estimator = parse_c_estimator(j.value("c_estimator", "empirical"));
  c.seed = j.value("seed", std::uint64_t{0});
  c.cg_tolerance = j.value("cg_tolerance", c.cg_tolerance);
  c.cg_max_iters = j.value("cg_max_iters", c.cg_max_iters);
  c.ridge_eps = j.value("ridge_eps", c.ridge_eps);
  c.solver = parse_linear_solver(j.value("solver", "cg"));
  c.theta_clamp = j.value("theta_clamp", c.theta_clamp);
  c.subtract_base_measure = j.value("subtract_base_measure", false);
  return c;
}

inline Json to_json(const Hyperparameters& h) {
  return Json{{"ridge_scale", h.ridge_scale}, {"a0", h.a0}, {"b0", h.b0}, {"alpha", h.alpha}};
}

inline Json to_json(const SimilaritySpec& s) {
  Json j;
  j["source"] = to_string(s.source);
  j["side_info_path"] = s.side_info_path ? Json(*s.side_info_path) : Json(nullptr);
  j["sigma"] = s.sigma ? Json(*s.sigma) : Json(nullptr);
  j["rank_d"] = s.rank_d;
  return j;
}

inline Json to_json(const LearnerReport& r) {
  Json j;
  j["cg_iterations_total"] = r.cg_iterations_total;
  j["cg_iterations_max"] = r.cg_iterations_max;
  j["ridge_escalations"] = r.ridge_escalations;
  j["clamp_events"] = r.clamp_events;
  j["final_clamped"] = r.final_clamped;
  j["empty_draws"] = r.empty_draws;
  j["floored_draws"] = r.floored_draws;
  j["distinct_subsets"] = r.distinct_subsets;
  j["initial_theta0"] = r.initial_theta0;
  j["final_expected_cardinality"] = r.final_expected_cardinality;
  j["final_residual"] = number_or_null(r.final_residual);
  j["final_c_corner"] = r.final_c_corner;
  const auto& tr = r.theta_norm_trajectory;
  j["theta_norm_final"] = tr.empty() ? Json(nullptr) : Json(tr.back());
  j["theta_norm_max"] = tr.empty() ? Json(nullptr) : Json(*std::max_element(tr.begin(), tr.end()));
  return j;
}

struct CredibleSummary {
  double level = 0.95;
  long n_draws = 0;
  long n_points = 0;
  double mean_width = 0;
  double mean_between_var = 0;
  double mean_within_var = 0;
  std::optional<double> coverage;  // when observed responses are known
};

inline CredibleSummary summarize(const CredibleInterval& ci, const Vector* observed = nullptr) {
  CredibleSummary s;
  s.level = ci.level;
  s.n_draws = ci.n_draws;
  s.n_points = ci.mean.size();
  if (s.n_points == 0) return s;
  s.mean_width = (ci.upper - ci.lower).mean();
  s.mean_between_var = ci.between_var.mean();
  s.mean_within_var = ci.within_var.mean();
  if (observed) {
    long hit = 0;
    for (Index i = 0; i < observed->size(); ++i) hit += ((*observed)(i) >= ci.lower(i) && (*observed)(i) <= ci.upper(i));
    s.coverage = static_cast<double>(hit) / static_cast<double>(observed->size());
  }
  return s;
}

struct SelectionReport {
  std::string method;
  Subset selected;
  std::vector<std::string> selected_names;
  std::optional<Vector> marginals;
  double diversity_logdet = 0;
  std::optional<double> mean_pairwise_distance;
  std::optional<double> heldout_mse;
  std::optional<double> map_log_prob;
  std::vector<AlternativeSubset> alternatives;
  std::optional<CredibleSummary> credible;
  std::vector<std::pair<Index, double>> path;  // baselines: selection order and score
  Json diagnostics = Json::object();
  Json run = Json::object();  // per-run provenance (seed, method settings)
};

inline Json to_json(const SelectionReport& r) {
  Json j;
  j["method"] = r.method;
  j["selected"] = to_json(r.selected);
  j["selected_names"] = r.selected_names;
  j["cardinality"] = r.selected.size();
  j["marginals"] = r.marginals ? to_json(*r.marginals) : Json(nullptr);
  j["diversity_logdet"] = number_or_null(r.diversity_logdet);
  j["mean_pairwise_distance"] = r.mean_pairwise_distance ? Json(*r.mean_pairwise_distance) : Json(nullptr);
  j["heldout_mse"] = r.heldout_mse ? Json(*r.heldout_mse) : Json(nullptr);
  j["map_log_prob"] = r.map_log_prob ? number_or_null(*r.map_log_prob) : Json(nullptr);
  Json alts = Json::array();
  for (const auto& a : r.alternatives) alts.push_back(Json{{"subset", to_json(a.subset)}, {"log_prob", number_or_null(a.log_prob)}});
  j["alternatives"] = std::move(alts);
  if (r.credible) {
    const auto& c = *r.credible;
    j["credible_intervals"] = Json{{"level", c.level},
                                   {"n_draws", c.n_draws},
                                   {"n_points", c.n_points},
                                   {"mean_width", c.mean_width},
                                   {"mean_between_var", c.mean_between_var},
                                   {"mean_within_var", c.mean_within_var},
                                   {"coverage", c.coverage ? Json(*c.coverage) : Json(nullptr)}};
  } else {
    j["credible_intervals"] = nullptr;
  }
  Json path = Json::array();
  for (const auto& [i, s] : r.path) path.push_back(Json{{"feature", i}, {"score", number_or_null(s)}});
  j["path"] = std::move(path);
  j["diagnostics"] = r.diagnostics;
  j["run"] = r.run;
  return j;
}

// UTC "YYYY-MM-DDTHH:MM:SSZ"; SOURCE_DATE_EPOCH pins it for reproducible builds.
inline std::string utc_timestamp() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) t = static_cast<std::time_t>(std::strtoll(env, nullptr, 10));
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Top-level document: header, provenance, one entry per (run, method).
inline Json make_report_document(const std::string& command, Json provenance, const std::vector<SelectionReport>& reports,
                                 Json summary = nullptr) {
  Json doc;
  doc["schema"] = kReportSchemaId;
  doc["schema_version"] = kReportSchemaVersion;
  doc["generated_at"] = utc_timestamp();
  doc["command"] = command;
  doc["provenance"] = std::move(provenance);
  Json arr = Json::array();
  for (const auto& r : reports) arr.push_back(to_json(r));
  doc["reports"] = std::move(arr);
  doc["summary"] = std::move(summary);
  return doc;
}

inline const Json& report_schema() {
  static const Json schema = Json::parse(R"({
  "$schema": "http://json-schema.org/draft-07/schema#",
  "$id": "divsel.selection_report/1.0.0",
  "type": "object",
  "required": ["schema", "schema_version", "generated_at", "command", "provenance", "reports", "summary"],
  "additionalProperties": false,
  "properties": {
    "schema": {"const": "divsel.selection_report"},
    "schema_version": {"const": "1.0.0"},
    "generated_at": {"type": "string"},
    "command": {"type": "string"},
    "provenance": {
      "type": "object",
      "required": ["seed", "config"],
      "properties": {
        "seed": {"type": "integer", "minimum": 0},
        "config": {"type": "object"}
      }
    },
    "summary": {"type": ["object", "null"]},
    "reports": {
      "type": "array",
      "items": {
        "type": "object",
        "additionalProperties": false,
        "required": ["method", "selected", "selected_names", "cardinality", "marginals", "diversity_logdet",
                     "mean_pairwise_distance", "heldout_mse", "map_log_prob", "alternatives",
                     "credible_intervals", "path", "diagnostics", "run"],
        "properties": {
          "method": {"enum": ["bernoulli-dpp", "dpp-bernoulli", "spike-slab", "omp", "forward-selection"]},
          "selected": {"type": "array", "items": {"type": "integer", "minimum": 0}},
          "selected_names": {"type": "array", "items": {"type": "string"}},
          "cardinality": {"type": "integer", "minimum": 0},
          "marginals": {"type": ["array", "null"], "items": {"type": "number", "minimum": 0, "maximum": 1}},
          "diversity_logdet": {"type": ["number", "null"]},
          "mean_pairwise_distance": {"type": ["number", "null"], "minimum": 0},
          "heldout_mse": {"type": ["number", "null"], "minimum": 0},
          "map_log_prob": {"type": ["number", "null"]},
          "alternatives": {
            "type": "array",
            "items": {
              "type": "object",
              "required": ["subset", "log_prob"],
              "properties": {
                "subset": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                "log_prob": {"type": ["number", "null"]}
              }
            }
          },
          "credible_intervals": {
            "type": ["object", "null"],
            "required": ["level", "n_draws", "n_points", "mean_width", "mean_between_var", "mean_within_var", "coverage"],
            "properties": {
              "level": {"type": "number", "minimum": 0, "maximum": 1},
              "n_draws": {"type": "integer", "minimum": 100},
              "n_points": {"type": "integer", "minimum": 0},
              "mean_width": {"type": "number", "minimum": 0},
              "mean_between_var": {"type": "number", "minimum": 0},
              "mean_within_var": {"type": "number", "minimum": 0},
              "coverage": {"type": ["number", "null"], "minimum": 0, "maximum": 1}
            }
          },
          "path": {
            "type": "array",
            "items": {
              "type": "object",
              "required": ["feature", "score"],
              "properties": {"feature": {"type": "integer", "minimum": 0}, "score": {"type": ["number", "null"]}}
            }
          },
          "diagnostics": {"type": "object"},
          "run": {"type": "object"}
        }
      }
    }
  }
})");
  return schema;
}

namespace detail {

inline bool json_type_matches(const Json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  if (t == "integer") return v.is_number_integer() || (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>());
  if (t == "number") return v.is_number();
  return false;
}

inline void validate(const Json& v, const Json& s, const std::string& where, std::vector<std::string>& errors) {
  if (s.contains("type")) {
    const Json& t = s["type"];
    bool ok = false;
    if (t.is_string()) {
      ok = json_type_matches(v, t.get<std::string>());
    } else {
      for (const auto& alt : t) ok = ok || json_type_matches(v, alt.get<std::string>());
    }
    if (!ok) {
      errors.push_back(where + ": expected type " + t.dump());
      return;
    }
  }
  if (s.contains("const") && v != s["const"]) errors.push_back(where + ": expected " + s["const"].dump());
  if (s.contains("enum")) {
    bool ok = false;
    for (const auto& e : s["enum"]) ok = ok || v == e;
    if (!ok) errors.push_back(where + ": value " + v.dump() + " not in " + s["enum"].dump());
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (s.contains("minimum") && x < s["minimum"].get<double>()) errors.push_back(where + ": below minimum");
    if (s.contains("maximum") && x > s["maximum"].get<double>()) errors.push_back(where + ": above maximum");
  }
  if (v.is_object()) {
    if (s.contains("required")) {
      for (const auto& key : s["required"]) {
        if (!v.contains(key.get<std::string>())) errors.push_back(where + ": missing '" + key.get<std::string>() + "'");
      }
    }
    const bool closed = s.contains("additionalProperties") && s["additionalProperties"] == false;
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (s.contains("properties") && s["properties"].contains(it.key())) {
        validate(it.value(), s["properties"][it.key()], where + "." + it.key(), errors);
      } else if (closed) {
        errors.push_back(where + ": unexpected property '" + it.key() + "'");
      }
    }
  }
  if (v.is_array() && s.contains("items")) {
    for (std::size_t i = 0; i < v.size(); ++i) validate(v[i], s["items"], where + "[" + std::to_string(i) + "]", errors);
  }
}

}  // namespace detail

// Checks `doc` against a schema using the keywords the report schema uses:
// type, const, enum, minimum, maximum, required, properties,
// additionalProperties (false only) and items. Returns the violations.
inline std::vector<std::string> validate_json(const Json& doc, const Json& schema) {
  std::vector<std::string> errors;
  detail::validate(doc, schema, "$", errors);
  return errors;
}

inline std::vector<std::string> validate_report(const Json& doc) { return validate_json(doc, report_schema()); }

}  // namespace divsel
