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

// The learned-model artifact: everything needed to resample, extract the MAP
// or compute credible intervals without refitting. Doubles are written with
// round-trip precision, so a loaded ensemble reproduces the fitted one bit
// for bit.

#include <fstream>
#include <string>
#include <vector>

#include "divsel/report.hpp"

namespace divsel {

inline constexpr const char* kArtifactSchemaId = "divsel.model";
inline constexpr const char* kArtifactSchemaVersion = "1.0.0";

struct ModelArtifact {
  Mode mode = Mode::kBernoulliDpp;
  Vector theta;
  double theta0 = 0;
  double kappa = 0;
  std::uint64_t seed = 0;
  long n_iters = 0;
  SimilaritySpec phi_source;
  Matrix phi;  // M x d similarity factor of the fitted ensemble; identity for dpp-bernoulli
  bool phi_identity = false;
  std::vector<std::string> feature_names;
  std::string response_name;
  LearnerConfig config;
  Hyperparameters hyper;
  Json diagnostics = Json::object();

  // The fitted posterior q.
  LEnsemble ensemble() const {
    SimilarityFactor f = phi_identity ? SimilarityFactor::identity(theta.size()) : SimilarityFactor(phi);
    return LEnsemble(std::move(f), theta);
  }
};

inline Json to_json(const ModelArtifact& a) {
  Json j;
  j["schema"] = kArtifactSchemaId;
  j["schema_version"] = kArtifactSchemaVersion;
  j["mode"] = to_string(a.mode);
  j["theta"] = to_json(a.theta);
  j["theta0"] = a.theta0;
  j["kappa"] = a.kappa;
  j["seed"] = a.seed;
  j["n_iters"] = a.n_iters;
  j["phi_source"] = to_json(a.phi_source);
  Json rows = Json::array();
  if (!a.phi_identity) {
    for (Index i = 0; i < a.phi.rows(); ++i) rows.push_back(to_json(Vector(a.phi.row(i).transpose())));
  }
  j["ensemble"] = Json{{"m", a.theta.size()},
                       {"d", a.phi_identity ? a.theta.size() : a.phi.cols()},
                       {"identity", a.phi_identity},
                       {"phi", std::move(rows)}};
  j["feature_names"] = a.feature_names;
  j["response"] = a.response_name;
  j["learner"] = to_json(a.config);
  j["hyperparameters"] = to_json(a.hyper);
  j["diagnostics"] = a.diagnostics;
  return j;
}

inline ModelArtifact artifact_from_json(const Json& j) {
  try {
    if (j.value("schema", "") != kArtifactSchemaId) throw DataError("model artifact: unexpected schema tag");
    ModelArtifact a;
    a.mode = parse_mode(j.at("mode").get<std::string>());
    a.theta = vector_from_json(j.at("theta"), "theta");
    a.theta0 = j.at("theta0").get<double>();
    a.kappa = j.at("kappa").get<double>();
    a.seed = j.at("seed").get<std::uint64_t>();
    a.n_iters = j.at("n_iters").get<long>();
    const Json& src = j.at("phi_source");
    a.phi_source.source = parse_similarity_source(src.at("source").get<std::string>());
    if (!src.at("side_info_path").is_null()) a.phi_source.side_info_path = src["side_info_path"].get<std::string>();
    if (!src.at("sigma").is_null()) a.phi_source.sigma = src["sigma"].get<double>();
    a.phi_source.rank_d = src.value("rank_d", Index{0});
    const Json& ens = j.at("ensemble");
    const auto m = ens.at("m").get<Index>();
    const auto d = ens.at("d").get<Index>();
    if (m != a.theta.size()) throw DataError("model artifact: ensemble.m does not match theta");
    a.phi_identity = ens.at("identity").get<bool>();
    if (!a.phi_identity) {
      const Json& rows = ens.at("phi");
      if (static_cast<Index>(rows.size()) != m) throw DataError("model artifact: phi has the wrong number of rows");
      a.phi.resize(m, d);
      for (Index i = 0; i < m; ++i) {
        const Vector r = vector_from_json(rows[static_cast<std::size_t>(i)], "phi row " + std::to_string(i));
        if (r.size() != d) throw DataError("model artifact: phi row " + std::to_string(i) + " has the wrong length");
        a.phi.row(i) = r.transpose();
      }
    }
    a.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    if (static_cast<Index>(a.feature_names.size()) != m) throw DataError("model artifact: feature_names length mismatch");
    a.response_name = j.value("response", "");
    a.config = learner_config_from_json(j.at("learner"));
    const Json& h = j.at("hyperparameters");
    a.hyper = Hyperparameters{h.at("ridge_scale").get<double>(), h.at("a0").get<double>(), h.at("b0").get<double>(),
                              h.at("alpha").get<double>()};
    a.diagnostics = j.value("diagnostics", Json::object());
    return a;
  } catch (const Json::exception& e) {
    throw DataError(std::string("model artifact: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("model artifact: ") + e.what());
  }
}

inline ModelArtifact load_artifact(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model artifact " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }
  return artifact_from_json(j);
}

}  // namespace divsel
