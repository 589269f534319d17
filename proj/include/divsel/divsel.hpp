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

#include "divsel/artifact.hpp"
#include "divsel/baselines.hpp"
#include "divsel/cg.hpp"
#include "divsel/csv.hpp"
#include "divsel/dpp.hpp"
#include "divsel/error.hpp"
#include "divsel/evidence_oracle.hpp"
#include "divsel/learner.hpp"
#include "divsel/metrics.hpp"
#include "divsel/numeric.hpp"
#include "divsel/predictive.hpp"
#include "divsel/regression.hpp"
#include "divsel/report.hpp"
#include "divsel/rng.hpp"
#include "divsel/select.hpp"
#include "divsel/similarity.hpp"
#include "divsel/subset.hpp"
