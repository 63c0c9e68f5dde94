//
// Copyright 2026 The GEDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Run configuration and the release / postprocess / evaluate workflow
// behind the command-line tool.

#ifndef GEDP_PIPELINE_H_
#define GEDP_PIPELINE_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "gedp/dataset.h"
#include "gedp/neighbor.h"

namespace gedp {

// Neighbor-function block of a config file:
//   {"kind": "sqrt", "shift": 0}
//   {"kind": "log", "shift": 1}
//   {"kind": "linear", "d": 2}
//   {"kind": "piecewise_linear", "breakpoints": [1], "slopes": [1, 0.5]}
absl::StatusOr<NeighborFunction> ParseNeighborFunctionJson(
    const std::string& json_text);

enum class MechanismKind { kNeighbor, kPnc };

struct QuerySpec {
  std::string label;
  std::string grouper;  // Grouper::Parse syntax
  MechanismKind mechanism = MechanismKind::kNeighbor;
  std::map<Attribute, double> mu;  // attributes measured by this query
};

struct RunConfig {
  std::string dataset;
  std::string neighbor_function_json = R"({"kind":"sqrt","shift":0})";
  DistanceParams distance;
  double mu_total = 0.0;
  double gamma = 0.05;
  uint64_t seed = 1;
  std::string output_dir;
  bool release_transformed = false;
  std::vector<QuerySpec> queries;
};

// Parses a JSON run configuration. Relative dataset and output paths are
// resolved against `base_dir` when it is non-empty.
absl::StatusOr<RunConfig> ParseRunConfig(const std::string& json_text,
                                         const std::string& base_dir = "");

// Checks the composed budget against mu_total and that every PNC query is
// preceded by an identity neighbor query covering its attributes.
absl::Status CheckRunConfig(const RunConfig& config);

// Releases every query and writes answers_<label>_<attr>.csv, public.csv,
// ledger.json and manifest.json into output_dir. No true answer is written.
absl::Status RunRelease(const RunConfig& config);

struct PostprocessOptions {
  std::string run_dir;
  std::string output_csv;
  bool nonnegative = false;
};

// Reconstructs microdata from a run directory by weighted least squares.
// Attributes without any released query are written as 0.
absl::Status RunPostprocess(const PostprocessOptions& options);

struct EvaluateOptions {
  std::string microdata_csv;
  std::string truth_csv;
  std::vector<std::string> groupers;
  std::vector<Attribute> attributes;
  std::string metrics_json;
  std::string scatter_csv;
};

absl::Status RunEvaluate(const EvaluateOptions& options);

}  // namespace gedp

#endif  // GEDP_PIPELINE_H_
