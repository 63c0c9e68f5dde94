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

// Microdata reconstruction from noisy group-by answers:
//
//   minimize  sum_i w_i (q_i(x) - a_i)^2,   w_i = 1 / v_i
//
// solved with Jacobi-preconditioned conjugate gradient on the normal
// equations, or projected gradient when nonnegativity is requested.

#ifndef GEDP_MICRODATA_H_
#define GEDP_MICRODATA_H_

#include <map>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "gedp/dataset.h"
#include "gedp/mechanisms.h"

namespace gedp {

struct Measurement {
  std::string label;  // query label
  std::string key;    // group key
  std::vector<int> variables;
  std::vector<double> coefficients;  // same length as variables
  double answer = 0.0;
  double weight = 0.0;  // > 0
};

// One attribute's variables (one per record) and the rows measuring them.
struct ReconstructionProblem {
  Attribute attribute = Attribute::kM1Emp;
  std::vector<std::string> variable_keys;  // primary keys
  std::vector<Measurement> rows;
};

// Raw-space noisy answers of one query together with the group membership
// that defines which records each answer sums.
struct MeasuredQuery {
  std::string label;
  Attribute attribute = Attribute::kM1Emp;
  GroupMembership membership;
  std::vector<NoisyAnswer> answers;
};

// One row per answer. Rejects transformed-space answers, nonpositive
// variances, unknown groups or records and queries on another attribute.
absl::StatusOr<ReconstructionProblem> BuildProblem(
    std::span<const std::string> record_keys, Attribute attribute,
    std::span<const MeasuredQuery> queries);

absl::Status CheckProblem(const ReconstructionProblem& problem);

struct SolverOptions {
  bool nonnegative = false;
  double tolerance = 1e-8;  // gradient norm relative to the gradient at 0
  int max_iterations = 100000;
};

struct RowResidual {
  std::string label;
  std::string key;
  double answer = 0.0;
  double fitted = 0.0;
};

struct Solution {
  std::vector<double> values;  // indexed like variable_keys
  int iterations = 0;
  double relative_gradient = 0.0;
  // Variables not measured by any single-variable row; a ridge of
  // 1e-12 * max weight pins them.
  std::vector<std::string> underdetermined;
  std::vector<RowResidual> residuals;
};

// Fails with the final residual diagnostics if the tolerance is not reached.
absl::StatusOr<Solution> Solve(const ReconstructionProblem& problem,
                               const SolverOptions& options = {});

// Copies the public attributes of `public_data` and fills the confidential
// attributes from `estimates` (indexed like public_data.records()); missing
// attributes are 0.
absl::StatusOr<Dataset> ApplyEstimates(
    const Dataset& public_data,
    const std::map<Attribute, std::vector<double>>& estimates);

// Exact summation over reconstructed microdata.
QueryAnswerVector AnswerFromMicrodata(const Dataset& reconstructed,
                                      const GroupBySumQuery& query);

}  // namespace gedp

#endif  // GEDP_MICRODATA_H_
