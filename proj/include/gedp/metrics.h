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

// Error metrics comparing reconstructed group-by answers with the truth.

#ifndef GEDP_METRICS_H_
#define GEDP_METRICS_H_

#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "gedp/dataset.h"

namespace gedp {

// Linear-interpolation sample quantile (R type 7) of `values`, p in [0, 1].
absl::StatusOr<double> Quantile7(std::span<const double> values, double p);

struct ScatterPoint {
  std::string key;
  double truth = 0.0;
  double estimate = 0.0;
};

struct QueryMetrics {
  int groups = 0;
  // Quartiles and mean of estimate - truth.
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double mean_signed = 0.0;
  double mean_absolute = 0.0;
  // Mean of |truth - estimate| / (truth + 1).
  double mean_relative = 0.0;
  double max_relative = 0.0;
  std::vector<std::string> missing_in_estimate;
  std::vector<std::string> missing_in_truth;
  std::vector<ScatterPoint> scatter;
};

// Compares the groups present in both vectors; unmatched keys are listed.
QueryMetrics CompareAnswers(const QueryAnswerVector& truth,
                            const QueryAnswerVector& estimate);

}  // namespace gedp

#endif  // GEDP_METRICS_H_
