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

// Noise mechanisms for group-by sum queries and the estimators that map
// transformed releases back to raw space.

#ifndef GEDP_MECHANISMS_H_
#define GEDP_MECHANISMS_H_

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "gedp/dataset.h"
#include "gedp/neighbor.h"
#include "gedp/numerics.h"

namespace gedp {

enum class VarianceKind { kExact, kEstimated };
enum class Space { kRaw, kTransformed };

const char* VarianceKindName(VarianceKind kind);
const char* SpaceName(Space space);

struct NoisyAnswer {
  std::string key;
  double value = 0.0;
  double variance = 0.0;  // > 0
  VarianceKind variance_kind = VarianceKind::kExact;
  std::string mechanism;  // "estab_gaussian", "neighbor", "pnc"
  Space space = Space::kRaw;
};

// Writes group_key,value,variance,variance_kind,mechanism,space.
void WriteNoisyAnswersCsv(std::span<const NoisyAnswer> answers,
                          std::ostream& out);
absl::StatusOr<std::vector<NoisyAnswer>> ParseNoisyAnswersCsv(std::istream& in);

// Adds N(0, (sensitivity / mu)^2) to each exact answer.
absl::StatusOr<std::vector<NoisyAnswer>> EstabGaussian(
    const QueryAnswerVector& exact, double sensitivity, double mu,
    RngStream& rng);

// Releases f(sum) + N(0, (delta / mu)^2) per group, in transformed space.
absl::StatusOr<std::vector<NoisyAnswer>> NeighborMechanism(
    const QueryAnswerVector& exact, const ValidatedNeighborFunction& f,
    double delta, double mu, RngStream& rng);
absl::StatusOr<std::vector<NoisyAnswer>> NeighborMechanism(
    const Dataset& data, const GroupBySumQuery& query,
    const ValidatedNeighborFunction& f, double delta, double mu,
    RngStream& rng);

struct Estimate {
  double value = 0.0;
  double variance = 0.0;
  bool floored = false;  // variance was raised to the floor
};

// Unbiased estimate of x from y = sqrt(x + shift) + N(0, (delta/mu)^2).
// With s = delta / mu: x~ = y^2 - s^2 - shift and
// v~ = max(s^4, 2 s^2 (2 (x~ + shift) + s^2)).
Estimate EstimateSqrt(double y, double delta, double mu, double shift = 0.0);

// Unbiased estimate of x from y = log(x + shift) + N(0, (delta/mu)^2):
// x~ + shift = exp(y - s^2 / 2), v~ = (x~ + shift)^2 (exp(s^2) - 1).
// OutOfRange if the exponential overflows.
absl::StatusOr<Estimate> EstimateLog(double y, double delta, double mu,
                                     double shift = 0.0);

struct DetransformResult {
  std::vector<NoisyAnswer> answers;  // raw space
  int floor_hits = 0;
};

// Applies the estimator matching f to transformed neighbor releases. Linear
// functions give exact variances, sqrt and log give estimated ones. Other
// kinds are Unimplemented.
absl::StatusOr<DetransformResult> Detransform(
    std::span<const NoisyAnswer> answers, const NeighborFunction& f,
    double delta, double mu);

// Per-record upper bounds that hold simultaneously with probability 1 - gamma.
struct PncBounds {
  double tau = 0.0;
  double gamma = 0.0;
  // (primary key, attribute) -> upper bound.
  std::map<std::pair<std::string, Attribute>, double> upper;
};

// Quantile making C*N independent one-sided bounds hold jointly with
// probability 1 - gamma: Phi^-1((1 - gamma)^(1 / count)).
absl::StatusOr<double> PncTau(double gamma, long long count);

struct IdentityRelease {
  Attribute attribute = Attribute::kM1Emp;
  // Transformed-space neighbor answers with keys "id=<primary key>".
  std::vector<NoisyAnswer> answers;
  double delta = 0.0;
  double mu = 0.0;
};

// u = f^-1(y + delta * tau / mu) with C = releases.size() and N the largest
// number of records in any release.
absl::StatusOr<PncBounds> ComputePncBounds(
    std::span<const IdentityRelease> releases,
    const ValidatedNeighborFunction& f, double gamma);

// Sensitivity of a truncated sum whose records are clipped at u:
// u - f^-1(max(f(0), f(u) - delta)).
double PncSensitivity(const NeighborFunction& f, double delta, double u);

// Per-group truncated sums with exactly known noise variance. Every member
// of every group must have a bound for the query attribute. Groups listed in
// `universe` but absent from the data are released as 0 + noise calibrated
// to the bound f^-1(f(0) + delta * tau / mu).
absl::StatusOr<std::vector<NoisyAnswer>> PncMechanism(
    const Dataset& data, const GroupBySumQuery& query, const PncBounds& bounds,
    const ValidatedNeighborFunction& f, double delta, double mu,
    RngStream& rng, std::span<const std::string> universe = {});

}  // namespace gedp

#endif  // GEDP_MECHANISMS_H_
