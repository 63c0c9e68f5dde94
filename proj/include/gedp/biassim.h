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

// Bias of inverse-variance weighting when the variances are estimated:
// closed forms for the two stylized cases and a Monte-Carlo harness for the
// identity/county/total reconstruction ablation.

#ifndef GEDP_BIASSIM_H_
#define GEDP_BIASSIM_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "gedp/numerics.h"

namespace gedp {

// Squared-error inflation n(3 + tau) / (1 + n(2 + tau)) of the weighted mean
// of n unbiased answers whose variances are replaced by inverse-gamma
// estimates IG(2 + tau, sigma^2 (1 + tau)).
double Case2Factor(int n, double tau);

struct MonteCarloEstimate {
  double mean = 0.0;
  double mean_se = 0.0;
  double mse = 0.0;
  double mse_se = 0.0;
};

// a_i ~ N(x, sigma^2), v_i ~ IG(2 + tau, sigma^2 (1 + tau)); estimate
// sum(a_i / v_i) / sum(1 / v_i). mse is measured against x.
absl::StatusOr<MonteCarloEstimate> Case2MonteCarlo(int n, double tau,
                                                   double sigma, double x,
                                                   int64_t trials,
                                                   RngStream& rng);

// Expected value of n / sum(1 / a_j) for a_j ~ IG(2 + x/c, x + x^2/c):
// x (n (2 + x/c) - n) / (n (2 + x/c) - 1).
double Case3ExpectedGuess(int n, double x, double c);

absl::StatusOr<MonteCarloEstimate> Case3MonteCarlo(int n, double x, double c,
                                                   int64_t trials,
                                                   RngStream& rng);

enum class VarianceMode { kEst, kAct, kHybrid };
enum class AblationFunction { kSqrt, kLog, kLinear };

const char* VarianceModeName(VarianceMode mode);

struct AblationConfig {
  int counties = 100;
  int per_county = 2;
  double true_value = 10.0;
  AblationFunction function = AblationFunction::kSqrt;
  double delta = 0.5;
  double mu = 1.0;
  int64_t trials = 100000;
  uint64_t seed = 1;
  std::vector<VarianceMode> modes = {VarianceMode::kEst, VarianceMode::kAct,
                                     VarianceMode::kHybrid};
};

enum QueryClass { kIdClass = 0, kCountyClass = 1, kTotalClass = 2 };

struct AblationModeResult {
  VarianceMode mode = VarianceMode::kEst;
  // Indexed by QueryClass: mean over trials of the per-trial mean squared
  // error of that class, with its standard error.
  std::array<double, 3> mse{};
  std::array<double, 3> se{};
  // Fraction of de-transformed answers whose variance estimate hit the floor.
  double floor_hit_rate = 0.0;
};

// Every trial draws one set of noisy identity, county and total answers from
// stream (seed, trial) and reconstructs it under each requested mode, so the
// modes are compared on identical noise.
absl::StatusOr<std::vector<AblationModeResult>> RunAblation(
    const AblationConfig& config);

}  // namespace gedp

#endif  // GEDP_BIASSIM_H_
