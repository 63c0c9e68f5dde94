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

#include "gedp/biassim.h"

#include <cmath>

#include "absl/strings/str_cat.h"
#include "gedp/mechanisms.h"
#include "gedp/microdata.h"

namespace gedp {
namespace {

// Streaming mean and variance (Welford).
class Moments {
 public:
  void Add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  double mean() const { return mean_; }
  double se() const {
    return n_ > 1 ? std::sqrt(m2_ / static_cast<double>(n_ - 1) /
                              static_cast<double>(n_))
                  : 0.0;
  }

 private:
  int64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

double SampleStandardInverseGamma(RngStream& rng, double shape, double scale) {
  return scale / internal::StandardGamma(rng, shape);
}

}  // namespace

double Case2Factor(int n, double tau) {
  return n * (3.0 + tau) / (1.0 + n * (2.0 + tau));
}

absl::StatusOr<MonteCarloEstimate> Case2MonteCarlo(int n, double tau,
                                                   double sigma, double x,
                                                   int64_t trials,
                                                   RngStream& rng) {
  if (n < 1 || !(tau >= 0.0) || !(sigma > 0.0) || trials < 2) {
    return absl::InvalidArgumentError(absl::StrCat(
        "case 2 needs n >= 1, tau >= 0, sigma > 0, trials >= 2; got n=", n,
        " tau=", tau, " sigma=", sigma, " trials=", trials));
  }
  const double shape = 2.0 + tau;
  const double scale = sigma * sigma * (1.0 + tau);
  Moments estimate;
  Moments squared_error;
  for (int64_t t = 0; t < trials; ++t) {
    double numerator = 0.0;
    double denominator = 0.0;
    for (int i = 0; i < n; ++i) {
      const double a = x + sigma * internal::StandardNormal(rng);
      const double v = SampleStandardInverseGamma(rng, shape, scale);
      numerator += a / v;
      denominator += 1.0 / v;
    }
    const double e = numerator / denominator;
    estimate.Add(e);
    squared_error.Add((e - x) * (e - x));
  }
  return MonteCarloEstimate{estimate.mean(), estimate.se(),
                            squared_error.mean(), squared_error.se()};
}

double Case3ExpectedGuess(int n, double x, double c) {
  const double k = n * (2.0 + x / c);
  return x * (k - n) / (k - 1.0);
}

absl::StatusOr<MonteCarloEstimate> Case3MonteCarlo(int n, double x, double c,
                                                   int64_t trials,
                                                   RngStream& rng) {
  if (n < 1 || !(x > 0.0) || !(c > 0.0) || trials < 2) {
    return absl::InvalidArgumentError(absl::StrCat(
        "case 3 needs n >= 1, x > 0, c > 0, trials >= 2; got n=", n, " x=", x,
        " c=", c, " trials=", trials));
  }
  const double shape = 2.0 + x / c;
  const double scale = x + x * x / c;
  Moments guess;
  Moments squared_error;
  for (int64_t t = 0; t < trials; ++t) {
    double inverse_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      inverse_sum += 1.0 / SampleStandardInverseGamma(rng, shape, scale);
    }
    const double g = n / inverse_sum;
    guess.Add(g);
    squared_error.Add((g - x) * (g - x));
  }
  return MonteCarloEstimate{guess.mean(), guess.se(), squared_error.mean(),
                            squared_error.se()};
}

const char* VarianceModeName(VarianceMode mode) {
  switch (mode) {
    case VarianceMode::kEst:
      return "est";
    case VarianceMode::kAct:
      return "act";
    case VarianceMode::kHybrid:
      return "hybrid";
  }
  return "unknown";
}

absl::StatusOr<std::vector<AblationModeResult>> RunAblation(
    const AblationConfig& config) {
  if (config.counties < 1 || config.per_county < 1 || config.trials < 2 ||
      !(config.delta > 0.0) || !(config.mu > 0.0) ||
      !(config.true_value >= 0.0) || config.modes.empty()) {
    return absl::InvalidArgumentError(
        "ablation needs counties, per_county >= 1, trials >= 2, delta, mu > 0,"
        " true_value >= 0 and at least one mode");
  }
  const int n = config.counties * config.per_county;
  const double s = config.delta / config.mu;
  const double s2 = s * s;

  // Rows: identity answers, then counties, then the total.
  ReconstructionProblem problem;
  for (int j = 0; j < n; ++j) problem.variable_keys.push_back(absl::StrCat(j));
  std::vector<double> truth;
  std::vector<QueryClass> row_class;
  for (int j = 0; j < n; ++j) {
    problem.rows.push_back({"id", absl::StrCat("id=", j), {j}, {1.0}, 0.0, 1.0});
    truth.push_back(config.true_value);
    row_class.push_back(kIdClass);
  }
  for (int c = 0; c < config.counties; ++c) {
    Measurement row{"county", absl::StrCat("county=", c), {}, {}, 0.0, 1.0};
    for (int k = 0; k < config.per_county; ++k) {
      row.variables.push_back(c * config.per_county + k);
      row.coefficients.push_back(1.0);
    }
    problem.rows.push_back(std::move(row));
    truth.push_back(config.true_value * config.per_county);
    row_class.push_back(kCountyClass);
  }
  {
    Measurement row{"total", "total", {}, {}, 0.0, 1.0};
    for (int j = 0; j < n; ++j) {
      row.variables.push_back(j);
      row.coefficients.push_back(1.0);
    }
    problem.rows.push_back(std::move(row));
    truth.push_back(config.true_value * n);
    row_class.push_back(kTotalClass);
  }
  const size_t rows = problem.rows.size();

  auto transform = [&](double x) {
    switch (config.function) {
      case AblationFunction::kSqrt:
        return std::sqrt(x);
      case AblationFunction::kLog:
        return std::log(x);
      case AblationFunction::kLinear:
        return x;
    }
    return x;
  };
  auto actual_variance = [&](double x) {
    switch (config.function) {
      case AblationFunction::kSqrt:
        return 2.0 * s2 * (2.0 * x + s2);
      case AblationFunction::kLog:
        return x * x * std::expm1(s2);
      case AblationFunction::kLinear:
        return s2;
    }
    return s2;
  };
  std::vector<double> transformed_truth(rows);
  std::vector<double> true_variance(rows);
  for (size_t i = 0; i < rows; ++i) {
    transformed_truth[i] = transform(truth[i]);
    true_variance[i] = actual_variance(truth[i]);
    if (!std::isfinite(transformed_truth[i]) || !(true_variance[i] > 0.0)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "true value ", truth[i], " is outside the transform's domain"));
    }
  }

  const size_t modes = config.modes.size();
  std::vector<std::array<Moments, 3>> moments(modes);
  int64_t floor_hits = 0;
  std::vector<double> estimate(rows);
  std::vector<double> estimated_variance(rows);
  std::array<int, 3> class_size = {n, config.counties, 1};

  for (int64_t trial = 0; trial < config.trials; ++trial) {
    RngStream rng(config.seed, static_cast<uint64_t>(trial));
    for (size_t i = 0; i < rows; ++i) {
      const double y = transformed_truth[i] + s * internal::StandardNormal(rng);
      switch (config.function) {
        case AblationFunction::kSqrt: {
          const Estimate e = EstimateSqrt(y, config.delta, config.mu);
          estimate[i] = e.value;
          estimated_variance[i] = e.variance;
          floor_hits += e.floored ? 1 : 0;
          break;
        }
        case AblationFunction::kLog: {
          auto e = EstimateLog(y, config.delta, config.mu);
          if (!e.ok()) {
            return absl::Status(e.status().code(),
                                absl::StrCat("trial ", trial, ": ",
                                             e.status().message()));
          }
          estimate[i] = e->value;
          estimated_variance[i] = e->variance;
          floor_hits += e->floored ? 1 : 0;
          break;
        }
        case AblationFunction::kLinear:
          estimate[i] = y;
          estimated_variance[i] = s2;
          break;
      }
    }

    for (size_t m = 0; m < modes; ++m) {
      for (size_t i = 0; i < rows; ++i) {
        Measurement& row = problem.rows[i];
        row.answer = estimate[i];
        bool use_estimate = false;
        switch (config.modes[m]) {
          case VarianceMode::kEst:
            use_estimate = true;
            break;
          case VarianceMode::kAct:
            use_estimate = false;
            break;
          case VarianceMode::kHybrid:
            use_estimate = row_class[i] == kIdClass;
            break;
        }
        row.weight = 1.0 / (use_estimate ? estimated_variance[i] : true_variance[i]);
      }
      auto solution = Solve(problem);
      if (!solution.ok()) {
        return absl::Status(
            solution.status().code(),
            absl::StrCat("trial ", trial, " mode ",
                         VarianceModeName(config.modes[m]), ": ",
                         solution.status().message()));
      }
      std::array<double, 3> sse = {0.0, 0.0, 0.0};
      for (size_t i = 0; i < rows; ++i) {
        const double err = solution->residuals[i].fitted - truth[i];
        sse[row_class[i]] += err * err;
      }
      for (int k = 0; k < 3; ++k) moments[m][k].Add(sse[k] / class_size[k]);
    }
  }

  std::vector<AblationModeResult> results(modes);
  for (size_t m = 0; m < modes; ++m) {
    results[m].mode = config.modes[m];
    for (int k = 0; k < 3; ++k) {
      results[m].mse[k] = moments[m][k].mean();
      results[m].se[k] = moments[m][k].se();
    }
    results[m].floor_hit_rate =
        static_cast<double>(floor_hits) /
        (static_cast<double>(config.trials) * static_cast<double>(rows));
  }
  return results;
}

}  // namespace gedp
