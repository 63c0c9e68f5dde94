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

#include "gedp/microdata.h"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "absl/strings/str_cat.h"

namespace gedp {
namespace {

constexpr double kRidgeFactor = 1e-12;

double Dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double Norm(const std::vector<double>& a) { return std::sqrt(Dot(a, a)); }

// Normal-equation operator M = A^T W A + diag(ridge).
class NormalOperator {
 public:
  NormalOperator(const ReconstructionProblem& problem, std::vector<double> ridge)
      : problem_(problem), ridge_(std::move(ridge)) {}

  void Apply(const std::vector<double>& x, std::vector<double>& y) const {
    for (size_t j = 0; j < x.size(); ++j) y[j] = ridge_[j] * x[j];
    for (const Measurement& row : problem_.rows) {
      double r = 0.0;
      for (size_t k = 0; k < row.variables.size(); ++k) {
        r += row.coefficients[k] * x[row.variables[k]];
      }
      r *= row.weight;
      for (size_t k = 0; k < row.variables.size(); ++k) {
        y[row.variables[k]] += row.coefficients[k] * r;
      }
    }
  }

  std::vector<double> Diagonal() const {
    std::vector<double> d = ridge_;
    for (const Measurement& row : problem_.rows) {
      for (size_t k = 0; k < row.variables.size(); ++k) {
        d[row.variables[k]] += row.weight * row.coefficients[k] * row.coefficients[k];
      }
    }
    return d;
  }

  // A^T W a.
  std::vector<double> RightHandSide() const {
    std::vector<double> b(ridge_.size(), 0.0);
    for (const Measurement& row : problem_.rows) {
      for (size_t k = 0; k < row.variables.size(); ++k) {
        b[row.variables[k]] += row.weight * row.coefficients[k] * row.answer;
      }
    }
    return b;
  }

 private:
  const ReconstructionProblem& problem_;
  std::vector<double> ridge_;
};

struct IterationResult {
  int iterations = 0;
  double relative_gradient = 0.0;
  bool converged = false;
};

// Jacobi-preconditioned CG from the current x. Variables with free[j] false
// stay where they are.
IterationResult ConjugateGradient(const NormalOperator& op,
                                  const std::vector<double>& b, double b_norm,
                                  const SolverOptions& options,
                                  const std::vector<bool>& free,
                                  std::vector<double>& x) {
  const size_t n = b.size();
  const std::vector<double> diag = op.Diagonal();
  std::vector<double> r(n), z(n), p(n), q(n);
  auto residual = [&] {
    op.Apply(x, q);
    for (size_t j = 0; j < n; ++j) r[j] = free[j] ? b[j] - q[j] : 0.0;
  };
  residual();
  for (size_t j = 0; j < n; ++j) z[j] = r[j] / diag[j];
  p = z;
  double rz = Dot(r, z);
  IterationResult result;
  result.relative_gradient = Norm(r) / b_norm;
  while (result.relative_gradient > options.tolerance &&
         result.iterations < options.max_iterations) {
    op.Apply(p, q);
    for (size_t j = 0; j < n; ++j) {
      if (!free[j]) q[j] = 0.0;
    }
    const double pq = Dot(p, q);
    if (!(pq > 0.0)) break;
    const double alpha = rz / pq;
    for (size_t j = 0; j < n; ++j) {
      x[j] += alpha * p[j];
      r[j] -= alpha * q[j];
    }
    ++result.iterations;
    // Recompute the residual now and then so rounding does not accumulate.
    if (result.iterations % 50 == 0) residual();
    result.relative_gradient = Norm(r) / b_norm;
    for (size_t j = 0; j < n; ++j) z[j] = r[j] / diag[j];
    const double rz_next = Dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (size_t j = 0; j < n; ++j) p[j] = z[j] + beta * p[j];
  }
  residual();
  result.relative_gradient = Norm(r) / b_norm;
  result.converged = result.relative_gradient <= options.tolerance;
  return result;
}

// Projected gradient with Barzilai-Borwein steps and Armijo backtracking on
// 0.5 x'Mx - b'x over x >= 0.
IterationResult ProjectedGradient(const NormalOperator& op,
                                  const std::vector<double>& b, double b_norm,
                                  const SolverOptions& options,
                                  std::vector<double>& x) {
  const size_t n = b.size();
  for (double& v : x) v = std::max(0.0, v);
  std::vector<double> mx(n), g(n), x_next(n), mx_next(n), g_next(n);
  auto objective = [&](const std::vector<double>& v,
                       const std::vector<double>& mv) {
    return 0.5 * Dot(v, mv) - Dot(b, v);
  };
  auto projected_norm = [&](const std::vector<double>& v,
                            const std::vector<double>& grad) {
    double s = 0.0;
    for (size_t j = 0; j < n; ++j) {
      const double pg = (v[j] <= 0.0 && grad[j] > 0.0) ? 0.0 : grad[j];
      s += pg * pg;
    }
    return std::sqrt(s);
  };
  op.Apply(x, mx);
  for (size_t j = 0; j < n; ++j) g[j] = mx[j] - b[j];
  double f = objective(x, mx);
  const std::vector<double> diag = op.Diagonal();
  double step = 1.0 / *std::max_element(diag.begin(), diag.end());

  IterationResult result;
  result.relative_gradient = projected_norm(x, g) / b_norm;
  while (result.relative_gradient > options.tolerance &&
         result.iterations < options.max_iterations) {
    double f_next = 0.0;
    for (int backtrack = 0; backtrack < 60; ++backtrack) {
      for (size_t j = 0; j < n; ++j) x_next[j] = std::max(0.0, x[j] - step * g[j]);
      op.Apply(x_next, mx_next);
      f_next = objective(x_next, mx_next);
      double decrease = 0.0;
      for (size_t j = 0; j < n; ++j) decrease += g[j] * (x_next[j] - x[j]);
      if (f_next <= f + 1e-4 * decrease) break;
      step *= 0.5;
    }
    for (size_t j = 0; j < n; ++j) g_next[j] = mx_next[j] - b[j];
    double ss = 0.0;
    double sy = 0.0;
    for (size_t j = 0; j < n; ++j) {
      const double s = x_next[j] - x[j];
      ss += s * s;
      sy += s * (g_next[j] - g[j]);
    }
    x.swap(x_next);
    mx.swap(mx_next);
    g.swap(g_next);
    f = f_next;
    ++result.iterations;
    if (ss == 0.0) break;
    step = sy > 0.0 ? ss / sy : step * 2.0;
    result.relative_gradient = projected_norm(x, g) / b_norm;
  }
  result.relative_gradient = projected_norm(x, g) / b_norm;
  result.converged = result.relative_gradient <= options.tolerance;
  return result;
}

// Projected gradient finds the active set; CG on the free variables then
// solves the face exactly. Repeats while the face solution leaves x >= 0.
IterationResult SolveNonnegative(const NormalOperator& op,
                                 const std::vector<double>& b, double b_norm,
                                 const SolverOptions& options, int iterations,
                                 std::vector<double>& x) {
  const size_t n = b.size();
  std::vector<double> mx(n);
  IterationResult result;
  for (int round = 0; round < 20; ++round) {
    result = ProjectedGradient(op, b, b_norm, options, x);
    iterations += result.iterations;
    if (!result.converged) break;
    op.Apply(x, mx);
    std::vector<bool> free(n);
    for (size_t j = 0; j < n; ++j) free[j] = !(x[j] <= 0.0 && mx[j] - b[j] > 0.0);
    std::vector<double> face = x;
    SolverOptions tight = options;
    tight.tolerance = options.tolerance * 1e-6;
    tight.max_iterations = std::min<long long>(options.max_iterations,
                                               4LL * static_cast<long long>(n) + 100);
    const IterationResult polish =
        ConjugateGradient(op, b, b_norm, tight, free, face);
    iterations += polish.iterations;
    if (*std::min_element(face.begin(), face.end()) < 0.0) {
      // Wrong face; continue from the clipped point.
      for (size_t j = 0; j < n; ++j) x[j] = std::max(0.0, face[j]);
      continue;
    }
    op.Apply(face, mx);
    double pg = 0.0;
    for (size_t j = 0; j < n; ++j) {
      const double g = mx[j] - b[j];
      const double v = (face[j] <= 0.0 && g > 0.0) ? 0.0 : g;
      pg += v * v;
    }
    if (std::sqrt(pg) / b_norm <= result.relative_gradient) {
      x.swap(face);
      result.relative_gradient = std::sqrt(pg) / b_norm;
    }
    break;
  }
  result.iterations = iterations;
  result.converged = result.relative_gradient <= options.tolerance;
  return result;
}

}  // namespace

absl::Status CheckProblem(const ReconstructionProblem& problem) {
  const int n = static_cast<int>(problem.variable_keys.size());
  for (size_t i = 0; i < problem.rows.size(); ++i) {
    const Measurement& row = problem.rows[i];
    if (row.variables.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("row ", i, " (", row.label, " ", row.key,
                       ") touches no variable"));
    }
    if (row.variables.size() != row.coefficients.size()) {
      return absl::InvalidArgumentError(
          absl::StrCat("row ", i, ": variables and coefficients differ in size"));
    }
    if (!(row.weight > 0.0) || !std::isfinite(row.weight)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "row ", i, " (", row.label, " ", row.key,
          "): weight must be finite and > 0, got ", row.weight));
    }
    if (!std::isfinite(row.answer)) {
      return absl::InvalidArgumentError(
          absl::StrCat("row ", i, ": answer is not finite"));
    }
    for (int v : row.variables) {
      if (v < 0 || v >= n) {
        return absl::InvalidArgumentError(
            absl::StrCat("row ", i, ": variable ", v, " out of range"));
      }
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<ReconstructionProblem> BuildProblem(
    std::span<const std::string> record_keys, Attribute attribute,
    std::span<const MeasuredQuery> queries) {
  ReconstructionProblem problem;
  problem.attribute = attribute;
  problem.variable_keys.assign(record_keys.begin(), record_keys.end());
  std::unordered_map<std::string, int> index;
  for (size_t j = 0; j < record_keys.size(); ++j) {
    if (!index.emplace(record_keys[j], static_cast<int>(j)).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate record key ", record_keys[j]));
    }
  }
  for (const MeasuredQuery& q : queries) {
    if (q.attribute != attribute) {
      return absl::InvalidArgumentError(absl::StrCat(
          "query ", q.label, " targets ", AttributeName(q.attribute),
          " but the problem reconstructs ", AttributeName(attribute)));
    }
    for (const NoisyAnswer& a : q.answers) {
      if (a.space != Space::kRaw) {
        return absl::InvalidArgumentError(absl::StrCat(
            "query ", q.label, " group ", a.key,
            ": transformed-space answers must be de-transformed first"));
      }
      if (!(a.variance > 0.0) || !std::isfinite(a.variance)) {
        return absl::InvalidArgumentError(
            absl::StrCat("query ", q.label, " group ", a.key,
                         ": variance must be > 0, got ", a.variance));
      }
      auto members = q.membership.find(a.key);
      if (members == q.membership.end() || members->second.empty()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "query ", q.label, ": group ", a.key, " has no known members"));
      }
      Measurement row;
      row.label = q.label;
      row.key = a.key;
      row.answer = a.value;
      row.weight = 1.0 / a.variance;
      for (const std::string& pk : members->second) {
        auto it = index.find(pk);
        if (it == index.end()) {
          return absl::InvalidArgumentError(absl::StrCat(
              "query ", q.label, " group ", a.key, ": unknown record ", pk));
        }
        row.variables.push_back(it->second);
        row.coefficients.push_back(1.0);
      }
      problem.rows.push_back(std::move(row));
    }
  }
  return problem;
}

absl::StatusOr<Solution> Solve(const ReconstructionProblem& problem,
                               const SolverOptions& options) {
  if (absl::Status s = CheckProblem(problem); !s.ok()) return s;
  const size_t n = problem.variable_keys.size();
  Solution solution;
  solution.values.assign(n, 0.0);

  std::vector<bool> pinned(n, false);
  double max_weight = 0.0;
  for (const Measurement& row : problem.rows) {
    max_weight = std::max(max_weight, row.weight);
    if (row.variables.size() == 1 && row.coefficients[0] != 0.0) {
      pinned[row.variables[0]] = true;
    }
  }
  std::vector<double> ridge(n, 0.0);
  for (size_t j = 0; j < n; ++j) {
    if (!pinned[j]) {
      ridge[j] = kRidgeFactor * (max_weight > 0.0 ? max_weight : 1.0);
      solution.underdetermined.push_back(problem.variable_keys[j]);
    }
  }

  if (n > 0) {
    const NormalOperator op(problem, std::move(ridge));
    const std::vector<double> b = op.RightHandSide();
    const double b_norm = Norm(b);
    if (b_norm > 0.0) {
      const std::vector<bool> all(n, true);
      IterationResult result =
          ConjugateGradient(op, b, b_norm, options, all, solution.values);
      if (options.nonnegative && result.converged) {
        result = SolveNonnegative(op, b, b_norm, options, result.iterations,
                                  solution.values);
      }
      solution.iterations = result.iterations;
      solution.relative_gradient = result.relative_gradient;
      if (!result.converged) {
        return absl::DeadlineExceededError(absl::StrCat(
            "solver stopped after ", result.iterations,
            " iterations with relative gradient ", result.relative_gradient,
            " (tolerance ", options.tolerance, ")"));
      }
    }
  }

  solution.residuals.reserve(problem.rows.size());
  for (const Measurement& row : problem.rows) {
    double fitted = 0.0;
    for (size_t k = 0; k < row.variables.size(); ++k) {
      fitted += row.coefficients[k] * solution.values[row.variables[k]];
    }
    solution.residuals.push_back({row.label, row.key, row.answer, fitted});
  }
  return solution;
}

absl::StatusOr<Dataset> ApplyEstimates(
    const Dataset& public_data,
    const std::map<Attribute, std::vector<double>>& estimates) {
  std::vector<EstablishmentRecord> records = public_data.records();
  for (EstablishmentRecord& r : records) r.confidential.fill(0.0);
  for (const auto& [attribute, values] : estimates) {
    if (values.size() != records.size()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "estimates for ", AttributeName(attribute), " have ", values.size(),
          " entries for ", records.size(), " records"));
    }
    for (size_t j = 0; j < records.size(); ++j) {
      records[j].value(attribute) = values[j];
    }
  }
  return Dataset::FromRecords(std::move(records), /*allow_negative=*/true);
}

QueryAnswerVector AnswerFromMicrodata(const Dataset& reconstructed,
                                      const GroupBySumQuery& query) {
  return AnswerExact(reconstructed, query);
}

}  // namespace gedp
