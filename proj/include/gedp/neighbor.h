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

// Neighbor functions: increasing concave transforms f on [0, inf) whose
// composition with exp is convex. Two values x, y of a confidential attribute
// are indistinguishable at distance delta when |f(x) - f(y)| <= delta.

#ifndef GEDP_NEIGHBOR_H_
#define GEDP_NEIGHBOR_H_

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "gedp/dataset.h"

namespace gedp {

class NeighborFunction {
 public:
  enum class Kind { kSqrtShift, kLogShift, kLinear, kPiecewise, kTabulated };

  // One segment of a piecewise function: on [lo, hi) the value is
  // offset + scale * base(x).
  struct Piece;

  // sqrt(x + a), a >= 0.
  static absl::StatusOr<NeighborFunction> SqrtShift(double a);
  // log(x + a), a >= 0. With a = 0 the value at 0 is -inf, which is allowed
  // for intervals but not for combination.
  static absl::StatusOr<NeighborFunction> LogShift(double a);
  // x / d, d > 0.
  static absl::StatusOr<NeighborFunction> Linear(double d);
  // Pieces must be contiguous, start at 0 and end at +inf. No shape
  // constraints are enforced here; run Validate for that.
  static absl::StatusOr<NeighborFunction> Piecewise(std::vector<Piece> pieces);
  // Derivative values on a grid starting at 0, interpolated linearly and
  // integrated exactly; constant slope past the last grid point.
  static absl::StatusOr<NeighborFunction> Tabulated(
      std::vector<double> grid, std::vector<double> derivative,
      double value_at_zero = 0.0);

  Kind kind() const;
  // Shift a for sqrt/log kinds, d for linear, 0 otherwise.
  double parameter() const;

  double Evaluate(double x) const;
  // Smallest x >= 0 with Evaluate(x) >= y; 0 when y <= Evaluate(0).
  double Inverse(double y) const;
  double Derivative(double x) const;
  // Interior points where the closed form changes.
  std::vector<double> Breakpoints() const;
  std::string Describe() const;

  struct Impl;

 private:
  explicit NeighborFunction(std::shared_ptr<const Impl> impl)
      : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

struct NeighborFunction::Piece {
  double lo = 0.0;
  double hi = 0.0;
  double scale = 1.0;
  double offset = 0.0;
  NeighborFunction base;
};

struct ValidationGrid {
  double x_min = 1e-9;
  double x_max = 1e7;
  int points = 2000;
};

struct ValidationReport {
  bool pass = true;
  // 1 strictly increasing, 2 continuous, 3 concave, 4 f(exp(t)) convex.
  int violated_condition = 0;
  std::string message;
  std::vector<double> witness;
};

// Numerical check of the four defining conditions on a log-spaced grid plus
// the declared breakpoints. A pass means no violation was found.
// Returns an error if f is NaN or infinite at a grid point.
absl::StatusOr<ValidationReport> Validate(const NeighborFunction& f,
                                          const ValidationGrid& grid = {});

// A neighbor function that passed Validate. Mechanisms accept only this type.
class ValidatedNeighborFunction {
 public:
  const NeighborFunction& function() const { return f_; }
  double Evaluate(double x) const { return f_.Evaluate(x); }
  double Inverse(double y) const { return f_.Inverse(y); }

 private:
  friend absl::StatusOr<ValidatedNeighborFunction> RequireValid(
      const NeighborFunction& f, const ValidationGrid& grid);
  explicit ValidatedNeighborFunction(NeighborFunction f) : f_(std::move(f)) {}
  NeighborFunction f_;
};

// FailedPrecondition naming the violated condition when validation fails.
absl::StatusOr<ValidatedNeighborFunction> RequireValid(
    const NeighborFunction& f, const ValidationGrid& grid = {});

struct UncertaintyInterval {
  double lower = 0.0;
  double upper = 0.0;
  double width() const { return upper - lower; }
  bool Contains(double x) const { return lower <= x && x <= upper; }
};

// [f^-1(max(f(0), f(x) - delta)), f^-1(f(x) + delta)].
UncertaintyInterval ComputeUncertaintyInterval(const NeighborFunction& f,
                                               double delta, double x);

using DistanceParams = std::map<Attribute, double>;

absl::Status CheckDistanceParams(const DistanceParams& delta);

// Public attributes equal and |f(v1) - f(v2)| <= delta_i for every
// confidential attribute. Errors if delta is missing an attribute or has a
// negative entry.
absl::StatusOr<bool> IsClose(const EstablishmentRecord& r1,
                             const EstablishmentRecord& r2,
                             const NeighborFunction& f,
                             const DistanceParams& delta);

struct CombinedNeighborFunction {
  NeighborFunction f;
  double delta = 1.0;
};

// f* with derivative min(fA'/deltaA, fB'/deltaB) and f*(0) = 0; intervals of
// (f*, 1) contain both input intervals.
absl::StatusOr<CombinedNeighborFunction> CombineProtection(
    const NeighborFunction& fa, double delta_a, const NeighborFunction& fb,
    double delta_b);

// Same with the pointwise maximum; intervals of (f*, 1) lie inside both
// input intervals.
absl::StatusOr<CombinedNeighborFunction> ComposeIntersect(
    const NeighborFunction& fa, double delta_a, const NeighborFunction& fb,
    double delta_b);

}  // namespace gedp

#endif  // GEDP_NEIGHBOR_H_
