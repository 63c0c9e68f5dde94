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

#include "gedp/neighbor.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <variant>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"

namespace gedp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct SqrtData {
  double a;
};
struct LogData {
  double a;
};
struct LinearData {
  double d;
};
struct PiecewiseData {
  std::vector<NeighborFunction::Piece> pieces;
};
struct TabulatedData {
  std::vector<double> grid;
  std::vector<double> derivative;
  std::vector<double> cumulative;  // f at each grid point
};

// Generic inverse for functions without a closed form. Assumes f increasing.
template <typename F>
double InverseByBisection(const F& f, double y) {
  if (!(y > f(0.0))) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (f(hi) < y) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) return kInf;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

}  // namespace

struct NeighborFunction::Impl {
  std::variant<SqrtData, LogData, LinearData, PiecewiseData, TabulatedData>
      data;
};

namespace {

using Impl = NeighborFunction::Impl;

double EvaluatePiecewise(const PiecewiseData& p, double x) {
  auto it = std::upper_bound(
      p.pieces.begin(), p.pieces.end(), x,
      [](double v, const NeighborFunction::Piece& pc) { return v < pc.lo; });
  const NeighborFunction::Piece& pc =
      it == p.pieces.begin() ? p.pieces.front() : *std::prev(it);
  return pc.offset + pc.scale * pc.base.Evaluate(x);
}

const NeighborFunction::Piece& PieceAt(const PiecewiseData& p, double x) {
  auto it = std::upper_bound(
      p.pieces.begin(), p.pieces.end(), x,
      [](double v, const NeighborFunction::Piece& pc) { return v < pc.lo; });
  return it == p.pieces.begin() ? p.pieces.front() : *std::prev(it);
}

double EvaluateTabulated(const TabulatedData& t, double x) {
  const std::vector<double>& g = t.grid;
  if (x >= g.back()) {
    return t.cumulative.back() + t.derivative.back() * (x - g.back());
  }
  const size_t i = static_cast<size_t>(
      std::upper_bound(g.begin(), g.end(), x) - g.begin() - 1);
  const double h = g[i + 1] - g[i];
  const double u = x - g[i];
  const double slope = (t.derivative[i + 1] - t.derivative[i]) / h;
  return t.cumulative[i] + t.derivative[i] * u + 0.5 * slope * u * u;
}

double DerivativeTabulated(const TabulatedData& t, double x) {
  const std::vector<double>& g = t.grid;
  if (x >= g.back()) return t.derivative.back();
  const size_t i = static_cast<size_t>(
      std::upper_bound(g.begin(), g.end(), x) - g.begin() - 1);
  const double w = (x - g[i]) / (g[i + 1] - g[i]);
  return (1.0 - w) * t.derivative[i] + w * t.derivative[i + 1];
}

}  // namespace

absl::StatusOr<NeighborFunction> NeighborFunction::SqrtShift(double a) {
  if (!(a >= 0.0) || !std::isfinite(a)) {
    return absl::InvalidArgumentError(
        absl::StrCat("sqrt shift must be finite and >= 0, got ", a));
  }
  return NeighborFunction(std::make_shared<const Impl>(Impl{SqrtData{a}}));
}

absl::StatusOr<NeighborFunction> NeighborFunction::LogShift(double a) {
  if (!(a >= 0.0) || !std::isfinite(a)) {
    return absl::InvalidArgumentError(
        absl::StrCat("log shift must be finite and >= 0, got ", a));
  }
  return NeighborFunction(std::make_shared<const Impl>(Impl{LogData{a}}));
}

absl::StatusOr<NeighborFunction> NeighborFunction::Linear(double d) {
  if (!(d > 0.0) || !std::isfinite(d)) {
    return absl::InvalidArgumentError(
        absl::StrCat("linear distance d must be finite and > 0, got ", d));
  }
  return NeighborFunction(std::make_shared<const Impl>(Impl{LinearData{d}}));
}

absl::StatusOr<NeighborFunction> NeighborFunction::Piecewise(
    std::vector<Piece> pieces) {
  if (pieces.empty()) return absl::InvalidArgumentError("no pieces");
  if (pieces.front().lo != 0.0) {
    return absl::InvalidArgumentError("first piece must start at 0");
  }
  if (pieces.back().hi != kInf) {
    return absl::InvalidArgumentError("last piece must extend to infinity");
  }
  for (size_t i = 0; i < pieces.size(); ++i) {
    const Piece& p = pieces[i];
    if (!(p.hi > p.lo)) {
      return absl::InvalidArgumentError(
          absl::StrCat("piece ", i, " has empty range [", p.lo, ", ", p.hi, ")"));
    }
    if (i + 1 < pieces.size() && pieces[i + 1].lo != p.hi) {
      return absl::InvalidArgumentError(
          absl::StrCat("pieces ", i, " and ", i + 1, " are not contiguous"));
    }
    if (!std::isfinite(p.scale) || !std::isfinite(p.offset)) {
      return absl::InvalidArgumentError(
          absl::StrCat("piece ", i, " has a non-finite coefficient"));
    }
  }
  return NeighborFunction(
      std::make_shared<const Impl>(Impl{PiecewiseData{std::move(pieces)}}));
}

absl::StatusOr<NeighborFunction> NeighborFunction::Tabulated(
    std::vector<double> grid, std::vector<double> derivative,
    double value_at_zero) {
  if (grid.size() < 2 || grid.size() != derivative.size()) {
    return absl::InvalidArgumentError(
        "tabulated function needs >= 2 grid points and one derivative each");
  }
  if (grid.front() != 0.0) {
    return absl::InvalidArgumentError("tabulated grid must start at 0");
  }
  for (size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i]) || !std::isfinite(derivative[i])) {
      return absl::InvalidArgumentError(
          absl::StrCat("non-finite tabulated entry at index ", i));
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      return absl::InvalidArgumentError(
          absl::StrCat("tabulated grid not strictly increasing at index ", i));
    }
  }
  TabulatedData t{std::move(grid), std::move(derivative), {}};
  t.cumulative.resize(t.grid.size());
  t.cumulative[0] = value_at_zero;
  for (size_t i = 1; i < t.grid.size(); ++i) {
    t.cumulative[i] = t.cumulative[i - 1] + 0.5 *
                                                (t.derivative[i - 1] + t.derivative[i]) *
                                                (t.grid[i] - t.grid[i - 1]);
  }
  return NeighborFunction(std::make_shared<const Impl>(Impl{std::move(t)}));
}

NeighborFunction::Kind NeighborFunction::kind() const {
  switch (impl_->data.index()) {
    case 0:
      return Kind::kSqrtShift;
    case 1:
      return Kind::kLogShift;
    case 2:
      return Kind::kLinear;
    case 3:
      return Kind::kPiecewise;
    default:
      return Kind::kTabulated;
  }
}

double NeighborFunction::parameter() const {
  if (auto* s = std::get_if<SqrtData>(&impl_->data)) return s->a;
  if (auto* l = std::get_if<LogData>(&impl_->data)) return l->a;
  if (auto* d = std::get_if<LinearData>(&impl_->data)) return d->d;
  return 0.0;
}

double NeighborFunction::Evaluate(double x) const {
  if (x < 0.0) return std::numeric_limits<double>::quiet_NaN();
  switch (impl_->data.index()) {
    case 0:
      return std::sqrt(x + std::get<SqrtData>(impl_->data).a);
    case 1: {
      const double a = std::get<LogData>(impl_->data).a;
      return a == 0.0 ? std::log(x) : std::log1p(x / a) + std::log(a);
    }
    case 2:
      return x / std::get<LinearData>(impl_->data).d;
    case 3:
      return EvaluatePiecewise(std::get<PiecewiseData>(impl_->data), x);
    default:
      return EvaluateTabulated(std::get<TabulatedData>(impl_->data), x);
  }
}

double NeighborFunction::Derivative(double x) const {
  switch (impl_->data.index()) {
    case 0:
      return 0.5 / std::sqrt(x + std::get<SqrtData>(impl_->data).a);
    case 1:
      return 1.0 / (x + std::get<LogData>(impl_->data).a);
    case 2:
      return 1.0 / std::get<LinearData>(impl_->data).d;
    case 3: {
      const Piece& pc = PieceAt(std::get<PiecewiseData>(impl_->data), x);
      return pc.scale * pc.base.Derivative(x);
    }
    default:
      return DerivativeTabulated(std::get<TabulatedData>(impl_->data), x);
  }
}

double NeighborFunction::Inverse(double y) const {
  const double f0 = Evaluate(0.0);
  if (std::isnan(y)) return y;
  if (y <= f0) return 0.0;
  switch (impl_->data.index()) {
    case 0: {
      const double a = std::get<SqrtData>(impl_->data).a;
      return std::max(0.0, y * y - a);
    }
    case 1: {
      const double a = std::get<LogData>(impl_->data).a;
      if (a == 0.0) return std::exp(y);
      return std::max(0.0, a * std::expm1(y - std::log(a)));
    }
    case 2:
      return y * std::get<LinearData>(impl_->data).d;
    case 3: {
      const auto& pieces = std::get<PiecewiseData>(impl_->data).pieces;
      for (const Piece& pc : pieces) {
        if (!(pc.scale > 0.0)) {
          return InverseByBisection(
              [this](double x) { return Evaluate(x); }, y);
        }
      }
      for (const Piece& pc : pieces) {
        const double top = pc.hi == kInf
                               ? kInf
                               : pc.offset + pc.scale * pc.base.Evaluate(pc.hi);
        if (y < top || pc.hi == kInf) {
          const double x = pc.base.Inverse((y - pc.offset) / pc.scale);
          return std::clamp(x, pc.lo, pc.hi);
        }
      }
      return kInf;
    }
    default:
      return InverseByBisection([this](double x) { return Evaluate(x); }, y);
  }
}

std::vector<double> NeighborFunction::Breakpoints() const {
  std::vector<double> out;
  if (auto* p = std::get_if<PiecewiseData>(&impl_->data)) {
    for (size_t i = 0; i < p->pieces.size(); ++i) {
      if (i > 0) out.push_back(p->pieces[i].lo);
      for (double b : p->pieces[i].base.Breakpoints()) {
        if (b > p->pieces[i].lo && b < p->pieces[i].hi) out.push_back(b);
      }
    }
  } else if (auto* t = std::get_if<TabulatedData>(&impl_->data)) {
    out.assign(t->grid.begin() + 1, t->grid.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string NeighborFunction::Describe() const {
  switch (impl_->data.index()) {
    case 0:
      return absl::StrCat("sqrt_shift(", std::get<SqrtData>(impl_->data).a, ")");
    case 1:
      return absl::StrCat("log_shift(", std::get<LogData>(impl_->data).a, ")");
    case 2:
      return absl::StrCat("linear(d=", std::get<LinearData>(impl_->data).d, ")");
    case 3: {
      std::vector<std::string> parts;
      for (const Piece& pc : std::get<PiecewiseData>(impl_->data).pieces) {
        parts.push_back(absl::StrFormat("[%.6g,%.6g): %.6g + %.6g*%s", pc.lo,
                                        pc.hi, pc.offset, pc.scale,
                                        pc.base.Describe()));
      }
      return absl::StrCat("piecewise{", absl::StrJoin(parts, "; "), "}");
    }
    default:
      return absl::StrCat(
          "tabulated(n=", std::get<TabulatedData>(impl_->data).grid.size(), ")");
  }
}

// ---------------------------------------------------------------------------
// Validation.

namespace {

// Error bound on a difference quotient from rounding in the two values.
double RoundingSlack(double y1, double y0, double dx) {
  return 8.0 * std::numeric_limits<double>::epsilon() *
         (std::abs(y1) + std::abs(y0)) / dx;
}

}  // namespace

absl::StatusOr<ValidationReport> Validate(const NeighborFunction& f,
                                          const ValidationGrid& grid) {
  if (!(grid.x_min > 0.0) || !(grid.x_max > grid.x_min) || grid.points < 3) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "bad validation grid: x_min=%g x_max=%g points=%d", grid.x_min,
        grid.x_max, grid.points));
  }
  const std::vector<double> breakpoints = f.Breakpoints();
  std::vector<double> xs;
  xs.reserve(grid.points + 3 * breakpoints.size());
  const double log_lo = std::log(grid.x_min);
  const double log_hi = std::log(grid.x_max);
  for (int i = 0; i < grid.points; ++i) {
    xs.push_back(std::exp(log_lo + (log_hi - log_lo) * i / (grid.points - 1)));
  }
  for (double b : breakpoints) {
    if (b <= 0.0) continue;
    xs.push_back(b);
    xs.push_back(b * (1.0 - 1e-6));
    xs.push_back(b * (1.0 + 1e-6));
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  std::vector<double> ys(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) {
    ys[i] = f.Evaluate(xs[i]);
    if (!std::isfinite(ys[i])) {
      return absl::InvalidArgumentError(
          absl::StrCat("malformed neighbor function ", f.Describe(),
                       ": value at x=", xs[i], " is ", ys[i]));
    }
  }

  ValidationReport report;
  auto fail = [&report](int condition, std::string message,
                        std::vector<double> witness) {
    report.pass = false;
    report.violated_condition = condition;
    report.message = std::move(message);
    report.witness = std::move(witness);
    return report;
  };

  // (1) strictly increasing, including the step from 0 when f(0) is finite.
  const double f0 = f.Evaluate(0.0);
  if (std::isfinite(f0) && !(ys[0] > f0)) {
    return fail(1, "not strictly increasing near 0", {0.0, xs[0]});
  }
  for (size_t i = 1; i < xs.size(); ++i) {
    if (!(ys[i] > ys[i - 1])) {
      return fail(1,
                  absl::StrFormat("f(%.17g) >= f(%.17g)", xs[i - 1], xs[i]),
                  {xs[i - 1], xs[i]});
    }
  }

  // (2) continuity at breakpoints.
  for (double b : breakpoints) {
    if (b <= 0.0) continue;
    const double h = 1e-9 * b;
    const double left = f.Evaluate(b - h);
    const double right = f.Evaluate(b + h);
    const double mid = f.Evaluate(b);
    const double slope =
        std::max(std::abs(f.Derivative(b - h)), std::abs(f.Derivative(b + h)));
    const double tol = 1e-9 * (1.0 + std::abs(mid)) + 4.0 * h * slope;
    if (std::abs(mid - left) > tol || std::abs(right - mid) > tol) {
      return fail(2, absl::StrFormat("jump at breakpoint %.17g", b),
                  {b - h, b, b + h});
    }
  }

  // (3) concavity: secant slopes nonincreasing.
  double prev_slope = std::isfinite(f0) ? (ys[0] - f0) / xs[0] : kInf;
  for (size_t i = 1; i < xs.size(); ++i) {
    const double dx = xs[i] - xs[i - 1];
    const double slope = (ys[i] - ys[i - 1]) / dx;
    if (slope > prev_slope + 1e-9 * (1.0 + std::abs(prev_slope)) +
                    RoundingSlack(ys[i], ys[i - 1], dx)) {
      const double left = i >= 2 ? xs[i - 2] : 0.0;
      return fail(3,
                  absl::StrFormat("secant slope rises from %.17g to %.17g",
                                  prev_slope, slope),
                  {left, xs[i - 1], xs[i]});
    }
    prev_slope = slope;
  }

  // (4) f(exp(t)) convex: secant slopes in log x nondecreasing.
  prev_slope = -kInf;
  for (size_t i = 1; i < xs.size(); ++i) {
    const double dt = std::log(xs[i]) - std::log(xs[i - 1]);
    const double slope = (ys[i] - ys[i - 1]) / dt;
    if (slope < prev_slope - 1e-9 * (1.0 + std::abs(prev_slope)) -
                    RoundingSlack(ys[i], ys[i - 1], dt)) {
      return fail(4,
                  absl::StrFormat(
                      "log-scale secant slope falls from %.17g to %.17g",
                      prev_slope, slope),
                  {xs[i - 2], xs[i - 1], xs[i]});
    }
    prev_slope = slope;
  }
  return report;
}

absl::StatusOr<ValidatedNeighborFunction> RequireValid(
    const NeighborFunction& f, const ValidationGrid& grid) {
  auto report = Validate(f, grid);
  if (!report.ok()) return report.status();
  if (!report->pass) {
    return absl::FailedPreconditionError(
        absl::StrCat("neighbor function ", f.Describe(),
                     " violates condition (", report->violated_condition,
                     "): ", report->message));
  }
  return ValidatedNeighborFunction(f);
}

// ---------------------------------------------------------------------------
// Intervals and closeness.

UncertaintyInterval ComputeUncertaintyInterval(const NeighborFunction& f,
                                               double delta, double x) {
  if (delta == 0.0) return {x, x};
  const double fx = f.Evaluate(x);
  UncertaintyInterval interval;
  interval.lower = f.Inverse(std::max(f.Evaluate(0.0), fx - delta));
  interval.upper = f.Inverse(fx + delta);
  // Round trip can lose the last ulp; the interval always contains x.
  interval.lower = std::min(interval.lower, x);
  interval.upper = std::max(interval.upper, x);
  return interval;
}

absl::Status CheckDistanceParams(const DistanceParams& delta) {
  for (Attribute a : kAllAttributes) {
    auto it = delta.find(a);
    if (it == delta.end()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "distance parameters missing attribute ", AttributeName(a)));
    }
    if (!(it->second >= 0.0) || !std::isfinite(it->second)) {
      return absl::InvalidArgumentError(
          absl::StrCat("distance for ", AttributeName(a),
                       " must be finite and >= 0, got ", it->second));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<bool> IsClose(const EstablishmentRecord& r1,
                             const EstablishmentRecord& r2,
                             const NeighborFunction& f,
                             const DistanceParams& delta) {
  if (absl::Status s = CheckDistanceParams(delta); !s.ok()) return s;
  if (r1.year != r2.year || r1.qtr != r2.qtr || r1.state != r2.state ||
      r1.county != r2.county || r1.naics != r2.naics ||
      r1.ownership != r2.ownership) {
    return false;
  }
  for (Attribute a : kAllAttributes) {
    const double v1 = r1.value(a);
    const double v2 = r2.value(a);
    if (v1 == v2) continue;
    if (std::abs(f.Evaluate(v1) - f.Evaluate(v2)) > delta.at(a)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Combination.

namespace {

enum class Extremum { kMin, kMax };

absl::StatusOr<CombinedNeighborFunction> Combine(const NeighborFunction& fa,
                                                 double delta_a,
                                                 const NeighborFunction& fb,
                                                 double delta_b,
                                                 Extremum extremum) {
  if (!(delta_a > 0.0) || !(delta_b > 0.0) || !std::isfinite(delta_a) ||
      !std::isfinite(delta_b)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "combination requires positive distances, got ", delta_a, ", ",
        delta_b));
  }
  for (const NeighborFunction* f : {&fa, &fb}) {
    auto report = Validate(*f);
    if (!report.ok()) return report.status();
    if (!report->pass) {
      return absl::FailedPreconditionError(
          absl::StrCat("combination input ", f->Describe(),
                       " is not a neighbor function: ", report->message));
    }
  }

  // Which input supplies the derivative at x: 0 for A, 1 for B, -1 on a tie.
  auto choose = [&](double x) {
    const double ga = fa.Derivative(x) / delta_a;
    const double gb = fb.Derivative(x) / delta_b;
    if (std::abs(ga - gb) <= 1e-12 * std::max(std::abs(ga), std::abs(gb))) {
      return -1;
    }
    const bool a_smaller = ga < gb;
    return (extremum == Extremum::kMin) == a_smaller ? 0 : 1;
  };

  std::vector<double> xs;
  constexpr int kScanPoints = 4000;
  const double lo = std::log(1e-12);
  const double hi = std::log(1e15);
  for (int i = 0; i < kScanPoints; ++i) {
    xs.push_back(std::exp(lo + (hi - lo) * i / (kScanPoints - 1)));
  }
  for (double b : fa.Breakpoints()) xs.push_back(b);
  for (double b : fb.Breakpoints()) xs.push_back(b);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  // Switch points where the selected input changes.
  std::vector<double> switches;
  std::vector<int> selection;
  int current = -1;
  double last_x = 0.0;
  for (double x : xs) {
    const int c = choose(x);
    if (c < 0) continue;
    if (current < 0) {
      current = c;
      selection.push_back(c);
    } else if (c != current) {
      double a = last_x;
      double b = x;
      for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
        const double mid = 0.5 * (a + b);
        const int cm = choose(mid);
        if (cm == current || cm < 0) {
          a = mid;
        } else {
          b = mid;
        }
      }
      switches.push_back(b);
      selection.push_back(c);
      current = c;
    }
    last_x = x;
  }
  if (selection.empty()) selection.push_back(0);  // identical inputs

  std::vector<NeighborFunction::Piece> pieces;
  double value = 0.0;  // f* at the start of the current piece
  for (size_t k = 0; k < selection.size(); ++k) {
    const NeighborFunction& src = selection[k] == 0 ? fa : fb;
    const double scale = 1.0 / (selection[k] == 0 ? delta_a : delta_b);
    const double start = k == 0 ? 0.0 : switches[k - 1];
    const double end = k < switches.size() ? switches[k] : kInf;
    const double base_start = src.Evaluate(start);
    if (!std::isfinite(base_start)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "combined derivative is not integrable at ", start, ": ",
          src.Describe(), " is unbounded there; use a positive shift"));
    }
    pieces.push_back({start, end, scale, value - scale * base_start, src});
    if (end != kInf) value += scale * (src.Evaluate(end) - base_start);
  }

  auto combined = NeighborFunction::Piecewise(std::move(pieces));
  if (!combined.ok()) return combined.status();
  return CombinedNeighborFunction{*std::move(combined), 1.0};
}

}  // namespace

absl::StatusOr<CombinedNeighborFunction> CombineProtection(
    const NeighborFunction& fa, double delta_a, const NeighborFunction& fb,
    double delta_b) {
  return Combine(fa, delta_a, fb, delta_b, Extremum::kMin);
}

absl::StatusOr<CombinedNeighborFunction> ComposeIntersect(
    const NeighborFunction& fa, double delta_a, const NeighborFunction& fb,
    double delta_b) {
  return Combine(fa, delta_a, fb, delta_b, Extremum::kMax);
}

}  // namespace gedp
