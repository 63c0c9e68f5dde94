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

#include "gedp/mechanisms.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include "absl/strings/str_cat.h"
#include "absl/strings/match.h"
#include "absl/strings/str_format.h"

namespace gedp {
namespace {

constexpr absl::string_view kIdentityPrefix = "id=";

absl::Status CheckPositive(absl::string_view name, double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    return absl::InvalidArgumentError(
        absl::StrCat(name, " must be finite and > 0, got ", value));
  }
  return absl::OkStatus();
}

absl::StatusOr<double> ParseDouble(absl::string_view text) {
  double value = 0.0;
  auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    return absl::InvalidArgumentError(absl::StrCat("not a number: '", text, "'"));
  }
  return value;
}

}  // namespace

const char* VarianceKindName(VarianceKind kind) {
  return kind == VarianceKind::kExact ? "exact" : "estimated";
}

const char* SpaceName(Space space) {
  return space == Space::kRaw ? "raw" : "transformed";
}

void WriteNoisyAnswersCsv(std::span<const NoisyAnswer> answers,
                          std::ostream& out) {
  out << "group_key,value,variance,variance_kind,mechanism,space\n";
  for (const NoisyAnswer& a : answers) {
    out << a.key << ',' << absl::StrFormat("%.17g", a.value) << ','
        << absl::StrFormat("%.17g", a.variance) << ','
        << VarianceKindName(a.variance_kind) << ',' << a.mechanism << ','
        << SpaceName(a.space) << "\n";
  }
}

absl::StatusOr<std::vector<NoisyAnswer>> ParseNoisyAnswersCsv(
    std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    return absl::InvalidArgumentError("row 1: missing header");
  }
  const std::vector<std::string> header = SplitCsvLine(line);
  const std::vector<std::string> expected = {
      "group_key", "value", "variance", "variance_kind", "mechanism", "space"};
  if (header != expected) {
    return absl::InvalidArgumentError(
        "row 1: expected header group_key,value,variance,variance_kind,"
        "mechanism,space");
  }
  std::vector<NoisyAnswer> answers;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> f = SplitCsvLine(line);
    if (f.size() != expected.size()) {
      return absl::InvalidArgumentError(
          absl::StrCat("row ", row, ": expected 6 fields, got ", f.size()));
    }
    NoisyAnswer a;
    a.key = f[0];
    auto value = ParseDouble(f[1]);
    auto variance = ParseDouble(f[2]);
    if (!value.ok() || !variance.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("row ", row, ": non-numeric value or variance"));
    }
    a.value = *value;
    a.variance = *variance;
    if (f[3] == "exact") {
      a.variance_kind = VarianceKind::kExact;
    } else if (f[3] == "estimated") {
      a.variance_kind = VarianceKind::kEstimated;
    } else {
      return absl::InvalidArgumentError(
          absl::StrCat("row ", row, ": bad variance_kind '", f[3], "'"));
    }
    a.mechanism = f[4];
    if (f[5] == "raw") {
      a.space = Space::kRaw;
    } else if (f[5] == "transformed") {
      a.space = Space::kTransformed;
    } else {
      return absl::InvalidArgumentError(
          absl::StrCat("row ", row, ": bad space '", f[5], "'"));
    }
    answers.push_back(std::move(a));
  }
  return answers;
}

absl::StatusOr<std::vector<NoisyAnswer>> EstabGaussian(
    const QueryAnswerVector& exact, double sensitivity, double mu,
    RngStream& rng) {
  if (auto s = CheckPositive("sensitivity", sensitivity); !s.ok()) return s;
  if (auto s = CheckPositive("mu", mu); !s.ok()) return s;
  const double sd = sensitivity / mu;
  std::vector<NoisyAnswer> out;
  out.reserve(exact.size());
  for (const GroupAnswer& g : exact) {
    out.push_back({g.key, g.value + sd * internal::StandardNormal(rng),
                   sd * sd, VarianceKind::kExact, "estab_gaussian",
                   Space::kRaw});
  }
  return out;
}

absl::StatusOr<std::vector<NoisyAnswer>> NeighborMechanism(
    const QueryAnswerVector& exact, const ValidatedNeighborFunction& f,
    double delta, double mu, RngStream& rng) {
  if (auto s = CheckPositive("delta", delta); !s.ok()) return s;
  if (auto s = CheckPositive("mu", mu); !s.ok()) return s;
  const double sd = delta / mu;
  std::vector<NoisyAnswer> out;
  out.reserve(exact.size());
  for (const GroupAnswer& g : exact) {
    const double fx = f.Evaluate(g.value);
    if (!std::isfinite(fx)) {
      return absl::OutOfRangeError(absl::StrCat(
          "group ", g.key, ": f(", g.value, ") is not finite for ",
          f.function().Describe()));
    }
    out.push_back({g.key, fx + sd * internal::StandardNormal(rng), sd * sd,
                   VarianceKind::kExact, "neighbor", Space::kTransformed});
  }
  return out;
}

absl::StatusOr<std::vector<NoisyAnswer>> NeighborMechanism(
    const Dataset& data, const GroupBySumQuery& query,
    const ValidatedNeighborFunction& f, double delta, double mu,
    RngStream& rng) {
  return NeighborMechanism(AnswerExact(data, query), f, delta, mu, rng);
}

Estimate EstimateSqrt(double y, double delta, double mu, double shift) {
  const double s2 = (delta / mu) * (delta / mu);
  const double shifted = y * y - s2;
  const double formula = 2.0 * s2 * (2.0 * shifted + s2);
  const double floor = s2 * s2;
  Estimate e;
  e.value = shifted - shift;
  e.floored = !(formula >= floor);
  e.variance = e.floored ? floor : formula;
  return e;
}

absl::StatusOr<Estimate> EstimateLog(double y, double delta, double mu,
                                     double shift) {
  const double s2 = (delta / mu) * (delta / mu);
  const double shifted = std::exp(y - 0.5 * s2);
  const double variance = shifted * shifted * std::expm1(s2);
  if (!std::isfinite(shifted) || !std::isfinite(variance)) {
    return absl::OutOfRangeError(
        absl::StrCat("log estimator overflows for y=", y));
  }
  Estimate e;
  e.value = shifted - shift;
  e.variance = variance;
  if (!(e.variance > 0.0)) {
    // exp underflow; keep weights finite.
    e.variance = std::numeric_limits<double>::min();
    e.floored = true;
  }
  return e;
}

absl::StatusOr<DetransformResult> Detransform(
    std::span<const NoisyAnswer> answers, const NeighborFunction& f,
    double delta, double mu) {
  if (auto s = CheckPositive("delta", delta); !s.ok()) return s;
  if (auto s = CheckPositive("mu", mu); !s.ok()) return s;
  DetransformResult result;
  result.answers.reserve(answers.size());
  const double a = f.parameter();
  for (const NoisyAnswer& in : answers) {
    if (in.space != Space::kTransformed) {
      return absl::InvalidArgumentError(
          absl::StrCat("answer ", in.key, " is already in raw space"));
    }
    NoisyAnswer out = in;
    out.space = Space::kRaw;
    switch (f.kind()) {
      case NeighborFunction::Kind::kSqrtShift: {
        const Estimate e = EstimateSqrt(in.value, delta, mu, a);
        out.value = e.value;
        out.variance = e.variance;
        out.variance_kind = VarianceKind::kEstimated;
        result.floor_hits += e.floored ? 1 : 0;
        break;
      }
      case NeighborFunction::Kind::kLogShift: {
        auto e = EstimateLog(in.value, delta, mu, a);
        if (!e.ok()) return e.status();
        out.value = e->value;
        out.variance = e->variance;
        out.variance_kind = VarianceKind::kEstimated;
        result.floor_hits += e->floored ? 1 : 0;
        break;
      }
      case NeighborFunction::Kind::kLinear: {
        const double sd = a * delta / mu;
        out.value = a * in.value;
        out.variance = sd * sd;
        out.variance_kind = VarianceKind::kExact;
        break;
      }
      default:
        return absl::UnimplementedError(absl::StrCat(
            "no unbiased estimator for neighbor function ", f.Describe()));
    }
    result.answers.push_back(std::move(out));
  }
  return result;
}

absl::StatusOr<double> PncTau(double gamma, long long count) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("gamma must lie in (0, 1), got ", gamma));
  }
  if (count < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("bound count must be >= 1, got ", count));
  }
  // 1 - (1 - gamma)^(1/count), formed without cancellation.
  const double upper_tail =
      -std::expm1(std::log1p(-gamma) / static_cast<double>(count));
  return NormalUpperQuantile(upper_tail);
}

absl::StatusOr<PncBounds> ComputePncBounds(
    std::span<const IdentityRelease> releases,
    const ValidatedNeighborFunction& f, double gamma) {
  if (releases.empty()) {
    return absl::InvalidArgumentError("no identity releases for PNC bounds");
  }
  size_t n = 0;
  for (const IdentityRelease& r : releases) n = std::max(n, r.answers.size());
  auto tau = PncTau(gamma, static_cast<long long>(releases.size() * n));
  if (!tau.ok()) return tau.status();

  PncBounds bounds;
  bounds.tau = *tau;
  bounds.gamma = gamma;
  for (const IdentityRelease& r : releases) {
    if (auto s = CheckPositive("delta", r.delta); !s.ok()) return s;
    if (auto s = CheckPositive("mu", r.mu); !s.ok()) return s;
    const double margin = r.delta * bounds.tau / r.mu;
    for (const NoisyAnswer& a : r.answers) {
      if (a.space != Space::kTransformed || a.mechanism != "neighbor") {
        return absl::InvalidArgumentError(absl::StrCat(
            "PNC bounds need transformed neighbor releases; ", a.key,
            " is ", SpaceName(a.space), "/", a.mechanism));
      }
      if (!absl::StartsWith(a.key, kIdentityPrefix)) {
        return absl::InvalidArgumentError(
            absl::StrCat("PNC bounds need identity answers, got key ", a.key));
      }
      const std::string pk = a.key.substr(kIdentityPrefix.size());
      bounds.upper[{pk, r.attribute}] = f.Inverse(a.value + margin);
    }
  }
  return bounds;
}

double PncSensitivity(const NeighborFunction& f, double delta, double u) {
  const double lower = f.Inverse(std::max(f.Evaluate(0.0), f.Evaluate(u) - delta));
  return u - lower;
}

absl::StatusOr<std::vector<NoisyAnswer>> PncMechanism(
    const Dataset& data, const GroupBySumQuery& query, const PncBounds& bounds,
    const ValidatedNeighborFunction& f, double delta, double mu,
    RngStream& rng, std::span<const std::string> universe) {
  if (auto s = CheckPositive("delta", delta); !s.ok()) return s;
  if (auto s = CheckPositive("mu", mu); !s.ok()) return s;
  const NeighborFunction& fn = f.function();

  // Bound used when a group has no usable positive sensitivity.
  const double fallback_u =
      fn.Inverse(fn.Evaluate(0.0) + delta * bounds.tau / mu);
  const double fallback_s = PncSensitivity(fn, delta, fallback_u);

  struct Group {
    double u_star = 0.0;
    double truncated = 0.0;
    bool observed = false;
  };
  std::map<std::string, Group> groups;
  for (const EstablishmentRecord& r : data.records()) {
    auto it = bounds.upper.find({r.primary_key, query.target});
    if (it == bounds.upper.end()) {
      return absl::FailedPreconditionError(absl::StrCat(
          "no PNC bound for record ", r.primary_key, " attribute ",
          AttributeName(query.target)));
    }
    Group& g = groups[query.grouper.KeyOf(r)];
    g.observed = true;
    g.u_star = std::max(g.u_star, it->second);
  }
  // Second pass: clip at the group maximum.
  for (const EstablishmentRecord& r : data.records()) {
    Group& g = groups[query.grouper.KeyOf(r)];
    g.truncated += std::min(r.value(query.target), g.u_star);
  }
  for (const std::string& key : universe) groups.try_emplace(key);

  std::vector<NoisyAnswer> out;
  out.reserve(groups.size());
  for (const auto& [key, g] : groups) {
    double s = g.observed ? PncSensitivity(fn, delta, g.u_star) : 0.0;
    if (!(s > 0.0)) s = fallback_s;
    if (!(s > 0.0) || !std::isfinite(s)) {
      return absl::FailedPreconditionError(absl::StrCat(
          "group ", key, ": no positive PNC sensitivity available for ",
          fn.Describe()));
    }
    const double sd = s / mu;
    out.push_back({key, g.truncated + sd * internal::StandardNormal(rng),
                   sd * sd, VarianceKind::kExact, "pnc", Space::kRaw});
  }
  return out;
}

}  // namespace gedp
