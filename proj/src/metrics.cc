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

#include "gedp/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "absl/strings/str_cat.h"

namespace gedp {

absl::StatusOr<double> Quantile7(std::span<const double> values, double p) {
  if (values.empty()) return absl::InvalidArgumentError("no values");
  if (!(p >= 0.0 && p <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("quantile level must lie in [0, 1], got ", p));
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = (sorted.size() - 1) * p;
  const size_t lo = static_cast<size_t>(std::floor(h));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - lo) * (sorted[hi] - sorted[lo]);
}

QueryMetrics CompareAnswers(const QueryAnswerVector& truth,
                            const QueryAnswerVector& estimate) {
  std::map<std::string, double> estimated;
  for (const GroupAnswer& g : estimate) estimated[g.key] = g.value;
  QueryMetrics m;
  std::vector<double> signed_diff;
  for (const GroupAnswer& t : truth) {
    auto it = estimated.find(t.key);
    if (it == estimated.end()) {
      m.missing_in_estimate.push_back(t.key);
      continue;
    }
    const double d = it->second - t.value;
    const double relative = std::abs(d) / (t.value + 1.0);
    signed_diff.push_back(d);
    m.mean_signed += d;
    m.mean_absolute += std::abs(d);
    m.mean_relative += relative;
    m.max_relative = std::max(m.max_relative, relative);
    m.scatter.push_back({t.key, t.value, it->second});
    estimated.erase(it);
  }
  for (const auto& [key, value] : estimated) m.missing_in_truth.push_back(key);
  m.groups = static_cast<int>(signed_diff.size());
  if (m.groups > 0) {
    m.mean_signed /= m.groups;
    m.mean_absolute /= m.groups;
    m.mean_relative /= m.groups;
    m.q1 = *Quantile7(signed_diff, 0.25);
    m.median = *Quantile7(signed_diff, 0.5);
    m.q3 = *Quantile7(signed_diff, 0.75);
  }
  return m;
}

}  // namespace gedp
