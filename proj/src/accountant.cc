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

#include "gedp/accountant.h"

#include <cmath>

#include "absl/strings/str_cat.h"
#include "json.hpp"

namespace gedp {
namespace {

// Slack for comparing a recomputed total against the declared budget.
constexpr double kBudgetSlack = 1e-12;

}  // namespace

absl::StatusOr<double> Compose(std::span<const double> mus) {
  double sum = 0.0;
  for (size_t i = 0; i < mus.size(); ++i) {
    if (!(mus[i] >= 0.0) || !std::isfinite(mus[i])) {
      return absl::InvalidArgumentError(absl::StrCat(
          "privacy parameter ", i, " must be finite and >= 0, got ", mus[i]));
    }
    sum += mus[i] * mus[i];
  }
  return std::sqrt(sum);
}

absl::StatusOr<GroupPrivacyResult> GroupPrivacy(double mu, int m) {
  if (m < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("group size must be >= 1, got ", m));
  }
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    return absl::InvalidArgumentError(
        absl::StrCat("mu must be finite and >= 0, got ", mu));
  }
  return GroupPrivacyResult{m * mu, static_cast<double>(m)};
}

absl::StatusOr<double> FirmChainPrivacy(double mu, int establishments) {
  if (establishments < 1) {
    return absl::InvalidArgumentError(absl::StrCat(
        "firm must have >= 1 establishment, got ", establishments));
  }
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    return absl::InvalidArgumentError(
        absl::StrCat("mu must be finite and >= 0, got ", mu));
  }
  return (establishments - 1) * mu;
}

absl::StatusOr<BudgetLedger> BudgetLedger::Create(double mu_total) {
  if (!(mu_total > 0.0) || !std::isfinite(mu_total)) {
    return absl::InvalidArgumentError(
        absl::StrCat("total budget must be finite and > 0, got ", mu_total));
  }
  return BudgetLedger(mu_total);
}

absl::Status BudgetLedger::Register(LedgerEntry entry) {
  if (!(entry.mu >= 0.0) || !std::isfinite(entry.mu)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "entry '", entry.label, "': mu must be finite and >= 0, got ", entry.mu));
  }
  const double next = sum_squares_ + entry.mu * entry.mu;
  if (std::sqrt(next) > mu_total_ * (1.0 + kBudgetSlack)) {
    return absl::ResourceExhaustedError(absl::StrCat(
        "entry '", entry.label, "' with mu=", entry.mu,
        " would raise the composed budget to ", std::sqrt(next),
        " above the total ", mu_total_));
  }
  sum_squares_ = next;
  entries_.push_back(std::move(entry));
  return absl::OkStatus();
}

double BudgetLedger::Spent() const { return std::sqrt(sum_squares_); }

double BudgetLedger::Remaining() const {
  return std::sqrt(std::max(0.0, mu_total_ * mu_total_ - sum_squares_));
}

std::string BudgetLedger::ToJson() const {
  nlohmann::ordered_json doc;
  doc["mu_total"] = mu_total_;
  doc["mu_composed"] = Spent();
  doc["entries"] = nlohmann::ordered_json::array();
  for (const LedgerEntry& e : entries_) {
    nlohmann::ordered_json item;
    item["label"] = e.label;
    item["mu"] = e.mu;
    item["neighbor_function"] = e.neighbor_function;
    nlohmann::ordered_json distance = nlohmann::ordered_json::object();
    for (const auto& [attribute, delta] : e.distance) {
      distance[std::string(AttributeName(attribute))] = delta;
    }
    item["distance"] = distance;
    doc["entries"].push_back(item);
  }
  return doc.dump(2);
}

absl::StatusOr<HeterogeneousReport> ReportHeterogeneous(const Release& a,
                                                        const Release& b) {
  auto combined = ComposeIntersect(a.f, a.delta, b.f, b.delta);
  if (!combined.ok()) return combined.status();
  const double mus[] = {a.mu, b.mu};
  auto mu = Compose(mus);
  if (!mu.ok()) return mu.status();
  return HeterogeneousReport{*std::move(combined), *mu};
}

}  // namespace gedp
