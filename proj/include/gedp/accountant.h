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

// Privacy-loss accounting for Gaussian-style guarantees.

#ifndef GEDP_ACCOUNTANT_H_
#define GEDP_ACCOUNTANT_H_

#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "gedp/neighbor.h"

namespace gedp {

// sqrt(sum of squares). Every entry must be finite and >= 0.
absl::StatusOr<double> Compose(std::span<const double> mus);

struct GroupPrivacyResult {
  double mu = 0.0;
  double distance_scale = 1.0;  // multiply each delta_i by this
};

// Changing up to m records at distance delta each: m * mu at distance m * delta.
absl::StatusOr<GroupPrivacyResult> GroupPrivacy(double mu, int m);

// A firm of `establishments` records linked by a chain of pairwise
// neighbors: (establishments - 1) * mu.
absl::StatusOr<double> FirmChainPrivacy(double mu, int establishments);

struct LedgerEntry {
  std::string label;
  double mu = 0.0;
  std::string neighbor_function;
  DistanceParams distance;
};

// Sequential registration of releases against a fixed total. A registration
// that would push the composed total above the budget is rejected and leaves
// the ledger unchanged.
class BudgetLedger {
 public:
  static absl::StatusOr<BudgetLedger> Create(double mu_total);

  absl::Status Register(LedgerEntry entry);

  double mu_total() const { return mu_total_; }
  double Spent() const;
  double Remaining() const;
  const std::vector<LedgerEntry>& entries() const { return entries_; }

  std::string ToJson() const;

 private:
  explicit BudgetLedger(double mu_total) : mu_total_(mu_total) {}
  double mu_total_;
  double sum_squares_ = 0.0;
  std::vector<LedgerEntry> entries_;
};

struct Release {
  double mu = 0.0;
  NeighborFunction f;
  double delta = 0.0;
};

struct HeterogeneousReport {
  CombinedNeighborFunction combined;
  double mu_combined = 0.0;
};

// Joint guarantee for two releases made under different neighbor functions.
absl::StatusOr<HeterogeneousReport> ReportHeterogeneous(const Release& a,
                                                        const Release& b);

}  // namespace gedp

#endif  // GEDP_ACCOUNTANT_H_
