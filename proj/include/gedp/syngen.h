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

// Establishment-level synthetic fixtures allocated from county x NAICS-6
// cell totals.

#ifndef GEDP_SYNGEN_H_
#define GEDP_SYNGEN_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "gedp/dataset.h"
#include "gedp/numerics.h"

namespace gedp {

struct CellTotals {
  std::string state = "00";
  std::string county;
  std::string naics6;
  int estnum = 0;
  double m1emp = 0.0;
  double m3emp = 0.0;
  double wage = 0.0;
};

// Columns county,naics6,estnum,m1emp,m3emp,wage and optionally state.
absl::StatusOr<std::vector<CellTotals>> ParseCellsCsv(std::istream& in);
absl::StatusOr<std::vector<CellTotals>> LoadCellsCsv(const std::string& path);

// Splits `total` with proportions p ~ Dirichlet(b). An all-zero b is
// treated as all ones.
absl::StatusOr<std::vector<double>> DirichletDivide(
    RngStream& rng, std::span<const double> concentration, double total);

// Month-2 employment between m1 and m3 with noise variance
// 2 eta |m3 - m1| / (m3 + m1); nonpositive draws become 0 when either end
// is 0 and 1 otherwise.
absl::StatusOr<double> Month2(RngStream& rng, double eta, double m1, double m3);

struct SyngenOptions {
  double alpha_prior = 10.0;
  double theta_prior = 200.0;
  double eta = 0.5;
  uint64_t seed = 1;
};

struct SyngenResult {
  Dataset data;
  std::vector<std::string> warnings;  // skipped cells
};

// One stream per cell (keyed by its position) draws a_j ~ Gamma(alpha,
// theta), divides m1emp, m3emp and wage with the same concentration, then
// draws m2emp per record.
absl::StatusOr<SyngenResult> GenerateEstablishments(
    std::span<const CellTotals> cells, const SyngenOptions& options = {});

}  // namespace gedp

#endif  // GEDP_SYNGEN_H_
