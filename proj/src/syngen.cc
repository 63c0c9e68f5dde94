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

#include "gedp/syngen.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"

namespace gedp {
namespace {

absl::StatusOr<double> ParseNonnegative(absl::string_view text, int row,
                                        absl::string_view column) {
  double value = 0.0;
  auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty() ||
      !std::isfinite(value) || value < 0.0) {
    return absl::InvalidArgumentError(
        absl::StrCat("row ", row, ": column ", column,
                     " must be a number >= 0, got '", text, "'"));
  }
  return value;
}

}  // namespace

absl::StatusOr<std::vector<CellTotals>> ParseCellsCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    return absl::InvalidArgumentError("row 1: missing header");
  }
  const std::vector<std::string> header = SplitCsvLine(line);
  auto find = [&header](absl::string_view name) {
    for (size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  };
  const int county = find("county");
  const int naics = find("naics6");
  const int estnum = find("estnum");
  const int m1 = find("m1emp");
  const int m3 = find("m3emp");
  const int wage = find("wage");
  const int state = find("state");
  for (auto [name, col] : {std::pair<absl::string_view, int>{"county", county},
                           {"naics6", naics},
                           {"estnum", estnum},
                           {"m1emp", m1},
                           {"m3emp", m3},
                           {"wage", wage}}) {
    if (col < 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("row 1: missing column '", name, "'"));
    }
  }
  std::vector<CellTotals> cells;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> f = SplitCsvLine(line);
    if (f.size() < header.size()) {
      return absl::InvalidArgumentError(
          absl::StrCat("row ", row, ": expected ", header.size(), " fields"));
    }
    CellTotals cell;
    if (state >= 0) cell.state = f[state];
    cell.county = f[county];
    cell.naics6 = f[naics];
    auto n = ParseNonnegative(f[estnum], row, "estnum");
    if (!n.ok()) return n.status();
    if (*n != std::floor(*n)) {
      return absl::InvalidArgumentError(
          absl::StrCat("row ", row, ": estnum must be an integer"));
    }
    cell.estnum = static_cast<int>(*n);
    auto v1 = ParseNonnegative(f[m1], row, "m1emp");
    if (!v1.ok()) return v1.status();
    auto v3 = ParseNonnegative(f[m3], row, "m3emp");
    if (!v3.ok()) return v3.status();
    auto w = ParseNonnegative(f[wage], row, "wage");
    if (!w.ok()) return w.status();
    cell.m1emp = *v1;
    cell.m3emp = *v3;
    cell.wage = *w;
    cells.push_back(std::move(cell));
  }
  return cells;
}

absl::StatusOr<std::vector<CellTotals>> LoadCellsCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  return ParseCellsCsv(in);
}

absl::StatusOr<std::vector<double>> DirichletDivide(
    RngStream& rng, std::span<const double> concentration, double total) {
  if (concentration.empty()) {
    return absl::InvalidArgumentError("divider needs at least one share");
  }
  if (!(total >= 0.0) || !std::isfinite(total)) {
    return absl::InvalidArgumentError(
        absl::StrCat("total must be finite and >= 0, got ", total));
  }
  bool all_zero = true;
  for (double b : concentration) {
    if (!(b >= 0.0) || !std::isfinite(b)) {
      return absl::InvalidArgumentError(
          absl::StrCat("concentration entries must be >= 0, got ", b));
    }
    all_zero = all_zero && b == 0.0;
  }
  std::vector<double> b(concentration.begin(), concentration.end());
  if (all_zero) std::fill(b.begin(), b.end(), 1.0);
  // Zero entries among positive ones get no share.
  std::vector<double> positive;
  for (double v : b) {
    if (v > 0.0) positive.push_back(v);
  }
  auto p = SampleDirichlet(rng, positive);
  if (!p.ok()) return p.status();
  std::vector<double> out(b.size(), 0.0);
  size_t k = 0;
  for (size_t i = 0; i < b.size(); ++i) {
    if (b[i] > 0.0) out[i] = (*p)[k++] * total;
  }
  return out;
}

absl::StatusOr<double> Month2(RngStream& rng, double eta, double m1,
                              double m3) {
  if (!(eta > 0.0) || !(m1 >= 0.0) || !(m3 >= 0.0)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "month2 needs eta > 0 and nonnegative counts, got ", eta, ", ", m1,
        ", ", m3));
  }
  if (m1 == 0.0 && m3 == 0.0) return 0.0;
  const double variance = 2.0 * eta * std::abs(m3 - m1) / (m3 + m1);
  double m2 = m1 + 0.5 * (m3 - m1);
  if (variance > 0.0) m2 += std::sqrt(variance) * internal::StandardNormal(rng);
  if (m2 <= 0.0) return (m1 == 0.0 || m3 == 0.0) ? 0.0 : 1.0;
  return m2;
}

absl::StatusOr<SyngenResult> GenerateEstablishments(
    std::span<const CellTotals> cells, const SyngenOptions& options) {
  if (!(options.alpha_prior > 0.0) || !(options.theta_prior > 0.0) ||
      !(options.eta > 0.0)) {
    return absl::InvalidArgumentError(
        "alpha_prior, theta_prior and eta must be > 0");
  }
  SyngenResult result;
  std::vector<EstablishmentRecord> records;
  for (size_t c = 0; c < cells.size(); ++c) {
    const CellTotals& cell = cells[c];
    if (cell.estnum < 1) {
      result.warnings.push_back(absl::StrCat(
          "skipped cell county=", cell.county, " naics6=", cell.naics6,
          " with estnum=", cell.estnum));
      continue;
    }
    RngStream rng(options.seed, static_cast<uint64_t>(c));
    std::vector<double> concentration(cell.estnum);
    for (double& a : concentration) {
      auto g = SampleGamma(rng, options.alpha_prior, options.theta_prior);
      if (!g.ok()) return g.status();
      a = *g;
    }
    auto m1 = DirichletDivide(rng, concentration, cell.m1emp);
    if (!m1.ok()) return m1.status();
    auto m3 = DirichletDivide(rng, concentration, cell.m3emp);
    if (!m3.ok()) return m3.status();
    auto wage = DirichletDivide(rng, concentration, cell.wage);
    if (!wage.ok()) return wage.status();
    for (int j = 0; j < cell.estnum; ++j) {
      EstablishmentRecord r;
      r.year = "2016";
      r.qtr = "1";
      r.state = cell.state;
      r.county = cell.county;
      r.naics = cell.naics6;
      r.ownership = "5";
      r.value(Attribute::kM1Emp) = (*m1)[j];
      r.value(Attribute::kM3Emp) = (*m3)[j];
      r.value(Attribute::kWage) = (*wage)[j];
      auto m2 = Month2(rng, options.eta, (*m1)[j], (*m3)[j]);
      if (!m2.ok()) return m2.status();
      r.value(Attribute::kM2Emp) = *m2;
      r.primary_key = absl::StrFormat("E%07d", records.size() + 1);
      records.push_back(std::move(r));
    }
  }
  auto data = Dataset::FromRecords(std::move(records));
  if (!data.ok()) return data.status();
  result.data = *std::move(data);
  return result;
}

}  // namespace gedp
