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

#include "gedp/dataset.h"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "absl/strings/str_cat.h"
#include "absl/strings/match.h"
#include "absl/strings/str_format.h"

namespace gedp {
namespace {

constexpr std::array<absl::string_view, 11> kRequiredColumns = {
    "year", "qtr",   "state", "cnty", "naics",      "own",
    "m1emp", "m2emp", "m3emp", "wage", "primary_key"};

bool IsSixDigits(absl::string_view code) {
  if (code.size() != 6) return false;
  for (char c : code) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

absl::StatusOr<double> ParseNumber(absl::string_view text) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("not a number: '", text, "'"));
  }
  return value;
}

absl::string_view Trim(absl::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

}  // namespace

const char* AttributeName(Attribute attribute) {
  switch (attribute) {
    case Attribute::kM1Emp:
      return "m1emp";
    case Attribute::kM2Emp:
      return "m2emp";
    case Attribute::kM3Emp:
      return "m3emp";
    case Attribute::kWage:
      return "wage";
  }
  return "unknown";
}

absl::StatusOr<Attribute> ParseAttribute(absl::string_view name) {
  for (Attribute a : kAllAttributes) {
    if (AttributeName(a) == name) return a;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown confidential attribute '", name, "'"));
}

absl::StatusOr<Dataset> Dataset::FromRecords(
    std::vector<EstablishmentRecord> records, bool allow_negative) {
  Dataset data;
  data.index_.reserve(records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    const EstablishmentRecord& r = records[i];
    if (!IsSixDigits(r.naics)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "record ", r.primary_key, ": naics '", r.naics,
          "' is not a six-digit code"));
    }
    for (Attribute a : kAllAttributes) {
      const double v = r.value(a);
      if (!std::isfinite(v) || (!allow_negative && v < 0.0)) {
        return absl::InvalidArgumentError(
            absl::StrCat("record ", r.primary_key, ": ", AttributeName(a),
                         " must be finite and >= 0, got ", v));
      }
    }
    if (!data.index_.emplace(r.primary_key, static_cast<int>(i)).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate primary_key '", r.primary_key, "'"));
    }
  }
  data.records_ = std::move(records);
  return data;
}

int Dataset::IndexOf(absl::string_view primary_key) const {
  auto it = index_.find(std::string(primary_key));
  return it == index_.end() ? -1 : it->second;
}

std::vector<std::string> SplitCsvLine(absl::string_view line) {
  std::vector<std::string> fields;
  line = Trim(line);
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    if (comma == absl::string_view::npos) {
      fields.emplace_back(Trim(line.substr(start)));
      break;
    }
    fields.emplace_back(Trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

namespace {

// Column positions 0..5 are public, 6..9 confidential, 10 the key.
absl::StatusOr<Dataset> ParseCsv(std::istream& in, bool public_only) {
  std::string line;
  if (!std::getline(in, line)) {
    return absl::InvalidArgumentError("row 1: missing header");
  }
  const std::vector<std::string> header = SplitCsvLine(line);
  std::array<int, kRequiredColumns.size()> column{};
  int synthetic_column = -1;
  for (size_t h = 0; h < header.size(); ++h) {
    if (header[h] == "synthetic") synthetic_column = static_cast<int>(h);
  }
  for (size_t c = 0; c < kRequiredColumns.size(); ++c) {
    column[c] = -1;
    for (size_t h = 0; h < header.size(); ++h) {
      if (header[h] == kRequiredColumns[c]) column[c] = static_cast<int>(h);
    }
    const bool needed = !public_only || c < 6 || c == 10;
    if (column[c] < 0 && needed) {
      return absl::InvalidArgumentError(
          absl::StrCat("row 1: missing column '", kRequiredColumns[c], "'"));
    }
  }
  const bool allow_negative = synthetic_column >= 0;

  std::vector<EstablishmentRecord> records;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (Trim(line).empty()) continue;
    const std::vector<std::string> f = SplitCsvLine(line);
    if (f.size() < header.size()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "row ", row, ": expected ", header.size(), " fields, got ", f.size()));
    }
    EstablishmentRecord r;
    r.year = f[column[0]];
    r.qtr = f[column[1]];
    r.state = f[column[2]];
    r.county = f[column[3]];
    r.naics = f[column[4]];
    r.ownership = f[column[5]];
    for (size_t k = 0; k < 4 && !public_only; ++k) {
      auto value = ParseNumber(f[column[6 + k]]);
      if (!value.ok()) {
        return absl::InvalidArgumentError(
            absl::StrCat("row ", row, ": column ", kRequiredColumns[6 + k],
                         ": ", value.status().message()));
      }
      if (!std::isfinite(*value) || (!allow_negative && *value < 0.0)) {
        return absl::InvalidArgumentError(
            absl::StrCat("row ", row, ": column ", kRequiredColumns[6 + k],
                         " must be >= 0, got ", *value));
      }
      r.confidential[k] = *value;
    }
    r.primary_key = f[column[10]];
    if (!IsSixDigits(r.naics)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "row ", row, ": naics '", r.naics, "' is not a six-digit code"));
    }
    records.push_back(std::move(r));
  }

  auto data = Dataset::FromRecords(std::move(records), allow_negative);
  if (!data.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat("dataset rejected: ", data.status().message()));
  }
  return data;
}

absl::StatusOr<Dataset> LoadCsv(const std::string& path, bool public_only) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  auto data = ParseCsv(in, public_only);
  if (!data.ok()) {
    return absl::Status(data.status().code(),
                        absl::StrCat(path, ": ", data.status().message()));
  }
  return data;
}

}  // namespace

absl::StatusOr<Dataset> ParseDatasetCsv(std::istream& in) {
  return ParseCsv(in, /*public_only=*/false);
}

absl::StatusOr<Dataset> ParsePublicCsv(std::istream& in) {
  return ParseCsv(in, /*public_only=*/true);
}

absl::StatusOr<Dataset> LoadPublicCsv(const std::string& path) {
  return LoadCsv(path, /*public_only=*/true);
}

void WritePublicCsv(const Dataset& data, std::ostream& out) {
  out << "year,qtr,state,cnty,naics,own,primary_key\n";
  for (const EstablishmentRecord& r : data.records()) {
    out << r.year << ',' << r.qtr << ',' << r.state << ',' << r.county << ','
        << r.naics << ',' << r.ownership << ',' << r.primary_key << "\n";
  }
}

absl::StatusOr<Dataset> LoadDatasetCsv(const std::string& path) {
  return LoadCsv(path, /*public_only=*/false);
}

void WriteDatasetCsv(const Dataset& data, std::ostream& out,
                     bool synthetic_flag) {
  out << "year,qtr,state,cnty,naics,own,m1emp,m2emp,m3emp,wage,primary_key";
  if (synthetic_flag) out << ",synthetic";
  out << "\n";
  for (const EstablishmentRecord& r : data.records()) {
    out << r.year << ',' << r.qtr << ',' << r.state << ',' << r.county << ','
        << r.naics << ',' << r.ownership;
    for (double v : r.confidential) out << ',' << absl::StrFormat("%.17g", v);
    out << ',' << r.primary_key;
    if (synthetic_flag) out << ",1";
    out << "\n";
  }
}

absl::Status SaveDatasetCsv(const Dataset& data, const std::string& path,
                            bool synthetic_flag) {
  std::ofstream out(path);
  if (!out) return absl::PermissionDeniedError(absl::StrCat("cannot write ", path));
  WriteDatasetCsv(data, out, synthetic_flag);
  return out ? absl::OkStatus()
             : absl::DataLossError(absl::StrCat("write failed: ", path));
}

absl::StatusOr<Grouper> Grouper::NaicsPrefix(int digits) {
  if (digits < 2 || digits > 6) {
    return absl::InvalidArgumentError(
        absl::StrCat("NAICS prefix length must be in 2..6, got ", digits));
  }
  return Grouper(Kind::kNaicsPrefix, digits);
}

absl::StatusOr<Grouper> Grouper::CountyNaicsPrefix(int digits) {
  if (digits < 2 || digits > 6) {
    return absl::InvalidArgumentError(
        absl::StrCat("NAICS prefix length must be in 2..6, got ", digits));
  }
  return Grouper(Kind::kCountyNaicsPrefix, digits);
}

absl::StatusOr<Grouper> Grouper::Parse(absl::string_view name) {
  if (name == "identity") return Identity();
  if (name == "total") return Total();
  if (name == "county") return County();
  auto digits_of = [](absl::string_view suffix) -> int {
    if (suffix.size() != 1 || suffix[0] < '0' || suffix[0] > '9') return -1;
    return suffix[0] - '0';
  };
  constexpr absl::string_view kNaics = "naics";
  constexpr absl::string_view kCountyNaics = "county_naics";
  if (absl::StartsWith(name, kCountyNaics)) {
    return CountyNaicsPrefix(digits_of(name.substr(kCountyNaics.size())));
  }
  if (absl::StartsWith(name, kNaics)) {
    return NaicsPrefix(digits_of(name.substr(kNaics.size())));
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown grouper '", name, "'"));
}

std::string Grouper::Name() const {
  switch (kind_) {
    case Kind::kIdentity:
      return "identity";
    case Kind::kTotal:
      return "total";
    case Kind::kCounty:
      return "county";
    case Kind::kNaicsPrefix:
      return absl::StrCat("naics", digits_);
    case Kind::kCountyNaicsPrefix:
      return absl::StrCat("county_naics", digits_);
  }
  return "unknown";
}

std::string Grouper::KeyOf(const EstablishmentRecord& record) const {
  switch (kind_) {
    case Kind::kIdentity:
      return absl::StrCat("id=", record.primary_key);
    case Kind::kTotal:
      return "total";
    case Kind::kCounty:
      return absl::StrCat("county=", record.county);
    case Kind::kNaicsPrefix:
      return absl::StrCat("naics", digits_, "=", record.naics.substr(0, digits_));
    case Kind::kCountyNaicsPrefix:
      return absl::StrCat("county=", record.county, "|naics", digits_, "=",
                          record.naics.substr(0, digits_));
  }
  return "";
}

QueryAnswerVector AnswerExact(const Dataset& data,
                              const GroupBySumQuery& query) {
  std::map<std::string, double> sums;
  for (const EstablishmentRecord& r : data.records()) {
    sums[query.grouper.KeyOf(r)] += r.value(query.target);
  }
  QueryAnswerVector answers;
  answers.reserve(sums.size());
  for (auto& [key, value] : sums) answers.push_back({key, value});
  return answers;
}

GroupMembership ComputeGroupMembership(const Dataset& data,
                                       const Grouper& grouper) {
  GroupMembership membership;
  for (const EstablishmentRecord& r : data.records()) {
    membership[grouper.KeyOf(r)].push_back(r.primary_key);
  }
  return membership;
}

void WriteAnswerCsv(const QueryAnswerVector& answers, std::ostream& out) {
  out << "group_key,true_value\n";
  for (const GroupAnswer& a : answers) {
    out << a.key << ',' << absl::StrFormat("%.17g", a.value) << "\n";
  }
}

}  // namespace gedp
