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

// Establishment microdata, CSV ingestion and exact group-by sum queries.

#ifndef GEDP_DATASET_H_
#define GEDP_DATASET_H_

#include <array>
#include <iosfwd>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"

namespace gedp {

enum class Attribute { kM1Emp = 0, kM2Emp = 1, kM3Emp = 2, kWage = 3 };

inline constexpr std::array<Attribute, 4> kAllAttributes = {
    Attribute::kM1Emp, Attribute::kM2Emp, Attribute::kM3Emp, Attribute::kWage};

const char* AttributeName(Attribute attribute);
absl::StatusOr<Attribute> ParseAttribute(absl::string_view name);

struct EstablishmentRecord {
  // Public attributes.
  std::string year;
  std::string qtr;
  std::string state;
  std::string county;
  std::string naics;  // exactly six digits
  std::string ownership;
  // Confidential attributes, indexed by Attribute. All >= 0.
  std::array<double, 4> confidential{};
  std::string primary_key;

  double value(Attribute a) const {
    return confidential[static_cast<size_t>(a)];
  }
  double& value(Attribute a) { return confidential[static_cast<size_t>(a)]; }
};

// Immutable after construction. Records keep their input order.
class Dataset {
 public:
  Dataset() = default;

  // Validates every record (nonnegative confidential values, six-digit NAICS,
  // unique primary keys). Reconstructed microdata may hold negative
  // estimates; pass allow_negative for those.
  static absl::StatusOr<Dataset> FromRecords(
      std::vector<EstablishmentRecord> records, bool allow_negative = false);

  const std::vector<EstablishmentRecord>& records() const { return records_; }
  size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  // Position of `primary_key` in records(), or -1.
  int IndexOf(absl::string_view primary_key) const;

 private:
  std::vector<EstablishmentRecord> records_;
  std::unordered_map<std::string, int> index_;
};

// CSV columns: year,qtr,state,cnty,naics,own,m1emp,m2emp,m3emp,wage,
// primary_key. Extra columns are ignored; errors name the offending row
// (1-based, counting the header as row 1).
absl::StatusOr<Dataset> ParseDatasetCsv(std::istream& in);
absl::StatusOr<Dataset> LoadDatasetCsv(const std::string& path);

// A trailing `synthetic` column marks reconstructed rows; such files may
// hold negative confidential estimates.

// Writes the same schema. When `synthetic_flag` is set a trailing
// `synthetic` column holding 1 marks every row as reconstructed.
void WriteDatasetCsv(const Dataset& data, std::ostream& out,
                     bool synthetic_flag = false);
absl::Status SaveDatasetCsv(const Dataset& data, const std::string& path,
                            bool synthetic_flag = false);

// Public attributes only: year,qtr,state,cnty,naics,own,primary_key.
// Parsed records carry zero confidential values.
void WritePublicCsv(const Dataset& data, std::ostream& out);
absl::StatusOr<Dataset> ParsePublicCsv(std::istream& in);
absl::StatusOr<Dataset> LoadPublicCsv(const std::string& path);

// Maps a record to its group using public attributes only.
class Grouper {
 public:
  enum class Kind { kIdentity, kTotal, kCounty, kNaicsPrefix, kCountyNaicsPrefix };

  static Grouper Identity() { return Grouper(Kind::kIdentity, 0); }
  static Grouper Total() { return Grouper(Kind::kTotal, 0); }
  static Grouper County() { return Grouper(Kind::kCounty, 0); }
  static absl::StatusOr<Grouper> NaicsPrefix(int digits);
  static absl::StatusOr<Grouper> CountyNaicsPrefix(int digits);

  // Accepts "identity", "total", "county", "naics<k>", "county_naics<k>".
  static absl::StatusOr<Grouper> Parse(absl::string_view name);

  Kind kind() const { return kind_; }
  int digits() const { return digits_; }
  std::string Name() const;

  // Canonical group key, e.g. "id=17", "total", "county=007",
  // "naics3=236", "county=007|naics3=236".
  std::string KeyOf(const EstablishmentRecord& record) const;

 private:
  Grouper(Kind kind, int digits) : kind_(kind), digits_(digits) {}
  Kind kind_;
  int digits_;
};

struct GroupBySumQuery {
  Grouper grouper = Grouper::Total();
  Attribute target = Attribute::kM1Emp;
};

struct GroupAnswer {
  std::string key;
  double value = 0.0;
};

// Groups in lexicographic key order. Only groups with at least one record
// are present.
using QueryAnswerVector = std::vector<GroupAnswer>;

QueryAnswerVector AnswerExact(const Dataset& data, const GroupBySumQuery& query);

// Group key -> primary keys (in dataset order). Same key set as AnswerExact.
using GroupMembership = std::map<std::string, std::vector<std::string>>;

GroupMembership ComputeGroupMembership(const Dataset& data,
                                       const Grouper& grouper);

// Writes group_key,true_value.
void WriteAnswerCsv(const QueryAnswerVector& answers, std::ostream& out);

// Comma split without quoting support; shared by the CSV readers.
std::vector<std::string> SplitCsvLine(absl::string_view line);

}  // namespace gedp

#endif  // GEDP_DATASET_H_
