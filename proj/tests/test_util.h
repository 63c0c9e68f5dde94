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

#ifndef GEDP_TESTS_TEST_UTIL_H_
#define GEDP_TESTS_TEST_UTIL_H_

#include <string>
#include <vector>

#include "gedp/dataset.h"

namespace gedp::testing_util {

inline EstablishmentRecord MakeRecord(std::string pk, std::string county,
                                      std::string naics, double m1,
                                      double m2 = 0.0, double m3 = 0.0,
                                      double wage = 0.0) {
  EstablishmentRecord r;
  r.year = "2016";
  r.qtr = "1";
  r.state = "00";
  r.county = std::move(county);
  r.naics = std::move(naics);
  r.ownership = "5";
  r.confidential = {m1, m2, m3, wage};
  r.primary_key = std::move(pk);
  return r;
}

// Four establishments over two counties and two sectors.
inline Dataset SmallDataset() {
  std::vector<EstablishmentRecord> records = {
      MakeRecord("a", "001", "236115", 3, 4, 5, 1000),
      MakeRecord("b", "001", "541511", 10, 11, 12, 5000),
      MakeRecord("c", "003", "236220", 0, 1, 0, 20),
      MakeRecord("d", "003", "541511", 7, 7, 8, 3000),
  };
  return *Dataset::FromRecords(std::move(records));
}

}  // namespace gedp::testing_util

#endif  // GEDP_TESTS_TEST_UTIL_H_
