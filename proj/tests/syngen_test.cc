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

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace gedp {
namespace {

std::vector<CellTotals> SampleCells() {
  return {{"00", "001", "236115", 3, 30.0, 36.0, 9000.0},
          {"00", "001", "541511", 1, 5.0, 4.0, 800.0},
          {"00", "003", "236220", 0, 0.0, 0.0, 0.0},
          {"00", "003", "311111", 5, 0.0, 10.0, 1234.5}};
}

TEST(DirichletDivideTest, SharesSumToTotal) {
  RngStream rng(31, 0);
  const std::vector<double> b = {1.0, 2.0, 0.5};
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> parts = *DirichletDivide(rng, b, 1000.0);
    double sum = 0.0;
    for (double p : parts) sum += p;
    EXPECT_NEAR(sum, 1000.0, 1e-9);
  }
}

TEST(DirichletDivideTest, MeanShares) {
  RngStream rng(31, 1);
  const std::vector<double> b = {1.0, 3.0};
  double first = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) first += (*DirichletDivide(rng, b, 8.0))[0];
  EXPECT_NEAR(first / n, 2.0, 0.02);
}

TEST(DirichletDivideTest, ZeroEntries) {
  RngStream rng(31, 2);
  const std::vector<double> zeros = {0.0, 0.0};
  const std::vector<double> even = *DirichletDivide(rng, zeros, 10.0);
  EXPECT_NEAR(even[0] + even[1], 10.0, 1e-12);
  const std::vector<double> partial = {0.0, 2.0, 0.0};
  EXPECT_THAT(*DirichletDivide(rng, partial, 10.0),
              ::testing::ElementsAre(0.0, 10.0, 0.0));
  EXPECT_THAT(*DirichletDivide(rng, partial, 0.0),
              ::testing::ElementsAre(0.0, 0.0, 0.0));
  const std::vector<double> empty;
  EXPECT_FALSE(DirichletDivide(rng, empty, 1.0).ok());
  const std::vector<double> negative = {-1.0};
  EXPECT_FALSE(DirichletDivide(rng, negative, 1.0).ok());
}

TEST(Month2Test, MomentsBetweenMonths) {
  RngStream rng(32, 0);
  const int n = 200000;
  double s = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double m = *Month2(rng, 0.5, 10.0, 30.0);
    s += m;
    s2 += m * m;
  }
  const double mean = s / n;
  EXPECT_NEAR(mean, 20.0, 0.01);
  EXPECT_NEAR((s2 / n - mean * mean) / (2.0 * 0.5 * 20.0 / 40.0), 1.0, 0.02);
  EXPECT_EQ(*Month2(rng, 0.5, 7.0, 7.0), 7.0);
  EXPECT_EQ(*Month2(rng, 0.5, 0.0, 0.0), 0.0);
  EXPECT_FALSE(Month2(rng, 0.0, 1.0, 1.0).ok());
}

TEST(Month2Test, NonnegativeNearZero) {
  RngStream rng(32, 1);
  for (int i = 0; i < 10000; ++i) EXPECT_GE(*Month2(rng, 5.0, 0.0, 0.4), 0.0);
}

TEST(GenerateTest, PreservesCellTotals) {
  const std::vector<CellTotals> cells = SampleCells();
  absl::StatusOr<SyngenResult> r = GenerateEstablishments(cells);
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_EQ(r->data.size(), 9u);
  ASSERT_EQ(r->warnings.size(), 1u);
  EXPECT_THAT(r->warnings[0], ::testing::HasSubstr("naics6=236220"));

  std::map<std::string, std::array<double, 4>> sums;
  std::map<std::string, int> counts;
  for (const EstablishmentRecord& rec : r->data.records()) {
    const std::string key = rec.county + "/" + rec.naics;
    for (Attribute a : kAllAttributes) {
      sums[key][static_cast<int>(a)] += rec.value(a);
      EXPECT_GE(rec.value(a), 0.0);
    }
    ++counts[key];
    EXPECT_EQ(rec.year, "2016");
    EXPECT_EQ(rec.qtr, "1");
    EXPECT_EQ(rec.ownership, "5");
  }
  for (const CellTotals& c : cells) {
    if (c.estnum == 0) continue;
    const std::string key = c.county + "/" + c.naics6;
    EXPECT_EQ(counts[key], c.estnum);
    EXPECT_NEAR(sums[key][0], c.m1emp, 1e-9);
    EXPECT_NEAR(sums[key][2], c.m3emp, 1e-9);
    EXPECT_NEAR(sums[key][3], c.wage, 1e-9);
  }
  EXPECT_EQ(r->data.records()[0].primary_key, "E0000001");
  EXPECT_EQ(r->data.records()[8].primary_key, "E0000009");
}

TEST(GenerateTest, DeterministicPerSeed) {
  const std::vector<CellTotals> cells = SampleCells();
  SyngenOptions options;
  options.seed = 77;
  const SyngenResult a = *GenerateEstablishments(cells, options);
  const SyngenResult b = *GenerateEstablishments(cells, options);
  options.seed = 78;
  const SyngenResult c = *GenerateEstablishments(cells, options);
  bool differs = false;
  for (size_t i = 0; i < a.data.size(); ++i) {
    EXPECT_EQ(a.data.records()[i].confidential, b.data.records()[i].confidential);
    differs = differs ||
              a.data.records()[i].confidential != c.data.records()[i].confidential;
  }
  EXPECT_TRUE(differs);
}

TEST(GenerateTest, RejectsBadOptions) {
  SyngenOptions options;
  options.eta = 0.0;
  EXPECT_FALSE(GenerateEstablishments(SampleCells(), options).ok());
}

TEST(CellsCsvTest, Parse) {
  std::istringstream in(
      "county,naics6,estnum,m1emp,m3emp,wage\n"
      "001,236115,3,30,36,9000\n"
      "003,311111,2,0,10,12.5\n");
  const std::vector<CellTotals> cells = *ParseCellsCsv(in);
  ASSERT_EQ(cells.size(), 2u);
  EXPECT_EQ(cells[1].state, "00");
  EXPECT_EQ(cells[1].estnum, 2);
  EXPECT_EQ(cells[1].wage, 12.5);

  std::istringstream fractional(
      "county,naics6,estnum,m1emp,m3emp,wage\n001,236115,2.5,1,1,1\n");
  EXPECT_FALSE(ParseCellsCsv(fractional).ok());
  std::istringstream negative(
      "county,naics6,estnum,m1emp,m3emp,wage\n001,236115,2,-1,1,1\n");
  EXPECT_FALSE(ParseCellsCsv(negative).ok());
  std::istringstream missing("county,naics6,estnum,m1emp,wage\n");
  EXPECT_FALSE(ParseCellsCsv(missing).ok());
}

}  // namespace
}  // namespace gedp
