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

#include <sstream>
#include <string>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace gedp {
namespace {

using ::gedp::testing_util::MakeRecord;
using ::gedp::testing_util::SmallDataset;
using ::testing::ElementsAre;

TEST(AttributeTest, NamesRoundTrip) {
  for (Attribute a : kAllAttributes) {
    EXPECT_EQ(*ParseAttribute(AttributeName(a)), a);
  }
  EXPECT_FALSE(ParseAttribute("emp").ok());
}

TEST(DatasetTest, RejectsBadRecords) {
  EXPECT_FALSE(Dataset::FromRecords({MakeRecord("a", "001", "2361", 1)}).ok());
  EXPECT_FALSE(Dataset::FromRecords({MakeRecord("a", "001", "23611x", 1)}).ok());
  EXPECT_FALSE(Dataset::FromRecords({MakeRecord("a", "001", "236115", -1)}).ok());
  EXPECT_TRUE(
      Dataset::FromRecords({MakeRecord("a", "001", "236115", -1)}, true).ok());
  EXPECT_FALSE(Dataset::FromRecords({MakeRecord("a", "001", "236115", 1),
                                     MakeRecord("a", "003", "236115", 2)})
                   .ok());
}

TEST(DatasetTest, IndexOf) {
  const Dataset data = SmallDataset();
  EXPECT_EQ(data.IndexOf("a"), 0);
  EXPECT_EQ(data.IndexOf("d"), 3);
  EXPECT_EQ(data.IndexOf("z"), -1);
}

TEST(GrouperTest, ParseAndName) {
  for (const char* name : {"identity", "total", "county", "naics2", "naics6",
                           "county_naics3"}) {
    absl::StatusOr<Grouper> g = Grouper::Parse(name);
    ASSERT_TRUE(g.ok()) << name;
    EXPECT_EQ(g->Name(), name);
  }
  EXPECT_FALSE(Grouper::Parse("naics1").ok());
  EXPECT_FALSE(Grouper::Parse("naics7").ok());
  EXPECT_FALSE(Grouper::Parse("naics").ok());
  EXPECT_FALSE(Grouper::Parse("state").ok());
}

TEST(GrouperTest, Keys) {
  const EstablishmentRecord r = MakeRecord("17", "007", "236115", 1);
  EXPECT_EQ(Grouper::Identity().KeyOf(r), "id=17");
  EXPECT_EQ(Grouper::Total().KeyOf(r), "total");
  EXPECT_EQ(Grouper::County().KeyOf(r), "county=007");
  EXPECT_EQ(Grouper::NaicsPrefix(3)->KeyOf(r), "naics3=236");
  EXPECT_EQ(Grouper::CountyNaicsPrefix(3)->KeyOf(r), "county=007|naics3=236");
}

// Sums by brute force over the records.
double BruteForceSum(const Dataset& data, const Grouper& g,
                     const std::string& key, Attribute a) {
  double s = 0.0;
  for (const EstablishmentRecord& r : data.records()) {
    if (g.KeyOf(r) == key) s += r.value(a);
  }
  return s;
}

TEST(AnswerExactTest, MatchesBruteForce) {
  const Dataset data = SmallDataset();
  for (const char* name :
       {"identity", "total", "county", "naics2", "naics6", "county_naics2"}) {
    const Grouper g = *Grouper::Parse(name);
    for (Attribute a : kAllAttributes) {
      const QueryAnswerVector answers = AnswerExact(data, {g, a});
      double total = 0.0;
      for (size_t i = 0; i < answers.size(); ++i) {
        if (i > 0) EXPECT_LT(answers[i - 1].key, answers[i].key);
        EXPECT_DOUBLE_EQ(answers[i].value,
                         BruteForceSum(data, g, answers[i].key, a));
        total += answers[i].value;
      }
      EXPECT_DOUBLE_EQ(total, AnswerExact(data, {Grouper::Total(), a})[0].value);
    }
  }
}

TEST(AnswerExactTest, CountyExample) {
  const QueryAnswerVector answers =
      AnswerExact(SmallDataset(), {Grouper::County(), Attribute::kM1Emp});
  ASSERT_EQ(answers.size(), 2u);
  EXPECT_EQ(answers[0].key, "county=001");
  EXPECT_EQ(answers[0].value, 13.0);
  EXPECT_EQ(answers[1].key, "county=003");
  EXPECT_EQ(answers[1].value, 7.0);
}

TEST(GroupMembershipTest, Naics2) {
  const GroupMembership m =
      ComputeGroupMembership(SmallDataset(), *Grouper::NaicsPrefix(2));
  ASSERT_EQ(m.size(), 2u);
  EXPECT_THAT(m.at("naics2=23"), ElementsAre("a", "c"));
  EXPECT_THAT(m.at("naics2=54"), ElementsAre("b", "d"));
}

TEST(CsvTest, SplitLine) {
  EXPECT_THAT(SplitCsvLine("a, b,,c\r"), ElementsAre("a", "b", "", "c"));
  EXPECT_THAT(SplitCsvLine("x"), ElementsAre("x"));
}

TEST(CsvTest, RoundTrip) {
  const Dataset data = SmallDataset();
  std::stringstream ss;
  WriteDatasetCsv(data, ss);
  absl::StatusOr<Dataset> back = ParseDatasetCsv(ss);
  ASSERT_TRUE(back.ok()) << back.status();
  ASSERT_EQ(back->size(), data.size());
  for (size_t i = 0; i < data.size(); ++i) {
    const EstablishmentRecord& x = data.records()[i];
    const EstablishmentRecord& y = back->records()[i];
    EXPECT_EQ(x.primary_key, y.primary_key);
    EXPECT_EQ(x.county, y.county);
    EXPECT_EQ(x.naics, y.naics);
    EXPECT_EQ(x.confidential, y.confidential);
  }
}

TEST(CsvTest, ColumnOrderIsFree) {
  std::istringstream in(
      "primary_key,wage,m3emp,m2emp,m1emp,own,naics,cnty,state,qtr,year\n"
      "p1,10.5,3,2,1,5,311111,009,00,1,2016\n");
  absl::StatusOr<Dataset> data = ParseDatasetCsv(in);
  ASSERT_TRUE(data.ok()) << data.status();
  EXPECT_EQ(data->records()[0].value(Attribute::kWage), 10.5);
  EXPECT_EQ(data->records()[0].value(Attribute::kM1Emp), 1.0);
  EXPECT_EQ(data->records()[0].county, "009");
}

TEST(CsvTest, Errors) {
  std::istringstream missing_column(
      "year,qtr,state,cnty,naics,own,m1emp,m2emp,m3emp,primary_key\n");
  EXPECT_FALSE(ParseDatasetCsv(missing_column).ok());
  std::istringstream bad_number(
      "year,qtr,state,cnty,naics,own,m1emp,m2emp,m3emp,wage,primary_key\n"
      "2016,1,00,001,236115,5,x,0,0,0,p\n");
  EXPECT_FALSE(ParseDatasetCsv(bad_number).ok());
  std::istringstream negative(
      "year,qtr,state,cnty,naics,own,m1emp,m2emp,m3emp,wage,primary_key\n"
      "2016,1,00,001,236115,5,-1,0,0,0,p\n");
  EXPECT_FALSE(ParseDatasetCsv(negative).ok());
  std::istringstream empty("");
  EXPECT_FALSE(ParseDatasetCsv(empty).ok());
}

TEST(CsvTest, SyntheticFlagAllowsNegative) {
  std::vector<EstablishmentRecord> records = {
      MakeRecord("a", "001", "236115", -2.5)};
  const Dataset data = *Dataset::FromRecords(records, true);
  std::stringstream ss;
  WriteDatasetCsv(data, ss, true);
  EXPECT_THAT(ss.str(), ::testing::HasSubstr(",synthetic\n"));
  absl::StatusOr<Dataset> back = ParseDatasetCsv(ss);
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(back->records()[0].value(Attribute::kM1Emp), -2.5);
}

TEST(CsvTest, PublicOnly) {
  std::stringstream ss;
  WritePublicCsv(SmallDataset(), ss);
  EXPECT_THAT(ss.str(), ::testing::Not(::testing::HasSubstr("m1emp")));
  absl::StatusOr<Dataset> pub = ParsePublicCsv(ss);
  ASSERT_TRUE(pub.ok()) << pub.status();
  ASSERT_EQ(pub->size(), 4u);
  EXPECT_EQ(pub->records()[1].naics, "541511");
  EXPECT_EQ(pub->records()[1].value(Attribute::kM1Emp), 0.0);
}

TEST(CsvTest, AnswerCsv) {
  std::ostringstream out;
  WriteAnswerCsv({{"total", 20.0}, {"county=001", 0.1}}, out);
  EXPECT_EQ(out.str(), "group_key,true_value\ntotal,20\ncounty=001,0.10000000000000001\n");
}

}  // namespace
}  // namespace gedp
