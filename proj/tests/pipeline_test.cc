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

#include "gedp/pipeline.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "gedp/syngen.h"
#include "nlohmann/json.hpp"

namespace gedp {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

std::string ReadAll(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::path(::testing::TempDir()) /
           ::testing::UnitTest::GetInstance()->current_test_info()->name();
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    const std::vector<CellTotals> cells = {
        {"00", "001", "236115", 4, 40.0, 44.0, 90000.0},
        {"00", "001", "541511", 3, 12.0, 9.0, 30000.0},
        {"00", "003", "236220", 5, 100.0, 120.0, 500000.0},
        {"00", "003", "541511", 2, 3.0, 4.0, 7000.0}};
    const SyngenResult synth = *GenerateEstablishments(cells);
    ASSERT_TRUE(SaveDatasetCsv(synth.data, (dir_ / "truth.csv").string()).ok());
  }

  Json BaseConfig(double mu) const {
    Json config = {
        {"dataset", "truth.csv"},
        {"output_dir", "run"},
        {"neighbor_function", {{"kind", "sqrt"}, {"shift", 0}}},
        {"distance", {{"m1emp", 0.5}, {"m2emp", 0.5}, {"m3emp", 0.5}, {"wage", 20}}},
        {"mu_total", 10.0 * mu},
        {"gamma", 0.05},
        {"seed", 5},
        {"release_transformed", true},
        {"queries",
         Json::array({
             {{"label", "ids"}, {"grouper", "identity"},
              {"mu", {{"m1emp", mu}, {"wage", mu}}}},
             {{"label", "county"}, {"grouper", "county"}, {"mechanism", "pnc"},
              {"mu", {{"m1emp", mu}}}},
             {{"label", "total"}, {"grouper", "total"},
              {"mu", {{"m1emp", mu}, {"wage", mu}}}},
         })}};
    return config;
  }

  fs::path dir_;
};

TEST(ParseNeighborFunctionJsonTest, Kinds) {
  EXPECT_EQ(ParseNeighborFunctionJson(R"({"kind":"sqrt"})")->kind(),
            NeighborFunction::Kind::kSqrtShift);
  EXPECT_EQ(ParseNeighborFunctionJson(R"({"kind":"log_shift","shift":1})")
                ->parameter(),
            1.0);
  EXPECT_EQ(ParseNeighborFunctionJson(R"({"kind":"linear","d":4})")->Evaluate(8.0),
            2.0);
  const NeighborFunction pw = *ParseNeighborFunctionJson(
      R"({"kind":"piecewise_linear","breakpoints":[1,5],"slopes":[2,1,0.25]})");
  EXPECT_DOUBLE_EQ(pw.Evaluate(3.0), 4.0);
  EXPECT_FALSE(ParseNeighborFunctionJson(R"({"kind":"cubic"})").ok());
  EXPECT_FALSE(ParseNeighborFunctionJson(
                   R"({"kind":"piecewise_linear","breakpoints":[1],"slopes":[1]})")
                   .ok());
  EXPECT_FALSE(ParseNeighborFunctionJson("not json").ok());
}

TEST_F(PipelineTest, ParseResolvesPaths) {
  const RunConfig c = *ParseRunConfig(BaseConfig(1.0).dump(), dir_.string());
  EXPECT_EQ(c.dataset, (dir_ / "truth.csv").string());
  EXPECT_EQ(c.queries.size(), 3u);
  EXPECT_EQ(c.queries[1].mechanism, MechanismKind::kPnc);
  EXPECT_EQ(c.distance.at(Attribute::kWage), 20.0);
  EXPECT_TRUE(CheckRunConfig(c).ok());
}

TEST_F(PipelineTest, CheckRejectsBadConfigs) {
  Json over = BaseConfig(1.0);
  over["mu_total"] = 2.0;
  EXPECT_EQ(CheckRunConfig(*ParseRunConfig(over.dump())).code(),
            absl::StatusCode::kResourceExhausted);

  Json pnc_first = BaseConfig(1.0);
  std::swap(pnc_first["queries"][0], pnc_first["queries"][1]);
  EXPECT_EQ(CheckRunConfig(*ParseRunConfig(pnc_first.dump())).code(),
            absl::StatusCode::kFailedPrecondition);

  Json duplicate = BaseConfig(1.0);
  duplicate["queries"][2]["label"] = "ids";
  EXPECT_FALSE(CheckRunConfig(*ParseRunConfig(duplicate.dump())).ok());

  Json gamma = BaseConfig(1.0);
  gamma["gamma"] = 1.0;
  EXPECT_FALSE(CheckRunConfig(*ParseRunConfig(gamma.dump())).ok());

  Json missing = BaseConfig(1.0);
  missing["distance"].erase("wage");
  absl::StatusOr<RunConfig> parsed = ParseRunConfig(missing.dump());
  EXPECT_TRUE(!parsed.ok() || !CheckRunConfig(*parsed).ok());

  Json bad_label = BaseConfig(1.0);
  bad_label["queries"][0]["label"] = "a/b";
  EXPECT_FALSE(ParseRunConfig(bad_label.dump()).ok());
}

TEST_F(PipelineTest, EndToEndHighBudgetReconstructs) {
  const RunConfig config = *ParseRunConfig(BaseConfig(1000.0).dump(), dir_.string());
  absl::Status s = RunRelease(config);
  ASSERT_TRUE(s.ok()) << s;
  const fs::path run = dir_ / "run";
  for (const char* name :
       {"public.csv", "ledger.json", "manifest.json", "answers_ids_m1emp.csv",
        "answers_ids_m1emp_transformed.csv", "answers_county_m1emp.csv",
        "answers_total_wage.csv"}) {
    EXPECT_TRUE(fs::exists(run / name)) << name;
  }
  const Json ledger = Json::parse(ReadAll(run / "ledger.json"));
  EXPECT_NEAR(ledger["mu_composed"].get<double>(), std::sqrt(5.0) * 1000.0, 1e-6);
  EXPECT_EQ(ledger["entries"].size(), 5u);
  const Json manifest = Json::parse(ReadAll(run / "manifest.json"));
  EXPECT_EQ(manifest["queries"].size(), 5u);
  EXPECT_GT(manifest["queries"][2]["tau"].get<double>(), 0.0);
  EXPECT_THAT(ReadAll(run / "public.csv"), ::testing::Not(::testing::HasSubstr("m1emp")));

  PostprocessOptions post{run.string(), (dir_ / "micro.csv").string(), false};
  s = RunPostprocess(post);
  ASSERT_TRUE(s.ok()) << s;
  EXPECT_TRUE(fs::exists(dir_ / "micro.csv.solver.json"));

  EvaluateOptions eval;
  eval.microdata_csv = (dir_ / "micro.csv").string();
  eval.truth_csv = (dir_ / "truth.csv").string();
  eval.groupers = {"total", "county", "naics2"};
  eval.attributes = {Attribute::kM1Emp, Attribute::kWage};
  eval.metrics_json = (dir_ / "metrics.json").string();
  eval.scatter_csv = (dir_ / "scatter.csv").string();
  s = RunEvaluate(eval);
  ASSERT_TRUE(s.ok()) << s;
  const Json metrics = Json::parse(ReadAll(dir_ / "metrics.json"));
  ASSERT_EQ(metrics.size(), 6u);
  for (const Json& m : metrics) {
    EXPECT_LT(m["max_relative_error"].get<double>(), 0.01) << m.dump();
  }
  EXPECT_THAT(ReadAll(dir_ / "scatter.csv"),
              ::testing::StartsWith(
                  "grouper,attribute,group_key,true_value,reconstructed_value\n"));
}

TEST_F(PipelineTest, SameSeedSameRelease) {
  Json a = BaseConfig(1.0);
  Json b = BaseConfig(1.0);
  b["output_dir"] = "run2";
  ASSERT_TRUE(RunRelease(*ParseRunConfig(a.dump(), dir_.string())).ok());
  ASSERT_TRUE(RunRelease(*ParseRunConfig(b.dump(), dir_.string())).ok());
  EXPECT_EQ(ReadAll(dir_ / "run" / "answers_county_m1emp.csv"),
            ReadAll(dir_ / "run2" / "answers_county_m1emp.csv"));
  Json c = BaseConfig(1.0);
  c["output_dir"] = "run3";
  c["seed"] = 6;
  ASSERT_TRUE(RunRelease(*ParseRunConfig(c.dump(), dir_.string())).ok());
  EXPECT_NE(ReadAll(dir_ / "run" / "answers_county_m1emp.csv"),
            ReadAll(dir_ / "run3" / "answers_county_m1emp.csv"));
}

TEST_F(PipelineTest, NonnegativePostprocess) {
  ASSERT_TRUE(RunRelease(*ParseRunConfig(BaseConfig(0.2).dump(), dir_.string())).ok());
  PostprocessOptions post{(dir_ / "run").string(), (dir_ / "nn.csv").string(), true};
  absl::Status s = RunPostprocess(post);
  ASSERT_TRUE(s.ok()) << s;
  const Dataset out = *LoadDatasetCsv((dir_ / "nn.csv").string());
  for (const EstablishmentRecord& r : out.records()) {
    EXPECT_GE(r.value(Attribute::kM1Emp), 0.0);
    EXPECT_EQ(r.value(Attribute::kM2Emp), 0.0);
  }
}

TEST_F(PipelineTest, ReleaseRejectsInvalidNeighborFunction) {
  Json config = BaseConfig(1.0);
  config["neighbor_function"] = {
      {"kind", "piecewise_linear"}, {"breakpoints", {1.0}}, {"slopes", {1.0, 2.0}}};
  EXPECT_EQ(RunRelease(*ParseRunConfig(config.dump(), dir_.string())).code(),
            absl::StatusCode::kFailedPrecondition);
  EXPECT_FALSE(fs::exists(dir_ / "run"));
}

}  // namespace
}  // namespace gedp
