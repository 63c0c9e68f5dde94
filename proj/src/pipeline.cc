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

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "gedp/accountant.h"
#include "gedp/mechanisms.h"
#include "gedp/metrics.h"
#include "gedp/microdata.h"
#include "json.hpp"

namespace gedp {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

absl::StatusOr<Json> ParseJson(const std::string& text, absl::string_view what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    return absl::InvalidArgumentError(
        absl::StrCat(what, ": malformed JSON: ", e.what()));
  }
}

absl::StatusOr<std::string> ReadFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

absl::Status WriteFile(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    return absl::PermissionDeniedError(
        absl::StrCat("cannot write ", path.string()));
  }
  out << contents;
  return out ? absl::OkStatus()
             : absl::DataLossError(absl::StrCat("write failed: ", path.string()));
}

const char* MechanismName(MechanismKind kind) {
  return kind == MechanismKind::kNeighbor ? "neighbor" : "pnc";
}

std::string AnswerFileName(const QuerySpec& q, Attribute a,
                           bool transformed = false) {
  return absl::StrCat("answers_", q.label, "_", AttributeName(a),
                      transformed ? "_transformed" : "", ".csv");
}

// Returns a Json number field or an error naming the path.
absl::StatusOr<double> NumberField(const Json& object, const std::string& key,
                                   absl::string_view where) {
  if (!object.contains(key)) {
    return absl::InvalidArgumentError(
        absl::StrCat(where, ": missing field '", key, "'"));
  }
  if (!object[key].is_number()) {
    return absl::InvalidArgumentError(
        absl::StrCat(where, ".", key, ": expected a number"));
  }
  return object[key].get<double>();
}

absl::StatusOr<std::map<Attribute, double>> AttributeMap(
    const Json& object, absl::string_view where) {
  if (!object.is_object()) {
    return absl::InvalidArgumentError(
        absl::StrCat(where, ": expected an object keyed by attribute"));
  }
  std::map<Attribute, double> out;
  for (const auto& [name, value] : object.items()) {
    auto attribute = ParseAttribute(name);
    if (!attribute.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat(where, ": ", attribute.status().message()));
    }
    if (!value.is_number()) {
      return absl::InvalidArgumentError(
          absl::StrCat(where, ".", name, ": expected a number"));
    }
    out[*attribute] = value.get<double>();
  }
  return out;
}

}  // namespace

absl::StatusOr<NeighborFunction> ParseNeighborFunctionJson(
    const std::string& json_text) {
  auto doc = ParseJson(json_text, "neighbor_function");
  if (!doc.ok()) return doc.status();
  if (!doc->is_object() || !doc->contains("kind") ||
      !(*doc)["kind"].is_string()) {
    return absl::InvalidArgumentError(
        "neighbor_function: expected an object with a string 'kind'");
  }
  const std::string kind = (*doc)["kind"].get<std::string>();
  const double shift =
      doc->contains("shift") && (*doc)["shift"].is_number()
          ? (*doc)["shift"].get<double>()
          : 0.0;
  if (kind == "sqrt" || kind == "sqrt_shift") {
    return NeighborFunction::SqrtShift(shift);
  }
  if (kind == "log" || kind == "log_shift") {
    return NeighborFunction::LogShift(shift);
  }
  if (kind == "linear") {
    auto d = NumberField(*doc, "d", "neighbor_function");
    if (!d.ok()) return d.status();
    return NeighborFunction::Linear(*d);
  }
  if (kind == "piecewise_linear") {
    if (!doc->contains("breakpoints") || !doc->contains("slopes")) {
      return absl::InvalidArgumentError(
          "neighbor_function: piecewise_linear needs breakpoints and slopes");
    }
    std::vector<double> breakpoints;
    std::vector<double> slopes;
    try {
      breakpoints = (*doc)["breakpoints"].get<std::vector<double>>();
      slopes = (*doc)["slopes"].get<std::vector<double>>();
    } catch (const Json::exception& e) {
      return absl::InvalidArgumentError(
          absl::StrCat("neighbor_function: ", e.what()));
    }
    if (slopes.size() != breakpoints.size() + 1) {
      return absl::InvalidArgumentError(
          "neighbor_function: need one more slope than breakpoints");
    }
    auto unit = NeighborFunction::Linear(1.0);
    std::vector<NeighborFunction::Piece> pieces;
    double lo = 0.0;
    double value = 0.0;
    for (size_t i = 0; i < slopes.size(); ++i) {
      const double hi = i < breakpoints.size()
                            ? breakpoints[i]
                            : std::numeric_limits<double>::infinity();
      pieces.push_back({lo, hi, slopes[i], value - slopes[i] * lo, *unit});
      if (i < breakpoints.size()) value += slopes[i] * (hi - lo);
      lo = hi;
    }
    return NeighborFunction::Piecewise(std::move(pieces));
  }
  return absl::InvalidArgumentError(
      absl::StrCat("neighbor_function: unknown kind '", kind, "'"));
}

absl::StatusOr<RunConfig> ParseRunConfig(const std::string& json_text,
                                         const std::string& base_dir) {
  auto doc = ParseJson(json_text, "config");
  if (!doc.ok()) return doc.status();
  if (!doc->is_object()) {
    return absl::InvalidArgumentError("config: expected a JSON object");
  }
  RunConfig config;
  auto resolve = [&base_dir](const std::string& p) {
    if (base_dir.empty() || fs::path(p).is_absolute()) return p;
    return (fs::path(base_dir) / p).string();
  };
  try {
    config.dataset = resolve(doc->at("dataset").get<std::string>());
    config.output_dir = resolve(doc->at("output_dir").get<std::string>());
    if (doc->contains("neighbor_function")) {
      config.neighbor_function_json = (*doc)["neighbor_function"].dump();
    }
    config.mu_total = doc->at("mu_total").get<double>();
    if (doc->contains("gamma")) config.gamma = (*doc)["gamma"].get<double>();
    if (doc->contains("seed")) config.seed = (*doc)["seed"].get<uint64_t>();
    if (doc->contains("release_transformed")) {
      config.release_transformed = (*doc)["release_transformed"].get<bool>();
    }
  } catch (const Json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("config: ", e.what()));
  }
  if (!doc->contains("distance")) {
    return absl::InvalidArgumentError("config: missing field 'distance'");
  }
  auto distance = AttributeMap((*doc)["distance"], "config.distance");
  if (!distance.ok()) return distance.status();
  config.distance = *distance;

  if (!doc->contains("queries") || !(*doc)["queries"].is_array()) {
    return absl::InvalidArgumentError("config: 'queries' must be an array");
  }
  int index = 0;
  for (const Json& q : (*doc)["queries"]) {
    const std::string where = absl::StrCat("config.queries[", index++, "]");
    QuerySpec spec;
    try {
      spec.label = q.at("label").get<std::string>();
      spec.grouper = q.at("grouper").get<std::string>();
      const std::string mechanism = q.value("mechanism", "neighbor");
      if (mechanism == "neighbor") {
        spec.mechanism = MechanismKind::kNeighbor;
      } else if (mechanism == "pnc") {
        spec.mechanism = MechanismKind::kPnc;
      } else {
        return absl::InvalidArgumentError(
            absl::StrCat(where, ": unknown mechanism '", mechanism, "'"));
      }
    } catch (const Json::exception& e) {
      return absl::InvalidArgumentError(absl::StrCat(where, ": ", e.what()));
    }
    if (spec.label.empty() ||
        spec.label.find_first_of("/\\ ,") != std::string::npos) {
      return absl::InvalidArgumentError(
          absl::StrCat(where, ": label must be nonempty without '/', ',' or spaces"));
    }
    if (!q.contains("mu")) {
      return absl::InvalidArgumentError(absl::StrCat(where, ": missing 'mu'"));
    }
    auto mu = AttributeMap(q["mu"], where + ".mu");
    if (!mu.ok()) return mu.status();
    spec.mu = *mu;
    config.queries.push_back(std::move(spec));
  }
  return config;
}

absl::Status CheckRunConfig(const RunConfig& config) {
  if (absl::Status s = CheckDistanceParams(config.distance); !s.ok()) return s;
  auto ledger = BudgetLedger::Create(config.mu_total);
  if (!ledger.ok()) return ledger.status();
  if (!(config.gamma > 0.0 && config.gamma < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("gamma must lie in (0, 1), got ", config.gamma));
  }
  std::set<std::string> labels;
  std::set<Attribute> identity_covered;
  for (const QuerySpec& q : config.queries) {
    if (!labels.insert(q.label).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate query label '", q.label, "'"));
    }
    auto grouper = Grouper::Parse(q.grouper);
    if (!grouper.ok()) return grouper.status();
    if (q.mu.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("query ", q.label, " measures no attribute"));
    }
    for (const auto& [attribute, mu] : q.mu) {
      if (!(mu > 0.0)) {
        return absl::InvalidArgumentError(absl::StrCat(
            "query ", q.label, ": mu for ", AttributeName(attribute),
            " must be > 0"));
      }
      if (!(config.distance.at(attribute) > 0.0)) {
        return absl::InvalidArgumentError(absl::StrCat(
            "distance for ", AttributeName(attribute),
            " must be > 0 to release it"));
      }
      if (q.mechanism == MechanismKind::kPnc &&
          !identity_covered.contains(attribute)) {
        return absl::FailedPreconditionError(absl::StrCat(
            "PNC query ", q.label, " on ", AttributeName(attribute),
            " needs an earlier identity neighbor query on that attribute"));
      }
      absl::Status s = ledger->Register(
          {absl::StrCat(q.label, "/", AttributeName(attribute)), mu, "", {}});
      if (!s.ok()) return s;
    }
    if (q.mechanism == MechanismKind::kNeighbor &&
        grouper->kind() == Grouper::Kind::kIdentity) {
      for (const auto& [attribute, mu] : q.mu) identity_covered.insert(attribute);
    }
  }
  return absl::OkStatus();
}

absl::Status RunRelease(const RunConfig& config) {
  if (absl::Status s = CheckRunConfig(config); !s.ok()) return s;
  auto nf = ParseNeighborFunctionJson(config.neighbor_function_json);
  if (!nf.ok()) return nf.status();
  auto f = RequireValid(*nf);
  if (!f.ok()) return f.status();
  auto data = LoadDatasetCsv(config.dataset);
  if (!data.ok()) return data.status();

  auto ledger = BudgetLedger::Create(config.mu_total);
  if (!ledger.ok()) return ledger.status();
  // The whole workload is registered before any noise is drawn.
  for (const QuerySpec& q : config.queries) {
    for (const auto& [attribute, mu] : q.mu) {
      absl::Status s = ledger->Register(
          {absl::StrCat(q.label, "/", AttributeName(attribute)), mu,
           nf->Describe(),
           {{attribute, config.distance.at(attribute)}}});
      if (!s.ok()) return s;
    }
  }

  const fs::path out_dir(config.output_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    return absl::PermissionDeniedError(
        absl::StrCat("cannot create ", out_dir.string(), ": ", ec.message()));
  }

  std::map<Attribute, IdentityRelease> identity;
  Json manifest;
  manifest["neighbor_function"] = nf->Describe();
  manifest["neighbor_function_spec"] = Json::parse(config.neighbor_function_json);
  Json distance = Json::object();
  for (const auto& [attribute, delta] : config.distance) {
    distance[std::string(AttributeName(attribute))] = delta;
  }
  manifest["distance"] = distance;
  manifest["seed"] = config.seed;
  manifest["gamma"] = config.gamma;
  manifest["queries"] = Json::array();

  for (size_t qi = 0; qi < config.queries.size(); ++qi) {
    const QuerySpec& q = config.queries[qi];
    const Grouper grouper = *Grouper::Parse(q.grouper);
    std::optional<PncBounds> bounds;
    if (q.mechanism == MechanismKind::kPnc) {
      std::vector<IdentityRelease> releases;
      for (const auto& [attribute, release] : identity) releases.push_back(release);
      auto b = ComputePncBounds(releases, *f, config.gamma);
      if (!b.ok()) return b.status();
      bounds = *std::move(b);
    }
    for (const auto& [attribute, mu] : q.mu) {
      const double delta = config.distance.at(attribute);
      RngStream rng(config.seed,
                    1000 + 8 * qi + static_cast<uint64_t>(attribute));
      const GroupBySumQuery query{grouper, attribute};
      std::vector<NoisyAnswer> released;
      Json entry;
      entry["label"] = q.label;
      entry["grouper"] = grouper.Name();
      entry["mechanism"] = MechanismName(q.mechanism);
      entry["attribute"] = AttributeName(attribute);
      entry["mu"] = mu;
      if (q.mechanism == MechanismKind::kNeighbor) {
        auto transformed = NeighborMechanism(*data, query, *f, delta, mu, rng);
        if (!transformed.ok()) return transformed.status();
        if (grouper.kind() == Grouper::Kind::kIdentity) {
          identity[attribute] = {attribute, *transformed, delta, mu};
        }
        if (config.release_transformed) {
          std::ostringstream csv;
          WriteNoisyAnswersCsv(*transformed, csv);
          const std::string name = AnswerFileName(q, attribute, true);
          if (auto s = WriteFile(out_dir / name, csv.str()); !s.ok()) return s;
          entry["transformed_file"] = name;
        }
        auto raw = Detransform(*transformed, *nf, delta, mu);
        if (!raw.ok()) return raw.status();
        released = std::move(raw->answers);
        entry["variance_floor_hits"] = raw->floor_hits;
      } else {
        auto pnc = PncMechanism(*data, query, *bounds, *f, delta, mu, rng);
        if (!pnc.ok()) return pnc.status();
        released = *std::move(pnc);
        entry["tau"] = bounds->tau;
      }
      std::ostringstream csv;
      WriteNoisyAnswersCsv(released, csv);
      const std::string name = AnswerFileName(q, attribute);
      if (auto s = WriteFile(out_dir / name, csv.str()); !s.ok()) return s;
      entry["file"] = name;
      manifest["queries"].push_back(entry);
    }
  }

  std::ostringstream public_csv;
  WritePublicCsv(*data, public_csv);
  if (auto s = WriteFile(out_dir / "public.csv", public_csv.str()); !s.ok()) {
    return s;
  }
  if (auto s = WriteFile(out_dir / "ledger.json", ledger->ToJson() + "\n");
      !s.ok()) {
    return s;
  }
  return WriteFile(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

absl::Status RunPostprocess(const PostprocessOptions& options) {
  const fs::path run_dir(options.run_dir);
  auto manifest_text = ReadFile(run_dir / "manifest.json");
  if (!manifest_text.ok()) return manifest_text.status();
  auto manifest = ParseJson(*manifest_text, "manifest.json");
  if (!manifest.ok()) return manifest.status();
  auto public_data = LoadPublicCsv((run_dir / "public.csv").string());
  if (!public_data.ok()) return public_data.status();

  std::vector<std::string> keys;
  for (const EstablishmentRecord& r : public_data->records()) {
    keys.push_back(r.primary_key);
  }
  std::map<Attribute, std::vector<MeasuredQuery>> by_attribute;
  std::map<std::string, GroupMembership> membership_cache;
  try {
    for (const Json& entry : manifest->at("queries")) {
      auto attribute = ParseAttribute(entry.at("attribute").get<std::string>());
      if (!attribute.ok()) return attribute.status();
      const std::string grouper_name = entry.at("grouper").get<std::string>();
      auto grouper = Grouper::Parse(grouper_name);
      if (!grouper.ok()) return grouper.status();
      if (!membership_cache.contains(grouper_name)) {
        membership_cache[grouper_name] =
            ComputeGroupMembership(*public_data, *grouper);
      }
      const fs::path file = run_dir / entry.at("file").get<std::string>();
      std::ifstream in(file);
      if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", file.string()));
      auto answers = ParseNoisyAnswersCsv(in);
      if (!answers.ok()) {
        return absl::InvalidArgumentError(
            absl::StrCat(file.string(), ": ", answers.status().message()));
      }
      by_attribute[*attribute].push_back(
          {entry.at("label").get<std::string>(), *attribute,
           membership_cache[grouper_name], *std::move(answers)});
    }
  } catch (const Json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("manifest.json: ", e.what()));
  }

  SolverOptions solver;
  solver.nonnegative = options.nonnegative;
  std::map<Attribute, std::vector<double>> estimates;
  Json report;
  for (const auto& [attribute, queries] : by_attribute) {
    auto problem = BuildProblem(keys, attribute, queries);
    if (!problem.ok()) return problem.status();
    auto solution = Solve(*problem, solver);
    if (!solution.ok()) {
      return absl::Status(solution.status().code(),
                          absl::StrCat(AttributeName(attribute), ": ",
                                       solution.status().message()));
    }
    Json item;
    item["rows"] = problem->rows.size();
    item["iterations"] = solution->iterations;
    item["relative_gradient"] = solution->relative_gradient;
    item["underdetermined"] = solution->underdetermined.size();
    report[std::string(AttributeName(attribute))] = item;
    estimates[attribute] = std::move(solution->values);
  }
  auto microdata = ApplyEstimates(*public_data, estimates);
  if (!microdata.ok()) return microdata.status();
  if (auto s = SaveDatasetCsv(*microdata, options.output_csv, true); !s.ok()) {
    return s;
  }
  return WriteFile(options.output_csv + ".solver.json", report.dump(2) + "\n");
}

absl::Status RunEvaluate(const EvaluateOptions& options) {
  auto estimate = LoadDatasetCsv(options.microdata_csv);
  if (!estimate.ok()) return estimate.status();
  auto truth = LoadDatasetCsv(options.truth_csv);
  if (!truth.ok()) return truth.status();
  if (options.groupers.empty() || options.attributes.empty()) {
    return absl::InvalidArgumentError(
        "evaluate needs at least one grouper and one attribute");
  }
  Json metrics = Json::array();
  std::ostringstream scatter;
  scatter << "grouper,attribute,group_key,true_value,reconstructed_value\n";
  for (const std::string& name : options.groupers) {
    auto grouper = Grouper::Parse(name);
    if (!grouper.ok()) return grouper.status();
    for (Attribute attribute : options.attributes) {
      const GroupBySumQuery query{*grouper, attribute};
      const QueryMetrics m =
          CompareAnswers(AnswerExact(*truth, query), AnswerExact(*estimate, query));
      Json item;
      item["grouper"] = grouper->Name();
      item["attribute"] = AttributeName(attribute);
      item["groups"] = m.groups;
      item["signed_q1"] = m.q1;
      item["signed_median"] = m.median;
      item["signed_q3"] = m.q3;
      item["signed_mean"] = m.mean_signed;
      item["mean_absolute_error"] = m.mean_absolute;
      item["mean_relative_error"] = m.mean_relative;
      item["max_relative_error"] = m.max_relative;
      item["missing_in_reconstruction"] = m.missing_in_estimate;
      item["missing_in_truth"] = m.missing_in_truth;
      metrics.push_back(item);
      for (const ScatterPoint& p : m.scatter) {
        scatter << grouper->Name() << ',' << AttributeName(attribute) << ','
                << p.key << ',' << absl::StrFormat("%.17g", p.truth) << ','
                << absl::StrFormat("%.17g", p.estimate) << "\n";
      }
    }
  }
  if (auto s = WriteFile(options.metrics_json, metrics.dump(2) + "\n"); !s.ok()) {
    return s;
  }
  return WriteFile(options.scatter_csv, scatter.str());
}

}  // namespace gedp
