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

// gedp: batch front end for release, reconstruction and evaluation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "gedp/accountant.h"
#include "gedp/biassim.h"
#include "gedp/neighbor.h"
#include "gedp/pipeline.h"
#include "gedp/syngen.h"
#include "json.hpp"

namespace gedp {
namespace {

using Json = nlohmann::ordered_json;

int ReportError(const absl::Status& status) {
  Json error;
  error["error"]["code"] = absl::StatusCodeToString(status.code());
  error["error"]["message"] = std::string(status.message());
  std::cerr << error.dump() << std::endl;
  return 1;
}

absl::StatusOr<std::string> Slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

absl::Status ValidateNf(const std::string& spec, const ValidationGrid& grid) {
  auto f = ParseNeighborFunctionJson(spec);
  if (!f.ok()) return f.status();
  auto report = Validate(*f, grid);
  if (!report.ok()) return report.status();
  Json out;
  out["function"] = f->Describe();
  out["pass"] = report->pass;
  out["violated_condition"] = report->violated_condition;
  out["message"] = report->message;
  out["witness"] = report->witness;
  std::cout << out.dump(2) << std::endl;
  if (!report->pass) {
    return absl::FailedPreconditionError(absl::StrCat(
        "condition (", report->violated_condition, ") violated: ",
        report->message));
  }
  return absl::OkStatus();
}

absl::Status Synth(const std::string& cells_path, const std::string& out_path,
                   const SyngenOptions& options) {
  auto cells = LoadCellsCsv(cells_path);
  if (!cells.ok()) return cells.status();
  auto result = GenerateEstablishments(*cells, options);
  if (!result.ok()) return result.status();
  for (const std::string& w : result->warnings) std::cerr << "warning: " << w << "\n";
  if (auto s = SaveDatasetCsv(result->data, out_path); !s.ok()) return s;
  std::cout << "wrote " << result->data.size() << " establishments to "
            << out_path << std::endl;
  return absl::OkStatus();
}

absl::Status Run(const std::string& config_path, const std::string& output_dir,
                 std::optional<uint64_t> seed) {
  auto text = Slurp(config_path);
  if (!text.ok()) return text.status();
  const std::string base =
      std::filesystem::path(config_path).parent_path().string();
  auto config = ParseRunConfig(*text, base);
  if (!config.ok()) return config.status();
  if (!output_dir.empty()) config->output_dir = output_dir;
  if (seed.has_value()) config->seed = *seed;
  if (auto s = RunRelease(*config); !s.ok()) return s;
  std::cout << "released " << config->queries.size() << " queries into "
            << config->output_dir << std::endl;
  return absl::OkStatus();
}

absl::Status Evaluate(EvaluateOptions options,
                      const std::vector<std::string>& attribute_names) {
  for (const std::string& name : attribute_names) {
    auto a = ParseAttribute(name);
    if (!a.ok()) return a.status();
    options.attributes.push_back(*a);
  }
  return RunEvaluate(options);
}

struct BiasSimArgs {
  std::string experiment = "ablation";
  std::string function = "sqrt";
  double delta = 0.5;
  double mu = 1.0;
  int counties = 100;
  int per_county = 2;
  double true_value = 10.0;
  int64_t trials = 100000;
  uint64_t seed = 1;
  int n = 2;
  double tau = 1.0;
  double sigma = 1.0;
  double x = 10.0;
  double c = 1.0;
  std::string out;
};

absl::Status BiasSim(const BiasSimArgs& args) {
  std::ostringstream csv;
  if (args.experiment == "ablation") {
    AblationConfig config;
    if (args.function == "sqrt") {
      config.function = AblationFunction::kSqrt;
    } else if (args.function == "log") {
      config.function = AblationFunction::kLog;
    } else if (args.function == "linear") {
      config.function = AblationFunction::kLinear;
    } else {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown function '", args.function, "'"));
    }
    config.delta = args.delta;
    config.mu = args.mu;
    config.counties = args.counties;
    config.per_county = args.per_county;
    config.true_value = args.true_value;
    config.trials = args.trials;
    config.seed = args.seed;
    auto results = RunAblation(config);
    if (!results.ok()) return results.status();
    csv << "mode,id_mse,id_se,county_mse,county_se,total_mse,total_se,"
           "floor_hit_rate\n";
    std::cout << absl::StrFormat(
        "%s delta=%g mu=%g, %d counties x %d, %d trials\n", args.function,
        args.delta, args.mu, args.counties, args.per_county, args.trials);
    std::cout << absl::StrFormat("%-7s %16s %16s %20s\n", "mode", "ID", "County",
                                 "Total");
    for (const AblationModeResult& r : *results) {
      csv << VarianceModeName(r.mode);
      for (int k = 0; k < 3; ++k) {
        csv << absl::StrFormat(",%.10g,%.10g", r.mse[k], r.se[k]);
      }
      csv << absl::StrFormat(",%.10g\n", r.floor_hit_rate);
      std::cout << absl::StrFormat(
          "%-7s %9.3f (%.3f) %9.3f (%.3f) %12.1f (%.1f)\n",
          VarianceModeName(r.mode), r.mse[0], r.se[0], r.mse[1], r.se[1],
          r.mse[2], r.se[2]);
    }
  } else if (args.experiment == "case2") {
    RngStream rng(args.seed, 0);
    auto r = Case2MonteCarlo(args.n, args.tau, args.sigma, args.x, args.trials, rng);
    if (!r.ok()) return r.status();
    const double base = args.sigma * args.sigma / args.n;
    csv << "n,tau,mean,mean_se,mse_ratio,mse_ratio_se,factor\n";
    csv << absl::StrFormat("%d,%g,%.10g,%.10g,%.10g,%.10g,%.10g\n", args.n,
                           args.tau, r->mean, r->mean_se, r->mse / base,
                           r->mse_se / base, Case2Factor(args.n, args.tau));
    std::cout << absl::StrFormat(
        "case 2: MSE/(sigma^2/n) = %.4f +- %.4f, closed form %.4f\n",
        r->mse / base, r->mse_se / base, Case2Factor(args.n, args.tau));
  } else if (args.experiment == "case3") {
    RngStream rng(args.seed, 0);
    auto r = Case3MonteCarlo(args.n, args.x, args.c, args.trials, rng);
    if (!r.ok()) return r.status();
    const double theta = Case3ExpectedGuess(args.n, args.x, args.c);
    csv << "n,x,c,mean,mean_se,closed_form\n";
    csv << absl::StrFormat("%d,%g,%g,%.10g,%.10g,%.10g\n", args.n, args.x,
                           args.c, r->mean, r->mean_se, theta);
    std::cout << absl::StrFormat("case 3: mean guess %.4f +- %.4f, closed form %.4f\n",
                                 r->mean, r->mean_se, theta);
  } else {
    return absl::InvalidArgumentError(
        absl::StrCat("unknown experiment '", args.experiment, "'"));
  }
  if (!args.out.empty()) {
    std::ofstream out(args.out);
    if (!out) return absl::PermissionDeniedError(absl::StrCat("cannot write ", args.out));
    out << csv.str();
  }
  return absl::OkStatus();
}

absl::Status ComposeCommand(const std::vector<double>& mus, int repeat,
                            const std::string& config_path) {
  std::vector<std::pair<std::string, double>> rows;
  if (!config_path.empty()) {
    auto text = Slurp(config_path);
    if (!text.ok()) return text.status();
    auto config = ParseRunConfig(*text);
    if (!config.ok()) return config.status();
    for (const QuerySpec& q : config->queries) {
      for (const auto& [attribute, mu] : q.mu) {
        rows.emplace_back(absl::StrCat(q.label, "/", AttributeName(attribute)), mu);
      }
    }
  } else {
    if (repeat < 1) return absl::InvalidArgumentError("--repeat must be >= 1");
    for (int r = 0; r < repeat; ++r) {
      for (size_t i = 0; i < mus.size(); ++i) {
        rows.emplace_back(absl::StrCat("r", r + 1, "/q", i + 1), mus[i]);
      }
    }
  }
  std::vector<double> values;
  std::cout << absl::StrFormat("%-24s %10s\n", "release", "mu");
  for (const auto& [label, mu] : rows) {
    std::cout << absl::StrFormat("%-24s %10.4f\n", label, mu);
    values.push_back(mu);
  }
  auto total = Compose(values);
  if (!total.ok()) return total.status();
  std::cout << absl::StrFormat("%-24s %10.4f\n", "composed", *total);
  return absl::OkStatus();
}

}  // namespace
}  // namespace gedp

int main(int argc, char** argv) {
  using namespace gedp;
  CLI::App app{"GEDP release, reconstruction and evaluation tool"};
  app.require_subcommand(1);

  std::string nf_spec;
  std::string nf_file;
  ValidationGrid grid;
  auto* validate = app.add_subcommand("validate-nf", "Check a neighbor function");
  validate->add_option("--spec", nf_spec, "JSON neighbor-function block");
  validate->add_option("--spec-file", nf_file, "File holding the JSON block");
  validate->add_option("--x-min", grid.x_min, "Smallest grid point");
  validate->add_option("--x-max", grid.x_max, "Largest grid point");
  validate->add_option("--points", grid.points, "Grid size");

  std::string cells_path;
  std::string synth_out;
  SyngenOptions syngen;
  auto* synth = app.add_subcommand("synth", "Generate establishments from cell totals");
  synth->add_option("--cells", cells_path, "Cell totals CSV")->required();
  synth->add_option("--out", synth_out, "Output establishment CSV")->required();
  synth->add_option("--seed", syngen.seed, "Random seed");
  synth->add_option("--alpha", syngen.alpha_prior, "Gamma prior shape");
  synth->add_option("--theta", syngen.theta_prior, "Gamma prior scale");
  synth->add_option("--eta", syngen.eta, "Month-2 noise parameter");

  std::string config_path;
  std::string output_dir;
  std::optional<uint64_t> run_seed;
  auto* run = app.add_subcommand("run", "Release a workload of noisy queries");
  run->add_option("--config", config_path, "Run configuration JSON")->required();
  run->add_option("--output-dir", output_dir, "Override output_dir");
  run->add_option("--seed", run_seed, "Override seed");

  PostprocessOptions post;
  auto* postprocess =
      app.add_subcommand("postprocess", "Reconstruct microdata from a run");
  postprocess->add_option("--run-dir", post.run_dir, "Run output directory")
      ->required();
  postprocess->add_option("--out", post.output_csv, "Microdata CSV")->required();
  postprocess->add_flag("--nonnegative", post.nonnegative,
                        "Constrain estimates to be >= 0");

  EvaluateOptions eval;
  std::vector<std::string> eval_attributes = {"m1emp", "m2emp", "m3emp", "wage"};
  eval.groupers = {"total", "county", "naics2", "county_naics2"};
  auto* evaluate = app.add_subcommand("evaluate", "Compare microdata with truth");
  evaluate->add_option("--microdata", eval.microdata_csv, "Reconstructed CSV")
      ->required();
  evaluate->add_option("--truth", eval.truth_csv, "Ground-truth CSV")->required();
  evaluate->add_option("--groupers", eval.groupers, "Groupers to evaluate")
      ->delimiter(',');
  evaluate->add_option("--attributes", eval_attributes, "Attributes")
      ->delimiter(',');
  evaluate->add_option("--metrics", eval.metrics_json, "Metrics JSON output")
      ->required();
  evaluate->add_option("--scatter", eval.scatter_csv, "Scatter CSV output")
      ->required();

  BiasSimArgs bias;
  auto* bias_sim = app.add_subcommand("bias-sim", "Variance-estimation bias studies");
  bias_sim->add_option("--experiment", bias.experiment, "ablation, case2 or case3");
  bias_sim->add_option("--function", bias.function, "sqrt, log or linear");
  bias_sim->add_option("--delta", bias.delta, "Distance parameter");
  bias_sim->add_option("--mu", bias.mu, "Privacy parameter per query");
  bias_sim->add_option("--counties", bias.counties, "Number of counties");
  bias_sim->add_option("--per-county", bias.per_county, "Establishments per county");
  bias_sim->add_option("--true-value", bias.true_value, "Value per establishment");
  bias_sim->add_option("--trials", bias.trials, "Monte-Carlo trials");
  bias_sim->add_option("--seed", bias.seed, "Random seed");
  bias_sim->add_option("--n", bias.n, "Answers per estimate (cases 2, 3)");
  bias_sim->add_option("--tau", bias.tau, "Variance-estimate precision (case 2)");
  bias_sim->add_option("--sigma", bias.sigma, "Noise sd (case 2)");
  bias_sim->add_option("--x", bias.x, "True value (cases 2, 3)");
  bias_sim->add_option("--c", bias.c, "Dispersion constant (case 3)");
  bias_sim->add_option("--out", bias.out, "CSV output");

  std::vector<double> mus;
  int repeat = 1;
  std::string compose_config;
  auto* compose = app.add_subcommand("compose", "Compose privacy budgets");
  compose->add_option("--mu", mus, "Per-release budgets")->delimiter(',');
  compose->add_option("--repeat", repeat, "Repeat the list this many times");
  compose->add_option("--config", compose_config, "Take budgets from a run config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return ReportError(absl::InvalidArgumentError(e.what()));
  }

  absl::Status status;
  if (*validate) {
    if (!nf_file.empty()) {
      auto text = Slurp(nf_file);
      if (!text.ok()) return ReportError(text.status());
      nf_spec = *text;
    }
    if (nf_spec.empty()) {
      return ReportError(absl::InvalidArgumentError("--spec or --spec-file required"));
    }
    status = ValidateNf(nf_spec, grid);
  } else if (*synth) {
    status = Synth(cells_path, synth_out, syngen);
  } else if (*run) {
    status = Run(config_path, output_dir, run_seed);
  } else if (*postprocess) {
    status = RunPostprocess(post);
  } else if (*evaluate) {
    status = Evaluate(eval, eval_attributes);
  } else if (*bias_sim) {
    status = BiasSim(bias);
  } else if (*compose) {
    if (mus.empty() && compose_config.empty()) {
      return ReportError(absl::InvalidArgumentError("--mu or --config required"));
    }
    status = ComposeCommand(mus, repeat, compose_config);
  }
  return status.ok() ? 0 : ReportError(status);
}
