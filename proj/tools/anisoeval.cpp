// Copyright 2026 The AnisoEval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "anisoeval/commands.hpp"
#include "anisoeval/errors.hpp"
#include "anisoeval/json_io.hpp"

namespace {

using namespace anisoeval;

int run(int argc, char** argv) {
  CLI::App app{"anisoeval - cost-aware stratified LLM evaluation and anisotropy diagnostics"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;

  // ingest
  auto* ingest = app.add_subcommand("ingest", "validate and decontaminate a dataset");
  std::string dataset_path;
  std::string ingest_out = "out";
  std::optional<std::string> corpus_path;
  ingest->add_option("dataset", dataset_path, "JSONL dataset, one sample per line")
      ->required();
  ingest->add_option("--corpus", corpus_path,
                     "reference corpus: directory of .txt files or JSONL of {doc_id,text}");
  ingest->add_option("--out", ingest_out, "output directory");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "run one model through the scheduler");
  std::string model_id;
  std::string mode_str;  // empty: use the config's mode, default dynamic
  evaluate->add_option("--config", config_path, "project config JSON")->required();
  evaluate->add_option("model", model_id, "model id from the config")->required();
  evaluate->add_option("--mode", mode_str, "dynamic | full_set")
      ->check(CLI::IsMember({"dynamic", "full_set"}));
  evaluate->add_option("--seed", seed, "override the scheduler seed");
  evaluate->add_option("--out", out_dir, "override the output directory");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "build leaderboards and diagnostics from runs");
  std::vector<std::string> run_files;
  analyze->add_option("--config", config_path, "project config JSON")->required();
  analyze->add_option("runs", run_files, "run files (*.run.jsonl)")->required();
  analyze->add_option("--out", out_dir, "override the output directory");

  // control
  auto* control = app.add_subcommand(
      "control", "dynamic vs full-set control experiment on the synthetic cohort");
  std::size_t cohort_size = 50;
  control->add_option("--config", config_path, "project config JSON")->required();
  control->add_option("--cohort", cohort_size, "cohort size cap");
  control->add_option("--seed", seed, "override the scheduler seed");
  control->add_option("--out", out_dir, "override the output directory");

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset and config");
  commands::GenSpec gen_spec;
  std::string cohort_kind = "anisotropic";
  gen->add_option("--dimensions", gen_spec.dimensions, "dimension ids");
  gen->add_option("--per-dim", gen_spec.samples_per_dimension, "samples per dimension");
  gen->add_option("--models", gen_spec.cohort_size, "synthetic cohort size");
  gen->add_option("--cohort", cohort_kind, "anisotropic | isotropic")
      ->check(CLI::IsMember({"anisotropic", "isotropic"}));
  gen->add_option("--seed", gen_spec.seed, "generator seed");
  gen->add_option("--out", gen_spec.out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  if (ingest->parsed()) {
    const auto result = commands::cmd_ingest(dataset_path, corpus_path, ingest_out);
    std::cout << "ingested " << result.total << " samples: " << result.active
              << " active, " << result.flagged << " flagged\n"
              << "active set: " << result.active_path << "\n"
              << "flag report: " << result.flags_path << "\n";
    return 0;
  }

  if (evaluate->parsed()) {
    const auto config = commands::load_config(config_path);
    const auto mode = mode_str.empty() ? config.default_mode
                                       : scheduler::run_mode_from_string(mode_str);
    const auto result = commands::cmd_evaluate(config, model_id, mode, seed, out_dir);
    std::cout << result.printed << "run file: " << result.run_path << "\n";
    return 0;
  }

  if (analyze->parsed()) {
    const auto config = commands::load_config(config_path);
    const auto result = commands::cmd_analyze(config, run_files, out_dir);
    std::cout << "analysis report: " << result.report_path << "\n";
    for (const auto& path : result.leaderboard_paths)
      std::cout << "leaderboard: " << path << "\n";
    std::cout << "rank trajectories: " << result.trajectories_path << "\n";
    return 0;
  }

  if (control->parsed()) {
    const auto config = commands::load_config(config_path);
    const auto result = commands::cmd_control(config, cohort_size, seed, out_dir);
    std::cout << "control report: " << result.report_path << "\n"
              << "mean RSA dynamic=" << result.report["mean_rsa_dynamic"]
              << " full_set=" << result.report["mean_rsa_full_set"]
              << " rho=" << result.report["spearman_rho"] << "\n";
    return 0;
  }

  if (gen->parsed()) {
    gen_spec.isotropic = cohort_kind == "isotropic";
    const auto result = commands::cmd_gen(gen_spec);
    std::cout << "dataset: " << result.dataset_path << "\n"
              << "config: " << result.config_path << "\n";
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << Json{{"error", e.code()}, {"message", e.message()}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << Json{{"error", "Internal"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
}
