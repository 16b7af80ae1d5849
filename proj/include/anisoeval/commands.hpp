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

#pragma once

// Command layer behind the anisoeval CLI. Each command is a plain function
// over a loaded ProjectConfig so the test suites can drive it directly;
// tools/anisoeval.cpp only parses arguments. All outputs are idempotent for
// a fixed seed: re-running overwrites byte-identical files.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "anisoeval/json_io.hpp"
#include "anisoeval/oracle.hpp"
#include "anisoeval/scheduler.hpp"
#include "anisoeval/types.hpp"

namespace anisoeval::commands {

using ModelEntry = std::variant<ModelDescriptor, oracle::SyntheticProfile>;

struct ProjectConfig {
  std::string dataset_path;
  std::vector<std::string> dimensions;
  scheduler::SchedulerConfig scheduler;
  scheduler::RunMode default_mode = scheduler::RunMode::Dynamic;
  std::vector<WeightScheme> schemes;  // empty -> default three schemes
  std::vector<ModelEntry> models;
  std::string output_dir = "out";

  const ModelEntry& find_model(const std::string& id) const;
};

/// The seven canonical capability dimensions the default schemes weight.
const std::vector<std::string>& default_dimensions();

/// The three default weighting schemes (general-heavy, professional-heavy,
/// reasoning-heavy). Requires the canonical dimensions to be configured.
std::vector<WeightScheme> default_schemes(const std::vector<std::string>& dimensions);

ProjectConfig load_config(const std::string& path);

struct IngestResult {
  std::size_t total = 0;
  std::size_t active = 0;
  std::size_t flagged = 0;
  std::string active_path;
  std::string public_path;
  std::string flags_path;
};

/// Validates and persists a dataset; contaminated samples are excluded from
/// the active set and reported. The public export never contains
/// private-tier samples.
IngestResult cmd_ingest(const std::string& dataset_path,
                        const std::optional<std::string>& corpus_path,
                        const std::string& out_dir);

struct EvaluateResult {
  std::string run_path;
  scheduler::EvaluationRun run;
  double full_set_cost = 0.0;
  double cost_ratio = 0.0;
  scheduler::Estimate estimate;
  std::string printed;  // per-dimension table as printed to stdout
};

EvaluateResult cmd_evaluate(const ProjectConfig& config, const std::string& model_id,
                            scheduler::RunMode mode,
                            std::optional<std::uint64_t> seed_override = std::nullopt,
                            const std::string& out_dir_override = {});

struct AnalyzeResult {
  std::string report_path;
  std::vector<std::string> leaderboard_paths;
  std::string trajectories_path;
  Json report;
};

AnalyzeResult cmd_analyze(const ProjectConfig& config,
                          const std::vector<std::string>& run_files,
                          const std::string& out_dir_override = {});

struct ControlResult {
  std::string report_path;
  Json report;
};

/// Evaluates the configured synthetic cohort in both dynamic and full-set
/// modes and reports mean RSA for each, their difference, and the Spearman
/// correlation between the two overall rankings.
ControlResult cmd_control(const ProjectConfig& config, std::size_t cohort_size,
                          std::optional<std::uint64_t> seed_override = std::nullopt,
                          const std::string& out_dir_override = {});

struct GenSpec {
  std::vector<std::string> dimensions;  // empty -> canonical seven
  std::int64_t samples_per_dimension = 1000;
  std::size_t cohort_size = 20;
  bool isotropic = false;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
};

struct GenResult {
  std::string dataset_path;
  std::string config_path;
};

/// Writes a synthetic dataset plus a ready-to-run config, for demos and the
/// control experiment.
GenResult cmd_gen(const GenSpec& spec);

}  // namespace anisoeval::commands
