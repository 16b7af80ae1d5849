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

// Two-stage variance-aware sequential sampler. Stage 1 draws a pilot from
// every stratum to estimate per-stratum variance; stage 2 repeatedly splits
// each round's draw budget across the still-active strata by Neyman
// allocation under cost, until the Hoeffding-Serfling half-width of every
// stratum falls below its target (or population/budget runs out).
//
// Determinism contract: for a fixed (dataset, model, config, seed) the
// serialized run is byte-identical at any worker concurrency. Sampling
// follows per-stratum seeded permutations fixed at run start; workers only
// produce records; a single reducer folds them in (stratum, permutation
// index) order.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "anisoeval/oracle.hpp"
#include "anisoeval/scoring.hpp"
#include "anisoeval/types.hpp"

namespace anisoeval::scheduler {

inline constexpr int kMaxAttempts = 3;  // responder retries before scoring 0

struct SchedulerConfig {
  double pilot_fraction = 0.05;
  double alpha = 0.05;
  double delta = 0.01;  // target global half-width
  std::map<std::string, double> per_stratum_delta;
  std::optional<double> budget;  // total cost cap
  double batch_fraction = 0.01;
  std::uint64_t rng_seed = 0;
  int workers = 1;

  void validate() const;

  /// Per-stratum target: explicit override, else the global delta (each
  /// stratum reaching delta makes the weighted global half-width <= delta).
  double delta_for(const std::string& dimension) const;
};

enum class RunMode { Dynamic, FullSet };
enum class StopReason { Converged, BudgetExhausted, PopulationExhausted };

std::string to_string(RunMode mode);
RunMode run_mode_from_string(const std::string& s);
std::string to_string(StopReason reason);

struct SampleRecord {
  std::string sample_id;
  std::string raw_output;
  double score = 0.0;
  std::string scorer_tier;
  double latency_ms = 0.0;
  bool failed = false;
};

struct EvaluationRun {
  std::string model_id;
  RunMode mode = RunMode::Dynamic;
  std::uint64_t seed = 0;
  std::map<std::string, StratumAccumulator> per_stratum;
  std::map<std::string, StopReason> stopped_reason;
  double total_cost = 0.0;
  std::vector<SampleRecord> records;  // sorted by (stratum, permutation index)
};

using Scorer = std::function<scoring::ScoreRecord(const Sample&, const oracle::Response&)>;

/// Integer allocation of `total` samples across H strata, proportional to
/// W_h S_h / sqrt(c_h), rounded by largest remainder. Strata are capped at
/// `caps` (remaining population) with the surplus redistributed among the
/// uncapped; if every S_h is zero the split falls back to proportional to
/// W_h.
std::vector<std::int64_t> neyman_allocation(const std::vector<double>& weights,
                                            const std::vector<double>& stddevs,
                                            const std::vector<double>& costs,
                                            std::int64_t total,
                                            const std::vector<std::int64_t>& caps = {});

/// Half-width t solving 2 exp(-2 n t^2 / (1 - (n-1)/N)) = alpha, i.e.
/// t = sqrt((1 - (n-1)/N) ln(2/alpha) / (2n)). Strictly decreasing in n for
/// fixed N and alpha; at n = N it reduces to sqrt(ln(2/alpha) / (2 N^2)).
double hs_halfwidth(std::int64_t n, std::int64_t population, double alpha);

/// Stop when the population is exhausted or the distribution-free bound at
/// the Bonferroni-split level alpha/num_strata is below delta_h. Fewer than
/// two draws never stop (keep sampling), matching the pilot floor.
bool should_stop(const StratumAccumulator& acc, std::int64_t population,
                 const SchedulerConfig& config, double delta_h, std::size_t num_strata);

/// Pilot sizes, aligned with `strata`: max(2, ceil(pilot_fraction * N_h)),
/// capped at N_h.
std::vector<std::int64_t> pilot_allocation(const std::vector<Stratum>& strata,
                                           const SchedulerConfig& config);

struct Estimate {
  double mu_hat = 0.0;
  double halfwidth = 0.0;
};

/// Global estimate mu = sum W_h mu_h with the conservative linear
/// composition of per-stratum half-widths at level alpha/H.
Estimate stratified_estimate(const EvaluationRun& run, const std::vector<Stratum>& strata,
                             const SchedulerConfig& config);

/// Full two-stage run (or census in full-set mode). The responder is called
/// up to kMaxAttempts times per sample; a sample that keeps failing is
/// scored 0 and flagged.
EvaluationRun run_evaluation(const std::string& model_id,
                             const std::vector<Sample>& dataset,
                             const std::vector<Stratum>& strata,
                             const SchedulerConfig& config,
                             const oracle::Responder& responder, const Scorer& scorer,
                             RunMode mode = RunMode::Dynamic);

/// Scorer that trusts the responder's score hint (synthetic runs) and falls
/// back to the hybrid cascade otherwise.
Scorer make_hint_scorer();

/// Scorer running the full verification cascade; the think-span is stripped
/// before scoring.
Scorer make_hybrid_scorer(scoring::SimilarityFn similarity_fn, scoring::JudgeFn judge_fn);

// --- run file format: JSON-Lines of records, then one summary object ---

std::string serialize_run(const EvaluationRun& run, const std::vector<Stratum>& strata,
                          const SchedulerConfig& config);

struct StratumSummary {
  std::int64_t n = 0;
  double mean = 0.0;
  double halfwidth = 0.0;
  std::string stopped_reason;
};

struct RunSummary {
  std::string model_id;
  std::string mode;
  std::uint64_t seed = 0;
  double total_cost = 0.0;
  double full_set_cost = 0.0;
  double mu_hat = 0.0;
  double halfwidth = 0.0;
  std::map<std::string, StratumSummary> per_stratum;
};

RunSummary parse_run_file(const std::string& content);

}  // namespace anisoeval::scheduler
