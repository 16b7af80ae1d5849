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

// Anisotropy and ranking-stability diagnostics: difficulty-adjusted
// normalization, the anisotropy index, capability inconsistency, rank
// trajectories across weight schemes, bootstrap and KS significance, and
// correlation utilities.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "anisoeval/types.hpp"

namespace anisoeval::analytics {

inline constexpr double kDifficultyFloor = 0.05;
inline constexpr double kInconsistencyEpsilon = 0.1;
inline constexpr double kGeneralizationGapThreshold = 0.15;

/// Global difficulty per dimension: the mean raw score of the top_n anchor
/// models (anchors ranked by unweighted mean raw score, ties by model id),
/// floored at kDifficultyFloor.
std::vector<double> anchor_difficulty(const std::vector<std::vector<double>>& raw,
                                      const std::vector<std::string>& model_ids,
                                      std::size_t top_n = 10);

/// s_{m,k} = min(r_{m,k} / beta_k, 1).
std::vector<std::vector<double>> normalize_scores(
    const std::vector<std::vector<double>>& raw, const std::vector<double>& beta);

/// One minus the mean pairwise Pearson correlation between dimension score
/// columns. Zero-variance dimensions are excluded from the pairing; a matrix
/// with no valid pair is degenerate.
double anisotropy_index(const std::vector<std::vector<double>>& scores);

/// Regularized coefficient of variation of one model's dimension scores,
/// with population (1/K) variance.
double capability_inconsistency(const std::vector<double>& scores,
                                double epsilon = kInconsistencyEpsilon);

/// Dimension gap score: max - min of the score vector.
double dgs(const std::vector<double>& scores);

struct Ranking {
  std::string scheme_name;
  std::vector<std::string> ordered_ids;        // rank 1 first
  std::map<std::string, double> overall;       // model -> weighted sum
  std::map<std::string, std::int64_t> rank_of; // model -> 1-based rank
};

/// Weighted-sum ranking under one scheme. Rank 1 is the highest overall
/// score; exact ties break by ascending model id.
Ranking rank_under_scheme(const std::vector<std::vector<double>>& scores,
                          const std::vector<std::string>& model_ids,
                          const std::vector<std::string>& dimension_ids,
                          const WeightScheme& scheme);

struct RankTrajectory {
  std::string model_id;
  std::map<std::string, std::int64_t> ranks;  // scheme name -> rank
  std::int64_t rsa = 0;                       // max rank - min rank
};

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
};

struct KsResult {
  double d = 0.0;
  double p = 1.0;
};

struct StabilityReport {
  double mean_rsa = 0.0;
  double share_rsa_ge_10 = 0.0;
  double share_rsa_ge_20 = 0.0;
  ConfidenceInterval bootstrap_ci;  // 95% CI of the mean RSA
  KsResult ks;                      // vs the baseline RSA sample, if given
};

/// Per-model rank displacement across >= 2 schemes. Every model must be
/// ranked under every scheme.
std::vector<RankTrajectory> rank_trajectories(const std::vector<Ranking>& rankings);

StabilityReport make_stability_report(
    const std::vector<double>& rsa_values, std::uint64_t seed, int iters = 1000,
    const std::optional<std::vector<double>>& baseline_rsa = std::nullopt);

struct PairedBootstrapResult {
  ConfidenceInterval mean_a;
  ConfidenceInterval mean_b;
  ConfidenceInterval mean_diff;  // a - b
};

/// Percentile (2.5%, 97.5%) intervals from `iters` paired resamples of the
/// model indices. Deterministic for a fixed seed.
PairedBootstrapResult paired_bootstrap(const std::vector<double>& rsa_a,
                                       const std::vector<double>& rsa_b,
                                       int iters = 1000, std::uint64_t seed = 0);

ConfidenceInterval bootstrap_mean_ci(const std::vector<double>& xs, int iters,
                                     std::uint64_t seed);

/// Two-sample Kolmogorov-Smirnov statistic with the asymptotic p-value at
/// effective size n_x n_y / (n_x + n_y).
KsResult ks_statistic(const std::vector<double>& xs, const std::vector<double>& ys);

struct GapResult {
  double gap = 0.0;
  bool flagged = false;
  double reported_score = 0.0;  // min(public, private) when flagged
};

GapResult generalization_gap(double public_score, double private_score);

double pearson(const std::vector<double>& x, const std::vector<double>& y);
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Average ranks (1-based, ties averaged), the transform behind spearman.
std::vector<double> average_ranks(const std::vector<double>& x);

}  // namespace anisoeval::analytics
