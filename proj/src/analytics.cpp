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

#include "anisoeval/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "anisoeval/errors.hpp"
#include "anisoeval/exact_sum.hpp"
#include "anisoeval/rng.hpp"

namespace anisoeval::analytics {

namespace {

double mean_of(const std::vector<double>& xs) {
  ExactSum s;
  for (double x : xs) s.add(x);
  return s.value() / static_cast<double>(xs.size());
}

bool column_constant(const std::vector<std::vector<double>>& scores, std::size_t k) {
  for (std::size_t m = 1; m < scores.size(); ++m)
    if (scores[m][k] != scores[0][k]) return false;
  return true;
}

std::vector<double> column(const std::vector<std::vector<double>>& scores, std::size_t k) {
  std::vector<double> col(scores.size());
  for (std::size_t m = 0; m < scores.size(); ++m) col[m] = scores[m][k];
  return col;
}

void check_rectangular(const std::vector<std::vector<double>>& m) {
  require(!m.empty() && !m[0].empty(), "EmptyMatrix", "matrix must be nonempty");
  for (const auto& row : m)
    require(row.size() == m[0].size(), "ShapeMismatch", "ragged score matrix");
}

}  // namespace

std::vector<double> anchor_difficulty(const std::vector<std::vector<double>>& raw,
                                      const std::vector<std::string>& model_ids,
                                      std::size_t top_n) {
  check_rectangular(raw);
  require(raw.size() == model_ids.size(), "ShapeMismatch",
          "one row per model id required");
  require(model_ids.size() >= top_n, "TooFewModels",
          "need at least " + std::to_string(top_n) + " models for anchor selection");

  std::vector<std::size_t> order(model_ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> means(model_ids.size());
  for (std::size_t m = 0; m < raw.size(); ++m) means[m] = mean_of(raw[m]);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (means[a] != means[b]) return means[a] > means[b];
    return model_ids[a] < model_ids[b];
  });

  const std::size_t k_dims = raw[0].size();
  std::vector<double> beta(k_dims);
  for (std::size_t k = 0; k < k_dims; ++k) {
    ExactSum s;
    for (std::size_t i = 0; i < top_n; ++i) s.add(raw[order[i]][k]);
    beta[k] = std::max(s.value() / static_cast<double>(top_n), kDifficultyFloor);
  }
  return beta;
}

std::vector<std::vector<double>> normalize_scores(
    const std::vector<std::vector<double>>& raw, const std::vector<double>& beta) {
  check_rectangular(raw);
  require(beta.size() == raw[0].size(), "ShapeMismatch",
          "beta length must match dimension count");
  for (double b : beta) require(b > 0.0, "OutOfRange", "beta_k must be positive");

  std::vector<std::vector<double>> s(raw.size(), std::vector<double>(beta.size()));
  for (std::size_t m = 0; m < raw.size(); ++m)
    for (std::size_t k = 0; k < beta.size(); ++k)
      s[m][k] = std::min(raw[m][k] / beta[k], 1.0);
  return s;
}

double anisotropy_index(const std::vector<std::vector<double>>& scores) {
  check_rectangular(scores);
  require(scores.size() >= 2, "TooFewModels", "anisotropy needs >= 2 models");
  const std::size_t k_dims = scores[0].size();
  require(k_dims >= 2, "TooFewDimensions", "anisotropy needs >= 2 dimensions");

  std::vector<bool> usable(k_dims);
  for (std::size_t k = 0; k < k_dims; ++k) usable[k] = !column_constant(scores, k);

  ExactSum rho_sum;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < k_dims; ++i) {
    if (!usable[i]) continue;
    for (std::size_t j = i + 1; j < k_dims; ++j) {
      if (!usable[j]) continue;
      rho_sum.add(pearson(column(scores, i), column(scores, j)));
      ++pairs;
    }
  }
  require(pairs > 0, "DegenerateMatrix",
          "no dimension pair with nonzero variance");
  return 1.0 - rho_sum.value() / static_cast<double>(pairs);
}

double capability_inconsistency(const std::vector<double>& scores, double epsilon) {
  require(!scores.empty(), "EmptyVector", "score vector must be nonempty");
  for (double s : scores)
    require(s >= 0.0 && s <= 1.0, "OutOfRange", "scores must lie in [0,1]");
  if (std::all_of(scores.begin(), scores.end(),
                  [&](double s) { return s == scores[0]; }))
    return 0.0;  // sigma is exactly zero, keep it exact
  const double k = static_cast<double>(scores.size());
  const double mean = mean_of(scores);
  ExactSum sq;
  for (double s : scores) sq.add((s - mean) * (s - mean));
  const double sigma = std::sqrt(sq.value() / k);  // population variance, 1/K
  return sigma / (mean + epsilon);
}

double dgs(const std::vector<double>& scores) {
  require(!scores.empty(), "EmptyVector", "score vector must be nonempty");
  const auto [mn, mx] = std::minmax_element(scores.begin(), scores.end());
  return *mx - *mn;
}

Ranking rank_under_scheme(const std::vector<std::vector<double>>& scores,
                          const std::vector<std::string>& model_ids,
                          const std::vector<std::string>& dimension_ids,
                          const WeightScheme& scheme) {
  check_rectangular(scores);
  require(scores.size() == model_ids.size(), "ShapeMismatch",
          "one row per model id required");
  require(scores[0].size() == dimension_ids.size(), "ShapeMismatch",
          "one column per dimension required");
  for (const auto& [dim, w] : scheme.weights) {
    (void)w;
    require(std::find(dimension_ids.begin(), dimension_ids.end(), dim) !=
                dimension_ids.end(),
            "SchemeDimensionMismatch",
            "scheme '" + scheme.name + "' weights dimension '" + dim +
                "' absent from the matrix");
  }

  Ranking ranking;
  ranking.scheme_name = scheme.name;
  std::vector<std::size_t> order(model_ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> overall(model_ids.size(), 0.0);
  for (std::size_t m = 0; m < model_ids.size(); ++m) {
    ExactSum s;
    for (std::size_t k = 0; k < dimension_ids.size(); ++k) {
      const auto it = scheme.weights.find(dimension_ids[k]);
      if (it != scheme.weights.end()) s.add(it->second * scores[m][k]);
    }
    overall[m] = s.value();
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (overall[a] != overall[b]) return overall[a] > overall[b];
    return model_ids[a] < model_ids[b];
  });
  for (std::size_t r = 0; r < order.size(); ++r) {
    const std::string& id = model_ids[order[r]];
    ranking.ordered_ids.push_back(id);
    ranking.overall[id] = overall[order[r]];
    ranking.rank_of[id] = static_cast<std::int64_t>(r + 1);
  }
  return ranking;
}

std::vector<RankTrajectory> rank_trajectories(const std::vector<Ranking>& rankings) {
  require(rankings.size() >= 2, "TooFewSchemes", "trajectories need >= 2 schemes");
  const auto& reference = rankings.front();
  std::vector<RankTrajectory> trajectories;
  for (const std::string& id : reference.ordered_ids) {
    RankTrajectory t;
    t.model_id = id;
    std::int64_t lo = 0, hi = 0;
    for (const Ranking& r : rankings) {
      const auto it = r.rank_of.find(id);
      if (it == r.rank_of.end())
        fail("MissingRank",
             "model '" + id + "' not ranked under scheme '" + r.scheme_name + "'");
      t.ranks[r.scheme_name] = it->second;
      if (lo == 0 || it->second < lo) lo = it->second;
      if (it->second > hi) hi = it->second;
    }
    t.rsa = hi - lo;
    trajectories.push_back(std::move(t));
  }
  for (const Ranking& r : rankings)
    require(r.rank_of.size() == reference.rank_of.size(), "MissingRank",
            "scheme '" + r.scheme_name + "' ranks a different model set");
  return trajectories;
}

namespace {

ConfidenceInterval percentile_ci(std::vector<double> means) {
  std::sort(means.begin(), means.end());
  const auto quantile = [&](double q) {
    const std::size_t n = means.size();
    std::size_t idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
    if (idx == 0) idx = 1;
    if (idx > n) idx = n;
    return means[idx - 1];
  };
  return ConfidenceInterval{quantile(0.025), quantile(0.975)};
}

}  // namespace

ConfidenceInterval bootstrap_mean_ci(const std::vector<double>& xs, int iters,
                                     std::uint64_t seed) {
  require(!xs.empty(), "Empty", "cannot bootstrap an empty sample");
  require(iters >= 1, "OutOfRange", "iters must be >= 1");
  const std::size_t n = xs.size();
  std::vector<double> means(static_cast<std::size_t>(iters));
  for (int it = 0; it < iters; ++it) {
    Rng rng(hash_u64(seed, static_cast<std::uint64_t>(it)));
    ExactSum s;
    for (std::size_t i = 0; i < n; ++i) s.add(xs[rng.next_below(n)]);
    means[static_cast<std::size_t>(it)] = s.value() / static_cast<double>(n);
  }
  return percentile_ci(std::move(means));
}

PairedBootstrapResult paired_bootstrap(const std::vector<double>& rsa_a,
                                       const std::vector<double>& rsa_b, int iters,
                                       std::uint64_t seed) {
  require(rsa_a.size() == rsa_b.size(), "LengthMismatch",
          "paired samples must have equal length");
  require(rsa_a.size() >= 2, "LengthMismatch", "paired bootstrap needs n >= 2");
  require(iters >= 1, "OutOfRange", "iters must be >= 1");

  const std::size_t n = rsa_a.size();
  std::vector<double> means_a(static_cast<std::size_t>(iters));
  std::vector<double> means_b(static_cast<std::size_t>(iters));
  std::vector<double> means_d(static_cast<std::size_t>(iters));
  for (int it = 0; it < iters; ++it) {
    Rng rng(hash_u64(seed, static_cast<std::uint64_t>(it)));
    ExactSum sa, sb, sd;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t idx = rng.next_below(n);  // same index for both: pairing
      sa.add(rsa_a[idx]);
      sb.add(rsa_b[idx]);
      sd.add(rsa_a[idx] - rsa_b[idx]);
    }
    const double dn = static_cast<double>(n);
    means_a[static_cast<std::size_t>(it)] = sa.value() / dn;
    means_b[static_cast<std::size_t>(it)] = sb.value() / dn;
    means_d[static_cast<std::size_t>(it)] = sd.value() / dn;
  }
  return PairedBootstrapResult{percentile_ci(std::move(means_a)),
                               percentile_ci(std::move(means_b)),
                               percentile_ci(std::move(means_d))};
}

StabilityReport make_stability_report(
    const std::vector<double>& rsa_values, std::uint64_t seed, int iters,
    const std::optional<std::vector<double>>& baseline_rsa) {
  require(!rsa_values.empty(), "Empty", "no RSA values");
  StabilityReport report;
  report.mean_rsa = mean_of(rsa_values);
  double ge10 = 0.0, ge20 = 0.0;
  for (double v : rsa_values) {
    if (v >= 10.0) ge10 += 1.0;
    if (v >= 20.0) ge20 += 1.0;
  }
  report.share_rsa_ge_10 = ge10 / static_cast<double>(rsa_values.size());
  report.share_rsa_ge_20 = ge20 / static_cast<double>(rsa_values.size());
  report.bootstrap_ci = bootstrap_mean_ci(rsa_values, iters, seed);
  if (baseline_rsa && !baseline_rsa->empty())
    report.ks = ks_statistic(rsa_values, *baseline_rsa);
  return report;
}

namespace {

// Complementary CDF of the Kolmogorov distribution,
// Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda) {
  if (lambda < 1e-6) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

KsResult ks_statistic(const std::vector<double>& xs, const std::vector<double>& ys) {
  require(!xs.empty() && !ys.empty(), "Empty", "KS requires nonempty samples");
  std::vector<double> sx = xs, sy = ys;
  std::sort(sx.begin(), sx.end());
  std::sort(sy.begin(), sy.end());

  const double nx = static_cast<double>(sx.size());
  const double ny = static_cast<double>(sy.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < sx.size() && j < sy.size()) {
    const double v = std::min(sx[i], sy[j]);
    while (i < sx.size() && sx[i] <= v) ++i;
    while (j < sy.size() && sy[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }

  const double n_eff = nx * ny / (nx + ny);
  return KsResult{d, kolmogorov_q(std::sqrt(n_eff) * d)};
}

GapResult generalization_gap(double public_score, double private_score) {
  require(public_score >= 0.0 && public_score <= 1.0, "OutOfRange",
          "public score must lie in [0,1]");
  require(private_score >= 0.0 && private_score <= 1.0, "OutOfRange",
          "private score must lie in [0,1]");
  GapResult r;
  r.gap = std::abs(public_score - private_score);
  r.flagged = r.gap > kGeneralizationGapThreshold;
  r.reported_score = r.flagged ? std::min(public_score, private_score) : public_score;
  return r;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), "LengthMismatch", "vectors must have equal length");
  require(x.size() >= 2, "LengthMismatch", "correlation needs n >= 2");
  const double mx = mean_of(x);
  const double my = mean_of(y);
  ExactSum sxy, sxx, syy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy.add((x[i] - mx) * (y[i] - my));
    sxx.add((x[i] - mx) * (x[i] - mx));
    syy.add((y[i] - my) * (y[i] - my));
  }
  const double denom = std::sqrt(sxx.value()) * std::sqrt(syy.value());
  require(denom > 0.0, "ZeroVariance", "correlation undefined for constant input");
  return std::clamp(sxy.value() / denom, -1.0, 1.0);
}

std::vector<double> average_ranks(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), "LengthMismatch", "vectors must have equal length");
  require(x.size() >= 2, "LengthMismatch", "correlation needs n >= 2");
  return pearson(average_ranks(x), average_ranks(y));
}

}  // namespace anisoeval::analytics
