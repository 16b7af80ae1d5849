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

#include "anisoeval/types.hpp"

#include <algorithm>
#include <cmath>

#include "anisoeval/errors.hpp"

namespace anisoeval {

std::string to_string(SourceTier tier) {
  switch (tier) {
    case SourceTier::Fresh: return "fresh";
    case SourceTier::Refined: return "refined";
    case SourceTier::Private: return "private";
  }
  return "fresh";
}

SourceTier source_tier_from_string(const std::string& s) {
  if (s == "fresh") return SourceTier::Fresh;
  if (s == "refined") return SourceTier::Refined;
  if (s == "private") return SourceTier::Private;
  fail("InvalidEnum", "unknown source tier '" + s + "'");
}

std::string to_string(ModelCategory c) {
  switch (c) {
    case ModelCategory::Commercial: return "commercial";
    case ModelCategory::OpenSource: return "open_source";
    case ModelCategory::MultiAgent: return "multi_agent";
  }
  return "commercial";
}

ModelCategory model_category_from_string(const std::string& s) {
  if (s == "commercial") return ModelCategory::Commercial;
  if (s == "open_source") return ModelCategory::OpenSource;
  if (s == "multi_agent") return ModelCategory::MultiAgent;
  fail("InvalidEnum", "unknown model category '" + s + "'");
}

void StratumAccumulator::add(const std::string& sample_id, double score) {
  const auto [_, inserted] = drawn_ids_.insert(sample_id);
  require(inserted, "DuplicateDraw", "sample '" + sample_id + "' drawn twice");
  sum_.add(score);
  sum_sq_.add(score * score);
}

void StratumAccumulator::merge(const StratumAccumulator& other) {
  for (const auto& id : other.drawn_ids_) {
    const auto [_, inserted] = drawn_ids_.insert(id);
    require(inserted, "DuplicateDraw", "sample '" + id + "' present in both accumulators");
  }
  sum_.merge(other.sum_);
  sum_sq_.merge(other.sum_sq_);
}

double StratumAccumulator::mean() const {
  require(n() >= 1, "EmptyStratum", "mean undefined for empty accumulator");
  return sum() / static_cast<double>(n());
}

double StratumAccumulator::variance() const {
  require(n() >= 2, "InsufficientSamples", "sample variance requires n >= 2");
  const double nn = static_cast<double>(n());
  const double v = (sum_sq() - sum() * sum() / nn) / (nn - 1.0);
  return std::max(v, 0.0);
}

double StratumAccumulator::stddev() const {
  if (n() < 2) return 0.0;
  return std::sqrt(variance());
}

StratumAccumulator StratumAccumulator::from_stats(std::int64_t n, double sum,
                                                  double sum_sq,
                                                  std::set<std::string> drawn_ids) {
  require(n == static_cast<std::int64_t>(drawn_ids.size()), "InvalidAccumulator",
          "n must equal |drawn_ids|");
  StratumAccumulator acc;
  acc.drawn_ids_ = std::move(drawn_ids);
  acc.sum_.reset(sum);
  acc.sum_sq_.reset(sum_sq);
  return acc;
}

void ModelDescriptor::validate() const {
  require(!id.empty(), "InvalidDescriptor", "model id empty");
  require(endpoint.has_value() != seed.has_value(), "InvalidDescriptor",
          "exactly one of endpoint / seed must be set for model '" + id + "'");
  if (price_per_1k_tokens)
    require(*price_per_1k_tokens >= 0.0, "InvalidDescriptor",
            "negative price for model '" + id + "'");
}

void ScoreMatrix::validate() const {
  const std::size_t m = num_models();
  const std::size_t k = num_dimensions();
  require(raw.size() == m && normalized.size() == m, "ShapeMismatch",
          "matrix row count must equal number of models");
  for (const auto* mat : {&raw, &normalized}) {
    for (const auto& row : *mat) {
      require(row.size() == k, "ShapeMismatch", "matrix column count must equal K");
      for (double v : row)
        require(std::isfinite(v) && v >= 0.0 && v <= 1.0, "OutOfRange",
                "score entries must be finite and in [0,1]");
    }
  }
  if (!difficulty.empty()) {
    require(difficulty.size() == k, "ShapeMismatch", "beta length must equal K");
    for (double b : difficulty)
      require(b > 0.0 && b <= 1.0, "OutOfRange", "beta_k must lie in (0,1]");
  }
}

std::vector<Stratum> build_strata(const std::vector<Sample>& dataset,
                                  const std::vector<std::string>& dimensions) {
  require(!dataset.empty(), "EmptyDataset", "cannot build strata from an empty dataset");

  std::map<std::string, std::pair<std::int64_t, ExactSum>> groups;
  for (const Sample& s : dataset) {
    if (!dimensions.empty() &&
        std::find(dimensions.begin(), dimensions.end(), s.dimension()) == dimensions.end())
      fail("UnknownDimension",
           "sample '" + s.id + "' has unconfigured dimension '" + s.dimension() + "'");
    auto& [count, cost] = groups[s.dimension()];
    ++count;
    cost.add(s.unit_cost);
  }

  const double total = static_cast<double>(dataset.size());
  std::vector<Stratum> strata;
  strata.reserve(groups.size());
  for (const auto& [dim, stats] : groups) {
    Stratum st;
    st.id = dim;
    st.population_size = stats.first;
    st.weight = static_cast<double>(stats.first) / total;
    st.unit_cost = stats.second.value() / static_cast<double>(stats.first);
    strata.push_back(std::move(st));
  }
  return strata;  // std::map iteration is already id-sorted
}

void validate_scheme(const WeightScheme& scheme,
                     const std::vector<std::string>& dimensions) {
  ExactSum total;
  for (const auto& [dim, w] : scheme.weights) {
    if (std::find(dimensions.begin(), dimensions.end(), dim) == dimensions.end())
      fail("UnknownDimension",
           "scheme '" + scheme.name + "' weights unknown dimension '" + dim + "'");
    if (!(w >= 0.0))
      fail("NegativeWeight",
           "scheme '" + scheme.name + "' has negative weight on '" + dim + "'");
    require(w <= 1.0, "OutOfRange",
            "scheme '" + scheme.name + "' weight on '" + dim + "' exceeds 1");
    total.add(w);
  }
  const double sum = total.value();
  if (std::abs(sum - 1.0) > 1e-9)
    fail("WeightSumInvalid",
         "scheme '" + scheme.name + "' weights sum to " + std::to_string(sum));
}

}  // namespace anisoeval
