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

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "anisoeval/exact_sum.hpp"

namespace anisoeval {

// ---------------------------------------------------------------------------
// Benchmark structure: every sample sits in a (knowledge domain) x (cognitive
// capability) cell. Strata, weight schemes and score matrices all key on the
// capability id, which we call the sample's dimension. The dimension list is
// configuration data, not code.
// ---------------------------------------------------------------------------

struct CapabilityCell {
  std::string domain;
  std::string capability;

  bool operator==(const CapabilityCell&) const = default;
};

struct ToolStep {
  std::string tool;
  std::string args;

  bool operator==(const ToolStep&) const = default;
};

// Gold answer variants, one per scoring path:
//   labels  -> deterministic exact matching (any listed answer accepted)
//   numeric -> symbolic/numeric equality
//   text    -> semi-objective reference, scored through the semantic cascade
//   trace   -> agent tasks, scored by tool-use composite metrics
using GoldAnswer =
    std::variant<std::string, double, std::vector<std::string>, std::vector<ToolStep>>;

enum class SourceTier { Fresh, Refined, Private };

std::string to_string(SourceTier tier);
SourceTier source_tier_from_string(const std::string& s);

struct Sample {
  std::string id;
  CapabilityCell cell;
  std::string task_type;
  std::string prompt;
  std::string constraints;
  GoldAnswer gold;
  double unit_cost = 0.0;
  SourceTier source_tier = SourceTier::Fresh;
  std::string created_at;           // ISO-8601
  double difficulty = 0.0;          // optional metadata, defaults to 0
  std::string subtask;              // optional sub-task id metadata

  /// The stratification key.
  const std::string& dimension() const { return cell.capability; }

  bool operator==(const Sample&) const = default;
};

struct Stratum {
  std::string id;                   // capability dimension id
  std::int64_t population_size = 0; // N_h
  double weight = 0.0;              // W_h = N_h / N
  double unit_cost = 0.0;           // c_h, mean cost per sample

  bool operator==(const Stratum&) const = default;
};

/// Sufficient statistics for one stratum of one evaluation run. Sums are
/// kept exactly (see ExactSum) so that merging accumulators is commutative
/// and associative down to the bit, which is what makes concurrent runs
/// byte-deterministic.
class StratumAccumulator {
 public:
  StratumAccumulator() = default;

  void add(const std::string& sample_id, double score);
  void merge(const StratumAccumulator& other);

  std::int64_t n() const { return static_cast<std::int64_t>(drawn_ids_.size()); }
  double sum() const { return sum_.value(); }
  double sum_sq() const { return sum_sq_.value(); }
  const std::set<std::string>& drawn_ids() const { return drawn_ids_; }

  bool has_drawn(const std::string& sample_id) const {
    return drawn_ids_.count(sample_id) != 0;
  }

  double mean() const;       // requires n >= 1
  double variance() const;   // sample variance S^2, requires n >= 2
  double stddev() const;     // sqrt(max(variance, 0)), 0 when n < 2

  static StratumAccumulator from_stats(std::int64_t n, double sum, double sum_sq,
                                       std::set<std::string> drawn_ids);

  bool operator==(const StratumAccumulator& other) const {
    return n() == other.n() && sum() == other.sum() && sum_sq() == other.sum_sq() &&
           drawn_ids_ == other.drawn_ids_;
  }

 private:
  ExactSum sum_;
  ExactSum sum_sq_;
  std::set<std::string> drawn_ids_;
};

enum class ModelCategory { Commercial, OpenSource, MultiAgent };

std::string to_string(ModelCategory c);
ModelCategory model_category_from_string(const std::string& s);

/// A real model behind an HTTP endpoint, or a seeded synthetic one.
/// Exactly one of endpoint / seed is set.
struct ModelDescriptor {
  std::string id;
  ModelCategory category = ModelCategory::Commercial;
  std::optional<std::string> endpoint;
  std::optional<double> price_per_1k_tokens;
  std::optional<std::uint64_t> seed;
  std::string provider;  // env-var key for auth; defaults from the endpoint host

  void validate() const;

  bool operator==(const ModelDescriptor&) const = default;
};

struct WeightScheme {
  std::string name;
  std::map<std::string, double> weights;  // dimension id -> weight in [0,1]

  bool operator==(const WeightScheme&) const = default;
};

struct ScoreMatrix {
  std::vector<std::string> model_ids;
  std::vector<std::string> dimension_ids;
  std::vector<std::vector<double>> raw;         // models x K, in [0,1]
  std::vector<std::vector<double>> normalized;  // models x K, in [0,1]
  std::vector<double> difficulty;               // beta_k, in (0,1]

  std::size_t num_models() const { return model_ids.size(); }
  std::size_t num_dimensions() const { return dimension_ids.size(); }

  void validate() const;

  bool operator==(const ScoreMatrix&) const = default;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Groups the dataset by dimension: one stratum per dimension present, with
/// W_h = N_h / N and c_h the mean unit cost inside the stratum. Strata are
/// returned sorted by id. `dimensions`, when nonempty, is the configured
/// dimension list; samples outside it raise UnknownDimension.
std::vector<Stratum> build_strata(const std::vector<Sample>& dataset,
                                  const std::vector<std::string>& dimensions = {});

/// Checks the scheme invariants: known dimensions, nonnegative weights,
/// sum within 1e-9 of 1. Throws on violation.
void validate_scheme(const WeightScheme& scheme,
                     const std::vector<std::string>& dimensions);

}  // namespace anisoeval
