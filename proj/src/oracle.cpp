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

#include "anisoeval/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "anisoeval/errors.hpp"
#include "anisoeval/exact_sum.hpp"
#include "anisoeval/json_io.hpp"
#include "anisoeval/rng.hpp"

namespace anisoeval::oracle {

std::string to_string(Grading g) { return g == Grading::Binary ? "binary" : "graded"; }

Grading grading_from_string(const std::string& s) {
  if (s == "binary") return Grading::Binary;
  if (s == "graded") return Grading::Graded;
  fail("InvalidEnum", "unknown grading '" + s + "'");
}

void SyntheticProfile::validate() const {
  require(!model_id.empty(), "InvalidProfile", "profile model_id empty");
  for (const auto& [dim, a] : ability)
    require(a >= 0.0 && a <= 1.0, "InvalidProfile",
            "ability for '" + dim + "' outside [0,1]");
  require(std::isfinite(difficulty_sensitivity) && difficulty_sensitivity >= 0.0,
          "InvalidProfile", "difficulty_sensitivity must be finite and >= 0");
  require(std::isfinite(concentration) && concentration > 0.0, "InvalidProfile",
          "concentration must be finite and > 0");
}

std::string gold_as_text(const GoldAnswer& gold) {
  if (const auto* text = std::get_if<std::string>(&gold)) return *text;
  if (const auto* num = std::get_if<double>(&gold)) return fmt_double(*num);
  if (const auto* labels = std::get_if<std::vector<std::string>>(&gold))
    return labels->empty() ? std::string{} : labels->front();
  return to_json(gold).dump();  // tool trace as a JSON array
}

Response synthetic_respond(const SyntheticProfile& profile, const Sample& sample) {
  const auto it = profile.ability.find(sample.dimension());
  if (it == profile.ability.end())
    fail("UnknownDimension", "profile '" + profile.model_id +
                                 "' has no ability for dimension '" +
                                 sample.dimension() + "'");
  const double p = std::clamp(
      it->second - profile.difficulty_sensitivity * sample.difficulty, 0.0, 1.0);

  Rng rng(hash_key(profile.seed, sample.id));
  Response resp;
  if (profile.grading == Grading::Binary) {
    const bool correct = rng.bernoulli(p);
    resp.score_hint = correct ? 1.0 : 0.0;
    resp.output = correct ? gold_as_text(sample.gold)
                          : "[incorrect:" + std::to_string(rng.next_u64() & 0xffff) + "]";
  } else {
    double score;
    if (p <= 0.0) {
      score = 0.0;
    } else if (p >= 1.0) {
      score = 1.0;
    } else {
      score = rng.beta(p * profile.concentration, (1.0 - p) * profile.concentration);
    }
    resp.score_hint = std::clamp(score, 0.0, 1.0);
    resp.output = gold_as_text(sample.gold);
  }
  return resp;
}

Responder make_synthetic_responder(SyntheticProfile profile) {
  profile.validate();
  return [profile = std::move(profile)](const Sample& sample) {
    return synthetic_respond(profile, sample);
  };
}

double hint_score(const Sample& sample, const Response& response) {
  require(response.score_hint.has_value(), "MissingHint",
          "no score hint on response for sample '" + sample.id + "'");
  return *response.score_hint;
}

std::map<std::string, double> full_set_oracle(
    const SyntheticProfile& profile, const std::vector<Sample>& dataset,
    const std::function<double(const Sample&, const Response&)>& scorer) {
  std::map<std::string, std::pair<std::int64_t, ExactSum>> per_dim;
  for (const Sample& sample : dataset) {
    const Response resp = synthetic_respond(profile, sample);
    const double score = scorer ? scorer(sample, resp) : hint_score(sample, resp);
    auto& [count, sum] = per_dim[sample.dimension()];
    ++count;
    sum.add(score);
  }
  std::map<std::string, double> means;
  for (const auto& [dim, stats] : per_dim)
    means[dim] = stats.second.value() / static_cast<double>(stats.first);
  return means;
}

std::vector<SyntheticProfile> make_anisotropic_cohort(
    std::size_t count, const std::vector<std::string>& dimensions, std::uint64_t seed,
    Grading grading) {
  require(!dimensions.empty(), "EmptyVector", "cohort needs dimensions");
  std::vector<SyntheticProfile> cohort;
  cohort.reserve(count);
  for (std::size_t m = 0; m < count; ++m) {
    SyntheticProfile p;
    p.model_id = "aniso-" + std::string(3 - std::min<std::size_t>(3, std::to_string(m).size()), '0') +
                 std::to_string(m);
    p.grading = grading;
    p.seed = hash_u64(seed, 0xA000 + m);
    for (std::size_t k = 0; k < dimensions.size(); ++k) {
      Rng rng(hash_u64(p.seed, hash_key(17, dimensions[k])));
      p.ability[dimensions[k]] = 0.3 + 0.6 * rng.next_double();
    }
    cohort.push_back(std::move(p));
  }
  return cohort;
}

std::vector<SyntheticProfile> make_isotropic_cohort(
    std::size_t count, const std::vector<std::string>& dimensions, std::uint64_t seed,
    double noise, Grading grading) {
  require(!dimensions.empty(), "EmptyVector", "cohort needs dimensions");
  const double k_count = static_cast<double>(dimensions.size());
  std::vector<SyntheticProfile> cohort;
  cohort.reserve(count);
  for (std::size_t m = 0; m < count; ++m) {
    SyntheticProfile p;
    p.model_id = "iso-" + std::string(3 - std::min<std::size_t>(3, std::to_string(m).size()), '0') +
                 std::to_string(m);
    p.grading = grading;
    p.seed = hash_u64(seed, 0xB000 + m);
    Rng urng(hash_u64(p.seed, 0x15u));
    const double u = 0.3 + 0.6 * urng.next_double();
    for (std::size_t k = 0; k < dimensions.size(); ++k) {
      // fixed stagger per dimension keeps each column monotone in u
      const double offset =
          0.05 * (static_cast<double>(k) / std::max(k_count - 1.0, 1.0) - 0.5);
      Rng nrng(hash_u64(p.seed, hash_key(23, dimensions[k])));
      const double jitter = noise * nrng.normal();
      p.ability[dimensions[k]] = std::clamp(u + offset + jitter, 0.01, 0.99);
    }
    cohort.push_back(std::move(p));
  }
  return cohort;
}

std::vector<Sample> make_synthetic_dataset(const SyntheticDatasetSpec& spec) {
  require(!spec.dimensions.empty(), "EmptyVector", "dataset needs dimensions");
  require(spec.samples_per_dimension > 0, "OutOfRange",
          "samples_per_dimension must be positive");
  require(spec.max_unit_cost >= spec.min_unit_cost && spec.min_unit_cost >= 0.0,
          "OutOfRange", "invalid unit cost range");

  std::vector<Sample> dataset;
  dataset.reserve(spec.dimensions.size() * static_cast<std::size_t>(spec.samples_per_dimension));
  for (const std::string& dim : spec.dimensions) {
    for (std::int64_t i = 0; i < spec.samples_per_dimension; ++i) {
      Sample s;
      s.id = dim + "-" + std::to_string(i);
      s.cell = CapabilityCell{"synthetic", dim};
      s.task_type = "classification";
      s.prompt = "synthetic probe " + s.id;
      s.constraints = "answer with the single label";
      s.gold = std::vector<std::string>{"ok"};
      Rng rng(hash_key(spec.seed, s.id));
      s.unit_cost =
          spec.min_unit_cost + (spec.max_unit_cost - spec.min_unit_cost) * rng.next_double();
      s.source_tier = SourceTier::Fresh;
      s.created_at = "2026-01-01T00:00:00Z";
      dataset.push_back(std::move(s));
    }
  }
  return dataset;
}

}  // namespace anisoeval::oracle
