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

// Synthetic model simulator with known ground truth. Draws are stateless
// functions of hash(profile.seed, sample.id), so results are identical
// across repeated calls, worker placement and concurrency level.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "anisoeval/types.hpp"

namespace anisoeval::oracle {

enum class Grading { Binary, Graded };

std::string to_string(Grading g);
Grading grading_from_string(const std::string& s);

struct SyntheticProfile {
  std::string model_id;
  std::map<std::string, double> ability;  // dimension -> a in [0,1]
  double difficulty_sensitivity = 0.0;    // gamma >= 0
  Grading grading = Grading::Binary;
  double concentration = 16.0;            // nu > 0, graded mode only
  std::uint64_t seed = 0;

  void validate() const;
};

/// What a responder hands back for one sample. score_hint is set by the
/// synthetic simulator (graded draws cannot be reconstructed from text).
struct Response {
  std::string output;
  double latency_ms = 0.0;
  std::optional<double> score_hint;
};

using Responder = std::function<Response(const Sample&)>;

/// Success probability p = clamp(a - gamma * difficulty, 0, 1); binary mode
/// draws Bernoulli(p), graded mode draws Beta with mean p and concentration
/// nu. Pure: identical output for identical (profile.seed, sample.id).
Response synthetic_respond(const SyntheticProfile& profile, const Sample& sample);

Responder make_synthetic_responder(SyntheticProfile profile);

/// Renders a gold answer the way a fully correct model would state it.
std::string gold_as_text(const GoldAnswer& gold);

/// Census evaluation: every sample scored exactly once; exact per-stratum
/// means, the ground truth for control experiments and coverage tests.
std::map<std::string, double> full_set_oracle(
    const SyntheticProfile& profile, const std::vector<Sample>& dataset,
    const std::function<double(const Sample&, const Response&)>& scorer);

/// Default scorer for synthetic runs: the simulator's score hint.
double hint_score(const Sample& sample, const Response& response);

// --- cohort and dataset construction (synthetic stand-ins for a real model
// --- fleet; used by the control experiment and the test suites)

/// Independent per-dimension abilities ~ Uniform[0.3, 0.9].
std::vector<SyntheticProfile> make_anisotropic_cohort(
    std::size_t count, const std::vector<std::string>& dimensions, std::uint64_t seed,
    Grading grading = Grading::Binary);

/// Single latent scalar u ~ Uniform[0.3, 0.9]; every dimension score is
/// monotone in u up to `noise` jitter.
std::vector<SyntheticProfile> make_isotropic_cohort(
    std::size_t count, const std::vector<std::string>& dimensions, std::uint64_t seed,
    double noise = 0.02, Grading grading = Grading::Binary);

struct SyntheticDatasetSpec {
  std::vector<std::string> dimensions;
  std::int64_t samples_per_dimension = 100;
  double min_unit_cost = 0.5;
  double max_unit_cost = 1.5;
  std::uint64_t seed = 0;
};

std::vector<Sample> make_synthetic_dataset(const SyntheticDatasetSpec& spec);

}  // namespace anisoeval::oracle
