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

// Persistence layer: JSON-Lines datasets (one Sample per line, field names
// matching the type definitions), JSON documents for reports and configs,
// CSV exports for matrices and leaderboards. All files are UTF-8. Numbers
// are emitted in shortest round-trip form so outputs are byte-deterministic.

#include <string>
#include <vector>

#include <json.hpp>

#include "anisoeval/types.hpp"

namespace anisoeval {

using Json = nlohmann::ordered_json;

std::string fmt_double(double v);

Json to_json(const CapabilityCell& cell);
CapabilityCell cell_from_json(const Json& j);

Json to_json(const GoldAnswer& gold);
GoldAnswer gold_from_json(const Json& j);

Json to_json(const Sample& sample);
Sample sample_from_json(const Json& j);

Json to_json(const Stratum& stratum);
Stratum stratum_from_json(const Json& j);

Json to_json(const StratumAccumulator& acc);
StratumAccumulator accumulator_from_json(const Json& j);

Json to_json(const ModelDescriptor& descriptor);
ModelDescriptor descriptor_from_json(const Json& j);

Json to_json(const WeightScheme& scheme);
WeightScheme scheme_from_json(const Json& j);

Json to_json(const ScoreMatrix& matrix);
ScoreMatrix matrix_from_json(const Json& j);

/// Parses a JSONL dataset. Throws ParseError("line N: ...") on bad lines
/// and DuplicateId when a sample id repeats.
std::vector<Sample> read_dataset_jsonl(const std::string& path);
std::vector<Sample> parse_dataset_jsonl(const std::string& content);

void write_dataset_jsonl(const std::string& path, const std::vector<Sample>& dataset);

/// CSV with header `model_id,<dimension ids...>`, one row per model.
std::string matrix_to_csv(const std::vector<std::string>& model_ids,
                          const std::vector<std::string>& dimension_ids,
                          const std::vector<std::vector<double>>& values);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace anisoeval
