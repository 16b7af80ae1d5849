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

#include "anisoeval/json_io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "anisoeval/errors.hpp"

namespace anisoeval {

std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Json to_json(const CapabilityCell& cell) {
  return Json{{"domain", cell.domain}, {"capability", cell.capability}};
}

CapabilityCell cell_from_json(const Json& j) {
  CapabilityCell cell;
  cell.domain = j.at("domain").get<std::string>();
  cell.capability = j.at("capability").get<std::string>();
  require(!cell.domain.empty() && !cell.capability.empty(), "InvalidCell",
          "cell identifiers must be nonempty");
  return cell;
}

// Gold answers map onto plain JSON shapes: string = reference text,
// number = numeric, string array = label set, object array = tool trace.
Json to_json(const GoldAnswer& gold) {
  if (const auto* text = std::get_if<std::string>(&gold)) return *text;
  if (const auto* num = std::get_if<double>(&gold)) return *num;
  if (const auto* labels = std::get_if<std::vector<std::string>>(&gold)) {
    Json arr = Json::array();
    for (const auto& l : *labels) arr.push_back(l);
    return arr;
  }
  const auto& trace = std::get<std::vector<ToolStep>>(gold);
  Json arr = Json::array();
  for (const auto& step : trace) arr.push_back(Json{{"tool", step.tool}, {"args", step.args}});
  return arr;
}

GoldAnswer gold_from_json(const Json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number()) return j.get<double>();
  if (j.is_array()) {
    if (j.empty()) return std::vector<std::string>{};
    if (j.front().is_string()) {
      std::vector<std::string> labels;
      for (const auto& l : j) labels.push_back(l.get<std::string>());
      return labels;
    }
    std::vector<ToolStep> trace;
    for (const auto& s : j)
      trace.push_back(ToolStep{s.at("tool").get<std::string>(),
                               s.value("args", std::string{})});
    return trace;
  }
  fail("InvalidGold", "gold must be string, number, string array or trace array");
}

Json to_json(const Sample& sample) {
  Json j{{"id", sample.id},
         {"cell", to_json(sample.cell)},
         {"task_type", sample.task_type},
         {"prompt", sample.prompt},
         {"constraints", sample.constraints},
         {"gold", to_json(sample.gold)},
         {"unit_cost", sample.unit_cost},
         {"source_tier", to_string(sample.source_tier)},
         {"created_at", sample.created_at}};
  if (sample.difficulty != 0.0) j["difficulty"] = sample.difficulty;
  if (!sample.subtask.empty()) j["subtask"] = sample.subtask;
  return j;
}

Sample sample_from_json(const Json& j) {
  Sample s;
  s.id = j.at("id").get<std::string>();
  require(!s.id.empty(), "InvalidSample", "sample id must be nonempty");
  s.cell = cell_from_json(j.at("cell"));
  s.task_type = j.value("task_type", std::string{});
  s.prompt = j.value("prompt", std::string{});
  s.constraints = j.value("constraints", std::string{});
  s.gold = gold_from_json(j.at("gold"));
  s.unit_cost = j.value("unit_cost", 0.0);
  require(s.unit_cost >= 0.0, "InvalidSample",
          "sample '" + s.id + "' has negative unit_cost");
  s.source_tier = source_tier_from_string(j.value("source_tier", std::string{"fresh"}));
  s.created_at = j.value("created_at", std::string{});
  s.difficulty = j.value("difficulty", 0.0);
  s.subtask = j.value("subtask", std::string{});
  return s;
}

Json to_json(const Stratum& stratum) {
  return Json{{"id", stratum.id},
              {"population_size", stratum.population_size},
              {"weight", stratum.weight},
              {"unit_cost", stratum.unit_cost}};
}

Stratum stratum_from_json(const Json& j) {
  Stratum st;
  st.id = j.at("id").get<std::string>();
  st.population_size = j.at("population_size").get<std::int64_t>();
  st.weight = j.at("weight").get<double>();
  st.unit_cost = j.at("unit_cost").get<double>();
  return st;
}

Json to_json(const StratumAccumulator& acc) {
  return Json{{"n", acc.n()},
              {"sum", acc.sum()},
              {"sum_sq", acc.sum_sq()},
              {"drawn_ids", acc.drawn_ids()}};
}

StratumAccumulator accumulator_from_json(const Json& j) {
  std::set<std::string> ids;
  for (const auto& id : j.at("drawn_ids")) ids.insert(id.get<std::string>());
  return StratumAccumulator::from_stats(j.at("n").get<std::int64_t>(),
                                        j.at("sum").get<double>(),
                                        j.at("sum_sq").get<double>(), std::move(ids));
}

Json to_json(const ModelDescriptor& descriptor) {
  Json j{{"id", descriptor.id}, {"category", to_string(descriptor.category)}};
  if (descriptor.endpoint) j["endpoint"] = *descriptor.endpoint;
  if (descriptor.price_per_1k_tokens) j["price_per_1k_tokens"] = *descriptor.price_per_1k_tokens;
  if (descriptor.seed) j["seed"] = *descriptor.seed;
  if (!descriptor.provider.empty()) j["provider"] = descriptor.provider;
  return j;
}

ModelDescriptor descriptor_from_json(const Json& j) {
  ModelDescriptor d;
  d.id = j.at("id").get<std::string>();
  d.category = model_category_from_string(j.value("category", std::string{"commercial"}));
  if (j.contains("endpoint")) d.endpoint = j.at("endpoint").get<std::string>();
  if (j.contains("price_per_1k_tokens"))
    d.price_per_1k_tokens = j.at("price_per_1k_tokens").get<double>();
  if (j.contains("seed")) d.seed = j.at("seed").get<std::uint64_t>();
  d.provider = j.value("provider", std::string{});
  d.validate();
  return d;
}

Json to_json(const WeightScheme& scheme) {
  Json w = Json::object();
  for (const auto& [dim, v] : scheme.weights) w[dim] = v;
  return Json{{"name", scheme.name}, {"weights", w}};
}

WeightScheme scheme_from_json(const Json& j) {
  WeightScheme s;
  s.name = j.at("name").get<std::string>();
  for (const auto& [dim, v] : j.at("weights").items()) s.weights[dim] = v.get<double>();
  return s;
}

Json to_json(const ScoreMatrix& matrix) {
  return Json{{"model_ids", matrix.model_ids},
              {"dimension_ids", matrix.dimension_ids},
              {"raw", matrix.raw},
              {"normalized", matrix.normalized},
              {"difficulty", matrix.difficulty}};
}

ScoreMatrix matrix_from_json(const Json& j) {
  ScoreMatrix m;
  m.model_ids = j.at("model_ids").get<std::vector<std::string>>();
  m.dimension_ids = j.at("dimension_ids").get<std::vector<std::string>>();
  m.raw = j.at("raw").get<std::vector<std::vector<double>>>();
  m.normalized = j.at("normalized").get<std::vector<std::vector<double>>>();
  m.difficulty = j.at("difficulty").get<std::vector<double>>();
  m.validate();
  return m;
}

std::vector<Sample> parse_dataset_jsonl(const std::string& content) {
  std::vector<Sample> dataset;
  std::set<std::string> seen;
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail("ParseError", "line " + std::to_string(line_no) + ": " + e.what());
    }
    Sample s;
    try {
      s = sample_from_json(j);
    } catch (const nlohmann::json::exception& e) {
      fail("ParseError", "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!seen.insert(s.id).second)
      fail("DuplicateId",
           "line " + std::to_string(line_no) + ": duplicate sample id '" + s.id + "'");
    dataset.push_back(std::move(s));
  }
  return dataset;
}

std::vector<Sample> read_dataset_jsonl(const std::string& path) {
  return parse_dataset_jsonl(read_file(path));
}

void write_dataset_jsonl(const std::string& path, const std::vector<Sample>& dataset) {
  std::string out;
  for (const Sample& s : dataset) {
    out += to_json(s).dump();
    out += '\n';
  }
  write_file(path, out);
}

std::string matrix_to_csv(const std::vector<std::string>& model_ids,
                          const std::vector<std::string>& dimension_ids,
                          const std::vector<std::vector<double>>& values) {
  require(values.size() == model_ids.size(), "ShapeMismatch",
          "one row per model required");
  std::string csv = "model_id";
  for (const auto& dim : dimension_ids) csv += "," + dim;
  csv += '\n';
  for (std::size_t m = 0; m < model_ids.size(); ++m) {
    require(values[m].size() == dimension_ids.size(), "ShapeMismatch",
            "one column per dimension required");
    csv += model_ids[m];
    for (double v : values[m]) csv += "," + fmt_double(v);
    csv += '\n';
  }
  return csv;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "FileNotFound", "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), "FileWriteError", "cannot write '" + path + "'");
  out << content;
  require(out.good(), "FileWriteError", "write to '" + path + "' failed");
}

}  // namespace anisoeval
