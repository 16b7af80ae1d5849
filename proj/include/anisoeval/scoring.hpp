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

// Three-tier verification: deterministic matching for objective gold types,
// a semantic-similarity cascade with fixed auto-accept/auto-reject
// thresholds for semi-objective text, and a pluggable judge for the
// ambiguous band. Similarity and judge functions are injected; the library
// ships deterministic test doubles, not models.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "anisoeval/types.hpp"

namespace anisoeval::scoring {

inline constexpr double kAutoAcceptThreshold = 0.92;  // strictly above: accept
inline constexpr double kAutoRejectThreshold = 0.60;  // strictly below: reject

enum class ScoreTier {
  ObjectiveExact,
  ObjectiveNumeric,
  SemanticAutoAccept,
  SemanticAutoReject,
  Judge,
  AgentComposite,
};

std::string to_string(ScoreTier tier);

struct ScoreRecord {
  std::string sample_id;
  double score = 0.0;
  ScoreTier tier = ScoreTier::ObjectiveExact;
  std::optional<double> similarity;
  std::optional<double> judge_verdict;
  bool failed = false;  // set on NoNumberFound / JudgeFailure / unparseable trace
};

using SimilarityFn = std::function<double(const std::string&, const std::string&)>;
using JudgeFn = std::function<double(const std::string&, const std::string&)>;

/// Canonical answer form: trim, collapse internal whitespace runs to one
/// space, ASCII casefold, strip trailing sentence punctuation (。．.!?).
/// Idempotent.
std::string normalize_answer(std::string_view text);

/// 1 iff both sides normalize to the same string.
double exact_match(const std::string& output, const std::string& gold);

/// Table-driven answer extraction applied before exact matching:
/// capture patterns ("the answer is X"), label prefixes ("答案：", "Answer:")
/// and bare option-letter decoration ("(A)" -> "A"). The table is versioned
/// data; `defaults()` mirrors data/answer_extraction.json.
struct ExtractionRules {
  int version = 1;
  std::vector<std::string> strip_prefixes;
  std::vector<std::string> capture_patterns;
  bool option_letter = true;

  static const ExtractionRules& defaults();
  static ExtractionRules load(const std::string& path);
};

std::string extract_answer(const std::string& text,
                           const ExtractionRules& rules = ExtractionRules::defaults());

struct NumericMatch {
  double score = 0.0;
  bool found = false;  // false: NoNumberFound, scored 0 with the failed flag
  double value = 0.0;
};

/// Parses the last numeric literal (integer, decimal, fraction a/b, percent
/// suffix) and compares at 1e-6 relative tolerance (floored at absolute).
NumericMatch numeric_equiv(const std::string& output, double gold);

enum class Route { AutoAccept, AutoReject, Judge };

/// Threshold routing. Boundary similarities (0.60 and 0.92 exactly) go to
/// the judge. Similarity must lie in [-1, 1].
Route route(double similarity);

/// Full cascade for one sample. Objective gold types (label set, numeric)
/// never touch similarity_fn or judge_fn; tool traces are scored by the
/// agent composite; text gold runs the semantic filter and, in the
/// ambiguous band, the judge. A judge failure degrades to score 0.
ScoreRecord hybrid_score(const Sample& sample, const std::string& output,
                         const SimilarityFn& similarity_fn, const JudgeFn& judge_fn,
                         const ExtractionRules& rules = ExtractionRules::defaults());

/// Cohen's kappa over two equal-length categorical label vectors.
double cohen_kappa(const std::vector<std::string>& labels_a,
                   const std::vector<std::string>& labels_b);

struct ToolMetrics {
  double tool_selection_accuracy = 0.0;
  double step_redundancy = 0.0;
};

/// Accuracy: fraction of trace steps whose tool matches the gold trace under
/// an LCS alignment over tool names. Redundancy: excess steps over the gold
/// length, as a fraction of the trace.
ToolMetrics tool_metrics(const std::vector<ToolStep>& trace,
                         const std::vector<ToolStep>& gold_trace);

/// Single-score composite used by the agent tier:
/// accuracy * (1 - redundancy).
double agent_composite_score(const std::vector<ToolStep>& trace,
                             const std::vector<ToolStep>& gold_trace);

/// Parses a model output as a JSON tool trace (array of {tool, args}).
/// Returns nullopt when the output is not a well-formed trace.
std::optional<std::vector<ToolStep>> parse_tool_trace(const std::string& output);

/// Removes <think>...</think> spans (tags configurable). An unterminated
/// open tag drops the remainder of the text.
std::string strip_think(const std::string& text,
                        const std::string& open_tag = "<think>",
                        const std::string& close_tag = "</think>");

/// Deterministic similarity test double: cosine over hashed character
/// n-gram counts of the normalized texts.
double ngram_cosine_similarity(const std::string& a, const std::string& b, int n = 3);

/// Fills {question} {gold} {candidate} placeholders in a judge prompt
/// template.
std::string render_judge_prompt(const std::string& prompt_template,
                                const std::string& question, const std::string& gold,
                                const std::string& candidate);

/// Anchored `SCORE: <0|0.5|1>` line; the last well-formed line wins.
std::optional<double> parse_judge_verdict(const std::string& text);

}  // namespace anisoeval::scoring
