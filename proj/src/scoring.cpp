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

#include "anisoeval/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <regex>

#include <json.hpp>

#include "anisoeval/errors.hpp"
#include "anisoeval/json_io.hpp"
#include "anisoeval/unicode.hpp"

namespace anisoeval::scoring {

std::string to_string(ScoreTier tier) {
  switch (tier) {
    case ScoreTier::ObjectiveExact: return "objective_exact";
    case ScoreTier::ObjectiveNumeric: return "objective_numeric";
    case ScoreTier::SemanticAutoAccept: return "semantic_auto_accept";
    case ScoreTier::SemanticAutoReject: return "semantic_auto_reject";
    case ScoreTier::Judge: return "judge";
    case ScoreTier::AgentComposite: return "agent_composite";
  }
  return "objective_exact";
}

namespace {

bool is_trailing_punct(char32_t cp) {
  return cp == 0x3002 /* 。 */ || cp == 0xFF0E /* ． */ || cp == '.' || cp == '!' ||
         cp == '?';
}

}  // namespace

std::string normalize_answer(std::string_view text) {
  std::vector<char32_t> cps;
  std::size_t pos = 0;
  while (pos < text.size()) cps.push_back(utf8_next(text, pos));

  std::vector<char32_t> out;
  bool pending_space = false;
  for (char32_t cp : cps) {
    if (is_space_cp(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(ascii_fold(cp));
  }
  while (!out.empty() && is_trailing_punct(out.back())) out.pop_back();
  while (!out.empty() && out.back() == ' ') out.pop_back();

  std::string result;
  for (char32_t cp : out) utf8_append(result, cp);
  return result;
}

double exact_match(const std::string& output, const std::string& gold) {
  return normalize_answer(output) == normalize_answer(gold) ? 1.0 : 0.0;
}

const ExtractionRules& ExtractionRules::defaults() {
  static const ExtractionRules rules = [] {
    ExtractionRules r;
    r.version = 1;
    r.strip_prefixes = {"最终答案：", "最终答案:", "答案：", "答案:",  "答：",
                        "答:",        "final answer:", "answer:", "选项"};
    r.capture_patterns = {
        "(?:答案是|答案为|答案应为|正确答案是)\\s*(.+)",
        "(?:the answer is|answer is|answers? to .{0,80} is)\\s*(.+)",
    };
    r.option_letter = true;
    return r;
  }();
  return rules;
}

ExtractionRules ExtractionRules::load(const std::string& path) {
  const Json j = Json::parse(read_file(path));
  ExtractionRules r;
  r.version = j.value("version", 1);
  r.strip_prefixes = j.value("strip_prefixes", std::vector<std::string>{});
  r.capture_patterns = j.value("capture_patterns", std::vector<std::string>{});
  r.option_letter = j.value("option_letter", true);
  return r;
}

namespace {

std::string ascii_lower(std::string s) {
  for (char& c : s)
    if (c >= 'A' && c <= 'Z') c += 32;
  return s;
}

std::string trim_copy(std::string s) {
  const auto issp = [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  std::size_t b = 0, e = s.size();
  while (b < e && issp(s[b])) ++b;
  while (e > b && issp(s[e - 1])) --e;
  return s.substr(b, e - b);
}

const std::regex& option_letter_re() {
  static const std::regex re(
      R"(^[\(\[]?\s*([A-Za-z])\s*[\)\]]?\s*[.:]?$)");
  return re;
}

}  // namespace

std::string extract_answer(const std::string& text, const ExtractionRules& rules) {
  std::string s = trim_copy(text);

  // Capture patterns first ("the answer is X"); the last match in the text
  // wins, since models restate conclusions at the end.
  for (const std::string& pattern : rules.capture_patterns) {
    const std::regex re(pattern, std::regex::ECMAScript | std::regex::icase);
    std::string last;
    bool found = false;
    for (auto it = std::sregex_iterator(s.begin(), s.end(), re);
         it != std::sregex_iterator(); ++it) {
      last = (*it)[1].str();
      found = true;
    }
    if (found) {
      s = trim_copy(last);
      break;
    }
  }

  // Label prefixes, case-insensitive on the ASCII part.
  bool changed = true;
  while (changed) {
    changed = false;
    const std::string folded = ascii_lower(s);
    for (const std::string& prefix : rules.strip_prefixes) {
      const std::string fp = ascii_lower(prefix);
      if (folded.size() > fp.size() && folded.compare(0, fp.size(), fp) == 0) {
        s = trim_copy(s.substr(prefix.size()));
        changed = true;
        break;
      }
    }
  }

  if (rules.option_letter) {
    std::smatch m;
    if (std::regex_match(s, m, option_letter_re())) s = m[1].str();
  }
  return s;
}

NumericMatch numeric_equiv(const std::string& output, double gold) {
  require(std::isfinite(gold), "InvalidGold", "numeric gold must be finite");

  // Last numeric literal: integer/decimal, optional /denominator, optional %.
  static const std::regex re(
      R"([+-]?(?:\d+\.\d+|\d+|\.\d+)(?:\s*/\s*[+-]?(?:\d+\.\d+|\d+))?%?)");
  std::string last;
  for (auto it = std::sregex_iterator(output.begin(), output.end(), re);
       it != std::sregex_iterator(); ++it)
    last = it->str();

  NumericMatch result;
  if (last.empty()) return result;  // NoNumberFound: score 0, found=false

  result.found = true;
  bool percent = false;
  if (last.back() == '%') {
    percent = true;
    last.pop_back();
  }
  double value;
  const auto slash = last.find('/');
  if (slash != std::string::npos) {
    const double num = std::strtod(last.substr(0, slash).c_str(), nullptr);
    const double den = std::strtod(last.substr(slash + 1).c_str(), nullptr);
    if (den == 0.0) return NumericMatch{};  // malformed fraction
    value = num / den;
  } else {
    value = std::strtod(last.c_str(), nullptr);
  }
  if (percent) value /= 100.0;

  result.value = value;
  const double tol = 1e-6 * std::max(1.0, std::abs(gold));
  result.score = std::abs(value - gold) <= tol ? 1.0 : 0.0;
  return result;
}

Route route(double similarity) {
  require(similarity >= -1.0 && similarity <= 1.0, "OutOfRange",
          "similarity " + std::to_string(similarity) + " outside [-1, 1]");
  if (similarity > kAutoAcceptThreshold) return Route::AutoAccept;
  if (similarity < kAutoRejectThreshold) return Route::AutoReject;
  return Route::Judge;  // closed interval [0.60, 0.92] inclusive
}

ScoreRecord hybrid_score(const Sample& sample, const std::string& output,
                         const SimilarityFn& similarity_fn, const JudgeFn& judge_fn,
                         const ExtractionRules& rules) {
  ScoreRecord rec;
  rec.sample_id = sample.id;

  if (const auto* labels = std::get_if<std::vector<std::string>>(&sample.gold)) {
    rec.tier = ScoreTier::ObjectiveExact;
    const std::string extracted = extract_answer(output, rules);
    for (const std::string& label : *labels) {
      if (exact_match(output, label) == 1.0 || exact_match(extracted, label) == 1.0) {
        rec.score = 1.0;
        break;
      }
    }
    return rec;
  }

  if (const auto* gold_value = std::get_if<double>(&sample.gold)) {
    rec.tier = ScoreTier::ObjectiveNumeric;
    const NumericMatch m = numeric_equiv(output, *gold_value);
    rec.score = m.score;
    rec.failed = !m.found;
    return rec;
  }

  if (const auto* gold_trace = std::get_if<std::vector<ToolStep>>(&sample.gold)) {
    rec.tier = ScoreTier::AgentComposite;
    const auto trace = parse_tool_trace(output);
    if (!trace) {
      rec.failed = true;
      return rec;
    }
    rec.score = agent_composite_score(*trace, *gold_trace);
    return rec;
  }

  // Semi-objective reference text: semantic filter, then judge in the band.
  const std::string& gold_text = std::get<std::string>(sample.gold);
  require(static_cast<bool>(similarity_fn), "MissingFunction", "similarity_fn required");
  const double sim = similarity_fn(output, gold_text);
  rec.similarity = sim;
  switch (route(sim)) {
    case Route::AutoAccept:
      rec.tier = ScoreTier::SemanticAutoAccept;
      rec.score = 1.0;
      return rec;
    case Route::AutoReject:
      rec.tier = ScoreTier::SemanticAutoReject;
      rec.score = 0.0;
      return rec;
    case Route::Judge:
      break;
  }
  rec.tier = ScoreTier::Judge;
  require(static_cast<bool>(judge_fn), "MissingFunction", "judge_fn required");
  try {
    const double verdict = judge_fn(output, gold_text);
    require(std::isfinite(verdict) && verdict >= 0.0 && verdict <= 1.0, "JudgeFailure",
            "judge verdict outside [0,1]");
    rec.judge_verdict = verdict;
    rec.score = verdict;
  } catch (const std::exception&) {
    // Conservative degradation: an unavailable judge rejects, never accepts.
    rec.score = 0.0;
    rec.failed = true;
  }
  return rec;
}

double cohen_kappa(const std::vector<std::string>& labels_a,
                   const std::vector<std::string>& labels_b) {
  require(!labels_a.empty(), "Empty", "label vectors must be nonempty");
  require(labels_a.size() == labels_b.size(), "LengthMismatch",
          "label vectors must have equal length");

  const double n = static_cast<double>(labels_a.size());
  std::map<std::string, double> freq_a, freq_b;
  double agree = 0.0;
  for (std::size_t i = 0; i < labels_a.size(); ++i) {
    if (labels_a[i] == labels_b[i]) agree += 1.0;
    freq_a[labels_a[i]] += 1.0;
    freq_b[labels_b[i]] += 1.0;
  }
  const double p_o = agree / n;
  double p_e = 0.0;
  for (const auto& [label, count_a] : freq_a) {
    const auto it = freq_b.find(label);
    if (it != freq_b.end()) p_e += (count_a / n) * (it->second / n);
  }
  if (p_e == 1.0) return p_o == 1.0 ? 1.0 : 0.0;
  return (p_o - p_e) / (1.0 - p_e);
}

ToolMetrics tool_metrics(const std::vector<ToolStep>& trace,
                         const std::vector<ToolStep>& gold_trace) {
  require(!gold_trace.empty(), "EmptyGold", "gold trace must be nonempty");
  ToolMetrics m;
  if (trace.empty()) return m;  // (0, 0) degenerate

  // LCS over tool names aligns the trace to the gold sequence.
  const std::size_t rows = trace.size(), cols = gold_trace.size();
  std::vector<std::vector<std::size_t>> lcs(rows + 1, std::vector<std::size_t>(cols + 1, 0));
  for (std::size_t i = 1; i <= rows; ++i)
    for (std::size_t j = 1; j <= cols; ++j)
      lcs[i][j] = trace[i - 1].tool == gold_trace[j - 1].tool
                      ? lcs[i - 1][j - 1] + 1
                      : std::max(lcs[i - 1][j], lcs[i][j - 1]);

  const double matched = static_cast<double>(lcs[rows][cols]);
  const double len = static_cast<double>(trace.size());
  m.tool_selection_accuracy = matched / len;
  m.step_redundancy =
      std::max(0.0, len - static_cast<double>(gold_trace.size())) / len;
  return m;
}

double agent_composite_score(const std::vector<ToolStep>& trace,
                             const std::vector<ToolStep>& gold_trace) {
  const ToolMetrics m = tool_metrics(trace, gold_trace);
  return m.tool_selection_accuracy * (1.0 - m.step_redundancy);
}

std::optional<std::vector<ToolStep>> parse_tool_trace(const std::string& output) {
  Json j = Json::parse(output, nullptr, false);
  if (j.is_discarded() || !j.is_array()) return std::nullopt;
  std::vector<ToolStep> trace;
  for (const auto& step : j) {
    if (!step.is_object() || !step.contains("tool") || !step["tool"].is_string())
      return std::nullopt;
    std::string args;
    if (step.contains("args"))
      args = step["args"].is_string() ? step["args"].get<std::string>() : step["args"].dump();
    trace.push_back(ToolStep{step["tool"].get<std::string>(), std::move(args)});
  }
  return trace;
}

std::string strip_think(const std::string& text, const std::string& open_tag,
                        const std::string& close_tag) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t open = text.find(open_tag, pos);
    if (open == std::string::npos) {
      out.append(text, pos, std::string::npos);
      break;
    }
    out.append(text, pos, open - pos);
    const std::size_t close = text.find(close_tag, open + open_tag.size());
    if (close == std::string::npos) break;  // unterminated trace, drop the tail
    pos = close + close_tag.size();
  }
  return out;
}

double ngram_cosine_similarity(const std::string& a, const std::string& b, int n) {
  require(n >= 1, "OutOfRange", "n-gram size must be >= 1");
  const auto profile = [n](const std::string& text) {
    std::map<std::string, double> counts;
    const std::string norm = normalize_answer(text);
    const std::size_t len = norm.size();
    if (len == 0) return counts;
    if (len < static_cast<std::size_t>(n)) {
      counts[norm] = 1.0;
      return counts;
    }
    for (std::size_t i = 0; i + n <= len; ++i) counts[norm.substr(i, n)] += 1.0;
    return counts;
  };
  const auto pa = profile(a);
  const auto pb = profile(b);
  if (pa.empty() || pb.empty()) return pa.empty() && pb.empty() ? 1.0 : 0.0;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [g, c] : pa) {
    na += c * c;
    const auto it = pb.find(g);
    if (it != pb.end()) dot += c * it->second;
  }
  for (const auto& [g, c] : pb) nb += c * c;
  // rounding can push the ratio an ulp past 1, which route() would reject
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::string render_judge_prompt(const std::string& prompt_template,
                                const std::string& question, const std::string& gold,
                                const std::string& candidate) {
  std::string out = prompt_template;
  const auto replace_all = [&out](const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    while ((pos = out.find(key, pos)) != std::string::npos) {
      out.replace(pos, key.size(), value);
      pos += value.size();
    }
  };
  replace_all("{question}", question);
  replace_all("{gold}", gold);
  replace_all("{candidate}", candidate);
  return out;
}

std::optional<double> parse_judge_verdict(const std::string& text) {
  static const std::regex re(R"(^\s*SCORE:\s*(0(?:\.0)?|0\.5|1(?:\.0)?)\s*$)");
  std::optional<double> verdict;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    const std::string line = text.substr(pos, eol - pos);
    std::smatch m;
    if (std::regex_match(line, m, re)) verdict = std::strtod(m[1].str().c_str(), nullptr);
    pos = eol + 1;
  }
  return verdict;
}

}  // namespace anisoeval::scoring
