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

// Dataset hygiene: exact 13-gram overlap checks against a reference corpus,
// embedding-based semantic overlap with an injected embedder, and the
// seeded public/private anchor split.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "anisoeval/types.hpp"

namespace anisoeval::datapipe {

inline constexpr int kNgramSize = 13;
inline constexpr double kSemanticThreshold = 0.85;

enum class FlagReason { NgramOverlap, SemanticOverlap };

std::string to_string(FlagReason reason);

struct ContaminationFlag {
  std::string sample_id;
  FlagReason reason = FlagReason::NgramOverlap;
  std::string evidence;  // matched n-gram text, or the similarity value
  double similarity = 0.0;
  std::string corpus_doc_id;
};

/// Casefolded hybrid tokenizer: one token per CJK codepoint, one token per
/// run of ASCII letters/digits, everything else is a separator.
std::vector<std::string> tokenize(std::string_view text);

using EmbedderFn = std::function<std::vector<double>(const std::string&)>;

struct CorpusDoc {
  std::string doc_id;
  std::string text;
};

/// Exact n-gram window index plus precomputed document embeddings.
/// Window hashes are verified against the stored window text on hit, so a
/// hash collision can never produce a false flag.
class CorpusIndex {
 public:
  CorpusIndex() = default;

  void add_document(const CorpusDoc& doc, int n = kNgramSize);
  void embed_documents(const EmbedderFn& embedder);

  bool built() const { return built_; }
  std::size_t num_documents() const { return doc_ids_.size(); }

  /// Every length-n window of `tokens` that occurs verbatim in the corpus:
  /// (window text, doc id) pairs, in window order.
  std::vector<std::pair<std::string, std::string>> find_windows(
      const std::vector<std::string>& tokens, int n = kNgramSize) const;

  /// Highest cosine against the embedded corpus. Requires embed_documents.
  std::pair<double, std::string> max_cosine(const std::vector<double>& query) const;

  /// Loads a corpus from a directory of .txt files or a JSONL file of
  /// {doc_id, text} objects.
  static CorpusIndex from_path(const std::string& path, int n = kNgramSize);

 private:
  struct WindowEntry {
    std::string window;  // tokens joined by '\x1f'
    std::string doc_id;
  };
  std::unordered_map<std::uint64_t, std::vector<WindowEntry>> windows_;
  std::vector<std::string> doc_ids_;
  std::vector<std::string> doc_texts_;
  std::vector<std::vector<double>> doc_vectors_;
  bool built_ = false;
  bool embedded_ = false;
};

/// All 13-gram overlap flags for one sample. Samples shorter than n tokens
/// are never flagged by this rule.
std::vector<ContaminationFlag> ngram_flag(const Sample& sample,
                                          const CorpusIndex& corpus_index,
                                          int n = kNgramSize);

/// Semantic overlap: flags iff the max corpus cosine strictly exceeds the
/// threshold.
std::optional<ContaminationFlag> semantic_flag(const Sample& sample,
                                               const EmbedderFn& embedder_fn,
                                               const CorpusIndex& corpus_index,
                                               double threshold = kSemanticThreshold);

/// Deterministic test embedder: L2-normalized hashed character-trigram bag.
std::vector<double> trigram_embedding(const std::string& text, std::size_t dim = 256);

EmbedderFn make_trigram_embedder(std::size_t dim = 256);

struct AnchorSplit {
  std::vector<Sample> public_set;
  std::vector<Sample> private_set;  // source_tier forced to private
};

/// Seeded split holding out `size` samples as the private anchor set.
AnchorSplit split_private_anchor(const std::vector<Sample>& dataset, std::size_t size,
                                 std::uint64_t seed);

double cosine(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace anisoeval::datapipe
