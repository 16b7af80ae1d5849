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

#include "anisoeval/datapipe.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include <json.hpp>

#include "anisoeval/errors.hpp"
#include "anisoeval/json_io.hpp"
#include "anisoeval/rng.hpp"
#include "anisoeval/unicode.hpp"

namespace anisoeval::datapipe {

std::string to_string(FlagReason reason) {
  return reason == FlagReason::NgramOverlap ? "ngram_overlap" : "semantic_overlap";
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string run;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = ascii_fold(utf8_next(text, pos));
    if (is_ascii_alnum(cp)) {
      run += static_cast<char>(cp);
      continue;
    }
    if (!run.empty()) {
      tokens.push_back(std::move(run));
      run.clear();
    }
    if (is_cjk(cp)) {
      std::string tok;
      utf8_append(tok, cp);
      tokens.push_back(std::move(tok));
    }
    // anything else is a separator
  }
  if (!run.empty()) tokens.push_back(std::move(run));
  return tokens;
}

namespace {

constexpr char kJoin = '\x1f';

std::string join_window(const std::vector<std::string>& tokens, std::size_t start,
                        std::size_t n) {
  std::string w;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) w += kJoin;
    w += tokens[start + i];
  }
  return w;
}

std::uint64_t window_hash(const std::vector<std::string>& tokens, std::size_t start,
                          std::size_t n) {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (std::size_t i = 0; i < n; ++i) h = hash_u64(h, hash_str(tokens[start + i]));
  return h;
}

std::string window_display(const std::string& window) {
  std::string out = window;
  std::replace(out.begin(), out.end(), kJoin, ' ');
  return out;
}

}  // namespace

void CorpusIndex::add_document(const CorpusDoc& doc, int n) {
  require(n >= 1, "OutOfRange", "window size must be >= 1");
  const auto tokens = tokenize(doc.text);
  const std::size_t nn = static_cast<std::size_t>(n);
  if (tokens.size() >= nn) {
    for (std::size_t i = 0; i + nn <= tokens.size(); ++i) {
      const std::uint64_t h = window_hash(tokens, i, nn);
      auto& bucket = windows_[h];
      std::string w = join_window(tokens, i, nn);
      const bool known = std::any_of(bucket.begin(), bucket.end(),
                                     [&](const WindowEntry& e) { return e.window == w; });
      if (!known) bucket.push_back(WindowEntry{std::move(w), doc.doc_id});
    }
  }
  doc_ids_.push_back(doc.doc_id);
  doc_texts_.push_back(doc.text);
  built_ = true;
  embedded_ = false;
}

void CorpusIndex::embed_documents(const EmbedderFn& embedder) {
  require(static_cast<bool>(embedder), "EmbedderFailure", "embedder function required");
  doc_vectors_.clear();
  doc_vectors_.reserve(doc_texts_.size());
  for (const auto& text : doc_texts_) doc_vectors_.push_back(embedder(text));
  embedded_ = true;
}

std::vector<std::pair<std::string, std::string>> CorpusIndex::find_windows(
    const std::vector<std::string>& tokens, int n) const {
  require(built_, "IndexNotBuilt", "corpus index has no documents");
  std::vector<std::pair<std::string, std::string>> hits;
  const std::size_t nn = static_cast<std::size_t>(n);
  if (tokens.size() < nn) return hits;
  for (std::size_t i = 0; i + nn <= tokens.size(); ++i) {
    const auto it = windows_.find(window_hash(tokens, i, nn));
    if (it == windows_.end()) continue;
    const std::string w = join_window(tokens, i, nn);
    for (const WindowEntry& entry : it->second) {
      if (entry.window == w) {  // verify against stored text, hashes can collide
        hits.emplace_back(w, entry.doc_id);
        break;
      }
    }
  }
  return hits;
}

std::pair<double, std::string> CorpusIndex::max_cosine(
    const std::vector<double>& query) const {
  require(built_, "IndexNotBuilt", "corpus index has no documents");
  require(embedded_, "IndexNotBuilt", "corpus embeddings not computed");
  double best = -1.0;
  std::string best_doc;
  for (std::size_t i = 0; i < doc_vectors_.size(); ++i) {
    const double c = cosine(query, doc_vectors_[i]);
    if (c > best) {
      best = c;
      best_doc = doc_ids_[i];
    }
  }
  return {best, best_doc};
}

CorpusIndex CorpusIndex::from_path(const std::string& path, int n) {
  namespace fs = std::filesystem;
  CorpusIndex index;
  require(fs::exists(path), "FileNotFound", "corpus path '" + path + "' does not exist");
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path))
      if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& file : files)
      index.add_document(CorpusDoc{file.filename().string(), read_file(file.string())}, n);
  } else {
    // JSONL of {doc_id, text}
    const std::string content = read_file(path);
    std::size_t pos = 0, line_no = 0;
    while (pos < content.size()) {
      std::size_t eol = content.find('\n', pos);
      if (eol == std::string::npos) eol = content.size();
      const std::string line = content.substr(pos, eol - pos);
      pos = eol + 1;
      ++line_no;
      if (line.empty()) continue;
      Json j;
      try {
        j = Json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        fail("ParseError", "corpus line " + std::to_string(line_no) + ": " + e.what());
      }
      index.add_document(
          CorpusDoc{j.at("doc_id").get<std::string>(), j.at("text").get<std::string>()}, n);
    }
  }
  return index;
}

std::vector<ContaminationFlag> ngram_flag(const Sample& sample,
                                          const CorpusIndex& corpus_index, int n) {
  std::vector<ContaminationFlag> flags;
  const auto tokens = tokenize(sample.prompt);
  for (const auto& [window, doc_id] : corpus_index.find_windows(tokens, n)) {
    ContaminationFlag flag;
    flag.sample_id = sample.id;
    flag.reason = FlagReason::NgramOverlap;
    flag.evidence = window_display(window);
    flag.corpus_doc_id = doc_id;
    flags.push_back(std::move(flag));
  }
  return flags;
}

std::optional<ContaminationFlag> semantic_flag(const Sample& sample,
                                               const EmbedderFn& embedder_fn,
                                               const CorpusIndex& corpus_index,
                                               double threshold) {
  require(static_cast<bool>(embedder_fn), "EmbedderFailure", "embedder function required");
  std::vector<double> query;
  try {
    query = embedder_fn(sample.prompt);
  } catch (const std::exception& e) {
    fail("EmbedderFailure", e.what());
  }
  const auto [sim, doc_id] = corpus_index.max_cosine(query);
  if (sim > threshold) {
    ContaminationFlag flag;
    flag.sample_id = sample.id;
    flag.reason = FlagReason::SemanticOverlap;
    flag.similarity = sim;
    flag.evidence = fmt_double(sim);
    flag.corpus_doc_id = doc_id;
    return flag;
  }
  return std::nullopt;
}

std::vector<double> trigram_embedding(const std::string& text, std::size_t dim) {
  require(dim >= 1, "OutOfRange", "embedding dimension must be >= 1");
  std::vector<double> vec(dim, 0.0);
  const auto tokens = tokenize(text);
  std::string joined;
  for (const auto& t : tokens) {
    joined += t;
    joined += ' ';
  }
  if (joined.size() >= 3) {
    for (std::size_t i = 0; i + 3 <= joined.size(); ++i)
      vec[hash_str(std::string_view(joined.data() + i, 3)) % dim] += 1.0;
  } else if (!joined.empty()) {
    vec[hash_str(joined) % dim] += 1.0;
  }
  const double norm = std::sqrt(std::inner_product(vec.begin(), vec.end(), vec.begin(), 0.0));
  if (norm > 0.0)
    for (double& v : vec) v /= norm;
  return vec;
}

EmbedderFn make_trigram_embedder(std::size_t dim) {
  return [dim](const std::string& text) { return trigram_embedding(text, dim); };
}

AnchorSplit split_private_anchor(const std::vector<Sample>& dataset, std::size_t size,
                                 std::uint64_t seed) {
  require(size <= dataset.size(), "SizeTooLarge",
          "anchor size " + std::to_string(size) + " exceeds dataset size " +
              std::to_string(dataset.size()));
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(hash_u64(seed, 0x9a5cb5e1u));
  rng.shuffle(order);

  std::vector<bool> is_private(dataset.size(), false);
  for (std::size_t i = 0; i < size; ++i) is_private[order[i]] = true;

  AnchorSplit split;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (is_private[i]) {
      Sample s = dataset[i];
      s.source_tier = SourceTier::Private;
      split.private_set.push_back(std::move(s));
    } else {
      split.public_set.push_back(dataset[i]);
    }
  }
  return split;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  require(a.size() == b.size(), "LengthMismatch", "vectors must have equal dimension");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace anisoeval::datapipe
