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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "anisoeval/datapipe.hpp"
#include "anisoeval/errors.hpp"
#include "anisoeval/json_io.hpp"
#include "anisoeval/rng.hpp"
#include "anisoeval/unicode.hpp"

using namespace anisoeval;
using namespace anisoeval::datapipe;

namespace {

Sample prompt_sample(const std::string& id, const std::string& prompt) {
  Sample s;
  s.id = id;
  s.cell = CapabilityCell{"d", "c"};
  s.prompt = prompt;
  s.gold = std::vector<std::string>{"x"};
  return s;
}

// independent oracle tokenizer: per-codepoint classification pass
std::vector<std::string> oracle_tokenize(const std::string& text) {
  std::vector<std::string> out;
  const auto cps = utf8_decode(text);
  std::string run;
  for (char32_t cp : cps) {
    const char32_t folded = ascii_fold(cp);
    const bool alnum = is_ascii_alnum(folded);
    if (!alnum && !run.empty()) {
      out.push_back(run);
      run.clear();
    }
    if (alnum) {
      run += static_cast<char>(folded);
    } else if (is_cjk(cp)) {
      std::string t;
      utf8_append(t, cp);
      out.push_back(t);
    }
  }
  if (!run.empty()) out.push_back(run);
  return out;
}

std::string words(int count, Rng& rng) {
  std::string text;
  for (int i = 0; i < count; ++i) {
    if (i) text += ' ';
    text += "w" + std::to_string(rng.next_below(5000));
  }
  return text;
}

}  // namespace

TEST_CASE("tokenize splits CJK per character and latin per run") {
  CHECK(tokenize("大模型eval") == std::vector<std::string>{"大", "模", "型", "eval"});
  CHECK(tokenize("") == std::vector<std::string>{});
  CHECK(tokenize("GPT-4 在 2024 年") ==
        std::vector<std::string>{"gpt", "4", "在", "2024", "年"});
  CHECK(tokenize("ABC") == std::vector<std::string>{"abc"});  // casefolded
}

TEST_CASE("tokenize agrees with the per-codepoint oracle on long mixed text") {
  Rng rng(11);
  std::string text;
  const std::vector<std::string> cjk = {"模", "型", "评", "测", "的", "大"};
  for (int i = 0; i < 1000; ++i) {
    switch (rng.next_below(4)) {
      case 0: text += cjk[rng.next_below(cjk.size())]; break;
      case 1: text += static_cast<char>('a' + rng.next_below(26)); break;
      case 2: text += static_cast<char>('0' + rng.next_below(10)); break;
      default: text += (rng.next_below(2) ? ' ' : ','); break;
    }
  }
  CHECK(tokenize(text) == oracle_tokenize(text));
}

TEST_CASE("ngram_flag catches verbatim 13-token overlap and ignores 12") {
  Rng rng(5);
  const std::string doc13 = words(13, rng);
  CorpusIndex index;
  index.add_document({"doc1", "irrelevant preamble. " + doc13 + " trailing text"});

  SUBCASE("verbatim copy flags") {
    const auto flags = ngram_flag(prompt_sample("s1", doc13), index);
    REQUIRE(!flags.empty());
    CHECK(flags[0].corpus_doc_id == "doc1");
    CHECK(flags[0].reason == FlagReason::NgramOverlap);
    // evidence carries the 13-token window
    std::size_t spaces = static_cast<std::size_t>(
        std::count(flags[0].evidence.begin(), flags[0].evidence.end(), ' '));
    CHECK(spaces == 12);
  }
  SUBCASE("12-token overlap never flags") {
    const auto tokens = tokenize(doc13);
    std::string twelve;
    for (std::size_t i = 0; i < 12; ++i) {
      if (i) twelve += ' ';
      twelve += tokens[i];
    }
    // append fresh tokens so the sample is long enough but shares only 12
    const auto flags = ngram_flag(prompt_sample("s2", twelve + " zz1 zz2 zz3"), index);
    CHECK(flags.empty());
  }
  SUBCASE("samples shorter than 13 tokens bypass the rule") {
    CHECK(ngram_flag(prompt_sample("s3", "短 文本 only"), index).empty());
  }
  SUBCASE("unbuilt index errors") {
    CorpusIndex empty;
    CHECK_THROWS_WITH_AS(ngram_flag(prompt_sample("s4", doc13), empty),
                         doctest::Contains("IndexNotBuilt"), Error);
  }
}

TEST_CASE("ngram_flag is monotone: adding documents never removes flags") {
  Rng rng(6);
  CorpusIndex small, large;
  const std::string shared = words(20, rng);
  small.add_document({"a", shared});
  large.add_document({"a", shared});
  large.add_document({"b", words(30, rng)});
  const Sample s = prompt_sample("s", shared);
  const auto flags_small = ngram_flag(s, small);
  const auto flags_large = ngram_flag(s, large);
  CHECK(flags_large.size() >= flags_small.size());
  std::set<std::string> evidence_large;
  for (const auto& f : flags_large) evidence_large.insert(f.evidence);
  for (const auto& f : flags_small) CHECK(evidence_large.count(f.evidence) == 1);
}

TEST_CASE("no flag fires when the sample shares zero tokens with the corpus") {
  Rng rng(7);
  CorpusIndex index;
  index.add_document({"doc", words(40, rng)});
  index.embed_documents(make_trigram_embedder());
  const Sample s = prompt_sample(
      "s", "完全 不同 的 文本 containing unrelatedtokenxyz qqq7 qqq8 qqq9 qqq10 qqq11 "
           "qqq12 qqq13 qqq14");
  CHECK(ngram_flag(s, index).empty());
  const auto sem = semantic_flag(s, make_trigram_embedder(), index);
  CHECK_FALSE(sem.has_value());
}

TEST_CASE("semantic_flag thresholds on max corpus cosine") {
  CorpusIndex index;
  index.add_document({"doc1", "the quick brown fox jumps over the lazy dog"});
  index.add_document({"doc2", "一个 完全 无关 的 中文 文档"});
  const auto embedder = make_trigram_embedder();
  index.embed_documents(embedder);

  SUBCASE("identical text flags with cosine 1") {
    const auto flag =
        semantic_flag(prompt_sample("s", "the quick brown fox jumps over the lazy dog"),
                      embedder, index);
    REQUIRE(flag.has_value());
    CHECK(flag->similarity == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(flag->corpus_doc_id == "doc1");
    CHECK(flag->reason == FlagReason::SemanticOverlap);
    CHECK(flag->similarity > 0.85);
  }
  SUBCASE("unrelated text does not flag") {
    const auto flag = semantic_flag(prompt_sample("s", "zzz yyy xxx www vvv"), embedder, index);
    CHECK_FALSE(flag.has_value());
  }
}

TEST_CASE("semantic flags match a brute-force all-pairs cosine scan") {
  Rng rng(13);
  const auto embedder = make_trigram_embedder();
  std::vector<CorpusDoc> docs;
  for (int d = 0; d < 12; ++d) docs.push_back({"d" + std::to_string(d), words(15, rng)});
  CorpusIndex index;
  for (const auto& d : docs) index.add_document(d);
  index.embed_documents(embedder);

  // near-paraphrases of some docs plus fresh texts
  std::vector<Sample> samples;
  for (int i = 0; i < 12; ++i) {
    if (i % 3 == 0) {
      std::string paraphrase = docs[static_cast<std::size_t>(i)].text;
      paraphrase += " extra";
      samples.push_back(prompt_sample("p" + std::to_string(i), paraphrase));
    } else {
      samples.push_back(prompt_sample("f" + std::to_string(i), words(15, rng)));
    }
  }
  for (const auto& s : samples) {
    double best = -1.0;
    std::string best_doc;
    const auto qv = embedder(s.prompt);
    for (const auto& d : docs) {
      const double c = cosine(qv, embedder(d.text));
      if (c > best) {
        best = c;
        best_doc = d.doc_id;
      }
    }
    const auto flag = semantic_flag(s, embedder, index);
    CAPTURE(s.id);
    CHECK(flag.has_value() == (best > 0.85));
    if (flag) {
      CHECK(flag->corpus_doc_id == best_doc);
      CHECK(flag->similarity == doctest::Approx(best).epsilon(1e-12));
    }
  }
}

TEST_CASE("split_private_anchor") {
  std::vector<Sample> dataset;
  for (int i = 0; i < 100; ++i)
    dataset.push_back(prompt_sample("s" + std::to_string(i), "text " + std::to_string(i)));

  SUBCASE("size zero gives an empty private set") {
    const auto split = split_private_anchor(dataset, 0, 1);
    CHECK(split.private_set.empty());
    CHECK(split.public_set.size() == 100);
  }
  SUBCASE("size equal to the dataset makes everything private") {
    const auto split = split_private_anchor(dataset, 100, 1);
    CHECK(split.public_set.empty());
    CHECK(split.private_set.size() == 100);
    for (const auto& s : split.private_set) CHECK(s.source_tier == SourceTier::Private);
  }
  SUBCASE("same seed reproduces the split, different seeds differ") {
    const auto a = split_private_anchor(dataset, 30, 7);
    const auto b = split_private_anchor(dataset, 30, 7);
    const auto c = split_private_anchor(dataset, 30, 8);
    const auto ids = [](const std::vector<Sample>& v) {
      std::set<std::string> out;
      for (const auto& s : v) out.insert(s.id);
      return out;
    };
    CHECK(ids(a.private_set) == ids(b.private_set));
    CHECK(ids(a.private_set) != ids(c.private_set));
  }
  SUBCASE("partition is exact") {
    const auto split = split_private_anchor(dataset, 40, 3);
    std::set<std::string> all;
    for (const auto& s : split.public_set) all.insert(s.id);
    for (const auto& s : split.private_set) {
      CHECK(all.count(s.id) == 0);  // disjoint
      all.insert(s.id);
    }
    CHECK(all.size() == dataset.size());
  }
  SUBCASE("oversized request errors") {
    CHECK_THROWS_WITH_AS(split_private_anchor(dataset, 101, 1),
                         doctest::Contains("SizeTooLarge"), Error);
  }
}

TEST_CASE("corpus index loads JSONL") {
  const std::string dir = "/tmp/anisoeval_datapipe_test";
  std::filesystem::create_directories(dir);
  write_file(dir + "/corpus.jsonl",
             R"({"doc_id":"a","text":"one two three four five six seven eight nine ten eleven twelve thirteen"})"
             "\n");
  const auto index = CorpusIndex::from_path(dir + "/corpus.jsonl");
  CHECK(index.num_documents() == 1);
  const auto flags = ngram_flag(
      prompt_sample("s", "one two three four five six seven eight nine ten eleven twelve "
                         "thirteen"),
      index);
  CHECK(flags.size() == 1);
}
