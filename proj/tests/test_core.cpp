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

#include <cmath>

#include "anisoeval/errors.hpp"
#include "anisoeval/exact_sum.hpp"
#include "anisoeval/json_io.hpp"
#include "anisoeval/rng.hpp"
#include "anisoeval/types.hpp"

using namespace anisoeval;

namespace {

Sample make_sample(const std::string& id, const std::string& capability,
                   double unit_cost = 1.0) {
  Sample s;
  s.id = id;
  s.cell = CapabilityCell{"domain", capability};
  s.task_type = "qa";
  s.prompt = "prompt " + id;
  s.constraints = "plain text";
  s.gold = std::vector<std::string>{"ok"};
  s.unit_cost = unit_cost;
  s.created_at = "2026-01-01T00:00:00Z";
  return s;
}

std::vector<Sample> dataset_with_counts(const std::vector<std::pair<std::string, int>>& spec) {
  std::vector<Sample> out;
  for (const auto& [dim, count] : spec)
    for (int i = 0; i < count; ++i)
      out.push_back(make_sample(dim + "-" + std::to_string(i), dim));
  return out;
}

}  // namespace

TEST_CASE("build_strata computes population weights") {
  const auto strata = build_strata(dataset_with_counts({{"a", 60}, {"b", 40}}));
  REQUIRE(strata.size() == 2);
  CHECK(strata[0].id == "a");
  CHECK(strata[0].population_size == 60);
  CHECK(strata[0].weight == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(strata[1].weight == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("build_strata degenerate single stratum") {
  const auto strata = build_strata(dataset_with_counts({{"only", 100}}));
  REQUIRE(strata.size() == 1);
  CHECK(strata[0].weight == 1.0);
  CHECK(strata[0].population_size == 100);
}

TEST_CASE("build_strata reproduces the published column totals") {
  // Column totals 59,400 / 59,750 / 41,933 / 14,888 against the published
  // N = 207,843. The columns alone sum to 175,971, so the residual 31,872
  // samples live in a fifth stratum to keep sum(W_h) = 1 exact.
  const std::vector<std::pair<std::string, int>> counts = {
      {"knowledge_retrieval", 59400},
      {"logical_reasoning", 59750},
      {"instruction_following", 41933},
      {"open_ended_generation", 14888},
      {"unlisted", 207843 - 175971}};
  const auto strata = build_strata(dataset_with_counts(counts));
  REQUIRE(strata.size() == 5);
  const double n_total = 207843.0;
  std::map<std::string, double> weights;
  for (const auto& st : strata) weights[st.id] = st.weight;
  CHECK(weights["knowledge_retrieval"] == doctest::Approx(59400.0 / n_total).epsilon(1e-12));
  CHECK(weights["logical_reasoning"] == doctest::Approx(59750.0 / n_total).epsilon(1e-12));
  CHECK(weights["instruction_following"] == doctest::Approx(41933.0 / n_total).epsilon(1e-12));
  CHECK(weights["open_ended_generation"] == doctest::Approx(14888.0 / n_total).epsilon(1e-12));
  // four-decimal figures
  CHECK(weights["knowledge_retrieval"] == doctest::Approx(0.2858).epsilon(2e-4));
  CHECK(weights["logical_reasoning"] == doctest::Approx(0.2875).epsilon(2e-4));
  CHECK(weights["instruction_following"] == doctest::Approx(0.2017).epsilon(2e-4));
  CHECK(weights["open_ended_generation"] == doctest::Approx(0.0716).epsilon(2e-3));
}

TEST_CASE("build_strata mean unit cost per stratum") {
  std::vector<Sample> ds = {make_sample("a-0", "a", 1.0), make_sample("a-1", "a", 3.0),
                            make_sample("b-0", "b", 2.0)};
  const auto strata = build_strata(ds);
  CHECK(strata[0].unit_cost == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(strata[1].unit_cost == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("build_strata errors") {
  CHECK_THROWS_WITH_AS(build_strata({}), doctest::Contains("EmptyDataset"), Error);
  const auto ds = dataset_with_counts({{"a", 3}});
  CHECK_THROWS_WITH_AS(build_strata(ds, {"b"}), doctest::Contains("UnknownDimension"),
                       Error);
}

TEST_CASE("weight identity: sum W_h = 1 and sum W_h * N = N over random datasets") {
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<std::string, int>> spec;
    const int dims = 1 + static_cast<int>(rng.next_below(8));
    for (int d = 0; d < dims; ++d)
      spec.push_back({"dim" + std::to_string(d), 1 + static_cast<int>(rng.next_below(500))});
    const auto ds = dataset_with_counts(spec);
    const auto strata = build_strata(ds);
    ExactSum w_sum;
    std::int64_t n_sum = 0;
    for (const auto& st : strata) {
      w_sum.add(st.weight);
      n_sum += st.population_size;
    }
    CHECK(std::abs(w_sum.value() - 1.0) <= 1e-9);
    CHECK(n_sum == static_cast<std::int64_t>(ds.size()));
  }
}

TEST_CASE("validate_scheme accepts uniform 1/K over 22 dimensions") {
  std::vector<std::string> dims;
  WeightScheme scheme{"uniform", {}};
  for (int k = 0; k < 22; ++k) {
    dims.push_back("d" + std::to_string(k));
    scheme.weights[dims.back()] = 1.0 / 22.0;
  }
  CHECK_NOTHROW(validate_scheme(scheme, dims));
}

TEST_CASE("validate_scheme rejects a sum of 0.98") {
  WeightScheme scheme{"bad", {{"a", 0.5}, {"b", 0.48}}};
  CHECK_THROWS_WITH_AS(validate_scheme(scheme, {"a", "b"}),
                       doctest::Contains("WeightSumInvalid"), Error);
}

TEST_CASE("validate_scheme accepts the general-heavy scheme") {
  const std::vector<std::string> dims = {"Language", "Reasoning", "Education",
                                         "Medical",  "Finance",   "Law",
                                         "Agent"};
  WeightScheme scheme{"general",
                      {{"Language", 0.40},
                       {"Reasoning", 0.20},
                       {"Education", 0.08},
                       {"Medical", 0.08},
                       {"Finance", 0.08},
                       {"Law", 0.08},
                       {"Agent", 0.08}}};
  CHECK_NOTHROW(validate_scheme(scheme, dims));
}

TEST_CASE("validate_scheme rejects negative weights and unknown dimensions") {
  WeightScheme negative{"neg", {{"a", 0.5}, {"b", -0.5}}};
  CHECK_THROWS_WITH_AS(validate_scheme(negative, {"a", "b"}),
                       doctest::Contains("NegativeWeight"), Error);
  WeightScheme oversized{"big", {{"a", 1.5}}};
  CHECK_THROWS_AS(validate_scheme(oversized, {"a"}), Error);
  WeightScheme unknown{"unk", {{"zzz", 1.0}}};
  CHECK_THROWS_WITH_AS(validate_scheme(unknown, {"a"}),
                       doctest::Contains("UnknownDimension"), Error);
}

TEST_CASE("accumulator merge is commutative and associative, bit-identical") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + static_cast<int>(rng.next_below(40));
    std::vector<std::pair<std::string, double>> draws;
    for (int i = 0; i < n; ++i)
      draws.push_back({"s" + std::to_string(i), rng.next_double()});

    // fold in two different random orders through three accumulators
    const auto fold = [&](const std::vector<std::size_t>& order, int parts) {
      std::vector<StratumAccumulator> accs(parts);
      for (std::size_t i = 0; i < order.size(); ++i)
        accs[i % parts].add(draws[order[i]].first, draws[order[i]].second);
      while (accs.size() > 1) {
        accs[accs.size() - 2].merge(accs.back());
        accs.pop_back();
      }
      return accs[0];
    };
    std::vector<std::size_t> order_a(draws.size()), order_b;
    std::iota(order_a.begin(), order_a.end(), 0);
    order_b = order_a;
    rng.shuffle(order_b);

    const auto acc_a = fold(order_a, 1);
    const auto acc_b = fold(order_b, 3);
    CHECK(acc_a.n() == acc_b.n());
    CHECK(acc_a.sum() == acc_b.sum());        // bit-identical via exact sums
    CHECK(acc_a.sum_sq() == acc_b.sum_sq());
    CHECK(acc_a.drawn_ids() == acc_b.drawn_ids());
  }
}

TEST_CASE("accumulator statistics match a brute-force pass") {
  StratumAccumulator acc;
  const std::vector<double> scores = {0.25, 0.5, 1.0, 0.0, 0.125};
  for (std::size_t i = 0; i < scores.size(); ++i)
    acc.add("s" + std::to_string(i), scores[i]);
  double mean = 0.0;
  for (double s : scores) mean += s;
  mean /= static_cast<double>(scores.size());
  double var = 0.0;
  for (double s : scores) var += (s - mean) * (s - mean);
  var /= static_cast<double>(scores.size() - 1);
  CHECK(acc.mean() == doctest::Approx(mean).epsilon(1e-15));
  CHECK(acc.variance() == doctest::Approx(var).epsilon(1e-12));
  CHECK(acc.n() == 5);
}

TEST_CASE("accumulator rejects duplicate draws") {
  StratumAccumulator acc;
  acc.add("x", 1.0);
  CHECK_THROWS_WITH_AS(acc.add("x", 0.5), doctest::Contains("DuplicateDraw"), Error);
}

TEST_CASE("exact sum survives adversarial cancellation") {
  ExactSum s;
  s.add(1e100);
  s.add(1.0);
  s.add(-1e100);
  CHECK(s.value() == 1.0);
}

#if defined(__SIZEOF_FLOAT128__)
TEST_CASE("exact sum agrees with quad-precision summation") {
  Rng rng(1234);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_below(300));
    ExactSum s;
    __float128 quad = 0;
    for (int i = 0; i < n; ++i) {
      // mix magnitudes to provoke rounding trouble
      const double x = (rng.next_double() - 0.5) * std::pow(2.0, static_cast<double>(rng.next_below(40)));
      s.add(x);
      quad += static_cast<__float128>(x);
    }
    CHECK(s.value() == static_cast<double>(quad));
  }
}
#endif

TEST_CASE("dataset parser rejects garbage without crashing") {
  Rng rng(4321);
  for (int trial = 0; trial < 200; ++trial) {
    std::string junk;
    const std::size_t len = rng.next_below(200);
    for (std::size_t i = 0; i < len; ++i)
      junk += static_cast<char>(rng.next_below(256));
    try {
      parse_dataset_jsonl(junk);
    } catch (const Error&) {
      // ParseError is the expected outcome for most of these
    }
  }
}

TEST_CASE("model descriptor requires exactly one of endpoint / seed") {
  ModelDescriptor d;
  d.id = "m";
  CHECK_THROWS_AS(d.validate(), Error);
  d.seed = 7;
  CHECK_NOTHROW(d.validate());
  d.endpoint = "http://localhost:1/v1/chat/completions";
  CHECK_THROWS_AS(d.validate(), Error);
  d.seed.reset();
  CHECK_NOTHROW(d.validate());
}

TEST_CASE("serialization round-trips are value-identical") {
  SUBCASE("sample with every gold variant") {
    std::vector<GoldAnswer> golds = {
        GoldAnswer{std::string{"reference text"}},
        GoldAnswer{0.7500000000000001},
        GoldAnswer{std::vector<std::string>{"A", "B 选项"}},
        GoldAnswer{std::vector<ToolStep>{{"search", "{\"q\":1}"}, {"calc", ""}}}};
    int idx = 0;
    for (const auto& gold : golds) {
      Sample s = make_sample("id-" + std::to_string(idx++), "dim");
      s.gold = gold;
      s.unit_cost = 0.1234567890123456789;
      s.difficulty = 0.25;
      s.subtask = "sub";
      s.source_tier = SourceTier::Private;
      const Sample back = sample_from_json(Json::parse(to_json(s).dump()));
      CHECK(back == s);
    }
  }
  SUBCASE("stratum") {
    const Stratum st{"dim", 12345, 0.123456789012345678, 1.9999999999999998};
    CHECK(stratum_from_json(Json::parse(to_json(st).dump())) == st);
  }
  SUBCASE("accumulator") {
    StratumAccumulator acc;
    Rng rng(3);
    for (int i = 0; i < 17; ++i) acc.add("s" + std::to_string(i), rng.next_double());
    const auto back = accumulator_from_json(Json::parse(to_json(acc).dump()));
    CHECK(back.n() == acc.n());
    CHECK(back.sum() == acc.sum());
    CHECK(back.sum_sq() == acc.sum_sq());
    CHECK(back.drawn_ids() == acc.drawn_ids());
  }
  SUBCASE("descriptor and scheme") {
    ModelDescriptor d;
    d.id = "gpt-test";
    d.category = ModelCategory::OpenSource;
    d.endpoint = "http://127.0.0.1:8080/v1/chat/completions";
    d.price_per_1k_tokens = 0.002;
    d.provider = "LOCAL";
    CHECK(descriptor_from_json(Json::parse(to_json(d).dump())) == d);

    const WeightScheme ws{"w", {{"a", 0.25}, {"b", 0.75}}};
    CHECK(scheme_from_json(Json::parse(to_json(ws).dump())) == ws);
  }
  SUBCASE("score matrix") {
    ScoreMatrix m;
    m.model_ids = {"m1", "m2"};
    m.dimension_ids = {"a", "b", "c"};
    m.raw = {{0.1, 0.2, 0.3}, {0.9999999999999999, 0.0, 0.5}};
    m.normalized = {{0.2, 0.4, 0.6}, {1.0, 0.0, 1.0}};
    m.difficulty = {0.5, 0.5, 0.5};
    CHECK(matrix_from_json(Json::parse(to_json(m).dump())) == m);
  }
}

TEST_CASE("dataset JSONL parsing reports line numbers and duplicate ids") {
  const std::string good = to_json(make_sample("a", "dim")).dump() + "\n" +
                           to_json(make_sample("b", "dim")).dump() + "\n";
  CHECK(parse_dataset_jsonl(good).size() == 2);

  const std::string bad = to_json(make_sample("a", "dim")).dump() + "\n{broken\n";
  CHECK_THROWS_WITH_AS(parse_dataset_jsonl(bad), doctest::Contains("line 2"), Error);

  const std::string dup = to_json(make_sample("a", "dim")).dump() + "\n" +
                          to_json(make_sample("a", "dim")).dump() + "\n";
  CHECK_THROWS_WITH_AS(parse_dataset_jsonl(dup), doctest::Contains("DuplicateId"), Error);
}

TEST_CASE("matrix CSV export uses the model_id header") {
  const std::string csv =
      matrix_to_csv({"m1", "m2"}, {"a", "b"}, {{0.5, 1.0}, {0.25, 0.125}});
  CHECK(csv == "model_id,a,b\nm1,0.5,1\nm2,0.25,0.125\n");
}
