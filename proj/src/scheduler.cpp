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

#include "anisoeval/scheduler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>

#include "anisoeval/errors.hpp"
#include "anisoeval/exact_sum.hpp"
#include "anisoeval/json_io.hpp"
#include "anisoeval/rng.hpp"

namespace anisoeval::scheduler {

void SchedulerConfig::validate() const {
  require(pilot_fraction > 0.0 && pilot_fraction <= 1.0, "InvalidConfig",
          "pilot_fraction must lie in (0,1]");
  require(alpha > 0.0 && alpha < 1.0, "InvalidConfig", "alpha must lie in (0,1)");
  require(delta > 0.0, "InvalidConfig", "delta must be positive");
  for (const auto& [dim, d] : per_stratum_delta)
    require(d > 0.0, "InvalidConfig", "per-stratum delta for '" + dim + "' must be positive");
  if (budget) require(*budget >= 0.0, "InvalidConfig", "budget must be nonnegative");
  require(batch_fraction > 0.0 && batch_fraction <= 1.0, "InvalidConfig",
          "batch_fraction must lie in (0,1]");
  require(workers >= 1, "InvalidConfig", "workers must be >= 1");
}

double SchedulerConfig::delta_for(const std::string& dimension) const {
  const auto it = per_stratum_delta.find(dimension);
  return it != per_stratum_delta.end() ? it->second : delta;
}

std::string to_string(RunMode mode) {
  return mode == RunMode::Dynamic ? "dynamic" : "full_set";
}

RunMode run_mode_from_string(const std::string& s) {
  if (s == "dynamic") return RunMode::Dynamic;
  if (s == "full_set") return RunMode::FullSet;
  fail("InvalidEnum", "unknown run mode '" + s + "'");
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::Converged: return "converged";
    case StopReason::BudgetExhausted: return "budget_exhausted";
    case StopReason::PopulationExhausted: return "population_exhausted";
  }
  return "converged";
}

std::vector<std::int64_t> neyman_allocation(const std::vector<double>& weights,
                                            const std::vector<double>& stddevs,
                                            const std::vector<double>& costs,
                                            std::int64_t total,
                                            const std::vector<std::int64_t>& caps) {
  const std::size_t h_count = weights.size();
  require(stddevs.size() == h_count && costs.size() == h_count,
          "DimensionMismatch", "weights, stddevs and costs must have equal length");
  require(caps.empty() || caps.size() == h_count, "DimensionMismatch",
          "caps must be empty or match the stratum count");
  require(total >= 0, "DimensionMismatch", "total must be nonnegative");
  for (double c : costs)
    require(c > 0.0, "NonPositiveCost", "stratum costs must be positive");
  for (double s : stddevs)
    require(s >= 0.0, "DimensionMismatch", "stddevs must be nonnegative");

  std::vector<double> share(h_count);
  double share_sum = 0.0;
  for (std::size_t h = 0; h < h_count; ++h) {
    share[h] = weights[h] * stddevs[h] / std::sqrt(costs[h]);
    share_sum += share[h];
  }
  if (share_sum == 0.0) {
    // all-zero variance: fall back to proportional-to-weight allocation
    for (std::size_t h = 0; h < h_count; ++h) share[h] = weights[h];
  }

  std::vector<std::int64_t> alloc(h_count, 0);
  std::vector<bool> fixed(h_count, false);
  std::int64_t remaining = total;

  for (;;) {
    double pool_share = 0.0;
    for (std::size_t h = 0; h < h_count; ++h)
      if (!fixed[h]) pool_share += share[h];
    if (remaining <= 0 || pool_share <= 0.0) break;

    // largest-remainder apportionment over the unfixed pool
    std::vector<std::int64_t> assign(h_count, 0);
    std::vector<std::pair<double, std::size_t>> fractions;
    std::int64_t assigned = 0;
    for (std::size_t h = 0; h < h_count; ++h) {
      if (fixed[h]) continue;
      const double quota = static_cast<double>(remaining) * share[h] / pool_share;
      assign[h] = static_cast<std::int64_t>(std::floor(quota));
      assigned += assign[h];
      fractions.emplace_back(quota - std::floor(quota), h);
    }
    std::sort(fractions.begin(), fractions.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    const std::int64_t leftover = remaining - assigned;
    for (std::int64_t i = 0; i < leftover; ++i)
      assign[fractions[static_cast<std::size_t>(i) % fractions.size()].second] += 1;

    // cap at remaining population and redistribute the surplus
    bool any_capped = false;
    for (std::size_t h = 0; h < h_count; ++h) {
      if (fixed[h] || caps.empty()) continue;
      if (assign[h] > caps[h]) {
        alloc[h] = caps[h];
        remaining -= caps[h];
        fixed[h] = true;
        any_capped = true;
      }
    }
    if (!any_capped) {
      for (std::size_t h = 0; h < h_count; ++h)
        if (!fixed[h]) alloc[h] = assign[h];
      break;
    }
  }
  return alloc;
}

double hs_halfwidth(std::int64_t n, std::int64_t population, double alpha) {
  require(n >= 1 && n <= population, "InvalidRange",
          "need 1 <= n <= N, got n=" + std::to_string(n) +
              " N=" + std::to_string(population));
  require(alpha > 0.0 && alpha < 1.0, "InvalidRange", "alpha must lie in (0,1)");
  const double factor = 1.0 - static_cast<double>(n - 1) / static_cast<double>(population);
  return std::sqrt(factor * std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

bool should_stop(const StratumAccumulator& acc, std::int64_t population,
                 const SchedulerConfig& config, double delta_h,
                 std::size_t num_strata) {
  if (acc.n() >= population) return true;  // census: zero sampling error
  if (acc.n() < 2) return false;           // variance undefined, keep sampling
  const double alpha_h = config.alpha / static_cast<double>(num_strata);
  return hs_halfwidth(acc.n(), population, alpha_h) < delta_h;
}

std::vector<std::int64_t> pilot_allocation(const std::vector<Stratum>& strata,
                                           const SchedulerConfig& config) {
  require(!strata.empty(), "EmptyDataset", "no strata to pilot");
  std::vector<std::int64_t> pilot(strata.size());
  for (std::size_t h = 0; h < strata.size(); ++h) {
    const double n_h = static_cast<double>(strata[h].population_size);
    const auto n0 = static_cast<std::int64_t>(
        std::max(2.0, std::ceil(config.pilot_fraction * n_h)));
    pilot[h] = std::min<std::int64_t>(n0, strata[h].population_size);
  }
  return pilot;
}

Estimate stratified_estimate(const EvaluationRun& run, const std::vector<Stratum>& strata,
                             const SchedulerConfig& config) {
  require(!strata.empty(), "EmptyDataset", "no strata");
  const double alpha_h = config.alpha / static_cast<double>(strata.size());
  ExactSum mu, hw;
  for (const Stratum& st : strata) {
    const auto it = run.per_stratum.find(st.id);
    if (it == run.per_stratum.end() || it->second.n() < 1)
      fail("EmptyStratum", "stratum '" + st.id + "' has no draws");
    mu.add(st.weight * it->second.mean());
    hw.add(st.weight * hs_halfwidth(it->second.n(), st.population_size, alpha_h));
  }
  return Estimate{mu.value(), hw.value()};
}

namespace {

struct StratumState {
  Stratum meta;
  std::vector<const Sample*> permuted;  // seeded permutation, fixed at run start
  std::size_t next = 0;                 // next permutation index to draw
  StratumAccumulator acc;
  bool stopped = false;
  StopReason reason = StopReason::Converged;

  std::int64_t remaining() const {
    return static_cast<std::int64_t>(permuted.size() - next);
  }
};

struct DrawTask {
  std::size_t stratum_idx;
  std::size_t perm_idx;
  const Sample* sample;
};

SampleRecord execute_draw(const Sample& sample, const oracle::Responder& responder,
                          const Scorer& scorer) {
  std::string last_error;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    oracle::Response resp;
    try {
      resp = responder(sample);
    } catch (const std::exception& e) {
      last_error = e.what();
      continue;
    }
    const scoring::ScoreRecord sr = scorer(sample, resp);
    SampleRecord rec;
    rec.sample_id = sample.id;
    rec.raw_output = resp.output;
    rec.score = sr.score;
    rec.scorer_tier = scoring::to_string(sr.tier);
    rec.latency_ms = resp.latency_ms;
    rec.failed = sr.failed;
    return rec;
  }
  SampleRecord rec;
  rec.sample_id = sample.id;
  rec.raw_output = "[responder failure: " + last_error + "]";
  rec.score = 0.0;
  rec.scorer_tier = "failed";
  rec.failed = true;
  return rec;
}

/// Runs the tasks across `workers` threads and folds the results into the
/// run in task order. The fold order is fixed by the task list, so the
/// result is independent of thread scheduling.
void dispatch_round(const std::vector<DrawTask>& tasks, int workers,
                    const oracle::Responder& responder, const Scorer& scorer,
                    std::vector<StratumState>& states, EvaluationRun& run,
                    ExactSum& cost, std::vector<SampleRecord>& records) {
  if (tasks.empty()) return;
  std::vector<SampleRecord> results(tasks.size());

  const int thread_count =
      static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), tasks.size()));
  if (thread_count <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i)
      results[i] = execute_draw(*tasks[i].sample, responder, scorer);
  } else {
    std::atomic<std::size_t> cursor{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto work = [&] {
      for (;;) {
        const std::size_t i = cursor.fetch_add(1);
        if (i >= tasks.size()) return;
        try {
          results[i] = execute_draw(*tasks[i].sample, responder, scorer);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(thread_count));
    for (int t = 0; t < thread_count; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  for (std::size_t i = 0; i < tasks.size(); ++i) {
    StratumState& st = states[tasks[i].stratum_idx];
    st.acc.add(tasks[i].sample->id, results[i].score);
    cost.add(tasks[i].sample->unit_cost);
    records.push_back(std::move(results[i]));
  }
  run.total_cost = cost.value();
}

}  // namespace

EvaluationRun run_evaluation(const std::string& model_id,
                             const std::vector<Sample>& dataset,
                             const std::vector<Stratum>& strata,
                             const SchedulerConfig& config,
                             const oracle::Responder& responder, const Scorer& scorer,
                             RunMode mode) {
  config.validate();
  require(static_cast<bool>(responder), "MissingFunction", "responder required");
  require(static_cast<bool>(scorer), "MissingFunction", "scorer required");
  require(!strata.empty(), "EmptyDataset", "no strata configured");

  // Group the dataset by dimension and fix each stratum's permutation.
  std::map<std::string, std::vector<const Sample*>> groups;
  for (const Sample& s : dataset) groups[s.dimension()].push_back(&s);

  std::vector<StratumState> states;
  states.reserve(strata.size());
  for (const Stratum& st : strata) {
    const auto it = groups.find(st.id);
    require(it != groups.end(), "EmptyStratum",
            "stratum '" + st.id + "' has no samples in the dataset");
    require(static_cast<std::int64_t>(it->second.size()) == st.population_size,
            "StrataMismatch",
            "stratum '" + st.id + "' population differs from the dataset");
    StratumState state;
    state.meta = st;
    state.permuted = it->second;
    std::sort(state.permuted.begin(), state.permuted.end(),
              [](const Sample* a, const Sample* b) { return a->id < b->id; });
    Rng rng(hash_u64(config.rng_seed, hash_key(0x5eedu, st.id)));
    rng.shuffle(state.permuted);
    states.push_back(std::move(state));
  }
  for (const auto& [dim, members] : groups) {
    (void)members;
    const bool known = std::any_of(strata.begin(), strata.end(),
                                   [&](const Stratum& st) { return st.id == dim; });
    require(known, "UnknownDimension", "dataset dimension '" + dim + "' not in strata");
  }

  EvaluationRun run;
  run.model_id = model_id;
  run.mode = mode;
  run.seed = config.rng_seed;

  ExactSum cost;
  // Records are appended per round in (stratum, permutation index) order and
  // tagged for the final global sort.
  std::vector<SampleRecord> records;
  std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::size_t>> record_keys;

  const auto plan_draws = [&](std::vector<StratumState*>& targets,
                              const std::vector<std::int64_t>& counts,
                              bool& budget_hit) {
    std::vector<DrawTask> tasks;
    double planned = cost.value();
    for (std::size_t t = 0; t < targets.size(); ++t) {
      StratumState& st = *targets[t];
      const std::int64_t want =
          std::min<std::int64_t>(counts[t], st.remaining());
      for (std::int64_t i = 0; i < want; ++i) {
        const Sample* sample = st.permuted[st.next];
        if (config.budget && planned + sample->unit_cost > *config.budget + 1e-12) {
          budget_hit = true;
          return tasks;
        }
        planned += sample->unit_cost;
        const std::size_t stratum_idx =
            static_cast<std::size_t>(targets[t] - states.data());
        tasks.push_back(DrawTask{stratum_idx, st.next, sample});
        ++st.next;
      }
    }
    return tasks;
  };

  const auto run_tasks = [&](const std::vector<DrawTask>& tasks) {
    for (const DrawTask& task : tasks)
      record_keys.push_back({{task.stratum_idx, task.perm_idx}, record_keys.size()});
    dispatch_round(tasks, config.workers, responder, scorer, states, run, cost, records);
  };

  bool budget_hit = false;

  if (mode == RunMode::FullSet) {
    // Census: every sample drawn exactly once, budget cap not applied.
    std::vector<DrawTask> tasks;
    for (StratumState& st : states) {
      while (st.next < st.permuted.size()) {
        tasks.push_back(DrawTask{static_cast<std::size_t>(&st - states.data()), st.next,
                                 st.permuted[st.next]});
        ++st.next;
      }
    }
    run_tasks(tasks);
    for (StratumState& st : states) {
      st.stopped = true;
      st.reason = StopReason::PopulationExhausted;
    }
  } else {
    // Stage 1: pilot probing.
    const std::vector<std::int64_t> pilot = pilot_allocation(strata, config);
    if (config.budget) {
      double pilot_cost = 0.0;
      for (std::size_t h = 0; h < states.size(); ++h)
        for (std::int64_t i = 0; i < pilot[h]; ++i)
          pilot_cost += states[h].permuted[static_cast<std::size_t>(i)]->unit_cost;
      require(pilot_cost <= *config.budget + 1e-12, "BudgetTooSmallForPilot",
              "budget " + fmt_double(*config.budget) +
                  " cannot cover the pilot cost " + fmt_double(pilot_cost));
    }
    {
      std::vector<StratumState*> targets;
      std::vector<std::int64_t> counts;
      for (std::size_t h = 0; h < states.size(); ++h) {
        targets.push_back(&states[h]);
        counts.push_back(pilot[h]);
      }
      const auto tasks = plan_draws(targets, counts, budget_hit);
      run_tasks(tasks);
    }

    // Stage 2: reallocate every round (streaming interpretation), drawing
    // up to batch_fraction of each active stratum per round, split by
    // Neyman allocation from the current variance estimates.
    while (!budget_hit) {
      std::vector<StratumState*> active;
      for (StratumState& st : states) {
        if (st.stopped) continue;
        if (st.acc.n() >= st.meta.population_size) {
          st.stopped = true;
          st.reason = StopReason::PopulationExhausted;
          continue;
        }
        if (should_stop(st.acc, st.meta.population_size, config,
                        config.delta_for(st.meta.id), states.size())) {
          st.stopped = true;
          st.reason = StopReason::Converged;
          continue;
        }
        active.push_back(&st);
      }
      if (active.empty()) break;

      std::vector<double> weights, stddevs, costs;
      std::vector<std::int64_t> caps;
      std::int64_t round_total = 0;
      for (StratumState* st : active) {
        weights.push_back(st->meta.weight);
        stddevs.push_back(st->acc.stddev());
        costs.push_back(st->meta.unit_cost);
        caps.push_back(st->remaining());
        const auto batch = static_cast<std::int64_t>(std::max(
            1.0, std::floor(config.batch_fraction *
                            static_cast<double>(st->meta.population_size))));
        round_total += std::min(batch, st->remaining());
      }
      const auto counts = neyman_allocation(weights, stddevs, costs, round_total, caps);

      const auto tasks = plan_draws(active, counts, budget_hit);
      if (tasks.empty() && !budget_hit) {
        // nothing schedulable this round (all active strata allocated zero);
        // draw one sample from the first active stratum to guarantee progress
        std::vector<std::int64_t> ones(active.size(), 0);
        ones[0] = 1;
        const auto fallback = plan_draws(active, ones, budget_hit);
        if (fallback.empty()) break;
        run_tasks(fallback);
        continue;
      }
      run_tasks(tasks);
    }
    for (StratumState& st : states) {
      if (st.stopped) continue;
      if (st.acc.n() >= st.meta.population_size) {
        st.stopped = true;
        st.reason = StopReason::PopulationExhausted;
      } else if (should_stop(st.acc, st.meta.population_size, config,
                             config.delta_for(st.meta.id), states.size())) {
        st.stopped = true;
        st.reason = StopReason::Converged;
      } else {
        st.stopped = true;
        st.reason = StopReason::BudgetExhausted;
      }
    }
  }

  // Deterministic record order: sort by (stratum, permutation index).
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return record_keys[a].first < record_keys[b].first;
  });
  run.records.reserve(records.size());
  for (std::size_t idx : order) run.records.push_back(std::move(records[idx]));

  for (StratumState& st : states) {
    run.per_stratum[st.meta.id] = std::move(st.acc);
    run.stopped_reason[st.meta.id] = st.reason;
  }
  run.total_cost = cost.value();
  return run;
}

Scorer make_hint_scorer() {
  const auto fallback = make_hybrid_scorer(
      [](const std::string& a, const std::string& b) {
        return scoring::ngram_cosine_similarity(a, b);
      },
      [](const std::string&, const std::string&) { return 0.0; });
  return [fallback](const Sample& sample, const oracle::Response& resp) {
    if (resp.score_hint) {
      scoring::ScoreRecord rec;
      rec.sample_id = sample.id;
      rec.score = *resp.score_hint;
      rec.tier = (*resp.score_hint == 0.0 || *resp.score_hint == 1.0)
                     ? scoring::ScoreTier::ObjectiveExact
                     : scoring::ScoreTier::Judge;
      if (rec.tier == scoring::ScoreTier::Judge) rec.judge_verdict = rec.score;
      return rec;
    }
    return fallback(sample, resp);
  };
}

Scorer make_hybrid_scorer(scoring::SimilarityFn similarity_fn, scoring::JudgeFn judge_fn) {
  return [similarity_fn = std::move(similarity_fn), judge_fn = std::move(judge_fn)](
             const Sample& sample, const oracle::Response& resp) {
    return scoring::hybrid_score(sample, scoring::strip_think(resp.output),
                                 similarity_fn, judge_fn);
  };
}

std::string serialize_run(const EvaluationRun& run, const std::vector<Stratum>& strata,
                          const SchedulerConfig& config) {
  std::string out;
  for (const SampleRecord& rec : run.records) {
    Json j{{"sample_id", rec.sample_id},
           {"raw_output", rec.raw_output},
           {"score", rec.score},
           {"scorer_tier", rec.scorer_tier},
           {"latency_ms", rec.latency_ms}};
    if (rec.failed) j["failed"] = true;
    out += j.dump();
    out += '\n';
  }

  const Estimate est = stratified_estimate(run, strata, config);
  ExactSum full_cost;
  for (const Stratum& st : strata)
    full_cost.add(static_cast<double>(st.population_size) * st.unit_cost);

  const double alpha_h = config.alpha / static_cast<double>(strata.size());
  Json per_stratum = Json::object();
  for (const Stratum& st : strata) {
    const StratumAccumulator& acc = run.per_stratum.at(st.id);
    per_stratum[st.id] = Json{
        {"n", acc.n()},
        {"population_size", st.population_size},
        {"sum", acc.sum()},
        {"sum_sq", acc.sum_sq()},
        {"mean", acc.mean()},
        {"halfwidth", hs_halfwidth(acc.n(), st.population_size, alpha_h)},
        {"stopped_reason", to_string(run.stopped_reason.at(st.id))}};
  }
  Json summary{{"summary",
                Json{{"model_id", run.model_id},
                     {"mode", to_string(run.mode)},
                     {"seed", run.seed},
                     {"total_cost", run.total_cost},
                     {"full_set_cost", full_cost.value()},
                     {"cost_ratio", full_cost.value() > 0.0
                                        ? run.total_cost / full_cost.value()
                                        : 1.0},
                     {"mu_hat", est.mu_hat},
                     {"halfwidth", est.halfwidth},
                     {"per_stratum", std::move(per_stratum)},
                     {"config", Json{{"pilot_fraction", config.pilot_fraction},
                                     {"alpha", config.alpha},
                                     {"delta", config.delta},
                                     {"batch_fraction", config.batch_fraction},
                                     {"rng_seed", config.rng_seed}}}}}};
  out += summary.dump();
  out += '\n';
  return out;
}

RunSummary parse_run_file(const std::string& content) {
  std::size_t pos = 0;
  Json summary;
  bool found = false;
  while (pos < content.size()) {
    std::size_t eol = content.find('\n', pos);
    if (eol == std::string::npos) eol = content.size();
    const std::string line = content.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;
    Json j = Json::parse(line, nullptr, false);
    if (!j.is_discarded() && j.contains("summary")) {
      summary = j["summary"];
      found = true;
    }
  }
  require(found, "ParseError", "run file has no summary object");

  RunSummary rs;
  rs.model_id = summary.at("model_id").get<std::string>();
  rs.mode = summary.at("mode").get<std::string>();
  rs.seed = summary.at("seed").get<std::uint64_t>();
  rs.total_cost = summary.at("total_cost").get<double>();
  rs.full_set_cost = summary.at("full_set_cost").get<double>();
  rs.mu_hat = summary.at("mu_hat").get<double>();
  rs.halfwidth = summary.at("halfwidth").get<double>();
  for (const auto& [dim, j] : summary.at("per_stratum").items()) {
    StratumSummary ss;
    ss.n = j.at("n").get<std::int64_t>();
    ss.mean = j.at("mean").get<double>();
    ss.halfwidth = j.at("halfwidth").get<double>();
    ss.stopped_reason = j.at("stopped_reason").get<std::string>();
    rs.per_stratum[dim] = ss;
  }
  return rs;
}

}  // namespace anisoeval::scheduler
