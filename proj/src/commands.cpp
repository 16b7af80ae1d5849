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

#include "anisoeval/commands.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

#include "anisoeval/analytics.hpp"
#include "anisoeval/datapipe.hpp"
#include "anisoeval/endpoint.hpp"
#include "anisoeval/errors.hpp"
#include "anisoeval/exact_sum.hpp"
#include "anisoeval/scoring.hpp"

namespace anisoeval::commands {

namespace fs = std::filesystem;

const std::vector<std::string>& default_dimensions() {
  static const std::vector<std::string> dims = {
      "Language", "Reasoning", "Education", "Medical", "Finance", "Law", "Agent"};
  return dims;
}

std::vector<WeightScheme> default_schemes(const std::vector<std::string>& dimensions) {
  for (const std::string& dim : default_dimensions())
    require(std::find(dimensions.begin(), dimensions.end(), dim) != dimensions.end(),
            "SchemeDimensionMismatch",
            "default schemes need the canonical dimension '" + dim +
                "'; configure explicit schemes instead");

  WeightScheme general{"general_heavy",
                       {{"Language", 0.40},
                        {"Reasoning", 0.20},
                        {"Education", 0.08},
                        {"Medical", 0.08},
                        {"Finance", 0.08},
                        {"Law", 0.08},
                        {"Agent", 0.08}}};
  // 60% combined professional weight, the remaining 40% spread uniformly.
  const double spread3 = 0.40 / 3.0;
  WeightScheme professional{"professional_heavy",
                            {{"Education", 0.15},
                             {"Medical", 0.15},
                             {"Finance", 0.15},
                             {"Law", 0.15},
                             {"Language", spread3},
                             {"Reasoning", spread3},
                             {"Agent", spread3}}};
  WeightScheme reasoning{"reasoning_heavy",
                         {{"Reasoning", 0.50},
                          {"Agent", 0.20},
                          {"Language", 0.06},
                          {"Education", 0.06},
                          {"Medical", 0.06},
                          {"Finance", 0.06},
                          {"Law", 0.06}}};
  return {general, professional, reasoning};
}

const ModelEntry& ProjectConfig::find_model(const std::string& id) const {
  for (const ModelEntry& entry : models) {
    const std::string& entry_id = std::holds_alternative<ModelDescriptor>(entry)
                                      ? std::get<ModelDescriptor>(entry).id
                                      : std::get<oracle::SyntheticProfile>(entry).model_id;
    if (entry_id == id) return entry;
  }
  fail("UnknownModel", "model '" + id + "' not in config");
}

namespace {

std::string resolve_path(const std::string& base_dir, const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute() || base_dir.empty()) return path;
  return (fs::path(base_dir) / path).lexically_normal().string();
}

scheduler::SchedulerConfig scheduler_from_json(const Json& j) {
  scheduler::SchedulerConfig cfg;
  cfg.pilot_fraction = j.value("pilot_fraction", cfg.pilot_fraction);
  cfg.alpha = j.value("alpha", cfg.alpha);
  cfg.delta = j.value("delta", cfg.delta);
  if (j.contains("per_stratum_delta"))
    for (const auto& [dim, d] : j.at("per_stratum_delta").items())
      cfg.per_stratum_delta[dim] = d.get<double>();
  if (j.contains("budget") && !j.at("budget").is_null())
    cfg.budget = j.at("budget").get<double>();
  cfg.batch_fraction = j.value("batch_fraction", cfg.batch_fraction);
  cfg.rng_seed = j.value("rng_seed", cfg.rng_seed);
  cfg.workers = j.value("workers", cfg.workers);
  cfg.validate();
  return cfg;
}

Json scheduler_to_json(const scheduler::SchedulerConfig& cfg) {
  Json j{{"pilot_fraction", cfg.pilot_fraction},
         {"alpha", cfg.alpha},
         {"delta", cfg.delta},
         {"batch_fraction", cfg.batch_fraction},
         {"rng_seed", cfg.rng_seed},
         {"workers", cfg.workers}};
  if (!cfg.per_stratum_delta.empty()) {
    Json d = Json::object();
    for (const auto& [dim, v] : cfg.per_stratum_delta) d[dim] = v;
    j["per_stratum_delta"] = std::move(d);
  }
  if (cfg.budget) j["budget"] = *cfg.budget;
  return j;
}

oracle::SyntheticProfile profile_from_json(const Json& j) {
  oracle::SyntheticProfile p;
  p.model_id = j.at("id").get<std::string>();
  for (const auto& [dim, a] : j.at("ability").items()) p.ability[dim] = a.get<double>();
  p.difficulty_sensitivity = j.value("difficulty_sensitivity", 0.0);
  p.grading = oracle::grading_from_string(j.value("grading", std::string{"binary"}));
  p.concentration = j.value("concentration", 16.0);
  p.seed = j.value("seed", static_cast<std::uint64_t>(0));
  p.validate();
  return p;
}

Json profile_to_json(const oracle::SyntheticProfile& p) {
  Json ability = Json::object();
  for (const auto& [dim, a] : p.ability) ability[dim] = a;
  return Json{{"type", "synthetic"},
              {"id", p.model_id},
              {"ability", std::move(ability)},
              {"difficulty_sensitivity", p.difficulty_sensitivity},
              {"grading", oracle::to_string(p.grading)},
              {"concentration", p.concentration},
              {"seed", p.seed}};
}

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) fs::create_directories(dir);
}

}  // namespace

ProjectConfig load_config(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    fail("ParseError", std::string("config: ") + e.what());
  }
  const std::string base_dir = fs::path(path).parent_path().string();

  ProjectConfig cfg;
  cfg.dataset_path = resolve_path(base_dir, j.value("dataset_path", std::string{}));
  cfg.dimensions = j.value("dimensions", std::vector<std::string>{});
  if (j.contains("scheduler")) {
    cfg.scheduler = scheduler_from_json(j.at("scheduler"));
    if (j.at("scheduler").contains("mode"))
      cfg.default_mode = scheduler::run_mode_from_string(
          j.at("scheduler").at("mode").get<std::string>());
  }
  if (j.contains("schemes"))
    for (const auto& s : j.at("schemes")) cfg.schemes.push_back(scheme_from_json(s));
  if (j.contains("models")) {
    for (const auto& m : j.at("models")) {
      const std::string type = m.value("type", std::string{"endpoint"});
      if (type == "synthetic")
        cfg.models.emplace_back(profile_from_json(m));
      else
        cfg.models.emplace_back(descriptor_from_json(m));
    }
  }
  cfg.output_dir = resolve_path(base_dir, j.value("output_dir", std::string{"out"}));

  if (!cfg.schemes.empty()) {
    const auto& dims = cfg.dimensions.empty() ? default_dimensions() : cfg.dimensions;
    for (const WeightScheme& s : cfg.schemes) validate_scheme(s, dims);
  }
  return cfg;
}

IngestResult cmd_ingest(const std::string& dataset_path,
                        const std::optional<std::string>& corpus_path,
                        const std::string& out_dir) {
  const std::vector<Sample> dataset = read_dataset_jsonl(dataset_path);
  IngestResult result;
  result.total = dataset.size();

  std::vector<datapipe::ContaminationFlag> flags;
  std::set<std::string> flagged_ids;
  if (corpus_path) {
    datapipe::CorpusIndex index = datapipe::CorpusIndex::from_path(*corpus_path);
    const auto embedder = datapipe::make_trigram_embedder();
    index.embed_documents(embedder);
    for (const Sample& s : dataset) {
      auto ngram = datapipe::ngram_flag(s, index);
      if (!ngram.empty()) flagged_ids.insert(s.id);
      for (auto& f : ngram) flags.push_back(std::move(f));
      if (auto sem = datapipe::semantic_flag(s, embedder, index)) {
        flagged_ids.insert(s.id);
        flags.push_back(std::move(*sem));
      }
    }
  }

  std::vector<Sample> active;
  for (const Sample& s : dataset)
    if (!flagged_ids.count(s.id)) active.push_back(s);

  std::vector<Sample> public_set;
  for (const Sample& s : active)
    if (s.source_tier != SourceTier::Private) public_set.push_back(s);

  ensure_dir(out_dir);
  result.active = active.size();
  result.flagged = flagged_ids.size();
  result.active_path = (fs::path(out_dir) / "dataset.active.jsonl").string();
  result.public_path = (fs::path(out_dir) / "dataset.public.jsonl").string();
  result.flags_path = (fs::path(out_dir) / "contamination.jsonl").string();

  write_dataset_jsonl(result.active_path, active);
  write_dataset_jsonl(result.public_path, public_set);

  std::string flag_lines;
  for (const auto& f : flags) {
    Json j{{"sample_id", f.sample_id},
           {"reason", datapipe::to_string(f.reason)},
           {"evidence", f.evidence},
           {"corpus_doc_id", f.corpus_doc_id}};
    if (f.reason == datapipe::FlagReason::SemanticOverlap) j["similarity"] = f.similarity;
    flag_lines += j.dump();
    flag_lines += '\n';
  }
  write_file(result.flags_path, flag_lines);

  Json summary{{"total", result.total},
               {"active", result.active},
               {"flagged", result.flagged},
               {"flag_count", flags.size()}};
  write_file((fs::path(out_dir) / "ingest.summary.json").string(), summary.dump(2) + "\n");
  return result;
}

namespace {

struct ResolvedModel {
  std::string id;
  oracle::Responder responder;
  scheduler::Scorer scorer;
};

ResolvedModel resolve_model(const ModelEntry& entry) {
  ResolvedModel rm;
  if (const auto* profile = std::get_if<oracle::SyntheticProfile>(&entry)) {
    rm.id = profile->model_id;
    rm.responder = oracle::make_synthetic_responder(*profile);
    rm.scorer = scheduler::make_hint_scorer();
  } else {
    const auto& descriptor = std::get<ModelDescriptor>(entry);
    rm.id = descriptor.id;
    rm.responder = endpoint::make_endpoint_responder(descriptor);
    // Default doubles: trigram cosine for the semantic filter, a constant
    // reject verdict standing in for a judge model.
    rm.scorer = scheduler::make_hybrid_scorer(
        [](const std::string& a, const std::string& b) {
          return scoring::ngram_cosine_similarity(a, b);
        },
        [](const std::string&, const std::string&) { return 0.0; });
  }
  return rm;
}

}  // namespace

EvaluateResult cmd_evaluate(const ProjectConfig& config, const std::string& model_id,
                            scheduler::RunMode mode,
                            std::optional<std::uint64_t> seed_override,
                            const std::string& out_dir_override) {
  require(!config.dataset_path.empty(), "InvalidConfig", "config has no dataset_path");
  const std::vector<Sample> dataset = read_dataset_jsonl(config.dataset_path);
  const std::vector<Stratum> strata = build_strata(dataset, config.dimensions);

  scheduler::SchedulerConfig sched = config.scheduler;
  if (seed_override) sched.rng_seed = *seed_override;

  ResolvedModel model = resolve_model(config.find_model(model_id));
  EvaluateResult result;
  result.run = scheduler::run_evaluation(model.id, dataset, strata, sched,
                                         model.responder, model.scorer, mode);
  result.estimate = scheduler::stratified_estimate(result.run, strata, sched);

  ExactSum full_cost;
  for (const Sample& s : dataset) full_cost.add(s.unit_cost);
  result.full_set_cost = full_cost.value();
  result.cost_ratio =
      result.full_set_cost > 0.0 ? result.run.total_cost / result.full_set_cost : 1.0;

  const std::string out_dir =
      out_dir_override.empty() ? config.output_dir : out_dir_override;
  ensure_dir(out_dir);
  result.run_path =
      (fs::path(out_dir) / (model.id + "." + std::to_string(sched.rng_seed) + ".run.jsonl"))
          .string();
  write_file(result.run_path, scheduler::serialize_run(result.run, strata, sched));

  const double alpha_h = sched.alpha / static_cast<double>(strata.size());
  std::string table;
  for (const Stratum& st : strata) {
    const auto& acc = result.run.per_stratum.at(st.id);
    table += st.id + ": mu_hat=" + fmt_double(acc.mean()) +
             " halfwidth=" + fmt_double(scheduler::hs_halfwidth(
                                 acc.n(), st.population_size, alpha_h)) +
             " n=" + std::to_string(acc.n()) + "/" + std::to_string(st.population_size) +
             " (" + scheduler::to_string(result.run.stopped_reason.at(st.id)) + ")\n";
  }
  table += "global: mu_hat=" + fmt_double(result.estimate.mu_hat) +
           " halfwidth=" + fmt_double(result.estimate.halfwidth) + "\n";
  table += "total_cost=" + fmt_double(result.run.total_cost) +
           " full_set_cost=" + fmt_double(result.full_set_cost) +
           " cost_ratio=" + fmt_double(result.cost_ratio) + "\n";
  result.printed = table;
  return result;
}

namespace {

struct ModelScores {
  std::string model_id;
  std::map<std::string, double> per_dimension;
};

Json correlation_section(const std::vector<std::vector<double>>& columns_by_dim,
                         const std::vector<std::string>& dims) {
  Json out = Json::object();
  for (std::size_t i = 0; i < dims.size(); ++i) {
    for (std::size_t j = i + 1; j < dims.size(); ++j) {
      const std::string key = dims[i] + "|" + dims[j];
      try {
        out[key] = analytics::pearson(columns_by_dim[i], columns_by_dim[j]);
      } catch (const Error&) {
        out[key] = nullptr;  // zero-variance dimension
      }
    }
  }
  return out;
}

}  // namespace

AnalyzeResult cmd_analyze(const ProjectConfig& config,
                          const std::vector<std::string>& run_files,
                          const std::string& out_dir_override) {
  require(!run_files.empty(), "EmptyDataset", "no run files given");

  std::vector<ModelScores> models;
  std::set<std::string> seen_ids;
  std::vector<std::string> dims;
  for (const std::string& path : run_files) {
    const scheduler::RunSummary rs = scheduler::parse_run_file(read_file(path));
    require(seen_ids.insert(rs.model_id).second, "DuplicateModel",
            "model '" + rs.model_id + "' appears in more than one run file");
    ModelScores ms;
    ms.model_id = rs.model_id;
    std::vector<std::string> these_dims;
    for (const auto& [dim, ss] : rs.per_stratum) {
      ms.per_dimension[dim] = ss.mean;
      these_dims.push_back(dim);
    }
    if (dims.empty())
      dims = these_dims;
    else
      require(dims == these_dims, "InconsistentDimensions",
              "run file '" + path + "' covers a different dimension set");
    models.push_back(std::move(ms));
  }
  std::sort(models.begin(), models.end(),
            [](const ModelScores& a, const ModelScores& b) { return a.model_id < b.model_id; });

  ScoreMatrix matrix;
  matrix.dimension_ids = dims;
  for (const ModelScores& ms : models) {
    matrix.model_ids.push_back(ms.model_id);
    std::vector<double> row;
    for (const std::string& dim : dims) row.push_back(ms.per_dimension.at(dim));
    matrix.raw.push_back(std::move(row));
  }
  const std::size_t top_n = std::min<std::size_t>(10, matrix.model_ids.size());
  matrix.difficulty = analytics::anchor_difficulty(matrix.raw, matrix.model_ids, top_n);
  matrix.normalized = analytics::normalize_scores(matrix.raw, matrix.difficulty);
  matrix.validate();

  const std::vector<WeightScheme> schemes =
      config.schemes.empty() ? default_schemes(dims) : config.schemes;
  for (const WeightScheme& s : schemes) validate_scheme(s, dims);

  std::vector<analytics::Ranking> rankings;
  for (const WeightScheme& s : schemes)
    rankings.push_back(
        analytics::rank_under_scheme(matrix.normalized, matrix.model_ids, dims, s));

  Json report;
  report["dimensions"] = dims;
  report["models"] = matrix.model_ids;
  report["difficulty"] = matrix.difficulty;

  try {
    report["anisotropy"] = analytics::anisotropy_index(matrix.normalized);
  } catch (const Error& e) {
    report["anisotropy"] = nullptr;
    report["anisotropy_warning"] = e.code();
  }

  Json ci = Json::object();
  Json dgs_section = Json::object();
  for (std::size_t m = 0; m < matrix.model_ids.size(); ++m) {
    ci[matrix.model_ids[m]] = analytics::capability_inconsistency(matrix.normalized[m]);
    dgs_section[matrix.model_ids[m]] = analytics::dgs(matrix.normalized[m]);
  }
  report["ci_per_model"] = std::move(ci);
  report["dgs_per_model"] = std::move(dgs_section);

  Json rsa_section = Json::object();
  std::vector<double> rsa_values;
  if (rankings.size() >= 2) {
    const auto trajectories = analytics::rank_trajectories(rankings);
    for (const auto& t : trajectories) {
      Json ranks = Json::object();
      for (const auto& [scheme, rank] : t.ranks) ranks[scheme] = rank;
      rsa_section[t.model_id] = Json{{"ranks", std::move(ranks)}, {"rsa", t.rsa}};
    }
    for (const auto& t : trajectories) rsa_values.push_back(static_cast<double>(t.rsa));
  }
  report["rsa"] = std::move(rsa_section);

  if (!rsa_values.empty()) {
    const auto stability = analytics::make_stability_report(
        rsa_values, config.scheduler.rng_seed);
    report["stability"] = Json{{"mean_rsa", stability.mean_rsa},
                               {"share_rsa_ge_10", stability.share_rsa_ge_10},
                               {"share_rsa_ge_20", stability.share_rsa_ge_20},
                               {"bootstrap_ci", Json{{"lo", stability.bootstrap_ci.lo},
                                                     {"hi", stability.bootstrap_ci.hi}}}};
  } else {
    report["stability"] = nullptr;
  }

  std::vector<std::vector<double>> columns(dims.size(),
                                           std::vector<double>(matrix.model_ids.size()));
  for (std::size_t m = 0; m < matrix.model_ids.size(); ++m)
    for (std::size_t k = 0; k < dims.size(); ++k)
      columns[k][m] = matrix.normalized[m][k];
  report["correlations"] =
      matrix.model_ids.size() >= 2 ? correlation_section(columns, dims) : Json::object();

  const std::string out_dir =
      out_dir_override.empty() ? config.output_dir : out_dir_override;
  ensure_dir(out_dir);

  AnalyzeResult result;
  result.report = report;
  result.report_path = (fs::path(out_dir) / "analysis.json").string();
  write_file(result.report_path, report.dump(2) + "\n");

  write_file((fs::path(out_dir) / "scores.raw.csv").string(),
             matrix_to_csv(matrix.model_ids, dims, matrix.raw));
  write_file((fs::path(out_dir) / "scores.normalized.csv").string(),
             matrix_to_csv(matrix.model_ids, dims, matrix.normalized));

  for (std::size_t s = 0; s < schemes.size(); ++s) {
    const analytics::Ranking& r = rankings[s];
    std::string csv = "rank,model_id,overall";
    for (const std::string& dim : dims) csv += "," + dim;
    csv += '\n';
    for (std::size_t rank = 0; rank < r.ordered_ids.size(); ++rank) {
      const std::string& id = r.ordered_ids[rank];
      const std::size_t m = static_cast<std::size_t>(
          std::find(matrix.model_ids.begin(), matrix.model_ids.end(), id) -
          matrix.model_ids.begin());
      csv += std::to_string(rank + 1) + "," + id + "," + fmt_double(r.overall.at(id));
      for (std::size_t k = 0; k < dims.size(); ++k)
        csv += "," + fmt_double(matrix.normalized[m][k]);
      csv += '\n';
    }
    const std::string path =
        (fs::path(out_dir) / ("leaderboard." + schemes[s].name + ".csv")).string();
    write_file(path, csv);
    result.leaderboard_paths.push_back(path);
  }

  std::string traj_csv = "model_id";
  for (const WeightScheme& s : schemes) traj_csv += "," + s.name;
  traj_csv += ",rsa\n";
  if (rankings.size() >= 2) {
    for (const auto& t : analytics::rank_trajectories(rankings)) {
      traj_csv += t.model_id;
      for (const WeightScheme& s : schemes)
        traj_csv += "," + std::to_string(t.ranks.at(s.name));
      traj_csv += "," + std::to_string(t.rsa) + "\n";
    }
  } else {
    // a single scheme cannot displace ranks: rsa is 0 by definition
    for (const std::string& id : rankings[0].ordered_ids)
      traj_csv += id + "," + std::to_string(rankings[0].rank_of.at(id)) + ",0\n";
  }
  result.trajectories_path = (fs::path(out_dir) / "rank_trajectories.csv").string();
  write_file(result.trajectories_path, traj_csv);
  return result;
}

ControlResult cmd_control(const ProjectConfig& config, std::size_t cohort_size,
                          std::optional<std::uint64_t> seed_override,
                          const std::string& out_dir_override) {
  require(!config.dataset_path.empty(), "InvalidConfig", "config has no dataset_path");
  const std::vector<Sample> dataset = read_dataset_jsonl(config.dataset_path);
  const std::vector<Stratum> strata = build_strata(dataset, config.dimensions);

  std::vector<oracle::SyntheticProfile> cohort;
  for (const ModelEntry& entry : config.models)
    if (const auto* profile = std::get_if<oracle::SyntheticProfile>(&entry))
      cohort.push_back(*profile);
  require(!cohort.empty(), "InvalidConfig",
          "control experiment needs synthetic profiles in the config");
  if (cohort.size() > cohort_size) cohort.resize(cohort_size);
  std::sort(cohort.begin(), cohort.end(),
            [](const auto& a, const auto& b) { return a.model_id < b.model_id; });

  scheduler::SchedulerConfig sched = config.scheduler;
  if (seed_override) sched.rng_seed = *seed_override;
  const int model_workers = std::max(1, sched.workers);
  sched.workers = 1;  // concurrency lives at the model level here

  struct ModelOutcome {
    scheduler::EvaluationRun dynamic_run;
    scheduler::EvaluationRun full_run;
    double dynamic_mu = 0.0;
    double full_mu = 0.0;
  };
  std::vector<ModelOutcome> outcomes(cohort.size());

  // Fully isolated per-model evaluations, joined before reporting; outputs
  // land in pre-sized slots so the report is identical at any concurrency.
  std::atomic<std::size_t> cursor{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const auto worker = [&] {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= cohort.size()) return;
      try {
        const auto responder = oracle::make_synthetic_responder(cohort[i]);
        const auto scorer = scheduler::make_hint_scorer();
        ModelOutcome& out = outcomes[i];
        out.dynamic_run =
            scheduler::run_evaluation(cohort[i].model_id, dataset, strata, sched,
                                      responder, scorer, scheduler::RunMode::Dynamic);
        out.full_run =
            scheduler::run_evaluation(cohort[i].model_id, dataset, strata, sched,
                                      responder, scorer, scheduler::RunMode::FullSet);
        out.dynamic_mu = scheduler::stratified_estimate(out.dynamic_run, strata, sched).mu_hat;
        out.full_mu = scheduler::stratified_estimate(out.full_run, strata, sched).mu_hat;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  {
    std::vector<std::thread> pool;
    const std::size_t n_threads =
        std::min<std::size_t>(static_cast<std::size_t>(model_workers), cohort.size());
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  // Score matrices for both modes, normalized by their own anchor sets.
  std::vector<std::string> model_ids;
  for (const auto& p : cohort) model_ids.push_back(p.model_id);
  std::vector<std::string> dims;
  for (const Stratum& st : strata) dims.push_back(st.id);

  const auto matrix_of = [&](bool dynamic) {
    std::vector<std::vector<double>> raw;
    for (std::size_t i = 0; i < cohort.size(); ++i) {
      const auto& run = dynamic ? outcomes[i].dynamic_run : outcomes[i].full_run;
      std::vector<double> row;
      for (const std::string& dim : dims) row.push_back(run.per_stratum.at(dim).mean());
      raw.push_back(std::move(row));
    }
    return raw;
  };
  const auto raw_dyn = matrix_of(true);
  const auto raw_full = matrix_of(false);
  const std::size_t top_n = std::min<std::size_t>(10, model_ids.size());
  const auto norm_dyn = analytics::normalize_scores(
      raw_dyn, analytics::anchor_difficulty(raw_dyn, model_ids, top_n));
  const auto norm_full = analytics::normalize_scores(
      raw_full, analytics::anchor_difficulty(raw_full, model_ids, top_n));

  const std::vector<WeightScheme> schemes =
      config.schemes.empty() ? default_schemes(dims) : config.schemes;
  for (const WeightScheme& s : schemes) validate_scheme(s, dims);

  const auto rsa_of = [&](const std::vector<std::vector<double>>& normalized) {
    std::vector<analytics::Ranking> rankings;
    for (const WeightScheme& s : schemes)
      rankings.push_back(analytics::rank_under_scheme(normalized, model_ids, dims, s));
    std::map<std::string, std::int64_t> rsa;
    for (const auto& t : analytics::rank_trajectories(rankings)) rsa[t.model_id] = t.rsa;
    return rsa;
  };
  const auto rsa_dyn = rsa_of(norm_dyn);
  const auto rsa_full = rsa_of(norm_full);

  std::vector<double> rsa_dyn_values, rsa_full_values;
  std::vector<double> mu_dyn, mu_full;
  ExactSum cost_dyn, cost_full;
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    rsa_dyn_values.push_back(static_cast<double>(rsa_dyn.at(model_ids[i])));
    rsa_full_values.push_back(static_cast<double>(rsa_full.at(model_ids[i])));
    mu_dyn.push_back(outcomes[i].dynamic_mu);
    mu_full.push_back(outcomes[i].full_mu);
    cost_dyn.add(outcomes[i].dynamic_run.total_cost);
    cost_full.add(outcomes[i].full_run.total_cost);
  }

  const auto mean_of = [](const std::vector<double>& xs) {
    ExactSum s;
    for (double x : xs) s.add(x);
    return s.value() / static_cast<double>(xs.size());
  };

  Json report;
  report["cohort"] = model_ids;
  report["dimensions"] = dims;
  report["seed"] = sched.rng_seed;
  report["mean_rsa_dynamic"] = mean_of(rsa_dyn_values);
  report["mean_rsa_full_set"] = mean_of(rsa_full_values);
  report["delta_mean_rsa"] = mean_of(rsa_dyn_values) - mean_of(rsa_full_values);

  bool degenerate = false;
  try {
    report["spearman_rho"] = analytics::spearman(mu_dyn, mu_full);
  } catch (const Error&) {
    degenerate = true;
    report["spearman_rho"] = nullptr;
    std::cerr << "warning: overall scores are constant, ranking correlation undefined\n";
  }
  report["degenerate"] = degenerate;

  if (cohort.size() >= 2) {
    const auto boot = analytics::paired_bootstrap(rsa_dyn_values, rsa_full_values, 1000,
                                                  sched.rng_seed);
    report["bootstrap"] =
        Json{{"dynamic_ci", Json{{"lo", boot.mean_a.lo}, {"hi", boot.mean_a.hi}}},
             {"full_set_ci", Json{{"lo", boot.mean_b.lo}, {"hi", boot.mean_b.hi}}},
             {"diff_ci", Json{{"lo", boot.mean_diff.lo}, {"hi", boot.mean_diff.hi}}}};
    const auto ks = analytics::ks_statistic(rsa_dyn_values, rsa_full_values);
    report["ks"] = Json{{"d", ks.d}, {"p", ks.p}};
  }

  Json per_model = Json::object();
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    per_model[model_ids[i]] =
        Json{{"rsa_dynamic", rsa_dyn.at(model_ids[i])},
             {"rsa_full_set", rsa_full.at(model_ids[i])},
             {"mu_dynamic", outcomes[i].dynamic_mu},
             {"mu_full_set", outcomes[i].full_mu},
             {"cost_dynamic", outcomes[i].dynamic_run.total_cost},
             {"cost_full_set", outcomes[i].full_run.total_cost}};
  }
  report["per_model"] = std::move(per_model);
  report["cost"] = Json{
      {"dynamic_total", cost_dyn.value()},
      {"full_set_total", cost_full.value()},
      {"ratio", cost_full.value() > 0.0 ? cost_dyn.value() / cost_full.value() : 1.0}};

  const std::string out_dir =
      out_dir_override.empty() ? config.output_dir : out_dir_override;
  ensure_dir(out_dir);
  ControlResult result;
  result.report = report;
  result.report_path = (fs::path(out_dir) / "control.report.json").string();
  write_file(result.report_path, report.dump(2) + "\n");
  return result;
}

GenResult cmd_gen(const GenSpec& spec) {
  oracle::SyntheticDatasetSpec ds;
  ds.dimensions = spec.dimensions.empty() ? default_dimensions() : spec.dimensions;
  ds.samples_per_dimension = spec.samples_per_dimension;
  ds.seed = spec.seed;
  const std::vector<Sample> dataset = oracle::make_synthetic_dataset(ds);

  const auto cohort =
      spec.isotropic
          ? oracle::make_isotropic_cohort(spec.cohort_size, ds.dimensions, spec.seed)
          : oracle::make_anisotropic_cohort(spec.cohort_size, ds.dimensions, spec.seed);

  ensure_dir(spec.out_dir);
  GenResult result;
  result.dataset_path = (fs::path(spec.out_dir) / "dataset.jsonl").string();
  write_dataset_jsonl(result.dataset_path, dataset);

  Json models = Json::array();
  for (const auto& p : cohort) models.push_back(profile_to_json(p));
  scheduler::SchedulerConfig sched;
  sched.rng_seed = spec.seed;
  sched.delta = 0.05;  // readable demo target; tighten per project needs
  Json config{{"dataset_path", "dataset.jsonl"},
              {"dimensions", ds.dimensions},
              {"scheduler", scheduler_to_json(sched)},
              {"models", std::move(models)},
              {"output_dir", "."}};
  result.config_path = (fs::path(spec.out_dir) / "config.json").string();
  write_file(result.config_path, config.dump(2) + "\n");
  return result;
}

}  // namespace anisoeval::commands
