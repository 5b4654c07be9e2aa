#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "../embedding.hpp"
#include "../geometry.hpp"
#include "../infomass.hpp"
#include "../landscape.hpp"
#include "../metrics.hpp"
#include "../model_io.hpp"
#include "../ngram_model.hpp"
#include "../sampler.hpp"
#include "config.hpp"
#include "io.hpp"
#include "serialize.hpp"

namespace infograv::harness {

inline constexpr const char* kToolVersion = "0.3.1";

struct ExperimentRow {
  std::string arm;
  std::size_t query_index = 0;
  std::string query;
  MassReport mass;
  double temperature = 0.0;
  /// Means over seeds at this temperature.
  double oos_rate = 0.0;
  double mean_surprisal = 0.0;
  double curvature = 0.0;
  double stability = 1.0;
};

struct Correlation {
  std::string arm;  // "all" for the pooled value
  std::string component;
  std::optional<double> spearman;
  std::size_t n = 0;
};

struct ExperimentReport {
  std::vector<ExperimentRow> rows;
  std::vector<Correlation> correlations;
  /// Mean oos rate per temperature over every query and seed.
  std::vector<double> oos_by_temperature;
  std::optional<double> temperature_trend;
  std::vector<std::string> flags;
  std::vector<double> temperatures;
};

/// Mass-versus-hallucination protocol. For each arm and query: the mass
/// components, curvature of the query's field, stability under single-token
/// deletions, and the hallucination proxy averaged over seeds at every
/// temperature. Each mass component is then rank-correlated with the query's
/// mean out-of-support rate, per arm and pooled.
inline ExperimentReport run_mass_experiment(const NgramModel& model, const ExperimentConfig& cfg) {
  cfg.weights.validate();
  std::size_t total_queries = 0;
  for (const auto& a : cfg.arms) total_queries += a.queries.size();
  if (total_queries == 0) throw ConfigError("experiment has no queries");
  if (cfg.temperatures.empty() || cfg.seeds.empty()) throw ConfigError("experiment needs temperatures and seeds");
  for (std::size_t i = 1; i < cfg.temperatures.size(); ++i) {
    if (!(cfg.temperatures[i] > cfg.temperatures[i - 1])) throw ConfigError("temperature grid must be ascending");
  }
  const int proxy_order = cfg.proxy_order > 0 ? std::min(cfg.proxy_order, model.order()) : model.order();
  const auto space = build_embedding(model, cfg.embedding);

  ExperimentReport rep;
  rep.temperatures = cfg.temperatures;
  rep.oos_by_temperature.assign(cfg.temperatures.size(), 0.0);

  struct QuerySummary {
    std::string arm;
    MassReport mass;
    double mean_oos = 0.0;
  };
  std::vector<QuerySummary> summaries;

  for (const auto& arm : cfg.arms) {
    for (std::size_t qi = 0; qi < arm.queries.size(); ++qi) {
      const auto& spec = arm.queries[qi];
      const TokenSeq q = model.encode(spec.text);
      if (q.empty()) throw ConfigError("arm '" + arm.name + "' has a query with no tokens");
      std::vector<TokenSeq> segs;
      for (const auto& s : spec.segments) segs.push_back(model.encode(s));

      // Generation sees the context segments, in order, ahead of the query.
      TokenSeq prompt;
      for (const auto& s : segs) prompt.insert(prompt.end(), s.begin(), s.end());
      prompt.insert(prompt.end(), q.begin(), q.end());

      const MassReport mass = compute_mass(model, q, segs, cfg.weights);
      const double curv = curvature_metric(potential(model.next_dist(q)), space);
      const auto perturbed = deletion_perturbations(q);
      const double stab = stability(model, q, std::span<const TokenSeq>(perturbed));

      double oos_all = 0.0;
      for (std::size_t ti = 0; ti < cfg.temperatures.size(); ++ti) {
        const Temperature t(cfg.temperatures[ti]);
        double oos = 0.0, surp = 0.0;
        for (auto seed : cfg.seeds) {
          const auto traj = generate(model, prompt, t, GenerateOptions{.max_len = cfg.gen_len, .seed = seed});
          const auto hp = hallucination_proxy(traj, model.baseline(), proxy_order);
          oos += hp.oos_rate;
          surp += hp.mean_surprisal;
        }
        const double ns = static_cast<double>(cfg.seeds.size());
        rep.rows.push_back({arm.name, qi, spec.text, mass, cfg.temperatures[ti], oos / ns, surp / ns, curv, stab});
        rep.oos_by_temperature[ti] += oos / ns;
        oos_all += oos / ns;
      }
      summaries.push_back({arm.name, mass, oos_all / static_cast<double>(cfg.temperatures.size())});
    }
  }
  for (double& v : rep.oos_by_temperature) v /= static_cast<double>(total_queries);
  if (cfg.temperatures.size() >= 2) {
    rep.temperature_trend = spearman(cfg.temperatures, rep.oos_by_temperature);
  }

  auto correlate = [&](const std::string& arm_name) {
    std::vector<const QuerySummary*> sel;
    for (const auto& s : summaries)
      if (arm_name == "all" || s.arm == arm_name) sel.push_back(&s);
    std::vector<double> y;
    for (const auto* s : sel) y.push_back(s->mean_oos);
    const std::pair<const char*, double MassReport::*> comps[] = {{"entropy_H", &MassReport::entropy_H},
                                                                 {"depth_D", &MassReport::depth_D},
                                                                 {"novelty_N", &MassReport::novelty_N},
                                                                 {"mass_M", &MassReport::mass_M}};
    for (const auto& [name, member] : comps) {
      std::vector<double> x;
      for (const auto* s : sel) x.push_back(s->mass.*member);
      Correlation c{arm_name, name, spearman(x, y), sel.size()};
      if (!c.spearman) rep.flags.push_back("correlation undefined: arm=" + arm_name + " component=" + name);
      rep.correlations.push_back(std::move(c));
    }
  };
  for (const auto& arm : cfg.arms) correlate(arm.name);
  if (cfg.arms.size() > 1) correlate("all");
  return rep;
}

inline NgramModel model_for(const ExperimentConfig& cfg) {
  if (cfg.model_file) return load_model(*cfg.model_file);
  if (!cfg.corpus) throw ConfigError("config needs either corpus or model_file");
  std::ifstream in(*cfg.corpus, std::ios::binary);
  if (!in) throw IoError("cannot open corpus " + cfg.corpus->string());
  return train(in, cfg.order, cfg.discount);
}

inline ExperimentReport run_mass_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_mass_experiment(model_for(cfg), cfg);
}

inline nlohmann::json to_json(const ExperimentReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"arm", row.arm},
                    {"query_index", row.query_index},
                    {"query", row.query},
                    {"mass", harness::to_json(row.mass)},
                    {"temperature", row.temperature},
                    {"oos_rate", row.oos_rate},
                    {"mean_surprisal", row.mean_surprisal},
                    {"curvature", row.curvature},
                    {"stability", row.stability}});
  }
  nlohmann::json corr = nlohmann::json::array();
  for (const auto& c : r.correlations) {
    corr.push_back({{"arm", c.arm},
                    {"component", c.component},
                    {"spearman", c.spearman ? nlohmann::json(*c.spearman) : nlohmann::json(nullptr)},
                    {"defined", c.spearman.has_value()},
                    {"n", c.n}});
  }
  return {{"rows", std::move(rows)},
          {"correlations", std::move(corr)},
          {"temperatures", r.temperatures},
          {"oos_by_temperature", r.oos_by_temperature},
          {"temperature_trend", r.temperature_trend ? nlohmann::json(*r.temperature_trend) : nlohmann::json(nullptr)},
          {"flags", r.flags}};
}

inline std::string experiment_csv(const ExperimentReport& r) {
  std::string s = "arm,query_index,temperature,entropy_H,depth_D,novelty_N,mass_M,oos_rate,mean_surprisal,curvature,stability\n";
  for (const auto& row : r.rows) {
    s += row.arm + ',' + std::to_string(row.query_index) + ',' + format_number(row.temperature) + ',' +
         format_number(row.mass.entropy_H) + ',' + format_number(row.mass.depth_D) + ',' +
         format_number(row.mass.novelty_N) + ',' + format_number(row.mass.mass_M) + ',' +
         format_number(row.oos_rate) + ',' + format_number(row.mean_surprisal) + ',' +
         format_number(row.curvature) + ',' + format_number(row.stability) + '\n';
  }
  return s;
}

/// Manifest written next to every CLI output set. Contains nothing
/// time-dependent, so equal runs produce equal manifests.
inline nlohmann::json make_manifest(const std::string& command, const nlohmann::json& config,
                                    const std::vector<std::uint64_t>& seeds,
                                    const std::vector<std::string>& outputs) {
  return {{"tool", "infograv"},
          {"version", kToolVersion},
          {"command", command},
          {"config_hash", hex64(fnv1a64(config.dump()))},
          {"config", config},
          {"seeds", seeds},
          {"rng", Rng::kAlgorithm},
          {"outputs", outputs}};
}

struct LandscapeOutputs {
  std::vector<LandscapeGrid> grids;
  LandscapeGrid difference;
  std::vector<std::string> files;
};

inline std::string padded_index(std::size_t i) {
  std::string s = std::to_string(i);
  return std::string(s.size() < 3 ? 3 - s.size() : 0, '0') + s;
}

/// Per query: potential field -> grid -> CSV + SVG, plus a local-geometry CSV.
/// A combined difference map covers all queries.
inline LandscapeOutputs render_landscape(const NgramModel& model, const std::vector<std::string>& queries,
                                         const EmbeddingOptions& emb, std::size_t resolution,
                                         const std::filesystem::path& out_dir) {
  if (queries.empty()) throw ArgumentError("render_landscape needs at least one query");
  const auto space = build_embedding(model, emb);
  LandscapeOutputs out;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const TokenSeq q = model.encode(queries[i]);
    const auto field = potential(model.next_dist(q));
    auto grid = landscape_grid(std::span<const PotentialField>(&field, 1), space, resolution);

    std::vector<LocalGeometry> geo;
    geo.reserve(space.size());
    for (std::size_t t = 0; t < space.size(); ++t) geo.push_back(local_geometry(field, space, TokenId{t}));

    const std::string stem = "landscape_" + padded_index(i);
    write_text_file(out_dir / (stem + ".csv"), landscape_csv(grid));
    write_text_file(out_dir / (stem + ".svg"), landscape_svg(grid, queries[i]));
    write_text_file(out_dir / ("geometry_" + padded_index(i) + ".csv"), geometry_csv(geo, model.vocab()));
    out.files.push_back(stem + ".csv");
    out.files.push_back(stem + ".svg");
    out.files.push_back("geometry_" + padded_index(i) + ".csv");
    out.grids.push_back(std::move(grid));
  }
  out.difference = difference_map(out.grids);
  write_text_file(out_dir / "landscape_diff.csv", landscape_csv(out.difference));
  write_text_file(out_dir / "landscape_diff.svg", landscape_svg(out.difference, "difference"));
  out.files.push_back("landscape_diff.csv");
  out.files.push_back("landscape_diff.svg");
  return out;
}

inline LandscapeOutputs render_landscape(const ExperimentConfig& cfg, const NgramModel& model,
                                         const std::vector<std::string>& queries) {
  return render_landscape(model, queries, cfg.embedding, cfg.resolution, cfg.out_dir);
}

}  // namespace infograv::harness
