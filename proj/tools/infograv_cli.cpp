// infograv: command-line front end for the information-gravity toolkit.
//
// Every subcommand writes its outputs plus a manifest.json into --out.
// Exit codes: 0 success, 2 configuration/argument error, 3 I/O error.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "infograv.hpp"
#include "infograv/harness/config.hpp"
#include "infograv/harness/experiment.hpp"
#include "infograv/harness/io.hpp"
#include "infograv/harness/serialize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace infograv;
using namespace infograv::harness;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct GlobalOpts {
  std::string model;
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 0;
};

std::optional<ExperimentConfig> maybe_config(const GlobalOpts& g) {
  if (g.config.empty()) return std::nullopt;
  return load_config(g.config);
}

NgramModel require_model(const GlobalOpts& g) {
  if (g.model.empty()) throw ConfigError("--model is required for this command");
  return load_model(g.model);
}

/// Hash of a model file's bytes, so manifests pin the exact model used.
std::string model_fingerprint(const GlobalOpts& g) {
  return hex64(fnv1a64(read_text_file(g.model)));
}

void finish(const GlobalOpts& g, const std::string& command, const json& config,
            const std::vector<std::uint64_t>& seeds, const std::vector<std::string>& outputs) {
  const json manifest = make_manifest(command, config, seeds, outputs);
  write_text_file(fs::path(g.out) / "manifest.json", manifest.dump(2) + "\n");
}

void write_json(const GlobalOpts& g, const std::string& name, const json& j) {
  write_text_file(fs::path(g.out) / name, j.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"infograv - information-gravity analysis of next-token distributions"};
  app.require_subcommand(1);
  // Let global flags appear after the subcommand name too.
  app.fallthrough();

  GlobalOpts g;
  app.add_option("--model", g.model, "Model file (output for train, input otherwise)");
  app.add_option("--config", g.config, "Experiment config JSON");
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--seed", g.seed, "RNG seed")->capture_default_str();

  // train
  std::vector<std::string> corpus_files;
  int order = NgramModel::kDefaultOrder;
  double discount = NgramModel::kDefaultDiscount;
  auto* train_cmd = app.add_subcommand("train", "Train an n-gram model on text corpora");
  train_cmd->add_option("--corpus", corpus_files, "Corpus text file(s)")->required();
  train_cmd->add_option("--order", order, "n-gram order in [1,5]")->capture_default_str();
  train_cmd->add_option("--discount", discount, "Absolute discount in (0,1)")->capture_default_str();

  // shared query options
  std::string query;
  std::vector<std::string> contexts;
  MassWeights weights;
  std::string dump_path;
  auto* analyze_cmd = app.add_subcommand("analyze", "Information mass of a query, or replay a logprob dump");
  analyze_cmd->add_option("--query", query, "Query text");
  analyze_cmd->add_option("--context", contexts, "Prior context segment (repeatable)");
  analyze_cmd->add_option("--alpha", weights.alpha, "Entropy weight")->capture_default_str();
  analyze_cmd->add_option("--beta", weights.beta, "Depth weight")->capture_default_str();
  analyze_cmd->add_option("--gamma", weights.gamma, "Novelty weight")->capture_default_str();
  analyze_cmd->add_option("--dump", dump_path, "JSONL logprob dump to replay instead of a query");

  double temperature = 1.0;
  bool adaptive = false;
  std::size_t max_len = 16;
  std::string stop;
  auto* gen_cmd = app.add_subcommand("generate", "Sample a continuation and record its action");
  gen_cmd->add_option("--query", query, "Query text")->required();
  gen_cmd->add_option("--temperature", temperature, "Sampling temperature")->capture_default_str();
  gen_cmd->add_flag("--adaptive", adaptive, "Pick the temperature from the query's information mass");
  gen_cmd->add_option("--max-len", max_len, "Maximum tokens to generate")->capture_default_str();
  gen_cmd->add_option("--stop", stop, "Stop after emitting this surface");

  std::vector<double> temps;
  std::vector<std::uint64_t> seeds;
  std::size_t gen_len = 8;
  auto* sweep_cmd = app.add_subcommand("sweep", "Entropy and diversity across a temperature grid");
  sweep_cmd->add_option("--query", query, "Query text")->required();
  sweep_cmd->add_option("--temps", temps, "Ascending temperatures")->delimiter(',');
  sweep_cmd->add_option("--seeds", seeds, "Generation seeds")->delimiter(',');
  sweep_cmd->add_option("--gen-len", gen_len, "Tokens per generation")->capture_default_str();

  std::vector<std::string> perturbed;
  auto* sens_cmd = app.add_subcommand("sensitivity", "Potential shift and stability under query edits");
  sens_cmd->add_option("--query", query, "Base query")->required();
  sens_cmd->add_option("--perturbed", perturbed, "Modified query (repeatable)")->required();

  std::vector<std::string> queries;
  std::size_t resolution = 64;
  EmbeddingOptions emb;
  auto* land_cmd = app.add_subcommand("landscape", "Potential maps over a 2-D projection of the embedding");
  land_cmd->add_option("--query", queries, "Query text (repeatable)")->required();
  land_cmd->add_option("--resolution", resolution, "Grid cells per side")->capture_default_str();
  land_cmd->add_option("--dims", emb.dims, "Embedding dimensions")->capture_default_str();
  land_cmd->add_option("--window", emb.window, "Co-occurrence window")->capture_default_str();
  land_cmd->add_option("--k", emb.k, "Neighbours per token")->capture_default_str();

  auto* exp_cmd = app.add_subcommand("experiment", "Run the mass-versus-hallucination protocol from --config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    const auto cfg = maybe_config(g);
    if (cfg) {
      // Config values act as defaults for flags left unset.
      if (land_cmd->parsed()) {
        if (land_cmd->count("--resolution") == 0) resolution = cfg->resolution;
        if (land_cmd->count("--dims") == 0) emb.dims = cfg->embedding.dims;
        if (land_cmd->count("--window") == 0) emb.window = cfg->embedding.window;
        if (land_cmd->count("--k") == 0) emb.k = cfg->embedding.k;
      }
      if (sweep_cmd->parsed()) {
        if (temps.empty()) temps = cfg->temperatures;
        if (seeds.empty()) seeds = cfg->seeds;
        if (sweep_cmd->count("--gen-len") == 0) gen_len = cfg->gen_len;
      }
      if (analyze_cmd->parsed() || gen_cmd->parsed()) {
        if (analyze_cmd->count("--alpha") == 0) weights.alpha = cfg->weights.alpha;
        if (analyze_cmd->count("--beta") == 0) weights.beta = cfg->weights.beta;
        if (analyze_cmd->count("--gamma") == 0) weights.gamma = cfg->weights.gamma;
      }
    }
    fs::create_directories(g.out);

    if (train_cmd->parsed()) {
      std::string text;
      json corpus_ids = json::array();
      for (const auto& f : corpus_files) {
        const std::string body = read_text_file(f);
        corpus_ids.push_back({{"file", fs::path(f).filename().string()}, {"fnv1a64", hex64(fnv1a64(body))}});
        text += body;
        text += '\n';
      }
      const auto model = train_text(text, order, discount);
      const fs::path model_path = g.model.empty() ? fs::path(g.out) / "model.json" : fs::path(g.model);
      save_model(model, model_path);
      std::cout << "trained order-" << model.order() << " model, |V|=" << model.vocab_size()
                << ", tokens=" << model.counts().total_tokens << " -> " << model_path.string() << "\n";
      finish(g, "train", {{"corpus", corpus_ids}, {"order", order}, {"discount", discount}}, {},
             {model_path.filename().string()});
      return 0;
    }

    if (analyze_cmd->parsed()) {
      if (!dump_path.empty()) {
        const auto session = load_dump(dump_path);
        const json rep = replay_report(session);
        write_json(g, "replay.json", rep);
        std::cout << rep.dump(2) << "\n";
        finish(g, "analyze",
               {{"dump", fs::path(dump_path).filename().string()},
                {"dump_fnv1a64", hex64(fnv1a64(read_text_file(dump_path)))}},
               {}, {"replay.json"});
        return 0;
      }
      if (query.empty()) throw ConfigError("analyze needs --query or --dump");
      const auto model = require_model(g);
      const TokenSeq q = model.encode(query);
      if (q.empty()) throw ArgumentError("query has no tokens");
      std::vector<TokenSeq> segs;
      for (const auto& c : contexts) segs.push_back(model.encode(c));
      const auto mass = compute_mass(model, q, segs, weights);
      json rep = to_json(mass);
      rep["query"] = query;
      rep["adaptive_temperature"] = adaptive_temperature(mass.mass_M).value();
      write_json(g, "analysis.json", rep);
      std::cout << rep.dump(2) << "\n";
      finish(g, "analyze",
             {{"model", model_fingerprint(g)}, {"query", query}, {"context", contexts}, {"weights", to_json(weights)}},
             {}, {"analysis.json"});
      return 0;
    }

    if (gen_cmd->parsed()) {
      const auto model = require_model(g);
      const TokenSeq q = model.encode(query);
      double t = temperature;
      if (adaptive) {
        if (q.empty()) throw ArgumentError("adaptive temperature needs a non-empty query");
        t = adaptive_temperature(compute_mass(model, q, {}, weights).mass_M).value();
      }
      GenerateOptions opt{.max_len = max_len, .seed = g.seed};
      if (!stop.empty()) {
        if (!model.vocab().contains(stop)) throw ArgumentError("stop surface '" + stop + "' is not in the vocabulary");
        opt.stop_token = model.vocab().lookup(stop);
      }
      const auto traj = generate(model, q, Temperature(t), opt);
      const json rep = to_json(traj, model.vocab());
      write_json(g, "trajectory.json", rep);
      std::cout << join_tokens(model.vocab().decode(traj.tokens)) << "\n";
      finish(g, "generate",
             {{"model", model_fingerprint(g)}, {"query", query}, {"temperature", t}, {"adaptive", adaptive},
              {"max_len", max_len}, {"stop", stop}},
             {g.seed}, {"trajectory.json"});
      return 0;
    }

    if (sweep_cmd->parsed()) {
      const auto model = require_model(g);
      if (temps.empty()) {
        // 20 log-spaced points from 1e-3 to 1e4.
        for (int i = 0; i < 20; ++i) temps.push_back(std::pow(10.0, -3.0 + 7.0 * i / 19.0));
      }
      if (seeds.empty()) seeds = {g.seed};
      const TokenSeq q = model.encode(query);
      const auto rep = temperature_sweep(model, q, temps, seeds, gen_len);
      write_json(g, "sweep.json", to_json(rep, model.vocab()));
      write_text_file(fs::path(g.out) / "sweep.csv", sweep_csv(rep));
      std::cout << sweep_csv(rep);
      finish(g, "sweep",
             {{"model", model_fingerprint(g)}, {"query", query}, {"temperatures", temps}, {"gen_len", gen_len}},
             seeds, {"sweep.json", "sweep.csv"});
      return 0;
    }

    if (sens_cmd->parsed()) {
      const auto model = require_model(g);
      const TokenSeq q = model.encode(query);
      std::vector<TokenSeq> pq;
      json reports = json::array();
      std::string csv = "index,perturbed,mean_abs_delta,max_abs_delta,total_variation,argmax_changed\n";
      for (std::size_t i = 0; i < perturbed.size(); ++i) {
        pq.push_back(model.encode(perturbed[i]));
        const auto r = sensitivity(model, q, pq.back());
        json j = to_json(r);
        j["perturbed"] = perturbed[i];
        reports.push_back(std::move(j));
        csv += std::to_string(i) + ',' + csv_field(perturbed[i]) + ',' + format_number(r.mean_abs_delta) + ',' +
               format_number(r.max_abs_delta) + ',' + format_number(r.total_variation) + ',' +
               (r.argmax_changed ? "1" : "0") + '\n';
      }
      const double stab = stability(model, q, std::span<const TokenSeq>(pq));
      const json rep = {{"query", query}, {"reports", reports}, {"stability", stab}};
      write_json(g, "sensitivity.json", rep);
      write_text_file(fs::path(g.out) / "sensitivity.csv", csv);
      std::cout << "stability " << format_number(stab) << "\n";
      finish(g, "sensitivity", {{"model", model_fingerprint(g)}, {"query", query}, {"perturbed", perturbed}}, {},
             {"sensitivity.json", "sensitivity.csv"});
      return 0;
    }

    if (land_cmd->parsed()) {
      const auto model = require_model(g);
      const auto res = render_landscape(model, queries, emb, resolution, g.out);
      std::cout << "wrote " << res.files.size() << " files to " << g.out << "\n";
      finish(g, "landscape",
             {{"model", model_fingerprint(g)},
              {"queries", queries},
              {"resolution", resolution},
              {"embedding", {{"dims", emb.dims}, {"window", emb.window}, {"k", emb.k}}}},
             {}, res.files);
      return 0;
    }

    if (exp_cmd->parsed()) {
      if (!cfg) throw ConfigError("experiment needs --config");
      ExperimentConfig run = *cfg;
      if (!g.model.empty()) run.model_file = g.model;
      if (!app.get_option("--out")->empty()) run.out_dir = g.out;
      run.validate();
      fs::create_directories(run.out_dir);
      const auto model = model_for(run);
      const auto rep = run_mass_experiment(model, run);
      write_text_file(run.out_dir / "experiment.json", to_json(rep).dump(2) + "\n");
      write_text_file(run.out_dir / "experiment.csv", experiment_csv(rep));
      for (const auto& c : rep.correlations) {
        std::cout << c.arm << " " << c.component << " spearman="
                  << (c.spearman ? format_number(*c.spearman) : std::string("undefined")) << "\n";
      }
      GlobalOpts out_g = g;
      out_g.out = run.out_dir.string();
      json cj = run.to_json();
      if (run.model_file) cj["model_fnv1a64"] = hex64(fnv1a64(read_text_file(*run.model_file)));
      if (run.corpus) cj["corpus_fnv1a64"] = hex64(fnv1a64(read_text_file(*run.corpus)));
      finish(out_g, "experiment", cj, run.seeds, {"experiment.json", "experiment.csv"});
      return 0;
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
