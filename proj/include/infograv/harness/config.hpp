#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "../embedding.hpp"
#include "../error.hpp"
#include "../infomass.hpp"
#include "../ngram_model.hpp"
#include "io.hpp"

namespace infograv::harness {

/// A query plus the context segments that precede it.
struct QuerySpec {
  std::string text;
  std::vector<std::string> segments;
};

/// One experimental arm: a named, caller-built query set.
struct QueryArm {
  std::string name;
  std::vector<QuerySpec> queries;
};

inline constexpr std::string_view kSegmentSeparator = "|||";

/// Query files hold one query per line. Context segments go first, separated
/// by "|||"; the last field is the query. Blank lines and lines starting with
/// '#' are ignored.
inline std::vector<QuerySpec> parse_query_lines(const std::string& text) {
  std::vector<QuerySpec> out;
  std::istringstream in(text);
  std::string line;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const auto p = line.find(kSegmentSeparator, start);
      fields.push_back(trim(line.substr(start, p == std::string::npos ? std::string::npos : p - start)));
      if (p == std::string::npos) break;
      start = p + kSegmentSeparator.size();
    }
    QuerySpec q;
    q.text = fields.back();
    fields.pop_back();
    q.segments = std::move(fields);
    out.push_back(std::move(q));
  }
  return out;
}

struct ExperimentConfig {
  std::optional<std::filesystem::path> corpus;
  std::optional<std::filesystem::path> model_file;
  int order = NgramModel::kDefaultOrder;
  double discount = NgramModel::kDefaultDiscount;
  MassWeights weights;
  EmbeddingOptions embedding;
  std::vector<double> temperatures{0.5, 1.0, 1.5};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::size_t gen_len = 8;
  /// n-gram order for the hallucination proxy; 0 means the model's order.
  int proxy_order = 0;
  std::size_t resolution = 64;
  std::vector<QueryArm> arms;
  std::filesystem::path out_dir = ".";

  void validate() const {
    if (corpus && !std::filesystem::exists(*corpus)) throw IoError("corpus not found: " + corpus->string());
    if (model_file && !std::filesystem::exists(*model_file)) {
      throw IoError("model file not found: " + model_file->string());
    }
    NgramModel::validate_settings(order, discount);
    weights.validate();
    if (temperatures.empty()) throw ConfigError("temperature grid is empty");
    for (std::size_t i = 0; i < temperatures.size(); ++i) {
      if (!(temperatures[i] > 0.0) || !std::isfinite(temperatures[i])) {
        throw ConfigError("temperatures must be finite and > 0");
      }
      if (i > 0 && !(temperatures[i] > temperatures[i - 1])) {
        throw ConfigError("temperature grid must be strictly ascending");
      }
    }
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    if (gen_len < 1) throw ConfigError("gen_len must be >= 1");
    if (proxy_order < 0 || proxy_order > NgramModel::kMaxOrder) throw ConfigError("proxy_order out of range");
    if (resolution < 8 || resolution > 1024) throw ConfigError("resolution must be in [8, 1024]");
  }

  /// Canonical form used for the manifest hash; arm contents are inlined so
  /// edits to query files change the hash.
  nlohmann::json to_json() const {
    nlohmann::json arms_j = nlohmann::json::object();
    for (const auto& a : arms) {
      nlohmann::json qs = nlohmann::json::array();
      for (const auto& q : a.queries) qs.push_back({{"query", q.text}, {"segments", q.segments}});
      arms_j[a.name] = std::move(qs);
    }
    nlohmann::json j = {
        {"model", {{"order", order}, {"discount", discount}}},
        {"weights", {{"alpha", weights.alpha}, {"beta", weights.beta}, {"gamma", weights.gamma}}},
        {"embedding", {{"dims", embedding.dims}, {"window", embedding.window}, {"k", embedding.k}}},
        {"temperatures", temperatures},
        {"seeds", seeds},
        {"gen_len", gen_len},
        {"proxy_order", proxy_order},
        {"resolution", resolution},
        {"arms", std::move(arms_j)},
    };
    if (corpus) j["corpus"] = corpus->generic_string();
    if (model_file) j["model_file"] = model_file->generic_string();
    return j;
  }
};

/// Reads a config document. Relative paths resolve against `base_dir`; arm
/// query files are loaded eagerly.
inline ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (j.contains("corpus")) cfg.corpus = resolve(j.at("corpus").get<std::string>());
    if (j.contains("model_file")) cfg.model_file = resolve(j.at("model_file").get<std::string>());
    if (j.contains("model")) {
      const auto& m = j.at("model");
      cfg.order = m.value("order", cfg.order);
      cfg.discount = m.value("discount", cfg.discount);
    }
    if (j.contains("weights")) {
      const auto& w = j.at("weights");
      cfg.weights.alpha = w.value("alpha", cfg.weights.alpha);
      cfg.weights.beta = w.value("beta", cfg.weights.beta);
      cfg.weights.gamma = w.value("gamma", cfg.weights.gamma);
    }
    if (j.contains("embedding")) {
      const auto& e = j.at("embedding");
      cfg.embedding.dims = e.value("dims", cfg.embedding.dims);
      cfg.embedding.window = e.value("window", cfg.embedding.window);
      cfg.embedding.k = e.value("k", cfg.embedding.k);
    }
    if (j.contains("temperatures")) cfg.temperatures = j.at("temperatures").get<std::vector<double>>();
    if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    cfg.gen_len = j.value("gen_len", cfg.gen_len);
    cfg.proxy_order = j.value("proxy_order", cfg.proxy_order);
    cfg.resolution = j.value("resolution", cfg.resolution);
    if (j.contains("out")) cfg.out_dir = resolve(j.at("out").get<std::string>());
    if (j.contains("arms")) {
      for (const auto& [name, path] : j.at("arms").items()) {
        cfg.arms.push_back({name, parse_query_lines(read_text_file(resolve(path.get<std::string>())))});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

}  // namespace infograv::harness
