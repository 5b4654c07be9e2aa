#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "json.hpp"

#include "error.hpp"
#include "ngram_model.hpp"

namespace infograv {

inline constexpr int kModelFormatVersion = 1;

/// Model document. Object keys come out sorted, so equal models serialize to
/// identical bytes.
inline nlohmann::json model_to_json(const NgramModel& m) {
  nlohmann::json counts = nlohmann::json::object();
  for (int k = 1; k <= m.order(); ++k) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& [gram, c] : m.counts().tables[k - 1]) {
      nlohmann::json ids = nlohmann::json::array();
      for (TokenId t : gram) ids.push_back(t.value);
      rows.push_back(nlohmann::json::array({std::move(ids), c}));
    }
    counts[std::to_string(k)] = std::move(rows);
  }
  nlohmann::json unigram = nlohmann::json::array();
  for (double p : m.baseline().unigram()) unigram.push_back(p);

  return nlohmann::json{
      {"version", kModelFormatVersion},
      {"order", m.order()},
      {"discount", m.discount()},
      {"vocab", m.vocab().surfaces()},
      {"counts", std::move(counts)},
      {"baseline", {{"total_tokens", m.counts().total_tokens}, {"unigram", std::move(unigram)}}},
  };
}

inline NgramModel model_from_json(const nlohmann::json& doc) {
  try {
    if (!doc.is_object() || !doc.contains("version")) throw ParseError("model document has no version");
    const auto version = doc.at("version");
    if (!version.is_number_integer() || version.get<int>() != kModelFormatVersion) {
      throw VersionError("unsupported model format version " + version.dump() + " (expected " +
                         std::to_string(kModelFormatVersion) + ")");
    }
    const int order = doc.at("order").get<int>();
    const double discount = doc.at("discount").get<double>();
    NgramModel::validate_settings(order, discount);
    Vocabulary vocab(doc.at("vocab").get<std::vector<std::string>>());

    auto counts = std::make_shared<NgramCounts>();
    counts->order = order;
    counts->tables.resize(static_cast<std::size_t>(order));
    const auto& jc = doc.at("counts");
    for (int k = 1; k <= order; ++k) {
      for (const auto& row : jc.at(std::to_string(k))) {
        TokenSeq gram;
        for (const auto& id : row.at(0)) gram.push_back(TokenId{id.get<std::uint32_t>()});
        const auto c = row.at(1).get<std::uint64_t>();
        if (gram.size() != static_cast<std::size_t>(k) || c == 0) {
          throw ParseError("malformed " + std::to_string(k) + "-gram row");
        }
        counts->tables[k - 1][std::move(gram)] = c;
      }
    }
    counts->total_tokens = doc.at("baseline").at("total_tokens").get<std::uint64_t>();
    return NgramModel(order, discount, std::move(vocab), std::move(counts));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model document: ") + e.what());
  }
}

inline void save_model(const NgramModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << model_to_json(m).dump() << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

inline NgramModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return model_from_json(doc);
}

/// Saves and reloads, returning the reloaded model.
inline NgramModel persist_roundtrip(const NgramModel& m, const std::filesystem::path& path) {
  save_model(m, path);
  return load_model(path);
}

}  // namespace infograv
