#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "distribution.hpp"
#include "error.hpp"

namespace infograv {

// Replays top-k logprob dumps captured from an external model. One JSON
// object per line:
//
//   {"pos":0,"chosen":"the","cands":[["the",-0.2],["a",-1.9]],"vocab_size":32000}
//
// Log-probabilities are natural logs. Probability mass not covered by the
// listed candidates is assigned to a synthetic "<other>" token.

inline constexpr const char* kOtherSurface = "<other>";

struct DumpCandidate {
  std::string surface;
  double logprob = 0.0;
};

struct DumpStep {
  std::size_t pos = 0;
  std::string chosen;
  std::vector<DumpCandidate> cands;
  std::optional<std::uint64_t> vocab_size;

  /// Candidates followed by "<other>", floored like every other distribution.
  DistributionView distribution() const {
    std::vector<double> p;
    std::vector<std::string> labels;
    p.reserve(cands.size() + 1);
    double listed = 0.0;
    for (const auto& c : cands) {
      p.push_back(std::exp(c.logprob));
      labels.push_back(c.surface);
      listed += p.back();
    }
    if (listed > 1.0) {
      // Rounding in the producer can push the listed mass slightly past one.
      for (double& x : p) x /= listed;
      p.push_back(0.0);
    } else {
      p.push_back(1.0 - listed);
    }
    labels.emplace_back(kOtherSurface);
    apply_floor(p);
    return DistributionView(std::move(p), {}, DistSource::DumpReplay, std::move(labels));
  }

  /// Position of the chosen surface in distribution(); unlisted choices map to "<other>".
  std::size_t chosen_index() const {
    for (std::size_t i = 0; i < cands.size(); ++i) {
      if (cands[i].surface == chosen) return i;
    }
    return cands.size();
  }
};

struct DumpSession {
  std::vector<DumpStep> steps;
};

inline DumpStep parse_dump_line(const std::string& line, std::size_t lineno) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), lineno);
  }
  DumpStep step;
  try {
    if (!j.is_object()) throw ParseError("record is not an object", lineno);
    const auto& pos = j.at("pos");
    if (!pos.is_number_integer() || pos.get<std::int64_t>() < 0) {
      throw ParseError("pos must be a non-negative integer", lineno);
    }
    step.pos = pos.get<std::size_t>();
    step.chosen = j.at("chosen").get<std::string>();
    const auto& cands = j.at("cands");
    if (!cands.is_array() || cands.empty()) throw ParseError("cands must be a non-empty array", lineno);
    std::set<std::string> seen;
    for (const auto& c : cands) {
      if (!c.is_array() || c.size() != 2 || !c[0].is_string() || !c[1].is_number()) {
        throw ParseError("candidate must be [surface, logprob]", lineno);
      }
      DumpCandidate cand{c[0].get<std::string>(), c[1].get<double>()};
      if (!std::isfinite(cand.logprob) || cand.logprob > 0.0) {
        throw ValidationError("line " + std::to_string(lineno) +
                              ": candidate logprob must be finite and <= 0");
      }
      if (!seen.insert(cand.surface).second) {
        throw ValidationError("line " + std::to_string(lineno) + ": duplicate candidate '" +
                              cand.surface + "'");
      }
      step.cands.push_back(std::move(cand));
    }
    if (j.contains("vocab_size")) step.vocab_size = j.at("vocab_size").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad record: ") + e.what(), lineno);
  }
  return step;
}

/// Blank lines are skipped. Positions must run 0, 1, 2, ...
inline DumpSession parse_dump(std::istream& in) {
  DumpSession s;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    DumpStep step = parse_dump_line(line, lineno);
    if (step.pos != s.steps.size()) {
      throw ValidationError("line " + std::to_string(lineno) + ": expected pos " +
                            std::to_string(s.steps.size()) + ", got " + std::to_string(step.pos));
    }
    s.steps.push_back(std::move(step));
  }
  return s;
}

inline DumpSession load_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dump file " + path.string());
  return parse_dump(in);
}

}  // namespace infograv
