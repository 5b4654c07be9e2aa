#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "../geometry.hpp"
#include "../infomass.hpp"
#include "../landscape.hpp"
#include "../logprob_dump.hpp"
#include "../metrics.hpp"
#include "../rng.hpp"
#include "../sampler.hpp"
#include "../vocabulary.hpp"

namespace infograv::harness {

using nlohmann::json;

inline json to_json(const MassWeights& w) {
  return {{"alpha", w.alpha}, {"beta", w.beta}, {"gamma", w.gamma}};
}

inline json to_json(const MassReport& r) {
  return {{"entropy_H", r.entropy_H},  {"depth_D", r.depth_D}, {"novelty_N", r.novelty_N},
          {"mass_M", r.mass_M},        {"weights", to_json(r.weights)},
          {"query_length", r.query_length}};
}

/// {"tokens", "phis", "temps", "action", "seed"} plus the query and RNG name.
inline json to_json(const Trajectory& t, const Vocabulary& vocab) {
  return {{"tokens", vocab.decode(t.tokens)},
          {"phis", t.phis},
          {"temps", t.temps},
          {"action", t.action},
          {"seed", t.seed},
          {"query", vocab.decode(t.query)},
          {"rng", Rng::kAlgorithm}};
}

inline json to_json(const SensitivityReport& r) {
  return {{"delta_phi", r.delta_phi},
          {"mean_abs_delta", r.mean_abs_delta},
          {"max_abs_delta", r.max_abs_delta},
          {"total_variation", r.total_variation},
          {"argmax_changed", r.argmax_changed}};
}

inline json to_json(const SweepReport& r, const Vocabulary& vocab) {
  json samples = json::array();
  for (const auto& t : r.samples) samples.push_back(to_json(t, vocab));
  return {{"temperatures", r.temperatures},
          {"entropies", r.entropies},
          {"vocab_size", r.vocab_size},
          {"distinct_outputs", r.distinct_outputs},
          {"mean_pairwise_overlap", r.mean_pairwise_overlap},
          {"samples", std::move(samples)}};
}

inline std::string sweep_csv(const SweepReport& r) {
  std::string s = "temperature,entropy,distinct_outputs,mean_pairwise_overlap\n";
  for (std::size_t i = 0; i < r.temperatures.size(); ++i) {
    s += format_number(r.temperatures[i]) + ',' + format_number(r.entropies[i]) + ',' +
         std::to_string(r.distinct_outputs[i]) + ',' + format_number(r.mean_pairwise_overlap[i]) + '\n';
  }
  return s;
}

/// Quotes a CSV field when it holds a comma, quote or line break.
inline std::string csv_field(const std::string& v) {
  if (v.find_first_of(",\"\r\n") == std::string::npos) return v;
  std::string q = "\"";
  for (char ch : v) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + '"';
}

/// One row per token: id, surface, gradient norm, Hessian eigenvalue (blank
/// when not fitted), fit flags, then the gradient components.
inline std::string geometry_csv(const std::vector<LocalGeometry>& rows, const Vocabulary& vocab) {
  std::string s = "token_id,surface,gradient_norm,top_hessian_eigenvalue,gradient_degenerate,hessian_diagonal_only";
  const std::size_t d = rows.empty() ? 0 : rows.front().gradient.size();
  for (std::size_t c = 0; c < d; ++c) s += ",g" + std::to_string(c);
  s += '\n';
  for (const auto& g : rows) {
    const std::string surface = csv_field(vocab.surface(g.token));
    s += std::to_string(g.token.value) + ',' + surface + ',' + format_number(g.gradient_norm) + ',' +
         (g.top_hessian_eigenvalue ? format_number(*g.top_hessian_eigenvalue) : std::string()) + ',' +
         (g.gradient_degenerate ? "1" : "0") + ',' + (g.hessian_diagonal_only ? "1" : "0");
    for (double x : g.gradient) s += ',' + format_number(x);
    s += '\n';
  }
  return s;
}

/// Per-step entropy and chosen-token potential for a replayed dump.
inline json replay_report(const DumpSession& session) {
  json steps = json::array();
  double action = 0.0;
  for (const auto& st : session.steps) {
    const auto dist = st.distribution();
    const auto field = potential(dist);
    const std::size_t ci = st.chosen_index();
    const double phi = field.phi()[ci];
    action += phi;
    steps.push_back({{"pos", st.pos},
                     {"chosen", st.chosen},
                     {"chosen_listed", ci < st.cands.size()},
                     {"entropy", shannon_entropy(dist.probs())},
                     {"phi_chosen", phi},
                     {"other_mass", dist.probs().back()}});
  }
  return {{"steps", std::move(steps)}, {"action", action}, {"source", to_string(DistSource::DumpReplay)}};
}

}  // namespace infograv::harness
