#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "distribution.hpp"
#include "error.hpp"
#include "ngram_model.hpp"
#include "potential.hpp"
#include "rng.hpp"

namespace infograv {

/// Sampling temperature, clamped to [1e-3, 1e4].
class Temperature {
 public:
  static constexpr double kMin = 1e-3;
  static constexpr double kMax = 1e4;

  explicit Temperature(double t) {
    if (!std::isfinite(t) || !(t > 0.0)) throw ArgumentError("temperature must be finite and > 0");
    value_ = std::clamp(t, kMin, kMax);
  }

  double value() const noexcept { return value_; }

 private:
  double value_;
};

/// Gibbs distribution P(t) = exp(-phi(t)/T) / Z, Z = sum_t exp(-phi(t)/T),
/// evaluated with the log-sum-exp shift and then floored.
inline DistributionView boltzmann(const PotentialField& field, Temperature temp) {
  const auto phi = field.phi();
  const double t = temp.value();
  const double phi_min = *std::min_element(phi.begin(), phi.end());
  std::vector<double> p(phi.size());
  double z = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(-(phi[i] - phi_min) / t);
    z += p[i];
  }
  for (double& x : p) x /= z;
  apply_floor(p);
  return DistributionView(std::move(p), field.context(), DistSource::Derived);
}

/// ln Z for the field at temperature T.
inline double log_partition(const PotentialField& field, Temperature temp) {
  const auto phi = field.phi();
  const double t = temp.value();
  const double phi_min = *std::min_element(phi.begin(), phi.end());
  double z = 0.0;
  for (double v : phi) z += std::exp(-(v - phi_min) / t);
  return std::log(z) - phi_min / t;
}

/// A generated continuation. `phis` are the model's own potentials (T = 1)
/// for each chosen token, so actions compare across temperatures.
struct Trajectory {
  TokenSeq query;
  TokenSeq tokens;
  std::vector<double> phis;
  std::vector<double> temps;
  double action = 0.0;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return tokens.size(); }
};

/// Discretized action integral: the summed potential of the chosen tokens.
inline double trajectory_action(const Trajectory& traj) {
  if (traj.tokens.empty()) throw ArgumentError("trajectory_action: empty trajectory");
  double s = 0.0;
  for (double v : traj.phis) s += v;
  return s;
}

/// Appends `b` to `a`. The result keeps a's query and seed.
inline Trajectory concat(const Trajectory& a, const Trajectory& b) {
  Trajectory out = a;
  out.tokens.insert(out.tokens.end(), b.tokens.begin(), b.tokens.end());
  out.phis.insert(out.phis.end(), b.phis.begin(), b.phis.end());
  out.temps.insert(out.temps.end(), b.temps.begin(), b.temps.end());
  out.action = a.action + b.action;
  return out;
}

struct GenerateOptions {
  std::size_t max_len = 16;
  std::uint64_t seed = 0;
  /// Generation ends after emitting this token, if set.
  std::optional<TokenId> stop_token;
};

/// Samples a continuation of `query`: next_dist -> potential -> Boltzmann(T)
/// -> draw, one token at a time. Each call owns its generator, so identical
/// inputs and seed give identical trajectories.
template <ConditionalModel M>
Trajectory generate(const M& model, std::span<const TokenId> query, Temperature temp,
                    const GenerateOptions& opt) {
  if (opt.max_len < 1) throw ArgumentError("generate: max_len must be >= 1");
  Rng rng(opt.seed);
  Trajectory traj;
  traj.query.assign(query.begin(), query.end());
  traj.seed = opt.seed;
  TokenSeq ctx(query.begin(), query.end());
  for (std::size_t step = 0; step < opt.max_len; ++step) {
    const auto field = potential(model.next_dist(std::span<const TokenId>(ctx)));
    const auto rescaled = boltzmann(field, temp);
    const TokenId next = rng.categorical(rescaled.probs());
    traj.tokens.push_back(next);
    traj.phis.push_back(field[next]);
    traj.temps.push_back(temp.value());
    traj.action += field[next];
    ctx.push_back(next);
    if (opt.stop_token && next == *opt.stop_token) break;
  }
  return traj;
}

template <ConditionalModel M>
Trajectory generate(const M& model, std::span<const TokenId> query, Temperature temp,
                    std::size_t max_len, std::uint64_t seed) {
  return generate(model, query, temp, GenerateOptions{.max_len = max_len, .seed = seed});
}

/// Clamped affine map from information mass to temperature:
///   T = clamp(T0 + slope (M - M_ref), T_min, T_max).
struct AdaptiveTempConfig {
  double base = 0.7;
  double slope = 0.2;
  double reference_mass = 1.0;
  double t_min = 0.2;
  double t_max = 2.0;

  void validate() const {
    for (double v : {base, slope, reference_mass, t_min, t_max}) {
      if (!std::isfinite(v)) throw ConfigError("adaptive temperature settings must be finite");
    }
    if (!(t_min <= base && base <= t_max)) throw ConfigError("adaptive temperature needs t_min <= base <= t_max");
    if (!(t_min > 0.0)) throw ConfigError("adaptive temperature t_min must be > 0");
  }
};

inline Temperature adaptive_temperature(double mass, const AdaptiveTempConfig& cfg = {}) {
  if (!std::isfinite(mass) || mass < 0.0) throw ArgumentError("mass must be finite and >= 0");
  cfg.validate();
  return Temperature(std::clamp(cfg.base + cfg.slope * (mass - cfg.reference_mass), cfg.t_min, cfg.t_max));
}

}  // namespace infograv
