// Acceptance suite. Each criterion prints one PASS/FAIL line; the exit status
// is nonzero if any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "infograv.hpp"
#include "infograv/harness/experiment.hpp"
#include "infograv/harness/io.hpp"
#include "test_support.hpp"

namespace ig = infograv;
namespace hx = infograv::harness;
namespace fs = std::filesystem;
using ig::testing::entropy_oracle;
using ig::testing::tv_oracle;

namespace {

const fs::path kSamples = INFOGRAV_SAMPLES_DIR;
const std::string kCli = INFOGRAV_CLI_PATH;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "infograv_acceptance" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = "\"" + kCli + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

std::vector<double> random_probs(ig::Rng& rng, std::size_t n) {
  std::vector<double> w(n);
  for (auto& x : w) x = rng.uniform() + 1e-3;
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= s;
  return w;
}

ig::TokenSeq random_tokens(ig::Rng& rng, std::size_t len, std::size_t v) {
  ig::TokenSeq out;
  for (std::size_t i = 0; i < len; ++i) out.push_back(ig::TokenId{rng.below(v)});
  return out;
}

// 1. Boltzmann reweighting and sampling.
Outcome boltzmann_sampling() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto field = ig::PotentialField::from_values({0.0, std::log(2.0)});
  const auto d = ig::boltzmann(field, ig::Temperature(1.0));
  const double err = std::max(std::fabs(d.probs()[0] - 2.0 / 3.0), std::fabs(d.probs()[1] - 1.0 / 3.0));
  o.require(err <= 1e-9, "two-state probabilities");

  ig::Rng pick(17);
  const auto phi = random_probs(pick, 6);
  std::vector<double> pot(phi.size());
  for (std::size_t i = 0; i < pot.size(); ++i) pot[i] = -std::log(phi[i]);
  const auto target = ig::boltzmann(ig::PotentialField::from_values(pot), ig::Temperature(0.7));
  ig::Rng rng(2024);
  std::vector<double> freq(target.size(), 0.0);
  constexpr int kDraws = 100000;
  for (int i = 0; i < kDraws; ++i) freq[rng.categorical(target.probs()).index()] += 1.0;
  for (auto& f : freq) f /= kDraws;
  const double tv = tv_oracle(freq, target.probs());
  o.require(tv <= 0.01, "empirical TV");
  const double secs = seconds_since(t0);
  o.require(secs < 1.0, "time");
  o.detail << "max_err=" << err << " tv=" << tv << " time=" << secs << "s";
  return o;
}

// 2. Entropy limits and monotonicity in temperature.
Outcome entropy_limits() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto model = ig::train_text(ig::testing::story_corpus(), 3);
  const double logv = std::log(static_cast<double>(model.vocab_size()));
  o.require(model.vocab_size() <= 200, "toy vocabulary size");
  std::vector<double> grid;
  for (int i = 0; i < 20; ++i) grid.push_back(std::pow(10.0, -3.0 + 7.0 * i / 19.0));

  double worst_cold = 0.0, worst_hot = logv;
  for (const char* text : {"the", "the cat", "a bird", "the dog sat on"}) {
    const auto field = ig::potential(model.next_dist(model.encode(text)));
    auto entropy_at = [&](double t) { return entropy_oracle(ig::boltzmann(field, ig::Temperature(t)).probs()); };
    worst_cold = std::max(worst_cold, entropy_at(1e-3));
    worst_hot = std::min(worst_hot, entropy_at(1e4));
    double prev = -1.0;
    for (double t : grid) {
      const double h = entropy_at(t);
      o.require(h >= prev, std::string("monotone for '") + text + "'");
      prev = h;
    }
  }
  o.require(worst_cold <= 0.05, "cold limit");
  o.require(worst_hot >= 0.99 * logv, "hot limit");
  const double secs = seconds_since(t0);
  o.require(secs < 5.0, "time");
  o.detail << "H(1e-3)=" << worst_cold << " H(1e4)/lnV=" << worst_hot / logv << " time=" << secs << "s";
  return o;
}

// 3. Potential ordering mirrors probability ordering.
Outcome potential_ordering() {
  Outcome o;
  const auto t0 = Clock::now();
  ig::Rng rng(3);
  int bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto d = ig::DistributionView::from_weights(random_probs(rng, 2 + rng.below(60)));
    const auto field = ig::potential(d);
    const auto p = d.probs();
    const auto phi = field.phi();
    if (ig::argmax(p) != ig::argmin(phi)) ++bad;
    for (std::size_t i = 0; i < p.size(); ++i)
      for (std::size_t j = 0; j < p.size(); ++j)
        if ((p[i] > p[j]) != (phi[i] < phi[j])) ++bad;
  }
  o.require(bad == 0, "ordering");
  const double secs = seconds_since(t0);
  o.require(secs < 1.0, "time");
  o.detail << "violations=" << bad << " time=" << secs << "s";
  return o;
}

// 4. Mass components on controlled inputs.
Outcome mass_components() {
  Outcome o;
  const ig::testing::UniformModel uniform{50};
  ig::Rng rng(4);
  const auto q = random_tokens(rng, 7, uniform.v);
  const double herr = std::fabs(ig::query_entropy(uniform, q) - std::log(50.0));
  o.require(herr <= 1e-9, "uniform entropy");

  const auto unigram = ig::train_text(ig::testing::story_corpus(), 1);
  const std::vector<ig::TokenSeq> segs{unigram.encode("the dog sat"), unigram.encode("on the red mat .")};
  const double depth = ig::context_depth(unigram, unigram.encode("the cat sat"), segs);
  o.require(depth == 0.0, "unigram depth");

  const ig::BaselineStats base({1e-12, 0.25, 0.5, 0.25 - 1e-12});
  const double nov = ig::novelty(ig::testing::ids({2, 1, 3, 2}), base);
  o.require(std::fabs(nov) <= 1e-6, "matching novelty");

  double sum_err = 0.0;
  bool monotone = true;
  for (int trial = 0; trial < 1000; ++trial) {
    const double h = rng.uniform(0, 5), d = rng.uniform(0, 5), n = rng.uniform(0, 5);
    const ig::MassWeights w{rng.uniform(0.1, 3), rng.uniform(0.1, 3), rng.uniform(0.1, 3)};
    const double m = ig::information_mass(h, d, n, w).mass_M;
    sum_err = std::max(sum_err, std::fabs(m - (w.alpha * h + w.beta * d + w.gamma * n)));
    const double bump = rng.uniform(1e-3, 1.0);
    monotone = monotone && ig::information_mass(h + bump, d, n, w).mass_M > m &&
               ig::information_mass(h, d + bump, n, w).mass_M > m &&
               ig::information_mass(h, d, n + bump, w).mass_M > m;
  }
  o.require(sum_err <= 1e-12, "weighted sum");
  o.require(monotone, "monotonicity");
  o.detail << "H_err=" << herr << " D=" << depth << " N=" << nov << " sum_err=" << sum_err;
  return o;
}

// 5. Gradient and Hessian recovery on planted fields.
Outcome planted_geometry() {
  Outcome o;
  const auto t0 = Clock::now();
  constexpr std::size_t kDims = 8, kNeighbours = 24, kPoints = 300;
  ig::Rng rng(5);
  double grad_err = 0.0, eig_err = 0.0;
  for (int plant = 0; plant < 50; ++plant) {
    const auto space = ig::testing::random_space(kPoints, kDims, kNeighbours, 1000 + plant);
    const ig::TokenId at{rng.below(kPoints)};

    std::vector<double> g(kDims);
    for (auto& x : g) x = rng.uniform(-2, 2);
    const double c0 = rng.uniform(-1, 1);
    const auto linear = ig::testing::planted_field(space, [&](std::span<const double> x) {
      double v = c0;
      for (std::size_t i = 0; i < kDims; ++i) v += g[i] * x[i];
      return v;
    });
    const auto fit = ig::local_gradient(linear, space, at);
    for (std::size_t i = 0; i < kDims; ++i) grad_err = std::max(grad_err, std::fabs(fit.gradient[i] - g[i]));

    // Axis-aligned quadratic with a linear part: the top eigenvalue is the
    // largest-magnitude 2 c_i.
    std::vector<double> c(kDims);
    for (auto& x : c) x = rng.uniform(-3, 3);
    const auto quad = ig::testing::planted_field(space, [&](std::span<const double> x) {
      double v = c0;
      for (std::size_t i = 0; i < kDims; ++i) v += c[i] * x[i] * x[i] + g[i] * x[i];
      return v;
    });
    const double expected = 2.0 * *std::max_element(c.begin(), c.end(), [](double a, double b) {
      return std::fabs(a) < std::fabs(b);
    });
    const auto h = ig::local_hessian(quad, space, at);
    eig_err = std::max(eig_err, std::fabs(h.top_eigenvalue - expected));
  }
  o.require(grad_err <= 1e-6, "gradient");
  o.require(eig_err <= 1e-4, "top eigenvalue");
  const double secs = seconds_since(t0);
  o.require(secs < 10.0, "time");
  o.detail << "grad_err=" << grad_err << " eig_err=" << eig_err << " time=" << secs << "s";
  return o;
}

// 6. Sensitivity identities and total variation.
Outcome sensitivity_checks() {
  Outcome o;
  const auto model = ig::train_text(ig::testing::story_corpus(), 3);
  const auto unigram = ig::train_text(ig::testing::story_corpus(), 1);
  ig::Rng rng(6);
  double self_max = 0.0, unigram_max = 0.0, tv_err = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto q = random_tokens(rng, 1 + rng.below(5), model.vocab_size());
    const auto qp = random_tokens(rng, 1 + rng.below(5), model.vocab_size());
    self_max = std::max(self_max, ig::sensitivity(model, q, q).max_abs_delta);
    unigram_max = std::max(unigram_max, ig::sensitivity(unigram, q, qp).max_abs_delta);
    const auto a = model.next_dist(q);
    const auto b = model.next_dist(qp);
    tv_err = std::max(tv_err, std::fabs(ig::sensitivity(model, q, qp).total_variation - tv_oracle(a.probs(), b.probs())));
  }
  o.require(self_max == 0.0, "identical queries");
  o.require(unigram_max == 0.0, "unigram model");
  o.require(tv_err <= 1e-9, "total variation");
  o.detail << "self=" << self_max << " unigram=" << unigram_max << " tv_err=" << tv_err;
  return o;
}

// 7. Trajectory action.
Outcome action_checks() {
  Outcome o;
  const auto model = ig::train_text(ig::testing::story_corpus(), 3);
  ig::Rng rng(7);
  double lp_err = 0.0;
  int split_bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto q = random_tokens(rng, 1 + rng.below(4), model.vocab_size());
    const ig::Temperature t(rng.uniform(0.2, 3.0));
    const auto whole = ig::generate(model, q, t, 2 + rng.below(10), rng.next_u64());
    lp_err = std::max(lp_err, std::fabs(ig::trajectory_action(whole) + ig::sequence_logprob(model, whole.tokens, q)));

    const std::size_t cut = 1 + rng.below(whole.size() - 1);
    ig::Trajectory a = whole, b = whole;
    a.tokens.resize(cut);
    a.phis.resize(cut);
    a.temps.resize(cut);
    b.tokens.erase(b.tokens.begin(), b.tokens.begin() + static_cast<std::ptrdiff_t>(cut));
    b.phis.erase(b.phis.begin(), b.phis.begin() + static_cast<std::ptrdiff_t>(cut));
    b.temps.erase(b.temps.begin(), b.temps.begin() + static_cast<std::ptrdiff_t>(cut));
    a.action = ig::trajectory_action(a);
    b.action = ig::trajectory_action(b);
    const auto joined = ig::concat(a, b);
    if (joined.action != a.action + b.action || joined.tokens != whole.tokens) ++split_bad;
  }
  o.require(lp_err <= 1e-9, "action vs log-probability");
  o.require(split_bad == 0, "concatenation");
  o.detail << "lp_err=" << lp_err << " split_violations=" << split_bad;
  return o;
}

std::string scramble(const std::string& text, ig::Rng& rng) {
  std::string out;
  for (const auto& word : ig::tokenize(text)) {
    std::string w = word;
    for (std::size_t i = w.size(); i > 1; --i) std::swap(w[i - 1], w[rng.below(i)]);
    if (!out.empty()) out += ' ';
    out += w + "q";
  }
  return out;
}

// 8. Novelty arm of the mass experiment.
Outcome novelty_experiment() {
  Outcome o;
  const auto t0 = Clock::now();
  hx::ExperimentConfig cfg;
  cfg.corpus = kSamples / "corpus.txt";
  cfg.embedding = {.dims = 8, .window = 2, .k = 16};
  cfg.temperatures = {0.3, 1.0, 2.0};
  cfg.seeds = {11, 12, 13, 14, 15};
  cfg.gen_len = 8;
  cfg.out_dir = fresh_dir("experiment");

  std::istringstream lines(hx::read_text_file(*cfg.corpus));
  std::vector<std::string> in_corpus;
  for (std::string line; in_corpus.size() < 10 && std::getline(lines, line);) {
    const auto toks = ig::tokenize(line);
    if (toks.size() < 4) continue;
    std::string phrase;
    for (std::size_t i = 0; i < 4; ++i) phrase += (i ? " " : "") + toks[i];
    in_corpus.push_back(phrase);
  }
  ig::Rng rng(8);
  hx::QueryArm arm{"novelty", {}};
  for (const auto& p : in_corpus) arm.queries.push_back({p, {}});
  for (const auto& p : in_corpus) arm.queries.push_back({scramble(p, rng), {}});
  cfg.arms = {arm};

  const auto model = hx::model_for(cfg);
  const auto first = hx::run_mass_experiment(model, cfg);
  const auto second = hx::run_mass_experiment(model, cfg);
  const auto j1 = hx::to_json(first).dump(2), j2 = hx::to_json(second).dump(2);
  const auto c1 = hx::experiment_csv(first), c2 = hx::experiment_csv(second);
  hx::write_text_file(cfg.out_dir / "run1.json", j1);
  hx::write_text_file(cfg.out_dir / "run2.json", j2);
  hx::write_text_file(cfg.out_dir / "run1.csv", c1);
  hx::write_text_file(cfg.out_dir / "run2.csv", c2);
  const bool same = hx::read_text_file(cfg.out_dir / "run1.json") == hx::read_text_file(cfg.out_dir / "run2.json") &&
                    hx::read_text_file(cfg.out_dir / "run1.csv") == hx::read_text_file(cfg.out_dir / "run2.csv");

  std::optional<double> rho;
  for (const auto& c : first.correlations)
    if (c.arm == "novelty" && c.component == "novelty_N") rho = c.spearman;
  o.require(first.rows.size() == 20 * cfg.temperatures.size(), "row count");
  o.require(rho.has_value() && *rho > 0.0, "spearman(N, oos) > 0");
  o.require(same, "byte reproducible");
  const double secs = seconds_since(t0);
  o.require(secs < 60.0, "time");
  o.detail << "spearman=" << (rho ? std::to_string(*rho) : "undefined") << " reproducible=" << same
           << " time=" << secs << "s";
  return o;
}

// 9. Persistence and CLI reproducibility.
Outcome persistence_and_cli() {
  Outcome o;
  const auto dir = fresh_dir("persist");
  const auto model = ig::train_text(hx::read_text_file(kSamples / "corpus.txt"), 3);
  const auto back = ig::persist_roundtrip(model, dir / "model.json");
  ig::Rng rng(9);
  double err = 0.0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto ctx = random_tokens(rng, rng.below(4), model.vocab_size());
    const auto a = model.next_dist(ctx), b = back.next_dist(ctx);
    for (std::size_t i = 0; i < a.size(); ++i) err = std::max(err, std::fabs(a.probs()[i] - b.probs()[i]));
  }
  o.require(err <= 1e-12, "roundtrip");

  const std::string m = " --model " + quoted(dir / "model.json");
  const std::vector<std::string> commands = {
      "analyze" + m + " --query \"the bread\" --context \"bake the bread\"",
      "generate" + m + " --query \"the river\" --temperature 0.8 --max-len 8 --seed 3",
      "sweep" + m + " --query \"the oven\" --temps 0.1,1,10 --seeds 1,2,3 --gen-len 4",
      "sensitivity" + m + " --query \"the bread\" --perturbed \"the oven\"",
      "landscape" + m + " --query \"the bread\" --query \"the lake\" --resolution 16 --dims 6 --k 10",
      "experiment --config " + quoted(kSamples / "config.json") + m,
  };
  int mismatches = 0, failures = 0;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    const auto a = dir / ("run" + std::to_string(i) + "a");
    const auto b = dir / ("run" + std::to_string(i) + "b");
    if (run_cli(commands[i] + " --out " + quoted(a)) != 0 || run_cli(commands[i] + " --out " + quoted(b)) != 0) {
      ++failures;
      continue;
    }
    const auto ma = hx::read_text_file(a / "manifest.json");
    if (ma != hx::read_text_file(b / "manifest.json")) ++mismatches;
    for (const auto& f : nlohmann::json::parse(ma).at("outputs")) {
      const auto name = f.get<std::string>();
      if (!fs::exists(a / name) || hx::read_text_file(a / name) != hx::read_text_file(b / name)) ++mismatches;
    }
  }
  o.require(failures == 0, "cli runs");
  o.require(mismatches == 0, "byte-identical reruns");
  o.detail << "roundtrip_err=" << err << " cli_failures=" << failures << " mismatches=" << mismatches;
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"boltzmann-sampling", boltzmann_sampling},
      {"entropy-limits", entropy_limits},
      {"potential-ordering", potential_ordering},
      {"mass-components", mass_components},
      {"planted-geometry", planted_geometry},
      {"sensitivity", sensitivity_checks},
      {"action", action_checks},
      {"novelty-experiment", novelty_experiment},
      {"persistence-cli", persistence_and_cli},
  };
  int failed = 0;
  int idx = 0;
  for (const auto& [name, run] : criteria) {
    ++idx;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", idx, name, o.detail.str().c_str());
    if (!o.pass) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
