#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "infograv.hpp"
#include "test_support.hpp"

namespace ig = infograv;
using ig::testing::ids;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "infograv_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Tokenizer, SplitsAndLowercases) {
  EXPECT_EQ(ig::tokenize("The cat sat."), (std::vector<std::string>{"the", "cat", "sat", "."}));
  EXPECT_TRUE(ig::tokenize("").empty());
  EXPECT_EQ(ig::tokenize("a,b"), (std::vector<std::string>{"a", ",", "b"}));
  EXPECT_EQ(ig::tokenize("  Hello\t(World)! "),
            (std::vector<std::string>{"hello", "(", "world", ")", "!"}));
}

TEST(Tokenizer, IdempotentOnJoinedOutput) {
  for (const char* s : {"The cat sat.", "Don't stop: \"now\", ok?", "a;b;c", ig::testing::story_corpus().c_str()}) {
    const auto once = ig::tokenize(s);
    EXPECT_EQ(ig::tokenize(ig::join_tokens(once)), once) << s;
  }
}

TEST(Vocabulary, LookupInvertsSurface) {
  const auto toks = ig::tokenize("b a c a");
  const auto v = ig::Vocabulary::from_tokens(toks);
  ASSERT_EQ(v.size(), 4u);
  EXPECT_EQ(v.surface(ig::kUnkId), "<unk>");
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v.lookup(v.surface(ig::TokenId{i})), ig::TokenId{i});
  EXPECT_EQ(v.lookup("zebra"), ig::kUnkId);
  EXPECT_THROW(ig::Vocabulary({"a", "<unk>"}), ig::ArgumentError);
  EXPECT_THROW(ig::Vocabulary({"<unk>", "a", "a"}), ig::ArgumentError);
}

TEST(Train, ToyCorpusVocabulary) {
  const auto m = ig::train_text("a b a b a", 2);
  EXPECT_EQ(m.vocab_size(), 3u);
  EXPECT_EQ(m.vocab().surfaces(), (std::vector<std::string>{"<unk>", "a", "b"}));
}

TEST(Train, UnigramPeaksOnOnlyToken) {
  const auto m = ig::train_text("a a a a", 1);
  const auto d = m.next_dist({});
  EXPECT_EQ(ig::argmax(d.probs()), m.vocab().lookup("a"));
}

TEST(Train, Errors) {
  EXPECT_THROW(ig::train_text("", 2), ig::TrainingError);
  EXPECT_THROW(ig::train_text("   \n ", 3), ig::TrainingError);
  EXPECT_THROW(ig::train_text("a b", 0), ig::ConfigError);
  EXPECT_THROW(ig::train_text("a b", 6), ig::ConfigError);
  EXPECT_THROW(ig::train_text("a b", 2, 0.0), ig::ConfigError);
  EXPECT_THROW(ig::train_text("a b", 2, 1.0), ig::ConfigError);
  EXPECT_THROW(ig::train_text("a b", 2, std::nan("")), ig::ConfigError);
}

TEST(NextDist, HandCountedBigram) {
  // c(a)=3, c(b)=2, N=5, two seen types over |V|=3:
  //   P_uni = (0.1, 0.55, 0.35) for (unk, a, b)
  //   after "a": followers {b:2}, so P(b|a) = (2-.75)/2 + .75/2 * .35 = 0.75625
  const auto m = ig::train_text("a b a b a", 2);
  const double scale = 1.0 - 3 * ig::kProbFloor;
  const auto uni = m.next_dist({});
  EXPECT_NEAR(uni[ig::TokenId{0u}], scale * 0.10 + ig::kProbFloor, 1e-15);
  EXPECT_NEAR(uni[ig::TokenId{1u}], scale * 0.55 + ig::kProbFloor, 1e-15);
  EXPECT_NEAR(uni[ig::TokenId{2u}], scale * 0.35 + ig::kProbFloor, 1e-15);

  const auto a = m.vocab().lookup("a");
  const auto b = m.vocab().lookup("b");
  const auto after_a = m.next_dist(std::vector{a});
  EXPECT_NEAR(after_a[b], scale * 0.75625 + ig::kProbFloor, 1e-15);
  EXPECT_EQ(ig::argmax(after_a.probs()), b);
}

TEST(NextDist, MatchesReferenceOracle) {
  const auto toks = ig::tokenize(ig::testing::story_corpus());
  for (int order : {1, 2, 3, 4}) {
    const auto m = ig::train(toks, order, 0.6);
    const ig::testing::ReferenceNgram ref(toks, order, 0.6);
    std::mt19937_64 gen(order);
    for (int trial = 0; trial < 25; ++trial) {
      ig::TokenSeq ctx;
      const std::size_t len = gen() % 5;
      for (std::size_t i = 0; i < len; ++i) ctx.push_back(ig::TokenId{gen() % m.vocab_size()});
      const auto d = m.next_dist(ctx);
      for (std::size_t t = 0; t < m.vocab_size(); ++t) {
        ASSERT_NEAR(d[ig::TokenId{t}], ref.prob(ctx, ig::TokenId{t}), 1e-12) << "order " << order;
        ASSERT_NEAR(m.probability(ctx, ig::TokenId{t}), d[ig::TokenId{t}], 1e-15);
      }
    }
  }
}

TEST(NextDist, NormalizedAndFlooredEverywhere) {
  const auto m = ig::train_text(ig::testing::story_corpus(), 3);
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 200; ++trial) {
    ig::TokenSeq ctx;
    const std::size_t len = gen() % 6;
    for (std::size_t i = 0; i < len; ++i) ctx.push_back(ig::TokenId{gen() % m.vocab_size()});
    const auto d = m.next_dist(ctx);
    double s = 0.0;
    for (double p : d.probs()) {
      s += p;
      ASSERT_GE(p, ig::kProbFloor * (1.0 - 1e-9));
    }
    ASSERT_NEAR(s, 1.0, 1e-9);
  }
}

TEST(NextDist, OutOfVocabularyContext) {
  const auto m = ig::train_text("a b a b a", 2);
  const auto ctx = m.encode("zebra");
  ASSERT_EQ(ctx, ids({0}));
  const auto d = m.next_dist(ctx);
  double s = 0.0;
  for (double p : d.probs()) s += p;
  EXPECT_NEAR(s, 1.0, 1e-9);
}

TEST(SequenceLogprob, LogIdentities) {
  const ig::testing::UniformModel half{2};
  EXPECT_NEAR(ig::sequence_logprob(half, ids({1}), {}), std::log(0.5), 1e-12);
  EXPECT_NEAR(ig::sequence_logprob(half, ids({1, 0}), {}), 2 * std::log(0.5), 1e-12);
  EXPECT_THROW(ig::sequence_logprob(half, ig::TokenSeq{}, {}), ig::ArgumentError);

  const auto m = ig::train_text("a b a b a", 2);
  const auto a = m.vocab().lookup("a");
  const auto b = m.vocab().lookup("b");
  EXPECT_DOUBLE_EQ(ig::sequence_logprob(m, std::vector{b}, std::vector{a}), std::log(m.next_dist(std::vector{a})[b]));
}

TEST(SequenceLogprob, AdditiveOverConcatenation) {
  const auto m = ig::train_text(ig::testing::story_corpus(), 3);
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 100; ++trial) {
    ig::TokenSeq ctx, a, b;
    for (std::size_t i = gen() % 3; i > 0; --i) ctx.push_back(ig::TokenId{gen() % m.vocab_size()});
    for (std::size_t i = 1 + gen() % 4; i > 0; --i) a.push_back(ig::TokenId{gen() % m.vocab_size()});
    for (std::size_t i = 1 + gen() % 4; i > 0; --i) b.push_back(ig::TokenId{gen() % m.vocab_size()});
    ig::TokenSeq ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    ig::TokenSeq ctx_a = ctx;
    ctx_a.insert(ctx_a.end(), a.begin(), a.end());
    EXPECT_NEAR(ig::sequence_logprob(m, ab, ctx),
                ig::sequence_logprob(m, a, ctx) + ig::sequence_logprob(m, b, ctx_a), 1e-9);
  }
}

TEST(Distribution, FloorPreservesSumAndOrder) {
  std::vector<double> p{0.0, 0.25, 0.75, 0.0};
  ig::apply_floor(p);
  double s = 0.0;
  for (double x : p) s += x;
  EXPECT_NEAR(s, 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(p[0], ig::kProbFloor);
  EXPECT_LT(p[1], p[2]);
  EXPECT_THROW(ig::DistributionView({0.5, 0.6}, {}, ig::DistSource::Derived), ig::ArgumentError);
  EXPECT_THROW(ig::DistributionView({0.0, 1.0}, {}, ig::DistSource::Derived), ig::ArgumentError);
}

TEST(Dump, ExponentiatesCandidates) {
  std::istringstream in(R"({"pos":0,"chosen":"x","cands":[["x",)" + std::to_string(std::log(0.6)) +
                        R"(],["y",)" + std::to_string(std::log(0.4)) + "]]}\n");
  const auto s = ig::parse_dump(in);
  ASSERT_EQ(s.steps.size(), 1u);
  const auto d = s.steps[0].distribution();
  ASSERT_EQ(d.size(), 3u);  // x, y, other
  EXPECT_NEAR(d.probs()[0], 0.6, 1e-6);
  EXPECT_NEAR(d.probs()[1], 0.4, 1e-6);
  EXPECT_NEAR(d.probs()[2], 0.0, 1e-6);
  EXPECT_EQ(d.source(), ig::DistSource::DumpReplay);
  EXPECT_EQ(s.steps[0].chosen_index(), 0u);
}

TEST(Dump, LeftoverMassGoesToOther) {
  std::ostringstream line;
  line.precision(17);
  line << R"({"pos":0,"chosen":"z","cands":[["x",)" << std::log(0.5) << R"(],["y",)" << std::log(0.4) << "]]}";
  std::istringstream in(line.str());
  const auto s = ig::parse_dump(in);
  const auto d = s.steps[0].distribution();
  EXPECT_NEAR(d.probs().back(), 0.1, 1e-12);
  EXPECT_EQ(d.labels().back(), ig::kOtherSurface);
  EXPECT_EQ(s.steps[0].chosen_index(), 2u);
  double sum = 0.0;
  for (double p : d.probs()) sum += p;
  EXPECT_NEAR(sum, 1.0, 1e-9);
}

TEST(Dump, Errors) {
  {
    std::istringstream in("{\"pos\":0,\"chosen\":\"x\",\"cands\":[[\"x\",-0.1]]}\n"
                          "{\"pos\":2,\"chosen\":\"x\",\"cands\":[[\"x\",-0.1]]}\n");
    EXPECT_THROW(ig::parse_dump(in), ig::ValidationError);
  }
  {
    std::istringstream in("{\"pos\":0,\"chosen\":\"x\",\"cands\":[[\"x\",-0.1]]}\n{not json\n");
    try {
      ig::parse_dump(in);
      FAIL() << "expected parse error";
    } catch (const ig::ParseError& e) {
      EXPECT_EQ(e.line(), 2u);
    }
  }
  {
    std::istringstream in("{\"pos\":0,\"chosen\":\"x\",\"cands\":[[\"x\",0.5]]}\n");
    EXPECT_THROW(ig::parse_dump(in), ig::ValidationError);
  }
  {
    std::istringstream in("{\"pos\":0,\"chosen\":\"x\",\"cands\":[]}\n");
    EXPECT_ANY_THROW(ig::parse_dump(in));
  }
  EXPECT_THROW(ig::load_dump("/nonexistent/dump.jsonl"), ig::IoError);
}

TEST(Persistence, RoundtripKeepsDistributions) {
  const auto m = ig::train_text(ig::testing::story_corpus(), 3);
  const auto path = temp_path("roundtrip.json");
  const auto back = ig::persist_roundtrip(m, path);
  EXPECT_EQ(back.vocab().surfaces(), m.vocab().surfaces());
  EXPECT_EQ(back.order(), m.order());
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 10; ++trial) {
    ig::TokenSeq ctx;
    for (std::size_t i = gen() % 4; i > 0; --i) ctx.push_back(ig::TokenId{gen() % m.vocab_size()});
    const auto p = m.next_dist(ctx);
    const auto q = back.next_dist(ctx);
    for (std::size_t t = 0; t < p.size(); ++t) EXPECT_LE(std::abs(p.probs()[t] - q.probs()[t]), 1e-12);
  }
}

TEST(Persistence, DeterministicBytesAndSortedKeys) {
  const auto a = temp_path("det_a.json");
  const auto b = temp_path("det_b.json");
  ig::save_model(ig::train_text(ig::testing::story_corpus(), 3), a);
  ig::save_model(ig::train_text(ig::testing::story_corpus(), 3), b);
  std::ifstream fa(a), fb(b);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  EXPECT_EQ(sa.str(), sb.str());
  const auto j = nlohmann::json::parse(sa.str());
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"baseline", "counts", "discount", "order", "version", "vocab"}));
  EXPECT_EQ(j.at("version"), 1);
}

TEST(Persistence, UnknownVersionRejected) {
  auto j = ig::model_to_json(ig::train_text("a b a b a", 2));
  j["version"] = 7;
  EXPECT_THROW(ig::model_from_json(j), ig::VersionError);
  EXPECT_THROW(ig::load_model("/nonexistent/model.json"), ig::IoError);
  const auto bad = temp_path("bad.json");
  std::ofstream(bad) << "{ not json";
  EXPECT_THROW(ig::load_model(bad), ig::ParseError);
}
