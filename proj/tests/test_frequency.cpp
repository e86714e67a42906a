#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <unordered_map>

#include "isolab/frequency.hpp"
#include "oracle.hpp"

namespace fs = std::filesystem;
using namespace isolab;

namespace {

EmbeddingCorpus build(const std::vector<std::vector<std::string>>& sents, std::uint64_t seed, std::size_t dim = 4) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  std::vector<TokenRecord> out;
  for (std::size_t s = 0; s < sents.size(); ++s) {
    for (std::size_t p = 0; p < sents[s].size(); ++p) {
      std::vector<float> v(dim);
      for (auto& x : v) x = static_cast<float>(normal(gen) + 1.0);
      auto r = oracle::record(s, p, sents[s][p], v);
      r.index = out.size();
      out.push_back(std::move(r));
    }
  }
  return EmbeddingCorpus::from_records(dim, {0}, std::move(out), "m");
}

std::vector<SscRecord> ssc_list(const std::vector<double>& values) {
  std::vector<SscRecord> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    SscRecord r;
    r.token_string = "t" + std::to_string(i);
    r.ssc = values[i];
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST(TopFrequentTokens, HandExample) {
  const auto c = build({{"the", "cat", "sat"}, {"the", "dog", "ran"}}, 1);
  const auto top = top_frequent_tokens(c, 0, 5);
  ASSERT_EQ(top.tokens.size(), 1u);
  EXPECT_EQ(top.tokens[0].token, "the");
  EXPECT_EQ(top.tokens[0].frequency, 2u);
  EXPECT_TRUE(top.truncated);
}

TEST(TopFrequentTokens, MatchesHashCountOracle) {
  std::mt19937_64 gen(2);
  const std::vector<std::string> vocab{"a", "b", "c", "d", "e", "f", "[SEP]"};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<std::string>> sents(3 + gen() % 10);
    for (auto& s : sents) {
      s.resize(1 + gen() % 6);
      for (auto& t : s) t = vocab[gen() % vocab.size()];
    }
    const auto c = build(sents, gen());
    std::unordered_map<std::string, std::uint64_t> counts;
    std::unordered_map<std::string, std::set<std::size_t>> where;
    std::vector<std::string> first_seen;
    for (std::size_t s = 0; s < sents.size(); ++s) {
      for (const auto& t : sents[s]) {
        if (!counts.contains(t)) first_seen.push_back(t);
        ++counts[t];
        where[t].insert(s);
      }
    }
    std::vector<std::string> want;
    for (const auto& t : first_seen) {
      if (counts[t] >= 2 && where[t].size() >= 2) want.push_back(t);
    }
    std::stable_sort(want.begin(), want.end(), [&](const auto& a, const auto& b) { return counts[a] > counts[b]; });
    const auto got = top_frequent_tokens(c, 0, 4);
    ASSERT_EQ(got.tokens.size(), std::min<std::size_t>(4, want.size()));
    EXPECT_EQ(got.truncated, want.size() < 4);
    for (std::size_t i = 0; i < got.tokens.size(); ++i) {
      EXPECT_EQ(got.tokens[i].token, want[i]);
      EXPECT_EQ(got.tokens[i].frequency, counts[want[i]]);
    }
    for (const auto& t : top_frequent_tokens(c, 0, 10, true).tokens) EXPECT_FALSE(is_special_token(t.token));
  }
}

TEST(SscTable, IdenticalCorporaGiveZero) {
  const auto c = load_corpus(fs::path(ISOLAB_TEST_DATA) / "fixture_a_vanilla");
  std::vector<std::string> tokens;
  for (const auto& t : top_frequent_tokens(c, 1, 50).tokens) tokens.push_back(t.token);
  const auto table = ssc_table(c, c, 1, tokens, {20, 42});
  ASSERT_FALSE(table.records.empty());
  for (const auto& r : table.records) EXPECT_EQ(r.ssc, 0.0);
}

TEST(SscTable, HandPlantedShift) {
  // "x" occurs in sentences 0 and 1 with hand-chosen vectors; fillers fix the baseline.
  auto make = [](std::vector<float> x0, std::vector<float> x1) {
    std::vector<TokenRecord> rs{oracle::record(0, 0, "x", x0), oracle::record(0, 1, "y", {0, 1}),
                                oracle::record(1, 0, "x", x1), oracle::record(1, 1, "y", {1, 1})};
    for (std::size_t i = 0; i < rs.size(); ++i) rs[i].index = i;
    return EmbeddingCorpus::from_records(2, {0}, rs, "m");
  };
  const auto vanilla = make({1, 0}, {1, 0});
  const auto tuned = make({1, 0}, {0, 1});
  const SampleSpec spec{2, 5};
  const auto table = ssc_table(vanilla, tuned, 0, {"x", "y", "missing"}, spec);
  ASSERT_EQ(table.records.size(), 2u);
  EXPECT_EQ(table.skipped, (std::vector<std::string>{"missing"}));

  const auto sv = sample_tokens(vanilla, 0, spec), sf = sample_tokens(tuned, 0, spec);
  const double ani_v = oracle::cos(oracle::to_vec(sv[0].vector), oracle::to_vec(sv[1].vector));
  const double ani_f = oracle::cos(oracle::to_vec(sf[0].vector), oracle::to_vec(sf[1].vector));
  const auto& x = table.records[0];
  EXPECT_EQ(x.token_string, "x");
  EXPECT_EQ(x.frequency, 2u);
  EXPECT_NEAR(x.ss_vanilla, 1.0, 1e-15);
  EXPECT_NEAR(x.ss_finetuned, 0.0, 1e-15);
  EXPECT_NEAR(x.ssc, (0.0 - ani_f) - (1.0 - ani_v), 1e-9);
  EXPECT_EQ(x.ssc, (x.ss_finetuned - x.ani_finetuned) - (x.ss_vanilla - x.ani_vanilla));
}

TEST(SscTable, AntisymmetricUnderSwap) {
  const auto v = load_corpus(fs::path(ISOLAB_TEST_DATA) / "fixture_a_vanilla");
  const auto f = load_corpus(fs::path(ISOLAB_TEST_DATA) / "fixture_a_tuned");
  std::vector<std::string> tokens;
  for (const auto& t : top_frequent_tokens(v, 1, 30).tokens) tokens.push_back(t.token);
  const auto fwd = ssc_table(v, f, 1, tokens, {20, 42});
  const auto back = ssc_table(f, v, 1, tokens, {20, 42});
  ASSERT_EQ(fwd.records.size(), back.records.size());
  for (std::size_t i = 0; i < fwd.records.size(); ++i) EXPECT_NEAR(fwd.records[i].ssc, -back.records[i].ssc, 1e-12);
}

TEST(AlignSsc, KeepsOrderOfFirstList) {
  auto a = ssc_list({1, 2, 3, 4});
  auto b = ssc_list({5, 6, 7});
  std::swap(b[0], b[2]);
  b[1].token_string = "other";
  const auto al = align_ssc(a, b);
  ASSERT_EQ(al.a.size(), 2u);
  EXPECT_EQ(al.a[0].token_string, "t0");
  EXPECT_EQ(al.b[0].ssc, 5.0);
  EXPECT_EQ(al.a[1].token_string, "t2");
  EXPECT_EQ(al.b[1].ssc, 7.0);
  EXPECT_EQ(al.skipped, (std::vector<std::string>{"t1", "t3", "other"}));
}

TEST(CorrelationCurve, DuplicatedListsGiveOne) {
  const auto a = ssc_list({0.3, -0.1, 0.5, 0.2, 0.9});
  const auto curve = correlation_curve(a, a);
  ASSERT_EQ(curve.n_values.size(), 5u);
  EXPECT_FALSE(curve.correlations[0].has_value());
  EXPECT_FALSE(curve.correlations[1].has_value());
  for (std::size_t i = 2; i < 5; ++i) EXPECT_EQ(*curve.correlations[i], 1.0);
  EXPECT_EQ(curve.argmax_n, 3u);
  EXPECT_EQ(curve.max_corr, 1.0);
}

TEST(CorrelationCurve, ZeroVariancePrefixIsUndefined) {
  const auto a = ssc_list({1, 1, 1, 2, 3});
  const auto b = ssc_list({0, 1, 2, 3, 5});
  const auto curve = correlation_curve(a, b);
  EXPECT_FALSE(curve.correlations[2].has_value());
  EXPECT_TRUE(curve.correlations[3].has_value());
  EXPECT_EQ(curve.argmax_n >= 4, true);
  EXPECT_THROW(correlation_curve(ssc_list({1, 1, 1}), ssc_list({1, 2, 3})), NumericError);
  EXPECT_THROW(correlation_curve(ssc_list({1, 2}), ssc_list({1, 2})), NumericError);
  auto misaligned = ssc_list({1, 2, 3});
  misaligned[1].token_string = "zz";
  EXPECT_THROW(correlation_curve(ssc_list({1, 2, 3}), misaligned), NumericError);
}

TEST(CorrelationCurve, MatchesPrefixOracle) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(3 + gen() % 60), y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = normal(gen);
      y[i] = 0.5 * x[i] + normal(gen);
    }
    const auto curve = correlation_curve(ssc_list(x), ssc_list(y));
    double best = -2;
    std::size_t best_n = 0;
    for (std::size_t n = 3; n <= x.size(); ++n) {
      const auto want = *oracle::pearson({x.begin(), x.begin() + n}, {y.begin(), y.begin() + n});
      ASSERT_TRUE(curve.correlations[n - 1].has_value());
      EXPECT_NEAR(*curve.correlations[n - 1], want, 1e-9);
      if (*curve.correlations[n - 1] > best) {
        best = *curve.correlations[n - 1];
        best_n = n;
      }
    }
    EXPECT_EQ(curve.argmax_n, best_n);
  }
}

TEST(CorrelationCurve, InvariantUnderPositiveAffineMap) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> normal;
  std::vector<double> x(40), y(40), z(40);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = normal(gen);
    y[i] = x[i] + normal(gen);
    z[i] = 3.5 * x[i] - 2.0;
  }
  const auto c1 = correlation_curve(ssc_list(x), ssc_list(y));
  const auto c2 = correlation_curve(ssc_list(z), ssc_list(y));
  for (std::size_t i = 2; i < x.size(); ++i) EXPECT_NEAR(*c1.correlations[i], *c2.correlations[i], 1e-9);
  EXPECT_EQ(c1.argmax_n, c2.argmax_n);
}
