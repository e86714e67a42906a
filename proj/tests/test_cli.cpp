#include <gtest/gtest.h>

#include <charconv>
#include <sstream>

#include "golden.hpp"
#include "isolab/isolab.hpp"
#include "oracle.hpp"

namespace fs = std::filesystem;
using namespace isolab;

namespace {

const fs::path kData = ISOLAB_TEST_DATA;

int run(std::vector<std::string> args, std::string* log = nullptr) {
  args.insert(args.begin(), "isolab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  const int code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, out);
  if (log) *log = out.str();
  return code;
}

fs::path fresh_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("isolab_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

using Table = std::vector<std::vector<std::string>>;

/// RFC 4180 fields; no embedded newlines occur in these files.
std::vector<std::string> parse_line(const std::string& line) {
  std::vector<std::string> cells(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cells.back() += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cells.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.emplace_back();
    } else {
      cells.back() += ch;
    }
  }
  return cells;
}

Table read_csv(const fs::path& p) {
  Table rows;
  std::istringstream in(golden::read_file(p));
  for (std::string line; std::getline(in, line);) rows.push_back(parse_line(line));
  return rows;
}

double num(const std::string& s) {
  double v = 0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

}  // namespace

TEST(Cli, Version) {
  std::string log;
  EXPECT_EQ(run({"--version"}, &log), 0);
  EXPECT_NE(log.find("isolab 1.0.0"), std::string::npos);
  EXPECT_NE(log.find("EGC-v1"), std::string::npos);
}

TEST(Cli, MissingCorpus) {
  std::string log;
  const auto out = fresh_dir("missing") / "r.csv";
  EXPECT_NE(run({"metrics", "--corpus", "missing/", "--out", out.string()}, &log), 0);
  EXPECT_NE(log.find("corpus not found"), std::string::npos);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, MalformedInvocations) {
  const auto dir = fresh_dir("malformed");
  const auto corpus = (kData / "fixture_a_vanilla").string();
  EXPECT_NE(run({"frobnicate"}), 0);
  EXPECT_NE(run({"metrics", "--corpus", corpus}), 0);
  EXPECT_NE(run({"metrics", "--corpus", corpus, "--sample", "abc", "--out", (dir / "x.csv").string()}), 0);
  EXPECT_NE(run({"metrics", "--corpus", corpus, "--layers", "9", "--out", (dir / "x.csv").string()}), 0);
  EXPECT_NE(run({"metrics", "--corpus", corpus, "--sample", "21", "--out", (dir / "x.csv").string()}), 0);
  EXPECT_NE(run({"ssc", "--vanilla-a", corpus, "--tuned-a", corpus, "--vanilla-b", corpus, "--out",
                 (dir / "s.csv").string()}),
            0);
  EXPECT_NE(run({"bounds", "--s-grid", "0.5:2:3", "--out", (dir / "b.csv").string()}), 0);
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
  const auto a = fresh_dir("repeat_a"), b = fresh_dir("repeat_b");
  for (const auto& c : golden::cases()) {
    std::ostringstream log;
    ASSERT_EQ(golden::run(c, kData, a, log), 0) << log.str();
    ASSERT_EQ(golden::run(c, kData, b, log), 0) << log.str();
    for (const auto& f : c.outputs) EXPECT_EQ(golden::read_file(a / f), golden::read_file(b / f)) << f;
  }
}

TEST(Cli, GoldenFilesMatch) {
  const auto out = fresh_dir("golden");
  for (const auto& c : golden::cases()) {
    std::ostringstream log;
    ASSERT_EQ(golden::run(c, kData, out, log), 0) << c.name << ": " << log.str();
    for (const auto& f : c.outputs) {
      const auto want = kData / "golden" / f;
      ASSERT_TRUE(fs::exists(want)) << want;
      EXPECT_EQ(golden::read_file(out / f), golden::read_file(want)) << f;
      EXPECT_TRUE(fs::exists(out / (fs::path(c.outputs.front()).string() + ".manifest.json")));
    }
  }
}

TEST(Cli, ManifestContents) {
  const auto out = fresh_dir("manifest");
  ASSERT_EQ(run({"metrics", "--corpus", (kData / "fixture_b_tuned").string(), "--sample", "10", "--seed", "5",
                 "--out", (out / "m.csv").string()}),
            0);
  const auto m = nlohmann::json::parse(golden::read_file(out / "m.csv.manifest.json"));
  EXPECT_EQ(m.at("command"), "metrics");
  EXPECT_EQ(m.at("seed"), 5);
  EXPECT_EQ(m.at("tool_version"), kToolVersion);
  EXPECT_EQ(m.at("prng"), kPrngName);
  EXPECT_EQ(m.at("fingerprints").size(), 1u);
  EXPECT_FALSE(m.at("timestamp").get<std::string>().empty());
}

TEST(Cli, GoldenMetricsAgreeWithOracle) {
  const auto rows = read_csv(kData / "golden" / "metrics.csv");
  EXPECT_EQ(rows[0], cli::report_header());
  const auto corpus = load_corpus(kData / "fixture_a_vanilla");
  const SampleSpec spec{20, derive_seed(42, cli::kSampleStream), SampleStrategy::kOnePerSentence};
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto layer = std::stoull(rows[i][0]);
    const auto xs = oracle::vectors_of(sample_tokens(corpus, layer, spec));
    const double baseline = oracle::mean_pair_cosine(xs);
    EXPECT_NEAR(num(rows[i][1]), baseline, 1e-9);

    std::map<std::string, std::vector<oracle::Vec>> by_token;
    std::map<std::string, std::set<std::uint64_t>> sentences;
    std::map<std::uint64_t, std::vector<oracle::Vec>> by_sentence;
    for (const auto& r : corpus.layer_records(layer)) {
      by_token[r.token].push_back(oracle::to_vec(r.vector));
      sentences[r.token].insert(r.sentence_id);
      by_sentence[r.sentence_id].push_back(oracle::to_vec(r.vector));
    }
    double ss = 0, intra = 0;
    int types = 0;
    for (const auto& [tok, vs] : by_token) {
      if (vs.size() < 2 || sentences[tok].size() < 2) continue;
      ss += oracle::mean_pair_cosine(vs);
      ++types;
    }
    for (const auto& [sid, vs] : by_sentence) intra += oracle::intra(vs);
    EXPECT_NEAR(num(rows[i][2]), ss / types, 1e-9);
    EXPECT_NEAR(num(rows[i][3]), intra / static_cast<double>(by_sentence.size()), 1e-9);
    EXPECT_NEAR(num(rows[i][4]), ss / types - baseline, 1e-9);
    EXPECT_NEAR(num(rows[i][5]), intra / static_cast<double>(by_sentence.size()) - baseline, 1e-9);
  }
}

TEST(Cli, GoldenDimsAndInformativityAgreeWithOracle) {
  const auto corpus = load_corpus(kData / "fixture_a_vanilla");
  const SampleSpec spec{20, derive_seed(42, cli::kSampleStream), SampleStrategy::kOnePerSentence};
  const auto xs = oracle::vectors_of(sample_tokens(corpus, corpus.last_layer(), spec));
  const auto contributions = oracle::contributions(xs);
  const auto order = oracle::rank_dims(contributions);

  const auto rows = read_csv(kData / "golden" / "dims_contributions.csv");
  ASSERT_EQ(rows.size(), contributions.size() + 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    EXPECT_EQ(std::stoull(rows[r][1]), order[r - 1]);
    EXPECT_NEAR(num(rows[r][2]), contributions[order[r - 1]], 1e-9);
  }

  const auto inf = read_csv(kData / "golden" / "informativity.csv");
  ASSERT_EQ(inf.size(), 7u);
  for (std::size_t r = 1; r < inf.size(); ++r) {
    const auto k = std::stoull(inf[r][0]);
    const std::vector<std::size_t> removed(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    const double want = oracle::informativity_r(xs, removed);
    EXPECT_NEAR(num(inf[r][1]), want, 1e-9);
    EXPECT_NEAR(num(inf[r][2]), want * want, 1e-9);
  }
}

TEST(Cli, GoldenSscAgreesWithOracle) {
  const auto rows = read_csv(kData / "golden" / "ssc.csv");
  const SampleSpec spec{20, derive_seed(42, cli::kSampleStream), SampleStrategy::kOnePerSentence};
  auto baseline = [&](const std::string& name) {
    const auto c = load_corpus(kData / name);
    return oracle::mean_pair_cosine(oracle::vectors_of(sample_tokens(c, c.last_layer(), spec)));
  };
  const std::map<std::string, std::pair<double, double>> ani{
      {"a", {baseline("fixture_a_vanilla"), baseline("fixture_a_tuned")}},
      {"b", {baseline("fixture_b_vanilla"), baseline("fixture_b_tuned")}}};
  std::vector<double> sa, sb;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const auto [av, af] = ani.at(row[0]);
    EXPECT_NEAR(num(row[6]), av, 1e-9);
    EXPECT_NEAR(num(row[7]), af, 1e-9);
    EXPECT_EQ(num(row[3]), (num(row[5]) - num(row[7])) - (num(row[4]) - num(row[6])));
    (row[0] == "a" ? sa : sb).push_back(num(row[3]));
  }
  ASSERT_EQ(sa.size(), sb.size());
  const auto curve = read_csv(kData / "golden" / "ssc_curve.csv");
  ASSERT_EQ(curve.size(), sa.size() + 1);
  for (std::size_t n = 3; n <= sa.size(); ++n) {
    const auto want = oracle::pearson({sa.begin(), sa.begin() + n}, {sb.begin(), sb.begin() + n});
    ASSERT_TRUE(want.has_value());
    EXPECT_NEAR(num(curve[n][1]), *want, 1e-9);
  }
  EXPECT_EQ(curve[1][1], "");
  EXPECT_EQ(curve[2][1], "");
}

TEST(Cli, TrainWritesTrajectory) {
  const auto dir = fresh_dir("train");
  {
    std::ofstream cfg(dir / "train.toml");
    cfg << "[train]\nsteps = 10\nrecord_every = 5\nbatch_size = 8\ndim = 6\nvocab_size = 40\n"
           "[data]\nn_topics = 4\nsentences_per_topic = 6\ntokens_per_sentence = 4\neval_sentences = 16\n";
  }
  std::string log;
  ASSERT_EQ(run({"train", "--config", (dir / "train.toml").string(), "--tau", "0.1", "--out", (dir / "run").string()},
                &log),
            0)
      << log;
  const auto rows = read_csv(dir / "run" / "trajectory.csv");
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0][0], "step");
  EXPECT_EQ(rows[0][1], "loss");
  EXPECT_EQ(rows[3][0], "10");
  const auto sidecar = nlohmann::json::parse(golden::read_file(dir / "run" / "trajectory.json"));
  EXPECT_EQ(sidecar.at("prng"), kPrngName);
  EXPECT_EQ(sidecar.at("config").at("train").at("tau"), 0.1);
  EXPECT_EQ(sidecar.at("config").at("data").at("n_topics"), 4);
  EXPECT_TRUE(fs::exists(dir / "run" / "manifest.json"));

  {
    std::ofstream cfg(dir / "bad.toml");
    cfg << "[train]\nstepz = 10\n";
  }
  EXPECT_NE(run({"train", "--config", (dir / "bad.toml").string(), "--out", (dir / "bad").string()}, &log), 0);
  EXPECT_NE(log.find("unknown key train.stepz"), std::string::npos);
}

TEST(Cli, QuotedTokensRoundTrip) {
  EXPECT_EQ(parse_line(csv_escape("a,\"b\"")), (std::vector<std::string>{"a,\"b\""}));
  EXPECT_EQ(parse_line("x,\",\",3"), (std::vector<std::string>{"x", ",", "3"}));
}

TEST(Cli, BoundsHeaderAndRows) {
  const auto out = fresh_dir("bounds") / "b.csv";
  ASSERT_EQ(run({"bounds", "--tau-grid", "0.05", "--n", "64", "--s-grid", "0.9:0.99:4", "--out", out.string()}), 0);
  const auto rows = read_csv(out);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0][7], "relative_gap");
  EXPECT_NEAR(num(rows[4][2]), 0.99, 1e-15);
  EXPECT_EQ(num(rows[4][3]), loss_upper_bound(num(rows[4][2]), 0.05, 64));
}
