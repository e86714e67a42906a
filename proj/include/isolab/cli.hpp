#pragma once

// `isolab` command-line front end: metrics | dims | informativity | ssc | train | bounds.
//
// Every command writes its CSV output(s) plus a JSON run manifest next to
// them. Diagnostics go to the error stream; exit status is 0 on success,
// 1 on a runtime failure and CLI11's code on a usage error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <toml.hpp>

#include "isolab/corpus.hpp"
#include "isolab/csv.hpp"
#include "isolab/dimensions.hpp"
#include "isolab/error.hpp"
#include "isolab/frequency.hpp"
#include "isolab/geometry.hpp"
#include "isolab/infonce.hpp"
#include "isolab/manifest.hpp"
#include "isolab/random.hpp"
#include "isolab/training.hpp"
#include "isolab/version.hpp"

namespace isolab::cli {

namespace fs = std::filesystem;

/// Label of the token sample shared by metrics, dims, informativity and ssc.
inline constexpr const char* kSampleStream = "anisotropy-sample";

inline std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(text);
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::uint64_t parse_uint(const std::string& s) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty() || s.front() == '-') throw Error("expected a non-negative integer, got '" + s + "'");
  return v;
}

inline double parse_real(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw Error("expected a number, got '" + s + "'");
  return v;
}

inline std::vector<std::uint64_t> parse_uint_list(const std::string& s) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split(s, ',')) out.push_back(parse_uint(item));
  if (out.empty()) throw Error("empty integer list '" + s + "'");
  return out;
}

inline std::vector<double> parse_real_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) out.push_back(parse_real(item));
  if (out.empty()) throw Error("empty number list '" + s + "'");
  return out;
}

/// "start:stop:count" (inclusive, evenly spaced) or a comma list.
inline std::vector<double> parse_grid(const std::string& s) {
  const auto parts = split(s, ':');
  if (parts.size() == 1) return parse_real_list(s);
  if (parts.size() != 3) throw Error("grid must be start:stop:count or a comma list, got '" + s + "'");
  const double start = parse_real(parts[0]);
  const double stop = parse_real(parts[1]);
  const auto count = parse_uint(parts[2]);
  if (count == 0) throw Error("grid count must be positive");
  std::vector<double> out;
  for (std::uint64_t i = 0; i < count; ++i) {
    out.push_back(count == 1 ? start : start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  return out;
}

/// "last" or a layer index.
inline std::uint64_t resolve_layer(const EmbeddingCorpus& corpus, const std::string& spec) {
  const std::uint64_t layer = spec == "last" ? corpus.last_layer() : parse_uint(spec);
  if (!corpus.has_layer(layer)) throw LookupError("layer " + std::to_string(layer) + " absent from corpus");
  return layer;
}

inline std::vector<std::uint64_t> resolve_layers(const EmbeddingCorpus& corpus, const std::string& spec) {
  if (spec == "all") return corpus.layers();
  std::vector<std::uint64_t> out;
  for (const auto& item : split(spec, ',')) out.push_back(resolve_layer(corpus, item));
  if (out.empty()) throw Error("empty layer list");
  return out;
}

inline SampleStrategy parse_strategy(const std::string& s) {
  if (s == "one-per-sentence") return SampleStrategy::kOnePerSentence;
  if (s == "uniform") return SampleStrategy::kUniform;
  throw Error("unknown sampling strategy '" + s + "'");
}

inline fs::path sibling(const fs::path& out, const std::string& suffix) {
  fs::path p = out;
  p.replace_filename(out.stem().string() + suffix);
  return p;
}

inline fs::path manifest_path(const fs::path& out) {
  fs::path p = out;
  p += ".manifest.json";
  return p;
}

inline RunManifest start_manifest(const std::string& command, const CLI::App& sub, std::uint64_t seed) {
  RunManifest m;
  m.command = command;
  m.seed = seed;
  m.timestamp = utc_timestamp();
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_name() == "--help" || opt->count() == 0) continue;
    std::string value;
    for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
    m.arguments.emplace_back(opt->get_name(), value);
  }
  return m;
}

inline std::vector<std::string> report_header() {
  return {"layer",           "anisotropy_baseline",       "mean_self_similarity",      "mean_intra_similarity",
          "adjusted_self_similarity", "adjusted_intra_similarity", "mean_l2_norm", "sample_seed", "n_pairs"};
}

inline std::vector<std::string> report_cells(const GeometryReport& r) {
  return {std::to_string(r.layer),
          format_double(r.anisotropy_baseline),
          format_double(r.mean_self_similarity),
          format_double(r.mean_intra_similarity),
          format_double(r.adjusted_self_similarity),
          format_double(r.adjusted_intra_similarity),
          format_double(r.mean_l2_norm),
          std::to_string(r.sample_seed),
          std::to_string(r.n_pairs)};
}

struct SampleOptions {
  std::size_t count = 1000;
  std::uint64_t seed = 42;
  std::string strategy = "one-per-sentence";

  SampleSpec spec() const { return {count, derive_seed(seed, kSampleStream), parse_strategy(strategy)}; }
};

inline void add_sample_options(CLI::App* sub, SampleOptions& o) {
  sub->add_option("--sample", o.count, "Tokens in the anisotropy sample")->capture_default_str();
  sub->add_option("--seed", o.seed, "Run seed")->capture_default_str();
  sub->add_option("--strategy", o.strategy, "one-per-sentence | uniform")->capture_default_str();
}

// ---------------------------------------------------------------- metrics

struct MetricsArgs {
  std::string corpus, layers = "all", out;
  bool exclude_specials = false;
  SampleOptions sample;
};

inline void run_metrics(const MetricsArgs& a, const CLI::App& sub) {
  const auto corpus = load_corpus(a.corpus);
  const auto layers = resolve_layers(corpus, a.layers);
  ReportOptions options;
  options.exclude_specials_from_intra = a.exclude_specials;

  CsvWriter csv(a.out, report_header());
  for (const auto layer : layers) csv.row(report_cells(layer_report(corpus, layer, a.sample.spec(), options)));
  csv.close();

  auto m = start_manifest("metrics", sub, a.sample.seed);
  m.fingerprints.emplace_back(a.corpus, corpus_fingerprint(a.corpus));
  m.metadata = {{"self_similarity_weighting", "unweighted mean over qualifying token types"},
                {"special_tokens_in_intra", !a.exclude_specials},
                {"sample_stream", kSampleStream}};
  m.write(manifest_path(a.out));
}

// ------------------------------------------------------------------- dims

struct DimsArgs {
  std::string corpus, layer = "last", topk = "1,2,3", fractions = "0.1,0.2,0.5", out;
  SampleOptions sample;
};

inline void run_dims(const DimsArgs& a, const CLI::App& sub) {
  const auto corpus = load_corpus(a.corpus);
  const auto layer = resolve_layer(corpus, a.layer);
  const auto ks = parse_uint_list(a.topk);
  const auto fractions = parse_real_list(a.fractions);
  const auto samples = sample_tokens(corpus, layer, a.sample.spec());
  const auto profile = dim_contributions(samples, layer);

  CsvWriter csv(a.out, {"layer", "measure", "argument", "value", "status"});
  const std::string status = profile.defined() ? "ok" : "dominance undefined";
  for (const auto k : ks) {
    const std::string value = profile.defined() ? format_double(topk_share(profile, k)) : "";
    csv.row({std::to_string(layer), "topk_share", std::to_string(k), value, status});
  }
  for (const auto f : fractions) {
    const std::string value = profile.defined() ? std::to_string(dims_for_fraction(profile, f)) : "";
    csv.row({std::to_string(layer), "dims_for_fraction", format_double(f), value, status});
  }
  csv.row({std::to_string(layer), "total", "", format_double(profile.total), status});
  csv.close();

  CsvWriter contrib(sibling(a.out, "_contributions.csv"), {"rank", "dimension", "contribution", "cumulative_share"});
  for (std::size_t rank = 0; rank < profile.dim(); ++rank) {
    const auto d = profile.sorted_indices[rank];
    contrib.row({std::to_string(rank + 1), std::to_string(d), format_double(profile.contributions[d]),
                 profile.defined() ? format_double(profile.cumulative_topk[rank]) : ""});
  }
  contrib.close();

  auto m = start_manifest("dims", sub, a.sample.seed);
  m.fingerprints.emplace_back(a.corpus, corpus_fingerprint(a.corpus));
  m.metadata = {{"ranking", "absolute contribution, descending; ties to lower dimension index"},
                {"layer", layer},
                {"sample_stream", kSampleStream}};
  m.write(manifest_path(a.out));
}

// ---------------------------------------------------------- informativity

struct InformativityArgs {
  std::string corpus, layer = "last", ks = "1,2,3,5,10,20,50,100,300,700", out;
  SampleOptions sample;
};

inline void run_informativity(const InformativityArgs& a, const CLI::App& sub, std::ostream& err) {
  const auto corpus = load_corpus(a.corpus);
  const auto layer = resolve_layer(corpus, a.layer);
  const auto samples = sample_tokens(corpus, layer, a.sample.spec());
  const auto profile = dim_contributions(samples, layer);

  std::vector<std::size_t> ks;
  std::vector<std::uint64_t> skipped;
  for (const auto k : parse_uint_list(a.ks)) {
    if (k < corpus.dim()) {
      ks.push_back(k);
    } else {
      skipped.push_back(k);
      err << "isolab: skipping k=" << k << " (corpus dimension is " << corpus.dim() << ")\n";
    }
  }

  CsvWriter csv(a.out, {"k", "r", "r_squared", "n_pairs"});
  if (!ks.empty()) {
    for (const auto& res : informativity_curve(samples, profile, ks)) {
      csv.row({std::to_string(res.k), format_double(res.r), format_double(res.r_squared), std::to_string(res.n_pairs)});
    }
  }
  csv.close();

  auto m = start_manifest("informativity", sub, a.sample.seed);
  m.fingerprints.emplace_back(a.corpus, corpus_fingerprint(a.corpus));
  m.metadata = {{"layer", layer}, {"skipped_k", skipped}, {"sample_stream", kSampleStream}};
  m.write(manifest_path(a.out));
}

// -------------------------------------------------------------------- ssc

struct SscArgs {
  std::string vanilla_a, tuned_a, vanilla_b, tuned_b, layer = "last", out, curve_out;
  std::size_t top = 400;
  bool skip_specials = false;
  SampleOptions sample;
};

inline void write_ssc_rows(CsvWriter& csv, const std::string& pair, const std::vector<SscRecord>& rows) {
  for (const auto& r : rows) {
    csv.row({pair, r.token_string, std::to_string(r.frequency), format_double(r.ssc), format_double(r.ss_vanilla),
             format_double(r.ss_finetuned), format_double(r.ani_vanilla), format_double(r.ani_finetuned)});
  }
}

inline void run_ssc(const SscArgs& a, const CLI::App& sub, std::ostream& err) {
  if (a.vanilla_b.empty() != a.tuned_b.empty()) throw Error("--vanilla-b and --tuned-b must be given together");
  const bool cross = !a.vanilla_b.empty();
  const auto spec = a.sample.spec();

  const auto va = load_corpus(a.vanilla_a);
  const auto ta = load_corpus(a.tuned_a);
  const auto layer_va = resolve_layer(va, a.layer);
  const auto layer_ta = resolve_layer(ta, a.layer);
  const auto ranked = top_frequent_tokens(va, layer_va, a.top, a.skip_specials);
  if (ranked.truncated) {
    err << "isolab: only " << ranked.tokens.size() << " qualifying tokens (requested " << a.top << ")\n";
  }
  std::vector<std::string> tokens;
  for (const auto& t : ranked.tokens) tokens.push_back(t.token);
  const auto table_a = ssc_table(va, layer_va, ta, layer_ta, tokens, spec);

  nlohmann::json meta = {{"baseline", "per-corpus anisotropy baseline of the selected layer"},
                         {"ordering", "frequency ranking of --vanilla-a, restricted to tokens qualifying in every corpus"},
                         {"skipped_a", table_a.skipped},
                         {"truncated", ranked.truncated},
                         {"sample_stream", kSampleStream}};

  std::vector<SscRecord> rows_a = table_a.records, rows_b;
  std::optional<CorrelationCurve> curve;
  std::optional<EmbeddingCorpus> vb, tb;
  if (cross) {
    vb = load_corpus(a.vanilla_b);
    tb = load_corpus(a.tuned_b);
    const auto table_b = ssc_table(*vb, resolve_layer(*vb, a.layer), *tb, resolve_layer(*tb, a.layer), tokens, spec);
    auto aligned = align_ssc(table_a.records, table_b.records);
    meta["skipped_b"] = table_b.skipped;
    meta["skipped_alignment"] = aligned.skipped;
    rows_a = std::move(aligned.a);
    rows_b = std::move(aligned.b);
    curve = correlation_curve(rows_a, rows_b);
    meta["argmax_n"] = curve->argmax_n;
    meta["max_corr"] = curve->max_corr;
  }

  CsvWriter csv(a.out, {"pair", "token_string", "frequency", "ssc", "ss_vanilla", "ss_finetuned", "ani_vanilla",
                        "ani_finetuned"});
  write_ssc_rows(csv, "a", rows_a);
  write_ssc_rows(csv, "b", rows_b);
  csv.close();

  if (curve) {
    const fs::path curve_path = a.curve_out.empty() ? sibling(a.out, "_curve.csv") : fs::path(a.curve_out);
    CsvWriter c(curve_path, {"n", "correlation", "is_argmax"});
    for (std::size_t i = 0; i < curve->n_values.size(); ++i) {
      c.row({std::to_string(curve->n_values[i]), format_double(curve->correlations[i]),
             curve->n_values[i] == curve->argmax_n ? "1" : "0"});
    }
    c.close();
  }

  auto m = start_manifest("ssc", sub, a.sample.seed);
  for (const auto* p : {&a.vanilla_a, &a.tuned_a, &a.vanilla_b, &a.tuned_b}) {
    if (!p->empty()) m.fingerprints.emplace_back(*p, corpus_fingerprint(*p));
  }
  m.metadata = meta;
  m.write(manifest_path(a.out));
}

// ------------------------------------------------------------------ train

/// Reads a TOML file with optional [train] and [data] tables. Unknown keys are errors.
inline std::pair<TrainConfig, SyntheticPairSpec> load_train_config(const fs::path& path) {
  toml::table root;
  try {
    root = toml::parse_file(path.string());
  } catch (const toml::parse_error& e) {
    throw Error("config " + path.string() + ": " + std::string(e.description()));
  }
  TrainConfig c;
  SyntheticPairSpec s;

  auto real = [](const toml::node& n, const std::string& key) {
    if (auto v = n.value<double>()) return *v;
    throw Error("config: '" + key + "' must be a number");
  };
  auto count = [](const toml::node& n, const std::string& key) -> std::uint64_t {
    const auto v = n.value<std::int64_t>();
    if (!v || *v < 0) throw Error("config: '" + key + "' must be a non-negative integer");
    return static_cast<std::uint64_t>(*v);
  };

  for (const auto& [section, node] : root) {
    const auto* table = node.as_table();
    if (!table) throw Error("config: top-level key '" + std::string(section.str()) + "' must be a table");
    for (const auto& [k, v] : *table) {
      const std::string key(k.str());
      if (section == "train") {
        if (key == "tau") c.tau = real(v, key);
        else if (key == "batch_size") c.batch_size = count(v, key);
        else if (key == "steps") c.steps = count(v, key);
        else if (key == "learning_rate") c.learning_rate = real(v, key);
        else if (key == "pooling") c.pooling = parse_pooling(v.value<std::string>().value_or(""));
        else if (key == "seed") c.seed = count(v, key);
        else if (key == "record_every") c.record_every = count(v, key);
        else if (key == "dim") c.dim = count(v, key);
        else if (key == "vocab_size") c.vocab_size = count(v, key);
        else if (key == "warmup_fraction") c.warmup_fraction = real(v, key);
        else throw Error("config: unknown key train." + key);
      } else if (section == "data") {
        if (key == "n_topics") s.n_topics = count(v, key);
        else if (key == "sentences_per_topic") s.sentences_per_topic = count(v, key);
        else if (key == "tokens_per_sentence") s.tokens_per_sentence = count(v, key);
        else if (key == "function_token_ratio") s.function_token_ratio = real(v, key);
        else if (key == "noise_scale") s.noise_scale = real(v, key);
        else if (key == "anisotropy_bias") s.anisotropy_bias = real(v, key);
        else if (key == "eval_sentences") s.eval_sentences = count(v, key);
        else throw Error("config: unknown key data." + key);
      } else {
        throw Error("config: unknown table [" + std::string(section.str()) + "]");
      }
    }
  }
  return {c, s};
}

inline nlohmann::json config_json(const TrainConfig& c, const SyntheticPairSpec& s) {
  return {{"train",
           {{"tau", c.tau},
            {"batch_size", c.batch_size},
            {"steps", c.steps},
            {"learning_rate", c.learning_rate},
            {"pooling", to_string(c.pooling)},
            {"seed", c.seed},
            {"record_every", c.record_every},
            {"dim", c.dim},
            {"vocab_size", c.vocab_size},
            {"warmup_fraction", c.warmup_fraction}}},
          {"data",
           {{"n_topics", s.n_topics},
            {"sentences_per_topic", s.sentences_per_topic},
            {"tokens_per_sentence", s.tokens_per_sentence},
            {"function_token_ratio", s.function_token_ratio},
            {"noise_scale", s.noise_scale},
            {"anisotropy_bias", s.anisotropy_bias},
            {"eval_sentences", s.eval_sentences}}}};
}

inline void write_trajectory(const TrainTrajectory& traj, const fs::path& dir) {
  fs::create_directories(dir);
  auto header = report_header();
  header.insert(header.begin(), {"step", "loss"});
  CsvWriter csv(dir / "trajectory.csv", header);
  for (const auto& p : traj.points) {
    auto cells = report_cells(p.report);
    cells.insert(cells.begin(), {std::to_string(p.step), format_double(p.loss)});
    csv.row(cells);
  }
  csv.close();

  nlohmann::json sidecar = {{"config", config_json(traj.config, traj.spec)},
                            {"prng", kPrngName},
                            {"seed_streams", {"train-pairs", "eval-pairs", "eval-sample", "encoder-init", "batches"}},
                            {"optimizer", "gradient descent, linear warm-up then constant rate"},
                            {"objective", "symmetric InfoNCE over cosine similarities, in-batch negatives"},
                            {"points", traj.points.size()},
                            {"diverged", traj.diverged}};
  if (traj.diverged) sidecar["diverged_at_step"] = traj.diverged_at_step;
  std::ofstream out(dir / "trajectory.json", std::ios::binary | std::ios::trunc);
  out << sidecar.dump(2) << '\n';
  if (!out) throw Error("cannot write " + (dir / "trajectory.json").string());
}

struct TrainArgs {
  std::string config, out;
  std::optional<double> tau;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> batch_size;
  std::optional<std::string> pooling;
};

inline void run_train(const TrainArgs& a, const CLI::App& sub, std::ostream& err) {
  auto [config, spec] = a.config.empty() ? std::pair<TrainConfig, SyntheticPairSpec>{} : load_train_config(a.config);
  if (a.tau) config.tau = *a.tau;
  if (a.seed) config.seed = *a.seed;
  if (a.batch_size) config.batch_size = *a.batch_size;
  if (a.pooling) config.pooling = parse_pooling(*a.pooling);

  const auto traj = train(config, spec);
  write_trajectory(traj, a.out);
  if (traj.diverged) err << "isolab: training diverged at step " << traj.diverged_at_step << "\n";

  auto m = start_manifest("train", sub, config.seed);
  m.metadata = config_json(config, spec);
  m.write(fs::path(a.out) / "manifest.json");
}

// ----------------------------------------------------------------- bounds

struct BoundsArgs {
  std::string tau_grid = "0.025,0.05,0.1", n = "64", s_grid = "0.9:0.9999:20", out;
};

inline void run_bounds(const BoundsArgs& a, const CLI::App& sub) {
  const auto taus = parse_real_list(a.tau_grid);
  const auto ns = parse_uint_list(a.n);
  const auto ss = parse_grid(a.s_grid);
  CsvWriter csv(a.out, {"tau", "n", "s", "loss_upper", "loss_lower", "loss_lower_2tau", "gap", "relative_gap"});
  for (const double tau : taus) {
    for (const auto n : ns) {
      for (const double s : ss) {
        const auto nn = static_cast<long long>(n);
        const double upper = loss_upper_bound(s, tau, nn);
        const double gap = bound_gap(s, tau, nn);
        csv.row({format_double(tau), std::to_string(n), format_double(s), format_double(upper),
                 format_double(loss_lower_bound(s, tau, nn)), format_double(loss_lower_bound(s, 2.0 * tau, nn)),
                 format_double(gap), format_double(gap / upper)});
      }
    }
  }
  csv.close();
  start_manifest("bounds", sub, 0).write(manifest_path(a.out));
}

// --------------------------------------------------------------- dispatch

inline std::string version_string() {
  return std::string("isolab ") + kToolVersion + " (corpus format " + kCorpusFormatName + ")";
}

inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Geometry diagnostics for contextual token embeddings and a contrastive-training lab", "isolab"};
  bool show_version = false;
  app.add_flag("--version", show_version, "Print tool and format versions");
  app.require_subcommand(0, 1);

  MetricsArgs metrics;
  auto* m = app.add_subcommand("metrics", "Per-layer anisotropy, self-, intra-sentence similarity and L2 norm");
  m->add_option("--corpus", metrics.corpus, "EGC-v1 corpus directory")->required();
  m->add_option("--layers", metrics.layers, "all | comma list of layers (last allowed)")->capture_default_str();
  m->add_option("--out", metrics.out, "Output CSV")->required();
  m->add_flag("--exclude-specials", metrics.exclude_specials, "Drop [CLS]/[SEP]-style tokens from intra-sentence pooling");
  add_sample_options(m, metrics.sample);

  DimsArgs dims;
  auto* d = app.add_subcommand("dims", "Per-dimension contributions and rogue-dimension dominance");
  d->add_option("--corpus", dims.corpus, "EGC-v1 corpus directory")->required();
  d->add_option("--layer", dims.layer, "Layer index or last")->capture_default_str();
  d->add_option("--topk", dims.topk, "Comma list of k for top-k shares")->capture_default_str();
  d->add_option("--fractions", dims.fractions, "Comma list of fractions for dims-for-fraction")->capture_default_str();
  d->add_option("--out", dims.out, "Output CSV")->required();
  add_sample_options(d, dims.sample);

  InformativityArgs inf;
  auto* i = app.add_subcommand("informativity", "Similarity-matrix correlation after zeroing top-k dimensions");
  i->add_option("--corpus", inf.corpus, "EGC-v1 corpus directory")->required();
  i->add_option("--layer", inf.layer, "Layer index or last")->capture_default_str();
  i->add_option("--ks", inf.ks, "Comma list of k")->capture_default_str();
  i->add_option("--out", inf.out, "Output CSV")->required();
  add_sample_options(i, inf.sample);

  SscArgs ssc;
  auto* s = app.add_subcommand("ssc", "Self-similarity change and cross-model correlation curve");
  s->add_option("--vanilla-a", ssc.vanilla_a, "Vanilla corpus of model pair A")->required();
  s->add_option("--tuned-a", ssc.tuned_a, "Fine-tuned corpus of model pair A")->required();
  s->add_option("--vanilla-b", ssc.vanilla_b, "Vanilla corpus of model pair B");
  s->add_option("--tuned-b", ssc.tuned_b, "Fine-tuned corpus of model pair B");
  s->add_option("--layer", ssc.layer, "Layer index or last")->capture_default_str();
  s->add_option("--top", ssc.top, "Number of most frequent tokens")->capture_default_str();
  s->add_flag("--skip-specials", ssc.skip_specials, "Leave special tokens out of the frequency ranking");
  s->add_option("--out", ssc.out, "Output CSV of SSC records")->required();
  s->add_option("--curve-out", ssc.curve_out, "Output CSV of the correlation curve (default <out>_curve.csv)");
  add_sample_options(s, ssc.sample);

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Contrastive training run with metric trajectory");
  t->add_option("--config", tr.config, "TOML config with [train] and [data] tables");
  t->add_option("--out", tr.out, "Output directory")->required();
  t->add_option("--tau", tr.tau, "Override train.tau");
  t->add_option("--seed", tr.seed, "Override train.seed");
  t->add_option("--batch-size", tr.batch_size, "Override train.batch_size");
  t->add_option("--pooling", tr.pooling, "Override train.pooling");

  BoundsArgs bounds;
  auto* b = app.add_subcommand("bounds", "Sweep of the InfoNCE upper/lower loss bounds");
  b->add_option("--tau-grid", bounds.tau_grid, "Comma list of temperatures")->capture_default_str();
  b->add_option("--n", bounds.n, "Batch size, or comma list")->capture_default_str();
  b->add_option("--s-grid", bounds.s_grid, "start:stop:count or comma list of positive similarities")->capture_default_str();
  b->add_option("--out", bounds.out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  if (show_version) {
    out << version_string() << "\n";
    return 0;
  }

  try {
    if (*m) run_metrics(metrics, *m);
    else if (*d) run_dims(dims, *d);
    else if (*i) run_informativity(inf, *i, err);
    else if (*s) run_ssc(ssc, *s, err);
    else if (*t) run_train(tr, *t, err);
    else if (*b) run_bounds(bounds, *b);
    else {
      err << app.help();
      return 2;
    }
  } catch (const std::exception& e) {
    err << "isolab: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace isolab::cli
