#pragma once

// EGC-v1 token-embedding corpora: in-memory model, on-disk reader/writer,
// seeded sampling and grouping helpers.
//
// On disk a corpus is a directory holding
//   meta.json    {"version":1,"dim":D,"count":N,"dtype":"f32le","layers":[...],"model":"..."}
//   tokens.tsv   N rows "index<TAB>layer<TAB>sentence_id<TAB>position<TAB>token", no header
//   vectors.bin  N*D little-endian IEEE-754 float32, row-major, row i = tokens.tsv row i

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "isolab/error.hpp"
#include "isolab/random.hpp"
#include "isolab/version.hpp"

namespace isolab {

struct TokenRecord {
  std::uint64_t index = 0;
  std::uint64_t layer = 0;
  std::uint64_t sentence_id = 0;
  std::uint64_t position = 0;
  std::string token;
  std::vector<float> vector;
};

// Projection used by every algorithm that accepts "a list of records": the
// list may hold records by value or by pointer.
inline const TokenRecord& record_ref(const TokenRecord& r) { return r; }
inline const TokenRecord& record_ref(const TokenRecord* r) { return *r; }
inline const TokenRecord& record_ref(std::reference_wrapper<const TokenRecord> r) { return r.get(); }

template <class R>
concept RecordRange = std::ranges::forward_range<const R> &&
                      requires(std::ranges::range_reference_t<const R> e) {
                        { record_ref(e) } -> std::same_as<const TokenRecord&>;
                      };

/// Special tokens are bracketed surface forms such as [CLS], [SEP], <s>, </s>.
inline bool is_special_token(std::string_view token) {
  if (token.size() < 3) return false;
  return (token.front() == '[' && token.back() == ']') ||
         (token.front() == '<' && token.back() == '>');
}

class EmbeddingCorpus {
 public:
  EmbeddingCorpus() = default;

  /// Validates and takes ownership of the records. `layers` must be sorted and
  /// cover every record's layer; `provenance` holds extra metadata keys.
  static EmbeddingCorpus from_records(std::size_t dim, std::vector<std::uint64_t> layers,
                                      std::vector<TokenRecord> records, std::string model_name,
                                      nlohmann::json provenance = nlohmann::json::object());

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return records_.size(); }
  const std::vector<std::uint64_t>& layers() const { return layers_; }
  const std::vector<TokenRecord>& records() const { return records_; }
  const std::string& model_name() const { return model_name_; }
  const nlohmann::json& provenance() const { return provenance_; }

  bool has_layer(std::uint64_t layer) const {
    return std::binary_search(layers_.begin(), layers_.end(), layer);
  }

  std::uint64_t last_layer() const {
    if (layers_.empty()) throw LookupError("corpus has no layers");
    return layers_.back();
  }

  /// Contiguous records of one layer, in file order.
  std::span<const TokenRecord> layer_records(std::uint64_t layer) const {
    if (!has_layer(layer)) throw LookupError("layer " + std::to_string(layer) + " absent from corpus");
    const auto it = layer_ranges_.find(layer);
    if (it == layer_ranges_.end()) return {};
    return std::span<const TokenRecord>(records_).subspan(it->second.first,
                                                          it->second.second - it->second.first);
  }

  /// The records of a layer split into per-sentence runs, in file order.
  std::vector<std::span<const TokenRecord>> sentences(std::uint64_t layer) const {
    const auto recs = layer_records(layer);
    std::vector<std::span<const TokenRecord>> out;
    std::size_t begin = 0;
    for (std::size_t i = 1; i <= recs.size(); ++i) {
      if (i == recs.size() || recs[i].sentence_id != recs[begin].sentence_id) {
        out.push_back(recs.subspan(begin, i - begin));
        begin = i;
      }
    }
    return out;
  }

  std::size_t sentence_count(std::uint64_t layer) const { return sentences(layer).size(); }

 private:
  std::size_t dim_ = 0;
  std::vector<std::uint64_t> layers_;
  std::vector<TokenRecord> records_;
  std::string model_name_;
  nlohmann::json provenance_ = nlohmann::json::object();
  std::map<std::uint64_t, std::pair<std::size_t, std::size_t>> layer_ranges_;
};

inline EmbeddingCorpus EmbeddingCorpus::from_records(std::size_t dim, std::vector<std::uint64_t> layers,
                                                     std::vector<TokenRecord> records,
                                                     std::string model_name, nlohmann::json provenance) {
  if (dim == 0) throw FormatError("corpus dimension must be positive");
  if (!std::is_sorted(layers.begin(), layers.end()) ||
      std::adjacent_find(layers.begin(), layers.end()) != layers.end()) {
    throw FormatError("layer list must be strictly increasing");
  }

  using Key = std::tuple<std::uint64_t, std::uint64_t, std::uint64_t>;
  std::set<Key> seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.index != i) {
      throw FormatError("record " + std::to_string(i) + " has index " + std::to_string(r.index));
    }
    if (r.vector.size() != dim) {
      throw FormatError("record " + std::to_string(i) + " has dimension " +
                        std::to_string(r.vector.size()) + ", expected " + std::to_string(dim));
    }
    for (float x : r.vector) {
      if (!std::isfinite(x)) throw FormatError("record " + std::to_string(i) + " contains NaN or infinity");
    }
    if (!std::binary_search(layers.begin(), layers.end(), r.layer)) {
      throw FormatError("record " + std::to_string(i) + " uses undeclared layer " + std::to_string(r.layer));
    }
    if (!seen.emplace(r.layer, r.sentence_id, r.position).second) {
      throw FormatError("duplicate (layer, sentence_id, position) = (" + std::to_string(r.layer) + ", " +
                        std::to_string(r.sentence_id) + ", " + std::to_string(r.position) + ")");
    }
    if (i > 0) {
      const auto& p = records[i - 1];
      if (Key{p.layer, p.sentence_id, p.position} > Key{r.layer, r.sentence_id, r.position}) {
        throw FormatError("records are not grouped by layer, sentence_id, position at row " +
                          std::to_string(i));
      }
    }
  }

  EmbeddingCorpus c;
  c.dim_ = dim;
  c.layers_ = std::move(layers);
  c.records_ = std::move(records);
  c.model_name_ = std::move(model_name);
  c.provenance_ = provenance.is_object() ? std::move(provenance) : nlohmann::json::object();

  for (std::size_t i = 0; i < c.records_.size(); ++i) {
    auto [it, inserted] = c.layer_ranges_.try_emplace(c.records_[i].layer, i, i + 1);
    if (!inserted) it->second.second = i + 1;
  }

  // Every layer must hold the same (sentence_id, position) keys.
  if (!c.records_.empty()) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> reference;
    bool first = true;
    for (const auto layer : c.layers_) {
      const auto it = c.layer_ranges_.find(layer);
      if (it == c.layer_ranges_.end()) {
        throw FormatError("layer " + std::to_string(layer) + " declared but has no records");
      }
      std::vector<std::pair<std::uint64_t, std::uint64_t>> keys;
      for (std::size_t i = it->second.first; i < it->second.second; ++i) {
        keys.emplace_back(c.records_[i].sentence_id, c.records_[i].position);
      }
      if (first) {
        reference = std::move(keys);
        first = false;
      } else if (keys != reference) {
        throw FormatError("layer " + std::to_string(layer) +
                          " does not hold the same (sentence_id, position) keys as layer " +
                          std::to_string(c.layers_.front()));
      }
    }
  }
  return c;
}

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("missing file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

inline std::uint64_t parse_u64(std::string_view field, std::size_t row, const char* what) {
  std::uint64_t value = 0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end || field.empty()) {
    throw FormatError("tokens.tsv row " + std::to_string(row) + ": bad " + what + " '" +
                      std::string(field) + "'");
  }
  return value;
}

inline float float_from_le(const unsigned char* p) {
  std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                       (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

inline void float_to_le(float x, char* out) {
  const auto bits = std::bit_cast<std::uint32_t>(x);
  out[0] = static_cast<char>(bits & 0xffu);
  out[1] = static_cast<char>((bits >> 8) & 0xffu);
  out[2] = static_cast<char>((bits >> 16) & 0xffu);
  out[3] = static_cast<char>((bits >> 24) & 0xffu);
}

}  // namespace detail

/// Reads and validates an EGC-v1 corpus directory.
inline EmbeddingCorpus load_corpus(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw FormatError("corpus not found: " + dir.string());

  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(detail::read_file(dir / "meta.json"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("meta.json: ") + e.what());
  }
  if (!meta.is_object()) throw FormatError("meta.json: expected a JSON object");

  std::size_t dim = 0, count = 0;
  std::vector<std::uint64_t> layers;
  std::string model;
  try {
    if (meta.at("version").get<int>() != kCorpusFormatVersion) {
      throw FormatError("meta.json: unsupported version " + meta.at("version").dump());
    }
    if (meta.at("dtype").get<std::string>() != "f32le") {
      throw FormatError("meta.json: unsupported dtype " + meta.at("dtype").dump());
    }
    dim = meta.at("dim").get<std::size_t>();
    count = meta.at("count").get<std::size_t>();
    layers = meta.at("layers").get<std::vector<std::uint64_t>>();
    model = meta.value("model", std::string{});
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("meta.json: ") + e.what());
  }
  nlohmann::json extras = nlohmann::json::object();
  for (const auto& [key, value] : meta.items()) {
    if (key != "version" && key != "dim" && key != "count" && key != "dtype" && key != "layers" &&
        key != "model") {
      extras[key] = value;
    }
  }

  const std::string tsv = detail::read_file(dir / "tokens.tsv");
  const std::string bin = detail::read_file(dir / "vectors.bin");
  if (bin.size() != count * dim * sizeof(float)) {
    throw FormatError("binary size mismatch: vectors.bin holds " + std::to_string(bin.size()) +
                      " bytes, meta.json declares " + std::to_string(count) + "x" + std::to_string(dim) +
                      " floats");
  }

  std::vector<TokenRecord> records;
  records.reserve(count);
  std::size_t pos = 0;
  while (pos < tsv.size()) {
    std::size_t eol = tsv.find('\n', pos);
    if (eol == std::string::npos) eol = tsv.size();
    std::string_view line(tsv.data() + pos, eol - pos);
    pos = eol + 1;
    const std::size_t row = records.size();
    if (row >= count) throw FormatError("tokens.tsv has more rows than meta.json count " + std::to_string(count));

    std::string_view fields[4];
    for (auto& f : fields) {
      const auto tab = line.find('\t');
      if (tab == std::string_view::npos) {
        throw FormatError("tokens.tsv row " + std::to_string(row) + ": expected 5 tab-separated fields");
      }
      f = line.substr(0, tab);
      line.remove_prefix(tab + 1);
    }
    TokenRecord r;
    r.index = detail::parse_u64(fields[0], row, "index");
    r.layer = detail::parse_u64(fields[1], row, "layer");
    r.sentence_id = detail::parse_u64(fields[2], row, "sentence_id");
    r.position = detail::parse_u64(fields[3], row, "position");
    r.token = std::string(line);
    r.vector.resize(dim);
    const auto* base = reinterpret_cast<const unsigned char*>(bin.data()) + row * dim * sizeof(float);
    for (std::size_t j = 0; j < dim; ++j) r.vector[j] = detail::float_from_le(base + j * sizeof(float));
    records.push_back(std::move(r));
  }
  if (records.size() != count) {
    throw FormatError("tokens.tsv has " + std::to_string(records.size()) + " rows, meta.json declares " +
                      std::to_string(count));
  }
  return EmbeddingCorpus::from_records(dim, std::move(layers), std::move(records), std::move(model),
                                       std::move(extras));
}

/// Writes `corpus` as an EGC-v1 directory (created if needed).
inline void write_corpus(const EmbeddingCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  nlohmann::json meta = corpus.provenance();
  meta["version"] = kCorpusFormatVersion;
  meta["dim"] = corpus.dim();
  meta["count"] = corpus.size();
  meta["dtype"] = "f32le";
  meta["layers"] = corpus.layers();
  meta["model"] = corpus.model_name();
  {
    std::ofstream out(dir / "meta.json", std::ios::binary);
    out << meta.dump(2) << '\n';
    if (!out) throw Error("cannot write " + (dir / "meta.json").string());
  }
  {
    std::ofstream out(dir / "tokens.tsv", std::ios::binary);
    for (const auto& r : corpus.records()) {
      if (r.token.find('\n') != std::string::npos) {
        throw FormatError("token at index " + std::to_string(r.index) + " contains a newline");
      }
      out << r.index << '\t' << r.layer << '\t' << r.sentence_id << '\t' << r.position << '\t' << r.token
          << '\n';
    }
    if (!out) throw Error("cannot write " + (dir / "tokens.tsv").string());
  }
  {
    std::string bytes(corpus.size() * corpus.dim() * sizeof(float), '\0');
    std::size_t offset = 0;
    for (const auto& r : corpus.records()) {
      for (float x : r.vector) {
        detail::float_to_le(x, bytes.data() + offset);
        offset += sizeof(float);
      }
    }
    std::ofstream out(dir / "vectors.bin", std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("cannot write " + (dir / "vectors.bin").string());
  }
}

enum class SampleStrategy { kOnePerSentence, kUniform };

struct SampleSpec {
  std::size_t count = 1000;
  std::uint64_t seed = 42;
  SampleStrategy strategy = SampleStrategy::kOnePerSentence;
};

/// Seeded token sample from one layer.
///
/// kOnePerSentence picks `count` distinct sentences without replacement and one
/// uniformly chosen token from each, so long sentences are not over-represented.
/// Output is ordered by position in the corpus.
inline std::vector<TokenRecord> sample_tokens(const EmbeddingCorpus& corpus, std::uint64_t layer,
                                              const SampleSpec& spec) {
  if (spec.count == 0) throw LookupError("sample count must be positive");
  Rng rng(spec.seed);
  std::vector<TokenRecord> out;

  if (spec.strategy == SampleStrategy::kOnePerSentence) {
    const auto sents = corpus.sentences(layer);
    if (spec.count > sents.size()) {
      throw LookupError("sample count " + std::to_string(spec.count) + " exceeds the " +
                        std::to_string(sents.size()) + " sentences of layer " + std::to_string(layer));
    }
    std::vector<std::size_t> order(sents.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = 0; i < spec.count; ++i) {
      const std::size_t j = i + rng.uniform_index(order.size() - i);
      std::swap(order[i], order[j]);
    }
    order.resize(spec.count);
    std::vector<std::size_t> picks(spec.count);
    for (std::size_t i = 0; i < spec.count; ++i) picks[i] = rng.uniform_index(sents[order[i]].size());
    std::vector<std::size_t> rank(spec.count);
    for (std::size_t i = 0; i < rank.size(); ++i) rank[i] = i;
    std::sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) { return order[a] < order[b]; });
    out.reserve(spec.count);
    for (const auto i : rank) out.push_back(sents[order[i]][picks[i]]);
    return out;
  }

  const auto recs = corpus.layer_records(layer);
  if (spec.count > recs.size()) {
    throw LookupError("sample count " + std::to_string(spec.count) + " exceeds the " +
                      std::to_string(recs.size()) + " records of layer " + std::to_string(layer));
  }
  std::vector<std::size_t> order(recs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = 0; i < spec.count; ++i) {
    const std::size_t j = i + rng.uniform_index(order.size() - i);
    std::swap(order[i], order[j]);
  }
  order.resize(spec.count);
  std::sort(order.begin(), order.end());
  out.reserve(spec.count);
  for (const auto i : order) out.push_back(recs[i]);
  return out;
}

/// Partition of a layer's records by exact surface token. Pointers stay valid
/// for the lifetime of `corpus`.
inline std::map<std::string, std::vector<const TokenRecord*>> group_by_token(const EmbeddingCorpus& corpus,
                                                                             std::uint64_t layer) {
  std::map<std::string, std::vector<const TokenRecord*>> groups;
  for (const auto& r : corpus.layer_records(layer)) groups[r.token].push_back(&r);
  return groups;
}

}  // namespace isolab
