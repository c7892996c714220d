#include "zkfl/dataset.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "bytes.hpp"
#include "zkfl/errors.hpp"

namespace zkfl::data {

namespace fs = std::filesystem;

RawSegment parse_segment(std::string_view text, int activity_id, int subject_id) {
  RawSegment seg{activity_id, subject_id, {}};
  seg.samples.reserve(kSegmentRows * kSegmentCols);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      if (pos >= text.size()) break;
      throw FormatError("empty line", line_no, 1);
    }
    if (line_no > kSegmentRows) throw FormatError("too many lines", line_no, 1);
    std::size_t col = 0;
    std::size_t field = 0;
    for (;;) {
      auto comma = line.find(',', col);
      if (comma == std::string_view::npos) comma = line.size();
      std::string_view token = line.substr(col, comma - col);
      std::size_t lead = 0;
      while (lead < token.size() && token[lead] == ' ') ++lead;
      double v = 0.0;
      const char* first = token.data() + lead;
      const char* last = token.data() + token.size();
      while (last > first && last[-1] == ' ') --last;
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last || first == last || !std::isfinite(v)) {
        throw FormatError("invalid number '" + std::string(token) + "'", line_no, col + 1);
      }
      if (++field > kSegmentCols) throw FormatError("too many columns", line_no, col + 1);
      seg.samples.push_back(v);
      if (comma == line.size()) break;
      col = comma + 1;
    }
    if (field != kSegmentCols) {
      throw FormatError("expected 45 columns, found " + std::to_string(field), line_no, line.size() + 1);
    }
  }
  if (line_no < kSegmentRows || seg.samples.size() != kSegmentRows * kSegmentCols) {
    throw FormatError("expected 125 lines, found " + std::to_string(seg.samples.size() / kSegmentCols),
                      line_no + 1, 1);
  }
  return seg;
}

std::vector<std::array<double, kUnitChannels>> reduce_features(const RawSegment& seg, std::size_t unit) {
  if (unit >= kUnits) throw RangeError("sensor unit must be in 0..4");
  std::vector<std::array<double, kUnitChannels>> rows(kSegmentRows);
  for (std::size_t r = 0; r < kSegmentRows; ++r) {
    for (std::size_t c = 0; c < kUnitChannels; ++c) rows[r][c] = seg.at(r, unit * kUnitChannels + c);
  }
  return rows;
}

MergeTable MergeTable::default_table() {
  return from_json(nlohmann::json::parse(R"({"classes": [
    {"name": "static", "activities": [1, 2, 3, 4, 7]},
    {"name": "stairs", "activities": [5, 6]},
    {"name": "walking", "activities": [8, 9, 10, 11]},
    {"name": "running", "activities": [12]},
    {"name": "machines", "activities": [13, 14, 15, 16]},
    {"name": "dynamic", "activities": [17, 18, 19]}]})"));
}

MergeTable MergeTable::from_json(const nlohmann::json& j) {
  MergeTable t;
  std::array<bool, kActivities> seen{};
  try {
    for (const auto& cls : j.at("classes")) {
      const auto index = static_cast<std::uint32_t>(t.names_.size());
      t.names_.push_back(cls.at("name").get<std::string>());
      for (const auto& a : cls.at("activities")) {
        const int id = a.get<int>();
        if (id < 1 || id > kActivities) throw ConfigError("merge table: activity out of range");
        if (seen[id - 1]) throw ConfigError("merge table: activity " + std::to_string(id) + " listed twice");
        seen[id - 1] = true;
        t.map_[id - 1] = index;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("merge table: ") + e.what());
  }
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
    throw ConfigError("merge table must cover activities 1..19");
  }
  return t;
}

MergeTable MergeTable::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open merge table " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("merge table: ") + e.what());
  }
}

std::uint32_t MergeTable::operator()(int activity_id) const {
  if (activity_id < 1 || activity_id > kActivities) {
    throw RangeError("activity id " + std::to_string(activity_id) + " outside 1..19");
  }
  return map_[activity_id - 1];
}

nlohmann::json MergeTable::to_json() const {
  nlohmann::json classes = nlohmann::json::array();
  for (std::size_t c = 0; c < names_.size(); ++c) {
    nlohmann::json ids = nlohmann::json::array();
    for (int a = 1; a <= kActivities; ++a) {
      if (map_[a - 1] == c) ids.push_back(a);
    }
    classes.push_back({{"name", names_[c]}, {"activities", ids}});
  }
  return {{"classes", classes}};
}

std::vector<Shard> shard_by_subject(std::span<const RawSegment> segments, const MergeTable& table,
                                    std::size_t unit) {
  // Canonical order so that the result ignores the order files were listed in.
  std::vector<const RawSegment*> sorted;
  for (const auto& s : segments) sorted.push_back(&s);
  std::stable_sort(sorted.begin(), sorted.end(), [](const RawSegment* a, const RawSegment* b) {
    return std::tie(a->subject_id, a->activity_id) < std::tie(b->subject_id, b->activity_id);
  });
  std::vector<Shard> shards(kSubjects);
  for (const RawSegment* seg : sorted) {
    if (seg->subject_id < 1 || seg->subject_id > static_cast<int>(kSubjects)) {
      throw RangeError("subject id " + std::to_string(seg->subject_id) + " outside 1..8");
    }
    const auto label = table(seg->activity_id);
    for (const auto& row : reduce_features(*seg, unit)) {
      shards[seg->subject_id - 1].push_back({std::vector<double>(row.begin(), row.end()), label});
    }
  }
  return shards;
}

std::vector<RawSegment> load_uci(const fs::path& root) {
  if (!fs::is_directory(root)) throw ConfigError("dataset directory not found: " + root.string());
  std::vector<RawSegment> out;
  for (int a = 1; a <= kActivities; ++a) {
    char adir[8];
    std::snprintf(adir, sizeof adir, "a%02d", a);
    for (std::size_t p = 1; p <= kSubjects; ++p) {
      const auto dir = root / adir / ("p" + std::to_string(p));
      if (!fs::is_directory(dir)) continue;
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        out.push_back(parse_segment(ss.str(), a, static_cast<int>(p)));
      }
    }
  }
  if (out.empty()) throw ConfigError("no segments found under " + root.string());
  return out;
}

std::vector<std::size_t> class_histogram(const Shard& shard, std::size_t classes) {
  std::vector<std::size_t> h(classes, 0);
  for (const auto& d : shard) {
    if (d.label >= classes) throw RangeError("label outside class range");
    ++h[d.label];
  }
  return h;
}

Split stratified_split(const Shard& shard, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("held-out fraction must be in [0, 1]");
  std::map<std::uint32_t, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < shard.size(); ++i) by_class[shard[i].label].push_back(i);
  std::vector<bool> held(shard.size(), false);
  for (auto& [label, idx] : by_class) {
    Rng rng = Rng::substream(seed, "split", label);
    rng.shuffle(std::span(idx));
    const auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
    for (std::size_t i = 0; i < take; ++i) held[idx[i]] = true;
  }
  Split s;
  for (std::size_t i = 0; i < shard.size(); ++i) (held[i] ? s.heldout : s.train).push_back(shard[i]);
  return s;
}

Standardizer Standardizer::fit(std::span<const Shard> shards) {
  std::size_t dims = 0;
  std::size_t count = 0;
  for (const auto& s : shards) {
    for (const auto& d : s) {
      if (count == 0) dims = d.features.size();
      if (d.features.size() != dims) throw ConfigError("inconsistent feature count");
      ++count;
    }
  }
  if (count == 0) throw EmptyDataError("cannot standardize an empty dataset");
  Standardizer st{std::vector<double>(dims, 0.0), std::vector<double>(dims, 0.0)};
  for (const auto& s : shards) {
    for (const auto& d : s) {
      for (std::size_t f = 0; f < dims; ++f) st.mean[f] += d.features[f];
    }
  }
  for (auto& m : st.mean) m /= static_cast<double>(count);
  for (const auto& s : shards) {
    for (const auto& d : s) {
      for (std::size_t f = 0; f < dims; ++f) {
        const double dv = d.features[f] - st.mean[f];
        st.stddev[f] += dv * dv;
      }
    }
  }
  for (auto& v : st.stddev) {
    v = std::sqrt(v / static_cast<double>(count));
    if (v == 0.0) v = 1.0;  // constant channel
  }
  return st;
}

std::vector<double> Standardizer::apply(std::span<const double> x) const {
  std::vector<double> z(x.size());
  for (std::size_t f = 0; f < x.size(); ++f) z[f] = (x[f] - mean[f]) / stddev[f];
  return z;
}

std::vector<double> Standardizer::invert(std::span<const double> z) const {
  std::vector<double> x(z.size());
  for (std::size_t f = 0; f < z.size(); ++f) x[f] = z[f] * stddev[f] + mean[f];
  return x;
}

Shard Standardizer::apply(const Shard& shard) const {
  Shard out;
  out.reserve(shard.size());
  for (const auto& d : shard) out.push_back({apply(std::span<const double>(d.features)), d.label});
  return out;
}

nlohmann::json Standardizer::to_json() const { return {{"mean", mean}, {"std", stddev}}; }

Standardizer Standardizer::from_json(const nlohmann::json& j) {
  Standardizer s{j.at("mean").get<std::vector<double>>(), j.at("std").get<std::vector<double>>()};
  if (s.mean.size() != s.stddev.size()) throw ConfigError("standardizer: mean/std length mismatch");
  return s;
}

nn::LabeledSet encode_set(const Shard& shard, const fx::FxConfig& cfg) {
  nn::LabeledSet set;
  set.n = shard.empty() ? 0 : shard.front().features.size();
  for (const auto& d : shard) {
    for (double v : d.features) set.features.push_back(fx::encode(v, cfg));
    set.labels.push_back(d.label);
  }
  return set;
}

BatchStream::BatchStream(Shard shard, std::size_t batch_size, std::uint64_t seed, fx::FxConfig cfg)
    : shard_(std::move(shard)), batch_size_(batch_size), cfg_(cfg), rng_(seed) {
  if (batch_size_ == 0) throw ConfigError("batch size must be at least one");
  if (shard_.empty()) throw EmptyDataError("cannot draw batches from an empty shard");
  order_.resize(shard_.size());
  reshuffle();
}

void BatchStream::reshuffle() {
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  rng_.shuffle(std::span(order_));
  cursor_ = 0;
}

nn::Batch BatchStream::next() {
  nn::Batch b;
  b.n = shard_.front().features.size();
  last_.clear();
  for (std::size_t k = 0; k < batch_size_; ++k) {
    if (cursor_ == order_.size()) {
      ++epoch_;
      reshuffle();
    }
    const auto idx = order_[cursor_++];
    last_.push_back(idx);
    for (double v : shard_[idx].features) b.inputs.push_back(fx::encode(v, cfg_));
    b.labels.push_back(shard_[idx].label);
  }
  return b;
}

std::vector<Shard> synthesize(std::size_t n_nodes, std::size_t per_node, std::uint64_t seed,
                              const SynthOptions& opts) {
  if (opts.classes == 0 || opts.dims == 0) throw ConfigError("synthetic data needs dims and classes");
  // Class centres: a scaled basis direction plus a small shared perturbation.
  Rng centre_rng = Rng::substream(seed, "synth-centres");
  std::vector<std::vector<double>> centres(opts.classes, std::vector<double>(opts.dims, 0.0));
  for (std::size_t c = 0; c < opts.classes; ++c) {
    for (std::size_t f = 0; f < opts.dims; ++f) centres[c][f] = 0.25 * opts.separation * centre_rng.normal();
    centres[c][c % opts.dims] += opts.separation;
  }
  std::vector<Shard> shards(n_nodes);
  const double pi = std::numbers::pi;
  for (std::size_t node = 0; node < n_nodes; ++node) {
    std::vector<double> prior(opts.classes);
    double total = 0.0;
    for (std::size_t c = 0; c < opts.classes; ++c) {
      const double phase = 2.0 * pi * (static_cast<double>(c) - static_cast<double>(node)) /
                           static_cast<double>(opts.classes);
      prior[c] = std::exp(opts.skew * std::cos(phase));
      total += prior[c];
    }
    Rng rng = Rng::substream(seed, "synth-node", node);
    auto& shard = shards[node];
    shard.reserve(per_node);
    for (std::size_t i = 0; i < per_node; ++i) {
      double u = rng.uniform() * total;
      std::uint32_t label = 0;
      while (label + 1 < opts.classes && u >= prior[label]) u -= prior[label++];
      Datapoint d{std::vector<double>(opts.dims), label};
      for (std::size_t f = 0; f < opts.dims; ++f) d.features[f] = centres[label][f] + opts.noise * rng.normal();
      shard.push_back(std::move(d));
    }
  }
  return shards;
}

namespace {
constexpr char kShardMagic[] = "ZKFLSHRD";
constexpr std::uint32_t kShardVersion = 1;
}  // namespace

std::vector<std::uint8_t> serialize_shard(const Shard& shard) {
  detail::ByteWriter body;
  const std::uint32_t dims = shard.empty() ? 0 : static_cast<std::uint32_t>(shard.front().features.size());
  body.u32(dims);
  body.u64(shard.size());
  for (const auto& d : shard) {
    if (d.features.size() != dims) throw ConfigError("inconsistent feature count");
    body.u32(d.label);
    for (double v : d.features) body.u64(std::bit_cast<std::uint64_t>(v));
  }
  detail::ByteWriter out;
  out.bytes(std::span(reinterpret_cast<const std::uint8_t*>(kShardMagic), 8));
  out.u32(kShardVersion);
  out.bytes(sha256(body.buffer()));
  out.u64(body.buffer().size());
  out.bytes(body.buffer());
  return std::move(out.buffer());
}

Shard deserialize_shard(std::span<const std::uint8_t> bytes) {
  detail::ByteReader in(bytes);
  auto magic = in.bytes(8);
  if (!std::equal(magic.begin(), magic.end(), kShardMagic)) in.fail("not a shard file");
  if (in.u32() != kShardVersion) in.fail("unsupported shard file version");
  Sha256 digest{};
  auto d = in.bytes(32);
  std::copy(d.begin(), d.end(), digest.begin());
  const auto len = in.u64();
  auto body_bytes = in.bytes(len);
  if (!in.at_end()) in.fail("trailing bytes");
  if (sha256(body_bytes) != digest) throw DigestMismatch("shard file digest mismatch");
  detail::ByteReader body(body_bytes);
  const auto dims = body.u32();
  const auto count = body.u64();
  if (count > body_bytes.size()) body.fail("implausible record count");
  Shard shard;
  shard.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Datapoint p{std::vector<double>(dims), body.u32()};
    for (auto& v : p.features) v = std::bit_cast<double>(body.u64());
    shard.push_back(std::move(p));
  }
  if (!body.at_end()) body.fail("trailing bytes in body");
  return shard;
}

}  // namespace zkfl::data
