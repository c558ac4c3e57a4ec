// Copyright 2026 The bncap Authors
// SPDX-License-Identifier: Apache-2.0

#include "bncap/data_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "bncap/error.hpp"

namespace bncap {

namespace {

constexpr std::string_view kFeatureMagic = "BNF1";
constexpr std::string_view kCheckpointMagic = "BNCK1";

class ByteWriter {
 public:
  void bytes(std::string_view s) { buf_.append(s); }
  void u16(std::uint16_t v) { little_endian(v, 2); }
  void u32(std::uint32_t v) { little_endian(v, 4); }
  void f32(float v) { little_endian(std::bit_cast<std::uint32_t>(v), 4); }
  void f64(double v) { little_endian(std::bit_cast<std::uint64_t>(v), 8); }
  const std::string& str() const { return buf_; }

 private:
  void little_endian(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::string buf_;
};

class ByteReader {
 public:
  ByteReader(std::string data, std::string what) : data_(std::move(data)), what_(std::move(what)) {}

  bool at_end() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }

  std::string_view bytes(std::size_t n) {
    need(n);
    std::string_view out(data_.data() + pos_, n);
    pos_ += n;
    return out;
  }
  std::uint16_t u16() { return static_cast<std::uint16_t>(little_endian(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(little_endian(4)); }
  float f32() { return std::bit_cast<float>(static_cast<std::uint32_t>(little_endian(4))); }
  double f64() { return std::bit_cast<double>(little_endian(8)); }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) {
      throw FormatError(FormatErrc::truncated, what_ + ": needed " + std::to_string(n) +
                                                   " bytes at offset " + std::to_string(pos_));
    }
  }
  std::uint64_t little_endian(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::string data_;
  std::string what_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatErrc::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(FormatErrc::io, "cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw FormatError(FormatErrc::io, "short write to " + path.string());
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || value.empty()) {
    throw FormatError(FormatErrc::bad_header, "non-numeric value for " + key + ": '" + value + "'");
  }
  return static_cast<std::size_t>(v);
}

struct TensorSlot {
  std::span<double> data;
  std::vector<std::size_t> shape;
  bool filled = false;
};

void read_tensors(ByteReader& in, ModelParams& target) {
  std::unordered_map<std::string, TensorSlot> slots;
  std::vector<std::string> order;
  for_each_tensor(target, [&](const std::string& name, std::span<double> data,
                              const std::vector<std::size_t>& shape) {
    slots.emplace(name, TensorSlot{data, shape, false});
    order.push_back(name);
  });

  while (!in.at_end()) {
    const std::string name(in.bytes(in.u16()));
    const auto it = slots.find(name);
    if (it == slots.end()) throw FormatError(FormatErrc::unknown_tensor, name);
    TensorSlot& slot = it->second;
    if (slot.filled) throw FormatError(FormatErrc::bad_header, "tensor " + name + " appears twice");
    const std::uint32_t rank = in.u32();
    if (rank > 8) throw FormatError(FormatErrc::shape_mismatch, name + " has rank " + std::to_string(rank));
    std::vector<std::size_t> shape(rank);
    for (std::size_t& d : shape) d = in.u32();
    if (shape != slot.shape) {
      std::string got, want;
      for (auto d : shape) got += std::to_string(d) + " ";
      for (auto d : slot.shape) want += std::to_string(d) + " ";
      throw FormatError(FormatErrc::shape_mismatch, name + ": file has [ " + got + "], expected [ " + want + "]");
    }
    for (double& x : slot.data) x = in.f64();
    slot.filled = true;
  }
  for (const std::string& name : order) {
    if (!slots.at(name).filled) throw FormatError(FormatErrc::missing_tensor, name);
  }
}

struct ParsedHeader {
  ModelConfig config;
  std::vector<std::string> vocab_words;
  std::vector<std::pair<std::string, std::string>> metadata;
};

ParsedHeader read_header(ByteReader& in) {
  if (in.remaining() < kCheckpointMagic.size() ||
      in.bytes(kCheckpointMagic.size()) != kCheckpointMagic) {
    throw FormatError(FormatErrc::bad_magic, "not a BNCK1 checkpoint");
  }
  const std::string header(in.bytes(in.u32()));
  ParsedHeader h;
  std::set<std::string> seen;
  std::istringstream lines(header);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw FormatError(FormatErrc::bad_header, "line without '=': " + line);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "vocab") {
      h.vocab_words.push_back(value);
      continue;
    }
    seen.insert(key);
    if (key == "format_version") {
      if (value != std::to_string(kCheckpointVersion)) {
        throw FormatError(FormatErrc::version_mismatch,
                          "file version " + value + ", reader version " + std::to_string(kCheckpointVersion));
      }
    } else if (key == "embed_dim") {
      h.config.embed_dim = parse_size(key, value);
    } else if (key == "hidden_dim") {
      h.config.hidden_dim = parse_size(key, value);
    } else if (key == "vocab_size") {
      h.config.vocab_size = parse_size(key, value);
    } else if (key == "feature_dim") {
      h.config.feature_dim = parse_size(key, value);
    } else if (key == "max_len") {
      h.config.max_len = parse_size(key, value);
    } else if (key == "seed") {
      h.config.seed = parse_size(key, value);
    } else {
      h.metadata.emplace_back(key, value);
    }
  }
  for (const char* required : {"format_version", "embed_dim", "hidden_dim", "vocab_size",
                               "feature_dim", "max_len", "seed"}) {
    if (!seen.count(required)) throw FormatError(FormatErrc::bad_header, std::string("missing key ") + required);
  }
  try {
    h.config.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(FormatErrc::bad_header, e.what());
  }
  if (h.vocab_words.size() + kReservedTokens != h.config.vocab_size) {
    throw FormatError(FormatErrc::bad_header,
                      "header lists " + std::to_string(h.vocab_words.size()) +
                          " vocabulary words for vocab_size " + std::to_string(h.config.vocab_size));
  }
  return h;
}

}  // namespace

void write_features(const std::filesystem::path& path, std::span<const ImageFeature> features) {
  ByteWriter out;
  out.bytes(kFeatureMagic);
  out.u32(static_cast<std::uint32_t>(features.size()));
  out.u32(static_cast<std::uint32_t>(kFeatureDim));
  std::set<std::string_view> ids;
  for (const ImageFeature& f : features) {
    if (!ids.insert(f.id).second) throw FormatError(FormatErrc::duplicate_id, f.id);
    if (f.id.size() > 0xFFFF) throw InvalidArgument("image id longer than 65535 bytes");
    if (f.values.size() != kFeatureDim) {
      throw DimensionError("feature " + f.id + " has " + std::to_string(f.values.size()) +
                           " values, expected " + std::to_string(kFeatureDim));
    }
    out.u16(static_cast<std::uint16_t>(f.id.size()));
    out.bytes(f.id);
    for (double v : f.values) {
      if (!std::isfinite(v)) throw FormatError(FormatErrc::non_finite, "feature " + f.id);
      out.f32(static_cast<float>(v));
    }
  }
  write_file(path, out.str());
}

std::vector<ImageFeature> read_features(const std::filesystem::path& path) {
  ByteReader in(read_file(path), path.string());
  if (in.remaining() < kFeatureMagic.size() || in.bytes(kFeatureMagic.size()) != kFeatureMagic) {
    throw FormatError(FormatErrc::bad_magic, path.string() + " is not a BNF1 feature file");
  }
  const std::uint32_t count = in.u32();
  const std::uint32_t dim = in.u32();
  if (dim != kFeatureDim) {
    throw FormatError(FormatErrc::bad_dimension, "dim field is " + std::to_string(dim) +
                                                     ", expected " + std::to_string(kFeatureDim));
  }
  std::vector<ImageFeature> out;
  out.reserve(std::min<std::size_t>(count, in.remaining() / (2 + kFeatureDim * 4) + 1));
  std::set<std::string> ids;
  for (std::uint32_t i = 0; i < count; ++i) {
    ImageFeature f;
    f.id = std::string(in.bytes(in.u16()));
    if (!ids.insert(f.id).second) throw FormatError(FormatErrc::duplicate_id, f.id);
    f.values.resize(dim);
    for (double& v : f.values) {
      v = in.f32();
      if (!std::isfinite(v)) throw FormatError(FormatErrc::non_finite, "feature " + f.id);
    }
    out.push_back(std::move(f));
  }
  if (!in.at_end()) {
    throw FormatError(FormatErrc::trailing_data,
                      std::to_string(in.remaining()) + " bytes after the last record");
  }
  return out;
}

CaptionFile load_captions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatErrc::io, "cannot open " + path.string());
  CaptionFile out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw FormatError(FormatErrc::malformed_line,
                        path.string() + ":" + std::to_string(line_no) + ": expected image_id<TAB>caption");
    }
    out.captions[line.substr(0, tab)].push_back(line.substr(tab + 1));
  }
  for (const auto& [id, caps] : out.captions) {
    if (caps.size() != kCaptionsPerImage) {
      out.warnings.push_back("image " + id + " has " + std::to_string(caps.size()) +
                             " captions (expected " + std::to_string(kCaptionsPerImage) + ")");
    }
  }
  return out;
}

void write_captions(const std::filesystem::path& path, const CaptionMap& captions) {
  std::string data;
  for (const auto& [id, caps] : captions) {
    for (const std::string& c : caps) data += id + '\t' + c + '\n';
  }
  write_file(path, data);
}

DatasetSplit split_dataset(std::span<const std::string> ids, std::array<std::size_t, 3> ratios,
                           std::uint64_t seed) {
  if (ratios[0] == 0 || ratios[1] == 0 || ratios[2] == 0) {
    throw InvalidArgument("split ratios must be positive");
  }
  if (ids.size() < ratios.size()) {
    throw InvalidArgument("cannot split " + std::to_string(ids.size()) + " ids into 3 parts");
  }
  std::vector<std::string> order(ids.begin(), ids.end());
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const std::size_t n = order.size();
  const std::size_t total = ratios[0] + ratios[1] + ratios[2];
  const std::size_t n_test = std::max<std::size_t>(1, n * ratios[1] / total);
  const std::size_t n_val = std::max<std::size_t>(1, n * ratios[2] / total);
  const std::size_t n_train = n - n_test - n_val;

  DatasetSplit s;
  const auto first = order.begin();
  s.train.assign(first, first + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(first + static_cast<std::ptrdiff_t>(n_train),
                first + static_cast<std::ptrdiff_t>(n_train + n_test));
  s.validation.assign(first + static_cast<std::ptrdiff_t>(n_train + n_test), order.end());
  return s;
}

Vector synthetic_feature(std::mt19937_64& rng) {
  constexpr std::size_t kActive = kFeatureDim / 2;
  constexpr double kMagnitude = 1.0 / 32.0;  // 1024 * (1/32)^2 == 1
  std::vector<std::size_t> coords(kFeatureDim);
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  std::shuffle(coords.begin(), coords.end(), rng);
  Vector v(kFeatureDim, 0.0);
  for (std::size_t k = 0; k < kActive; ++k) v[coords[k]] = (rng() & 1U) ? kMagnitude : -kMagnitude;
  return v;
}

std::vector<std::string> default_fixture_words() {
  // Four grammar slots, dealt round-robin: subject, modifier, place, action.
  return {
      "ছেলেটি",   "সুন্দর", "নদীতে",   "খেলছে",
      "মেয়েটি",   "ছোট",    "মাঠে",    "হাঁটছে",
      "লোকটি",    "বড়",     "রাস্তায়", "দৌড়াচ্ছে",
      "শিশুটি",   "সবুজ",   "নৌকায়",   "বসে",
      "কুকুরটি",  "পুরনো",  "বাগানে",   "হাসছে",
      "মহিলাটি",  "শান্ত",   "বাজারে",   "দাঁড়িয়ে",
  };
}

FixturePaths generate_fixture(std::size_t n_images, std::span<const std::string> vocab_words,
                              std::uint64_t seed, const std::filesystem::path& out_dir) {
  if (n_images < 1) throw InvalidArgument("fixture needs at least one image");
  if (vocab_words.size() < 4) throw InvalidArgument("fixture grammar needs at least four words");

  std::array<std::vector<std::string>, 4> slots;
  for (std::size_t i = 0; i < vocab_words.size(); ++i) slots[i % 4].push_back(vocab_words[i]);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw FormatError(FormatErrc::io, "cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<ImageFeature> features;
  CaptionMap captions;
  std::mt19937_64 feature_rng(seed);
  for (std::size_t i = 0; i < n_images; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "img_%04zu", i);
    ImageFeature f{id, synthetic_feature(feature_rng)};

    std::seed_seq caption_seed{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                               static_cast<std::uint32_t>(fnv1a(f.id)),
                               static_cast<std::uint32_t>(fnv1a(f.id) >> 32)};
    std::mt19937_64 caption_rng(caption_seed);
    auto pick = [&](const std::vector<std::string>& slot) -> const std::string& {
      return slot[caption_rng() % slot.size()];
    };
    std::string caption = pick(slots[0]);
    if (caption_rng() & 1U) caption += " " + pick(slots[1]);
    caption += " " + pick(slots[2]);
    caption += " " + pick(slots[3]) + "।";

    captions[f.id].assign(kCaptionsPerImage, caption);
    features.push_back(std::move(f));
  }

  FixturePaths paths{out_dir / "features.bnf", out_dir / "captions.tsv"};
  write_features(paths.features, features);
  write_captions(paths.captions, captions);
  return paths;
}

std::string Checkpoint::meta(const std::string& key, const std::string& fallback) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return v;
  }
  return fallback;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const ModelConfig& c = ckpt.model.config;
  if (ckpt.vocab.size() != c.vocab_size) {
    throw InvalidArgument("vocabulary has " + std::to_string(ckpt.vocab.size()) +
                          " entries, model expects " + std::to_string(c.vocab_size));
  }
  std::string header = "format_version=" + std::to_string(kCheckpointVersion) + "\n";
  header += "embed_dim=" + std::to_string(c.embed_dim) + "\n";
  header += "hidden_dim=" + std::to_string(c.hidden_dim) + "\n";
  header += "vocab_size=" + std::to_string(c.vocab_size) + "\n";
  header += "feature_dim=" + std::to_string(c.feature_dim) + "\n";
  header += "max_len=" + std::to_string(c.max_len) + "\n";
  header += "seed=" + std::to_string(c.seed) + "\n";
  for (const auto& [k, v] : ckpt.metadata) {
    if (k.empty() || k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos) {
      throw InvalidArgument("metadata entry '" + k + "' cannot be stored in a checkpoint header");
    }
    header += k + "=" + v + "\n";
  }
  for (const std::string& w : ckpt.vocab.corpus_words()) header += "vocab=" + w + "\n";

  ByteWriter out;
  out.bytes(kCheckpointMagic);
  out.u32(static_cast<std::uint32_t>(header.size()));
  out.bytes(header);
  for_each_tensor(ckpt.model.params, [&](const std::string& name, std::span<const double> data,
                                         const std::vector<std::size_t>& shape) {
    out.u16(static_cast<std::uint16_t>(name.size()));
    out.bytes(name);
    out.u32(static_cast<std::uint32_t>(shape.size()));
    for (std::size_t d : shape) out.u32(static_cast<std::uint32_t>(d));
    for (double x : data) out.f64(x);
  });
  write_file(path, out.str());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  ByteReader in(read_file(path), path.string());
  ParsedHeader h = read_header(in);
  Checkpoint ckpt{{h.config, ModelParams::zeros(h.config)}, Vocabulary::from_words(h.vocab_words),
                  std::move(h.metadata)};
  read_tensors(in, ckpt.model.params);
  return ckpt;
}

void load_checkpoint_into(const std::filesystem::path& path, CaptionModel& m) {
  ByteReader in(read_file(path), path.string());
  const ParsedHeader h = read_header(in);
  ModelParams loaded = ModelParams::zeros(m.config);
  read_tensors(in, loaded);
  m.params = std::move(loaded);
  m.config.seed = h.config.seed;
}

}  // namespace bncap
