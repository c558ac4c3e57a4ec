// Copyright 2026 The bncap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bncap/model.hpp"
#include "bncap/numerics.hpp"
#include "bncap/text.hpp"

namespace bncap {

/// Encoder output for one image.
struct ImageFeature {
  std::string id;
  Vector values;

  friend bool operator==(const ImageFeature&, const ImageFeature&) = default;
};

// Feature file ("BNF1"), little-endian:
//   "BNF1" | u32 count | u32 dim (2048) |
//   count x { u16 id_len | id bytes | dim x f32 }
void write_features(const std::filesystem::path& path, std::span<const ImageFeature> features);
std::vector<ImageFeature> read_features(const std::filesystem::path& path);

/// image id -> captions in file order.
using CaptionMap = std::map<std::string, std::vector<std::string>>;

struct CaptionFile {
  CaptionMap captions;
  /// One entry per image that does not have exactly five captions.
  std::vector<std::string> warnings;
};

inline constexpr std::size_t kCaptionsPerImage = 5;

/// Reads "image_id<TAB>caption" lines. Blank lines and lines starting with '#'
/// are skipped; CRLF is accepted.
CaptionFile load_captions(const std::filesystem::path& path);
void write_captions(const std::filesystem::path& path, const CaptionMap& captions);

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> test;
  std::vector<std::string> validation;
};

/// Shuffles `ids` with `seed` and cuts them into train/test/validation
/// blocks in proportion to `ratios`. Test and validation get the floor of
/// their share (at least one id each); the remainder goes to train.
DatasetSplit split_dataset(std::span<const std::string> ids,
                           std::array<std::size_t, 3> ratios = {6, 1, 1}, std::uint64_t seed = 0);

/// Pseudo-random feature with half its coordinates at +-1/32 and the rest
/// zero, so its L2 norm is exactly 1 in single and double precision.
Vector synthetic_feature(std::mt19937_64& rng);

/// Bengali words the default fixture grammar draws from.
std::vector<std::string> default_fixture_words();

struct FixturePaths {
  std::filesystem::path features;
  std::filesystem::path captions;
};

/// Writes features.bnf and captions.tsv under `out_dir`. Every feature is a
/// pseudo-random exactly unit-norm vector; each image's caption is a
/// deterministic function of its id, written five times.
FixturePaths generate_fixture(std::size_t n_images, std::span<const std::string> vocab_words,
                              std::uint64_t seed, const std::filesystem::path& out_dir);

/// A model with the vocabulary it was trained on and free-form metadata.
struct Checkpoint {
  CaptionModel model;
  Vocabulary vocab;
  std::vector<std::pair<std::string, std::string>> metadata;

  /// Value of a metadata key, or `fallback`.
  std::string meta(const std::string& key, const std::string& fallback = {}) const;
};

inline constexpr int kCheckpointVersion = 1;

// Checkpoint file ("BNCK1"), little-endian:
//   "BNCK1" | u32 header_len | header (UTF-8 "key=value" lines) |
//   tensors until EOF: { u16 name_len | name | u32 rank | rank x u32 dim | f64 data }
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);
/// Loads tensors into `m`, requiring the file's shapes to match m.config.
void load_checkpoint_into(const std::filesystem::path& path, CaptionModel& m);

}  // namespace bncap
