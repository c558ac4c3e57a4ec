// Copyright 2026 The bncap Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "bncap/decode.hpp"
#include "bncap/model.hpp"
#include "bncap/numerics.hpp"
#include "bncap/text.hpp"

namespace bncap::testing {

/// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("bncap_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

/// StepModel whose next-token distribution is looked up by the full prefix
/// read so far (including <start>). Prefixes missing from the table get
/// `fallback`. Probabilities are given directly and logged on the way out.
class TableModel {
 public:
  using State = TokenSequence;

  TableModel(std::size_t vocab, Vector fallback) : vocab_(vocab), fallback_(std::move(fallback)) {}

  void set(const TokenSequence& prefix, Vector probs) { table_[prefix] = std::move(probs); }

  std::size_t vocab_size() const { return vocab_; }
  State start_state() const { return {}; }
  std::pair<Vector, State> advance(const State& s, TokenId token) const {
    State next = s;
    next.push_back(token);
    const auto it = table_.find(next);
    const Vector& p = it == table_.end() ? fallback_ : it->second;
    Vector log_p(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      log_p[i] = p[i] > 0.0 ? std::log(p[i]) : -std::numeric_limits<double>::infinity();
    }
    return {std::move(log_p), std::move(next)};
  }

 private:
  std::size_t vocab_;
  Vector fallback_;
  std::map<TokenSequence, Vector> table_;
};

/// Ids used by the small hand-built tables: pad, start, end, unk, then A and B.
inline constexpr TokenId kA = 4;
inline constexpr TokenId kB = 5;

/// The two-word table where greedy search is beaten by a width-2 beam:
/// first word A 0.6 / B 0.4; after A, <end> 0.55; after B, <end> 0.9.
inline TableModel beam_trap_table() {
  TableModel t(6, {0.0, 0.0, 1.0, 0.0, 0.0, 0.0});
  t.set({kStartId}, {0.0, 0.0, 0.0, 0.0, 0.6, 0.4});
  t.set({kStartId, kA}, {0.0, 0.0, 0.55, 0.0, 0.25, 0.20});
  t.set({kStartId, kB}, {0.0, 0.0, 0.9, 0.0, 0.05, 0.05});
  return t;
}

/// Every tensor of `m` redrawn uniform in [-range, range].
inline void randomize(CaptionModel& m, std::uint64_t seed, double range) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-range, range);
  for_each_tensor(m.params, [&](const std::string&, std::span<double> data, const auto&) {
    for (double& x : data) x = u(rng);
  });
}

inline ModelConfig tiny_config(std::size_t vocab, std::size_t max_len) {
  ModelConfig cfg;
  cfg.vocab_size = vocab;
  cfg.embed_dim = 3;
  cfg.hidden_dim = 4;
  cfg.max_len = max_len;
  return cfg;
}

inline Vector random_feature(std::uint64_t seed, double scale = 0.05) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  Vector f(kFeatureDim);
  for (double& x : f) x = n(rng);
  return f;
}

}  // namespace bncap::testing
