// Copyright 2026 The bncap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bncap/gru.hpp"
#include "bncap/numerics.hpp"
#include "bncap/text.hpp"

namespace bncap {

inline constexpr std::size_t kFeatureDim = 2048;

struct ModelConfig {
  std::size_t embed_dim = 300;
  std::size_t hidden_dim = 256;
  std::size_t vocab_size = kReservedTokens;
  std::size_t feature_dim = kFeatureDim;
  std::size_t max_len = 20;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument unless every field is positive and the feature
  /// width is 2048.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// One directional decoder: a GRU plus its softmax head.
struct DecoderParams {
  GruParams gru;
  Matrix out_proj;  // vocab x hidden
  Vector out_bias;  // vocab

  friend bool operator==(const DecoderParams&, const DecoderParams&) = default;
};

/// All trainable tensors. Also used as the gradient container.
struct ModelParams {
  Matrix embedding;  // vocab x embed, shared by both directions
  Matrix feat_proj;  // hidden x feature
  Vector feat_bias;  // hidden
  DecoderParams fwd;
  DecoderParams bwd;

  /// Zero tensors shaped for `cfg`.
  static ModelParams zeros(const ModelConfig& cfg);

  DecoderParams& decoder(Direction d) { return d == Direction::forward ? fwd : bwd; }
  const DecoderParams& decoder(Direction d) const { return d == Direction::forward ? fwd : bwd; }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct CaptionModel {
  ModelConfig config;
  ModelParams params;

  friend bool operator==(const CaptionModel&, const CaptionModel&) = default;
};

/// Visits every tensor of `p` in a fixed order as (name, data, shape).
template <class Params, class Fn>
void for_each_tensor(Params& p, Fn&& fn) {
  auto matrix = [&](const std::string& name, auto& m) {
    fn(name, m.data(), std::vector<std::size_t>{m.rows(), m.cols()});
  };
  auto vector = [&](const std::string& name, auto& v) {
    fn(name, std::span(v), std::vector<std::size_t>{v.size()});
  };
  matrix("embedding", p.embedding);
  matrix("feat_proj", p.feat_proj);
  vector("feat_bias", p.feat_bias);
  for (const Direction d : {Direction::forward, Direction::backward}) {
    auto& dec = p.decoder(d);
    const std::string prefix = d == Direction::forward ? "fwd." : "bwd.";
    matrix(prefix + "w_z", dec.gru.w_z);
    matrix(prefix + "u_z", dec.gru.u_z);
    matrix(prefix + "w_r", dec.gru.w_r);
    matrix(prefix + "u_r", dec.gru.u_r);
    matrix(prefix + "w", dec.gru.w);
    matrix(prefix + "u", dec.gru.u);
    matrix(prefix + "out_proj", dec.out_proj);
    vector(prefix + "out_bias", dec.out_bias);
  }
}

/// Weights uniform in [-0.08, 0.08] from a generator seeded by cfg.seed;
/// biases zero.
CaptionModel init_model(const ModelConfig& cfg);

/// Decoder start state shared by both directions: tanh(feat_proj f + bias).
Vector initial_state(const CaptionModel& m, std::span<const double> feature);

struct StepOutput {
  Vector probs;
  Vector h_next;
};

/// Feeds `token` to the chosen decoder and returns the next-token distribution.
StepOutput step_distribution(const CaptionModel& m, Direction d, std::span<const double> h_prev,
                             TokenId token);

/// Same as step_distribution but returns log-probabilities.
StepOutput step_log_distribution(const CaptionModel& m, Direction d,
                                 std::span<const double> h_prev, TokenId token);

/// The token order a decoder reads: unchanged for forward; for backward the
/// words are reversed between the same start and end markers.
TokenSequence oriented(std::span<const TokenId> natural, Direction d);

enum class ScoringMode {
  mean_log,    // (1/T) sum log p_t
  arith_mean,  // (1/T) sum p_t
};

const char* to_string(ScoringMode mode);

/// Aggregates per-step log-probabilities into a length-normalized score.
double sentence_score(std::span<const double> step_log_probs, ScoringMode mode);

/// A sentence in natural word order with the per-step probabilities the
/// producing decoder assigned to it.
struct ScoredSentence {
  TokenSequence ids;
  std::vector<double> step_log_probs;
  Direction direction = Direction::forward;
  bool forced_end = false;

  double log_prob() const;
  double mean_log_prob() const;
  double mean_prob() const;
  double score(ScoringMode mode) const;
};

/// Teacher-forced per-step scores of `s` (natural order) under one decoder.
ScoredSentence score_sentence(const CaptionModel& m, std::span<const double> feature,
                              std::span<const TokenId> s, Direction d);

/// Sum of teacher-forced log-probabilities of every token after <start>.
double sentence_log_prob(const CaptionModel& m, std::span<const double> feature,
                         std::span<const TokenId> s, Direction d);

/// Larger score under `mode` wins; ties go to the forward sentence.
const ScoredSentence& select_bidirectional(const ScoredSentence& fwd, const ScoredSentence& bwd,
                                           ScoringMode mode = ScoringMode::mean_log);

/// Negative log-likelihood of `s`, forward plus backward.
double caption_loss(const CaptionModel& m, std::span<const double> feature,
                    std::span<const TokenId> s);

struct SequenceStats {
  double loss = 0.0;
  std::size_t tokens = 0;   // predictions made, both directions
  std::size_t correct = 0;  // predictions whose argmax equals the target
};

/// Adds d caption_loss / d params into `grad` and returns the loss statistics.
SequenceStats accumulate_model_backward(const CaptionModel& m, std::span<const double> feature,
                                        std::span<const TokenId> s, ModelParams& grad);

/// Exact gradient of caption_loss with respect to every parameter.
ModelParams model_backward(const CaptionModel& m, std::span<const double> feature,
                           std::span<const TokenId> s);

}  // namespace bncap
