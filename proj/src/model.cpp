// Copyright 2026 The bncap Authors
// SPDX-License-Identifier: Apache-2.0

#include "bncap/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "bncap/error.hpp"

namespace bncap {

namespace {

constexpr double kInitRange = 0.08;

void check_feature(const CaptionModel& m, std::span<const double> feature) {
  if (feature.size() != m.config.feature_dim) {
    throw DimensionError("image feature has " + std::to_string(feature.size()) +
                         " values, model expects " + std::to_string(m.config.feature_dim));
  }
}

void check_sequence(const CaptionModel& m, std::span<const TokenId> s) {
  if (!is_valid_sequence(s, m.config.vocab_size)) {
    throw InvalidArgument("token sequence must run <start> ... <end> with ids below " +
                          std::to_string(m.config.vocab_size));
  }
  if (s.size() - 2 > m.config.max_len) {
    throw SequenceTooLong("caption has " + std::to_string(s.size() - 2) + " words, max_len is " +
                          std::to_string(m.config.max_len));
  }
}

void check_token(const CaptionModel& m, TokenId token) {
  if (token >= m.config.vocab_size) {
    throw InvalidArgument("token id " + std::to_string(token) + " outside vocabulary of size " +
                          std::to_string(m.config.vocab_size));
  }
}

Vector logits(const DecoderParams& dec, std::span<const double> h) {
  Vector out = matvec(dec.out_proj, h);
  axpy(1.0, dec.out_bias, out);
  return out;
}

// Teacher-forced run of one decoder over an oriented token sequence.
struct DirectionalPass {
  std::vector<GruStepCache> caches;
  std::vector<Vector> log_probs;
};

DirectionalPass run_teacher_forced(const CaptionModel& m, std::span<const double> h0,
                                   std::span<const TokenId> tokens, Direction d) {
  const DecoderParams& dec = m.params.decoder(d);
  std::vector<Vector> inputs;
  inputs.reserve(tokens.size() - 1);
  for (std::size_t t = 0; t + 1 < tokens.size(); ++t) {
    const auto row = m.params.embedding.row(tokens[t]);
    inputs.emplace_back(row.begin(), row.end());
  }
  DirectionalPass pass;
  pass.caches = gru_run_sequence(dec.gru, inputs, h0, Direction::forward);
  pass.log_probs.reserve(pass.caches.size());
  for (const GruStepCache& c : pass.caches) pass.log_probs.push_back(log_softmax(logits(dec, c.h_t)));
  return pass;
}

}  // namespace

void ModelConfig::validate() const {
  if (embed_dim == 0 || hidden_dim == 0 || vocab_size == 0 || max_len == 0) {
    throw InvalidArgument("model dimensions must be positive");
  }
  if (feature_dim != kFeatureDim) {
    throw InvalidArgument("feature_dim must be " + std::to_string(kFeatureDim) + ", got " +
                          std::to_string(feature_dim));
  }
}

ModelParams ModelParams::zeros(const ModelConfig& cfg) {
  ModelParams p;
  p.embedding = Matrix(cfg.vocab_size, cfg.embed_dim);
  p.feat_proj = Matrix(cfg.hidden_dim, cfg.feature_dim);
  p.feat_bias.assign(cfg.hidden_dim, 0.0);
  for (DecoderParams* dec : {&p.fwd, &p.bwd}) {
    dec->gru = GruParams(cfg.embed_dim, cfg.hidden_dim);
    dec->out_proj = Matrix(cfg.vocab_size, cfg.hidden_dim);
    dec->out_bias.assign(cfg.vocab_size, 0.0);
  }
  return p;
}

CaptionModel init_model(const ModelConfig& cfg) {
  cfg.validate();
  CaptionModel m{cfg, ModelParams::zeros(cfg)};
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uniform(-kInitRange, kInitRange);
  for_each_tensor(m.params, [&](const std::string&, std::span<double> data,
                                const std::vector<std::size_t>& shape) {
    if (shape.size() == 1) return;  // biases stay zero
    for (double& x : data) x = uniform(rng);
  });
  return m;
}

Vector initial_state(const CaptionModel& m, std::span<const double> feature) {
  check_feature(m, feature);
  Vector pre = matvec(m.params.feat_proj, feature);
  axpy(1.0, m.params.feat_bias, pre);
  return tanh_vec(pre);
}

StepOutput step_log_distribution(const CaptionModel& m, Direction d,
                                 std::span<const double> h_prev, TokenId token) {
  check_token(m, token);
  const DecoderParams& dec = m.params.decoder(d);
  GruStepCache c = gru_cell_forward(dec.gru, m.params.embedding.row(token), h_prev);
  return {log_softmax(logits(dec, c.h_t)), std::move(c.h_t)};
}

StepOutput step_distribution(const CaptionModel& m, Direction d, std::span<const double> h_prev,
                             TokenId token) {
  check_token(m, token);
  const DecoderParams& dec = m.params.decoder(d);
  GruStepCache c = gru_cell_forward(dec.gru, m.params.embedding.row(token), h_prev);
  return {softmax(logits(dec, c.h_t)), std::move(c.h_t)};
}

TokenSequence oriented(std::span<const TokenId> natural, Direction d) {
  TokenSequence out(natural.begin(), natural.end());
  if (d == Direction::backward && out.size() > 2) std::reverse(out.begin() + 1, out.end() - 1);
  return out;
}

const char* to_string(ScoringMode mode) {
  return mode == ScoringMode::mean_log ? "mean_log" : "arith_mean";
}

double sentence_score(std::span<const double> step_log_probs, ScoringMode mode) {
  if (step_log_probs.empty()) return mode == ScoringMode::mean_log ? 0.0 : 1.0;
  double total = 0.0;
  for (double lp : step_log_probs) total += mode == ScoringMode::mean_log ? lp : std::exp(lp);
  return total / static_cast<double>(step_log_probs.size());
}

double ScoredSentence::log_prob() const {
  double total = 0.0;
  for (double lp : step_log_probs) total += lp;
  return total;
}

double ScoredSentence::mean_log_prob() const {
  return sentence_score(step_log_probs, ScoringMode::mean_log);
}

double ScoredSentence::mean_prob() const {
  return sentence_score(step_log_probs, ScoringMode::arith_mean);
}

double ScoredSentence::score(ScoringMode mode) const {
  return sentence_score(step_log_probs, mode);
}

ScoredSentence score_sentence(const CaptionModel& m, std::span<const double> feature,
                              std::span<const TokenId> s, Direction d) {
  check_sequence(m, s);
  const Vector h0 = initial_state(m, feature);
  const TokenSequence tokens = oriented(s, d);
  const DirectionalPass pass = run_teacher_forced(m, h0, tokens, d);
  ScoredSentence out;
  out.ids.assign(s.begin(), s.end());
  out.direction = d;
  for (std::size_t t = 0; t < pass.log_probs.size(); ++t) {
    out.step_log_probs.push_back(pass.log_probs[t][tokens[t + 1]]);
  }
  // Report per-step scores in natural order.
  if (d == Direction::backward && out.step_log_probs.size() > 1) {
    std::reverse(out.step_log_probs.begin(), out.step_log_probs.end() - 1);
  }
  return out;
}

double sentence_log_prob(const CaptionModel& m, std::span<const double> feature,
                         std::span<const TokenId> s, Direction d) {
  return score_sentence(m, feature, s, d).log_prob();
}

const ScoredSentence& select_bidirectional(const ScoredSentence& fwd, const ScoredSentence& bwd,
                                           ScoringMode mode) {
  return bwd.score(mode) > fwd.score(mode) ? bwd : fwd;
}

double caption_loss(const CaptionModel& m, std::span<const double> feature,
                    std::span<const TokenId> s) {
  return -sentence_log_prob(m, feature, s, Direction::forward) -
         sentence_log_prob(m, feature, s, Direction::backward);
}

SequenceStats accumulate_model_backward(const CaptionModel& m, std::span<const double> feature,
                                        std::span<const TokenId> s, ModelParams& grad) {
  check_sequence(m, s);
  const Vector h0 = initial_state(m, feature);
  const std::size_t hidden = m.config.hidden_dim;
  Vector d_h0(hidden, 0.0);
  SequenceStats stats;

  for (const Direction d : {Direction::forward, Direction::backward}) {
    const TokenSequence tokens = oriented(s, d);
    const DirectionalPass pass = run_teacher_forced(m, h0, tokens, d);
    const DecoderParams& dec = m.params.decoder(d);
    DecoderParams& g = grad.decoder(d);
    Vector d_x, d_h_prev;
    Vector d_h_next(hidden, 0.0);
    for (std::size_t t = pass.caches.size(); t-- > 0;) {
      const TokenId target = tokens[t + 1];
      const Vector& lp = pass.log_probs[t];
      stats.loss -= lp[target];
      stats.tokens += 1;
      if (argmax(lp) == target) stats.correct += 1;

      Vector d_logits(lp.size());
      for (std::size_t k = 0; k < lp.size(); ++k) d_logits[k] = std::exp(lp[k]);
      d_logits[target] -= 1.0;

      const GruStepCache& c = pass.caches[t];
      add_outer(g.out_proj, d_logits, c.h_t);
      axpy(1.0, d_logits, g.out_bias);
      Vector d_h = d_h_next;
      add_matvec_transposed(dec.out_proj, d_logits, d_h);

      accumulate_gru_cell_backward(dec.gru, c, d_h, g.gru, d_x, d_h_prev);
      axpy(1.0, d_x, grad.embedding.row(tokens[t]));
      d_h_next = d_h_prev;
    }
    axpy(1.0, d_h_next, d_h0);
  }

  Vector d_pre(hidden);
  for (std::size_t i = 0; i < hidden; ++i) d_pre[i] = d_h0[i] * (1.0 - h0[i] * h0[i]);
  add_outer(grad.feat_proj, d_pre, feature);
  axpy(1.0, d_pre, grad.feat_bias);
  return stats;
}

ModelParams model_backward(const CaptionModel& m, std::span<const double> feature,
                           std::span<const TokenId> s) {
  ModelParams grad = ModelParams::zeros(m.config);
  accumulate_model_backward(m, feature, s, grad);
  return grad;
}

}  // namespace bncap
