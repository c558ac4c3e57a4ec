// Copyright 2026 The bncap Authors
// SPDX-License-Identifier: Apache-2.0

#include "bncap/decode.hpp"

namespace bncap {

namespace {

DecodeParams resolved(const CaptionModel& m, DecodeParams p) {
  if (p.max_len == 0) p.max_len = m.config.max_len;
  return p;
}

}  // namespace

ScoredSentence to_natural(const Hypothesis& h, Direction d) {
  ScoredSentence s;
  s.ids = oriented(h.ids, d);
  s.step_log_probs = h.step_log_probs;
  if (d == Direction::backward && s.step_log_probs.size() > 1) {
    std::reverse(s.step_log_probs.begin(), s.step_log_probs.end() - 1);
  }
  s.direction = d;
  s.forced_end = h.forced_end;
  return s;
}

DirectionalDecoder::DirectionalDecoder(const CaptionModel& model, std::span<const double> feature,
                                       Direction direction)
    : DirectionalDecoder(model, initial_state(model, feature), direction, 0) {}

std::pair<Vector, DirectionalDecoder::State> DirectionalDecoder::advance(const State& h,
                                                                         TokenId token) const {
  StepOutput out = step_log_distribution(*model_, direction_, h, token);
  return {std::move(out.probs), std::move(out.h_next)};
}

ScoredSentence greedy_decode(const CaptionModel& m, std::span<const double> feature, Direction d) {
  return to_natural(greedy_decode(DirectionalDecoder(m, feature, d), m.config.max_len), d);
}

ScoredSentence beam_search(const CaptionModel& m, std::span<const double> feature, Direction d,
                           const DecodeParams& params) {
  return to_natural(beam_search(DirectionalDecoder(m, feature, d), resolved(m, params)), d);
}

ScoredSentence exhaustive_decode(const CaptionModel& m, std::span<const double> feature,
                                 Direction d, std::size_t max_len, ScoringMode mode) {
  return to_natural(exhaustive_decode(DirectionalDecoder(m, feature, d), max_len, mode), d);
}

ScoredSentence bidirectional_decode(const CaptionModel& m, std::span<const double> feature,
                                    const DecodeParams& params) {
  const Vector h0 = initial_state(m, feature);
  return bidirectional_decode(DirectionalDecoder::from_state(m, h0, Direction::forward),
                              DirectionalDecoder::from_state(m, h0, Direction::backward),
                              resolved(m, params));
}

}  // namespace bncap
