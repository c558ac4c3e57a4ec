// Copyright 2026 The bncap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bncap/error.hpp"
#include "bncap/model.hpp"
#include "bncap/numerics.hpp"
#include "bncap/text.hpp"

namespace bncap {

/// Left-to-right next-token model. `advance(state, token)` consumes `token`
/// and returns log-probabilities over the vocabulary for the token after it,
/// together with the state that produced them.
template <class M>
concept StepModel = requires(const M& m, const typename M::State& s, TokenId t) {
  { m.vocab_size() } -> std::convertible_to<std::size_t>;
  { m.start_state() } -> std::convertible_to<typename M::State>;
  { m.advance(s, t) } -> std::same_as<std::pair<Vector, typename M::State>>;
};

struct DecodeParams {
  std::size_t beam_width = 3;
  /// Maximum number of words before <end> is forced. The CaptionModel
  /// overloads read 0 as the model's own max_len.
  std::size_t max_len = 0;
  ScoringMode scoring = ScoringMode::mean_log;
};

/// Partial or finished output of a decoder, in the decoder's own token order.
struct Hypothesis {
  TokenSequence ids;
  std::vector<double> step_log_probs;
  double log_prob = 0.0;
  bool complete = false;
  bool forced_end = false;

  std::size_t words() const { return ids.size() - 1 - (complete ? 1 : 0); }

  double score(ScoringMode mode) const { return sentence_score(step_log_probs, mode); }
};

/// Upper bound on sentences exhaustive_decode will enumerate.
inline constexpr double kExhaustiveLimit = 1e6;

namespace detail {

/// Ranks by score, larger first, then by the lexicographically smaller ids.
inline bool better(double score_a, const TokenSequence& a, double score_b, const TokenSequence& b) {
  if (score_a != score_b) return score_a > score_b;
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

inline Hypothesis extend(const Hypothesis& h, TokenId token, double log_p, bool forced) {
  Hypothesis out;
  out.ids = h.ids;
  out.ids.push_back(token);
  out.step_log_probs = h.step_log_probs;
  out.step_log_probs.push_back(log_p);
  out.log_prob = h.log_prob + log_p;
  out.complete = token == kEndId;
  out.forced_end = forced && out.complete;
  return out;
}

inline const Hypothesis& best_of(const std::vector<Hypothesis>& done, ScoringMode mode) {
  const Hypothesis* best = &done.front();
  for (const Hypothesis& h : done) {
    if (better(h.score(mode), h.ids, best->score(mode), best->ids)) best = &h;
  }
  return *best;
}

inline void check_vocab(std::size_t vocab_size) {
  if (vocab_size <= kEndId) throw InvalidArgument("decoder vocabulary lacks an <end> token");
}

}  // namespace detail

/// Argmax decoding: takes the most probable non-pad token at every step
/// (ties to the lowest id) until <end>, forcing <end> after `max_len` words.
template <StepModel M>
Hypothesis greedy_decode(const M& model, std::size_t max_len) {
  detail::check_vocab(model.vocab_size());
  Hypothesis h;
  h.ids = {kStartId};
  typename M::State state = model.start_state();
  while (!h.complete) {
    auto [log_p, next] = model.advance(state, h.ids.back());
    const bool forced = h.words() == max_len;
    TokenId token = kEndId;
    if (!forced) {
      token = kPadId + 1;
      for (TokenId t = token + 1; t < log_p.size(); ++t) {
        if (log_p[t] > log_p[token]) token = t;
      }
    }
    h = detail::extend(h, token, log_p[token], forced);
    state = std::move(next);
  }
  return h;
}

/// Beam search of width `params.beam_width`. Each step expands every live
/// hypothesis over the non-pad vocabulary and keeps the top k candidates by
/// cumulative log-probability; candidates ending in <end> leave the beam and
/// the best of them under `params.scoring` is returned.
template <StepModel M>
Hypothesis beam_search(const M& model, const DecodeParams& params) {
  detail::check_vocab(model.vocab_size());
  if (params.beam_width < 1) throw InvalidArgument("beam width must be at least 1");
  using State = typename M::State;
  struct Entry {
    Hypothesis hyp;
    std::shared_ptr<const State> state;
  };

  std::vector<Entry> live;
  live.push_back({Hypothesis{{kStartId}, {}, 0.0, false, false},
                  std::make_shared<const State>(model.start_state())});
  std::vector<Hypothesis> done;

  while (!live.empty()) {
    std::vector<Entry> candidates;
    for (const Entry& e : live) {
      auto [log_p, next] = model.advance(*e.state, e.hyp.ids.back());
      auto next_state = std::make_shared<const State>(std::move(next));
      if (e.hyp.words() == params.max_len) {
        candidates.push_back({detail::extend(e.hyp, kEndId, log_p[kEndId], true), next_state});
        continue;
      }
      for (TokenId t = kPadId + 1; t < log_p.size(); ++t) {
        candidates.push_back({detail::extend(e.hyp, t, log_p[t], false), next_state});
      }
    }
    const std::size_t keep = std::min(params.beam_width, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                      candidates.end(), [](const Entry& a, const Entry& b) {
                        return detail::better(a.hyp.log_prob, a.hyp.ids, b.hyp.log_prob, b.hyp.ids);
                      });
    candidates.resize(keep);
    live.clear();
    for (Entry& c : candidates) {
      if (c.hyp.complete) {
        done.push_back(std::move(c.hyp));
      } else {
        live.push_back(std::move(c));
      }
    }
  }
  return detail::best_of(done, params.scoring);
}

/// Number of complete sentences with at most `max_len` words.
inline double exhaustive_space(std::size_t vocab_size, std::size_t max_len) {
  const double words = static_cast<double>(vocab_size) - 2.0;  // every id except pad and end
  double total = 0.0;
  double layer = 1.0;
  for (std::size_t t = 0; t <= max_len; ++t) {
    total += layer;
    layer *= words;
  }
  return total;
}

/// Scores every sentence <start> w_1..w_T <end> with T <= max_len and returns
/// the best under `mode`. Throws InvalidArgument past kExhaustiveLimit.
template <StepModel M>
Hypothesis exhaustive_decode(const M& model, std::size_t max_len,
                             ScoringMode mode = ScoringMode::mean_log) {
  detail::check_vocab(model.vocab_size());
  const double space = exhaustive_space(model.vocab_size(), max_len);
  if (space > kExhaustiveLimit) {
    throw InvalidArgument("exhaustive search over " + std::to_string(space) +
                          " sentences exceeds the bound of 1e6");
  }
  std::vector<Hypothesis> done;
  std::function<void(const Hypothesis&, const typename M::State&)> visit =
      [&](const Hypothesis& h, const typename M::State& state) {
        auto [log_p, next] = model.advance(state, h.ids.back());
        const bool forced = h.words() == max_len;
        done.push_back(detail::extend(h, kEndId, log_p[kEndId], forced));
        if (forced) return;
        for (TokenId t = kPadId + 1; t < log_p.size(); ++t) {
          if (t != kEndId) visit(detail::extend(h, t, log_p[t], false), next);
        }
      };
  visit(Hypothesis{{kStartId}, {}, 0.0, false, false}, model.start_state());
  return detail::best_of(done, mode);
}

/// Converts a decoder-order hypothesis into a natural-order sentence.
ScoredSentence to_natural(const Hypothesis& h, Direction d);

/// Runs beam search with both directional models and keeps the better
/// sentence; the backward result is reversed into natural order first.
template <StepModel F, StepModel B>
ScoredSentence bidirectional_decode(const F& forward, const B& backward,
                                    const DecodeParams& params) {
  const ScoredSentence fwd = to_natural(beam_search(forward, params), Direction::forward);
  const ScoredSentence bwd = to_natural(beam_search(backward, params), Direction::backward);
  return select_bidirectional(fwd, bwd, params.scoring);
}

/// StepModel view of one direction of a CaptionModel for a fixed image.
class DirectionalDecoder {
 public:
  using State = Vector;

  DirectionalDecoder(const CaptionModel& model, std::span<const double> feature,
                     Direction direction);
  /// Starts from a precomputed initial_state instead of a feature vector.
  static DirectionalDecoder from_state(const CaptionModel& model, Vector h0, Direction direction) {
    return DirectionalDecoder(model, std::move(h0), direction, 0);
  }

  std::size_t vocab_size() const { return model_->config.vocab_size; }
  State start_state() const { return h0_; }
  std::pair<Vector, State> advance(const State& h, TokenId token) const;

 private:
  DirectionalDecoder(const CaptionModel& model, Vector h0, Direction direction, int)
      : model_(&model), h0_(std::move(h0)), direction_(direction) {}

  const CaptionModel* model_;
  Vector h0_;
  Direction direction_;
};

// CaptionModel conveniences. Each returns the sentence in natural order.
ScoredSentence greedy_decode(const CaptionModel& m, std::span<const double> feature, Direction d);
ScoredSentence beam_search(const CaptionModel& m, std::span<const double> feature, Direction d,
                           const DecodeParams& params);
ScoredSentence exhaustive_decode(const CaptionModel& m, std::span<const double> feature,
                                 Direction d, std::size_t max_len,
                                 ScoringMode mode = ScoringMode::mean_log);
ScoredSentence bidirectional_decode(const CaptionModel& m, std::span<const double> feature,
                                    const DecodeParams& params);

}  // namespace bncap
