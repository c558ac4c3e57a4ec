// Copyright 2026 The bncap Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "bncap/decode.hpp"
#include "bncap/error.hpp"
#include "support.hpp"

using namespace bncap;
using namespace bncap::testing;

namespace {

static_assert(StepModel<TableModel>);
static_assert(StepModel<DirectionalDecoder>);

double probability(const Hypothesis& h) { return std::exp(h.log_prob); }

// Chain model: <start> -> 4 -> 5 -> <end>, each step with probability 1.
TableModel certain_chain() {
  TableModel t(7, {0, 0, 1, 0, 0, 0, 0});
  t.set({kStartId}, {0, 0, 0, 0, 1, 0, 0});
  t.set({kStartId, 4}, {0, 0, 0, 0, 0, 1, 0});
  return t;
}

std::size_t power(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  while (exp-- > 0) r *= base;
  return r;
}

}  // namespace

TEST_CASE("hand-built table where beam beats greedy") {
  const TableModel t = beam_trap_table();
  const Hypothesis g = greedy_decode(t, 1);
  CHECK(g.ids == TokenSequence{kStartId, kA, kEndId});
  CHECK(probability(g) == doctest::Approx(0.33).epsilon(1e-12));

  const Hypothesis b = beam_search(t, DecodeParams{2, 1, ScoringMode::mean_log});
  CHECK(b.ids == TokenSequence{kStartId, kB, kEndId});
  CHECK(probability(b) == doctest::Approx(0.36).epsilon(1e-12));

  const Hypothesis e = exhaustive_decode(t, 1);
  CHECK(e.ids == b.ids);
  CHECK(e.log_prob == b.log_prob);
}

TEST_CASE("deterministic chains decode to the chain") {
  const TableModel t = certain_chain();
  const TokenSequence want{kStartId, 4, 5, kEndId};
  CHECK(greedy_decode(t, 5).ids == want);
  CHECK(beam_search(t, DecodeParams{3, 5, ScoringMode::mean_log}).ids == want);
  CHECK(exhaustive_decode(t, 3).ids == want);
  CHECK(greedy_decode(t, 5).log_prob == 0.0);
  CHECK_FALSE(greedy_decode(t, 5).forced_end);
}

TEST_CASE("greedy on a flat distribution repeats the lowest non-pad id") {
  const TableModel flat(6, Vector(6, 1.0 / 6));
  const Hypothesis h = greedy_decode(flat, 4);
  CHECK(h.ids == TokenSequence{kStartId, 1, 1, 1, 1, kEndId});
  CHECK(h.forced_end);
  CHECK(h.complete);
  CHECK(h.words() == 4);
  CHECK(h.log_prob == doctest::Approx(5 * std::log(1.0 / 6)));
}

TEST_CASE("the zero caption model greedily emits id 1 until forced to stop") {
  ModelConfig cfg = tiny_config(7, 3);
  const CaptionModel z{cfg, ModelParams::zeros(cfg)};
  const ScoredSentence s = greedy_decode(z, Vector(2048, 0.0), Direction::forward);
  CHECK(s.ids == TokenSequence{kStartId, 1, 1, 1, kEndId});
  CHECK(s.forced_end);
}

TEST_CASE("bad decode parameters") {
  const TableModel t = beam_trap_table();
  CHECK_THROWS_AS(beam_search(t, DecodeParams{0, 1, ScoringMode::mean_log}), InvalidArgument);
  const TableModel tiny(2, {0.5, 0.5});
  CHECK_THROWS_AS(greedy_decode(tiny, 1), InvalidArgument);
}

TEST_CASE("exhaustive search refuses oversized spaces") {
  CHECK(exhaustive_space(5, 0) == 1);
  CHECK(exhaustive_space(5, 2) == 1 + 3 + 9);
  const TableModel flat(40, Vector(40, 1.0 / 40));
  CHECK(exhaustive_space(40, 4) > kExhaustiveLimit);
  try {
    exhaustive_decode(flat, 4);
    FAIL("expected InvalidArgument");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("1e6") != std::string::npos);
  }
}

TEST_CASE("beam never pruning matches exhaustive on 20 random tiny models") {
  std::mt19937_64 rng(314);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t vocab = 4 + trial % 2;        // 4 or 5 ids
    const std::size_t max_len = 1 + trial % 4;      // 1..4 words
    CaptionModel m = init_model(tiny_config(vocab, max_len));
    randomize(m, rng(), 2.0);
    const Vector f = random_feature(rng(), 0.05);
    for (const Direction d : {Direction::forward, Direction::backward}) {
      const DirectionalDecoder dec(m, f, d);
      for (const ScoringMode mode : {ScoringMode::mean_log, ScoringMode::arith_mean}) {
        const Hypothesis ex = exhaustive_decode(dec, max_len, mode);
        const Hypothesis wide = beam_search(dec, DecodeParams{power(vocab, max_len), max_len, mode});
        CHECK(wide.ids == ex.ids);
        CHECK(wide.score(mode) == ex.score(mode));
        for (std::size_t k = 1; k <= 3; ++k) {
          CHECK(beam_search(dec, DecodeParams{k, max_len, mode}).score(mode) <= ex.score(mode));
        }
      }
    }
  }
}

TEST_CASE("width-1 beam equals greedy on 50 random models") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const std::size_t vocab = 5 + seed % 6;
    CaptionModel m = init_model(tiny_config(vocab, 6));
    randomize(m, seed, 1.5);
    const Vector f = random_feature(seed + 1000, 0.05);
    for (const Direction d : {Direction::forward, Direction::backward}) {
      const ScoredSentence g = greedy_decode(m, f, d);
      const ScoredSentence b = beam_search(m, f, d, DecodeParams{1, 0, ScoringMode::mean_log});
      CHECK(g.ids == b.ids);
      CHECK(g.step_log_probs == b.step_log_probs);
      CHECK(is_valid_sequence(g.ids, vocab));
      CHECK(g.ids.size() <= 6 + 2);
    }
  }
}

TEST_CASE("returned sentences satisfy the sequence invariants") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CaptionModel m = init_model(tiny_config(8, 5));
    randomize(m, seed, 1.0);
    const Vector f = random_feature(seed);
    for (std::size_t k : {1, 2, 5}) {
      const ScoredSentence s = bidirectional_decode(m, f, DecodeParams{k, 0, ScoringMode::mean_log});
      CHECK(is_valid_sequence(s.ids, 8));
      CHECK(s.ids.size() <= 5 + 2);
      CHECK(s.step_log_probs.size() == s.ids.size() - 1);
      CHECK(s.mean_log_prob() <= 0.0);
    }
  }
}

TEST_CASE("decoded scores agree with teacher-forced scoring") {
  CaptionModel m = init_model(tiny_config(9, 6));
  randomize(m, 77, 1.0);
  const Vector f = random_feature(78);
  for (const Direction d : {Direction::forward, Direction::backward}) {
    const ScoredSentence s = beam_search(m, f, d, DecodeParams{3, 0, ScoringMode::mean_log});
    if (s.forced_end) continue;
    const ScoredSentence again = score_sentence(m, f, s.ids, d);
    REQUIRE(again.step_log_probs.size() == s.step_log_probs.size());
    for (std::size_t i = 0; i < s.step_log_probs.size(); ++i) {
      CHECK(again.step_log_probs[i] == doctest::Approx(s.step_log_probs[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("backward hypotheses are reversed into natural order") {
  Hypothesis h{{kStartId, 4, 5, 6, kEndId}, {-0.1, -0.2, -0.3, -0.4}, -1.0, true, false};
  const ScoredSentence f = to_natural(h, Direction::forward);
  CHECK(f.ids == h.ids);
  CHECK(f.step_log_probs == h.step_log_probs);
  const ScoredSentence b = to_natural(h, Direction::backward);
  CHECK(b.ids == TokenSequence{kStartId, 6, 5, 4, kEndId});
  CHECK(b.step_log_probs == std::vector<double>{-0.3, -0.2, -0.1, -0.4});
  CHECK(b.direction == Direction::backward);
}

TEST_CASE("bidirectional selection on constructed tables") {
  SUBCASE("identical decoders return the forward sentence") {
    const TableModel t = beam_trap_table();
    const ScoredSentence s = bidirectional_decode(t, t, DecodeParams{2, 1, ScoringMode::mean_log});
    CHECK(s.direction == Direction::forward);
    CHECK(s.ids == TokenSequence{kStartId, kB, kEndId});
  }
  SUBCASE("a more confident backward decoder wins") {
    const TableModel fwd = beam_trap_table();
    // Backward reads A then B; certain at every step.
    TableModel bwd(6, {0, 0, 1, 0, 0, 0});
    bwd.set({kStartId}, {0, 0, 0, 0, 1, 0});
    bwd.set({kStartId, kA}, {0, 0, 0, 0, 0, 1});
    const ScoredSentence s = bidirectional_decode(fwd, bwd, DecodeParams{2, 2, ScoringMode::mean_log});
    CHECK(s.direction == Direction::backward);
    CHECK(s.ids == TokenSequence{kStartId, kB, kA, kEndId});
    CHECK(s.mean_log_prob() == 0.0);
  }
  SUBCASE("cloned caption-model decoders return forward") {
    CaptionModel m = init_model(tiny_config(8, 4));
    randomize(m, 5, 1.0);
    m.params.bwd = m.params.fwd;
    for (std::uint64_t i = 0; i < 5; ++i) {
      const ScoredSentence s =
          bidirectional_decode(m, random_feature(i), DecodeParams{3, 0, ScoringMode::mean_log});
      CHECK(s.direction == Direction::forward);
    }
  }
  SUBCASE("the winning direction carries the larger score") {
    CaptionModel m = init_model(tiny_config(8, 4));
    randomize(m, 6, 1.0);
    const Vector f = random_feature(6);
    const DecodeParams p{3, 0, ScoringMode::mean_log};
    const ScoredSentence fw = beam_search(m, f, Direction::forward, p);
    const ScoredSentence bw = beam_search(m, f, Direction::backward, p);
    const ScoredSentence s = bidirectional_decode(m, f, p);
    const ScoredSentence& winner = s.direction == Direction::forward ? fw : bw;
    const ScoredSentence& loser = s.direction == Direction::forward ? bw : fw;
    CHECK(s.ids == winner.ids);
    CHECK(s.mean_log_prob() >= loser.mean_log_prob());
  }
}
