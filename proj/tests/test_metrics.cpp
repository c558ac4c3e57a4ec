// Copyright 2026 The bncap Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "bncap/error.hpp"
#include "bncap/metrics.hpp"

using namespace bncap;

namespace {

Words w(std::initializer_list<const char*> xs) { return Words(xs.begin(), xs.end()); }

std::vector<EvalPair> random_corpus(std::mt19937_64& rng, std::size_t n) {
  const Words alphabet = w({"ক", "খ", "গ", "ঘ", "ঙ", "চ"});
  auto sentence = [&] {
    Words s(1 + rng() % 7);
    for (auto& x : s) x = alphabet[rng() % alphabet.size()];
    return s;
  };
  std::vector<EvalPair> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    EvalPair p{sentence(), {}};
    for (std::size_t r = 0; r < 1 + rng() % 4; ++r) p.references.push_back(sentence());
    pairs.push_back(std::move(p));
  }
  return pairs;
}

}  // namespace

TEST_CASE("clipped precision") {
  SUBCASE("repeated unigram is clipped by the reference count") {
    const std::vector<EvalPair> pairs{{w({"a", "a", "a", "a", "a", "a", "a"}),
                                       {w({"a", "b", "c", "d", "a", "e"})}}};
    const ClippedPrecision p = clipped_precision_n(pairs, 1);
    CHECK(p.clipped == 2);
    CHECK(p.total == 7);
    CHECK(p.value == doctest::Approx(2.0 / 7).epsilon(1e-15));
  }
  SUBCASE("candidate equal to its reference") {
    const std::vector<EvalPair> pairs{{w({"a", "b", "c"}), {w({"a", "b", "c"})}}};
    for (std::size_t n = 1; n <= 3; ++n) CHECK(clipped_precision_n(pairs, n).value == 1.0);
    const ClippedPrecision four = clipped_precision_n(pairs, 4);
    CHECK(four.degenerate);
    CHECK(four.value == 0.0);
  }
  SUBCASE("disjoint vocabularies") {
    const std::vector<EvalPair> pairs{{w({"a", "b"}), {w({"c", "d"})}}};
    CHECK(clipped_precision_n(pairs, 1).value == 0.0);
  }
  SUBCASE("clip uses the most generous single reference") {
    const std::vector<EvalPair> pairs{{w({"a", "a", "a"}), {w({"a", "b"}), w({"a", "a", "c"})}}};
    CHECK(clipped_precision_n(pairs, 1).value == doctest::Approx(2.0 / 3));
  }
  SUBCASE("counts are pooled over the corpus") {
    const std::vector<EvalPair> pairs{{w({"a", "b"}), {w({"a", "b"})}},
                                      {w({"x", "y", "z", "q"}), {w({"x"})}}};
    CHECK(clipped_precision_n(pairs, 1).value == doctest::Approx(3.0 / 6));
  }
  SUBCASE("n of zero is rejected") {
    const std::vector<EvalPair> pairs{{w({"a"}), {w({"a"})}}};
    CHECK_THROWS_AS(clipped_precision_n(pairs, 0), InvalidArgument);
  }
}

TEST_CASE("cumulative BLEU") {
  SUBCASE("brevity penalty on a half-length candidate") {
    const std::vector<EvalPair> pairs{{w({"a", "b"}), {w({"a", "b", "c", "d"})}}};
    CHECK(bleu_cumulative(pairs, 1) == doctest::Approx(100.0 * std::exp(-1.0)).epsilon(1e-13));
    CHECK(std::abs(bleu_cumulative(pairs, 1) - 36.79) < 0.01);
    CHECK(bleu_cumulative(pairs, 1, false) == doctest::Approx(100.0));
  }
  SUBCASE("perfect candidates score 100 at every order") {
    const std::vector<EvalPair> pairs{{w({"a", "b", "c", "d"}), {w({"a", "b", "c", "d"}), w({"x"})}},
                                      {w({"e", "f", "g", "h", "i"}), {w({"e", "f", "g", "h", "i"})}}};
    for (std::size_t n = 1; n <= 4; ++n) CHECK(bleu_cumulative(pairs, n) == doctest::Approx(100.0));
  }
  SUBCASE("without the penalty it is the geometric mean of precisions") {
    const std::vector<EvalPair> pairs{{w({"a", "b", "c", "x"}), {w({"a", "b", "c", "d", "e"})}}};
    // p1 = 3/4, p2 = 2/3
    CHECK(bleu_cumulative(pairs, 2, false) ==
          doctest::Approx(100.0 * std::sqrt(0.75 * (2.0 / 3))).epsilon(1e-13));
  }
  SUBCASE("zero higher-order matches are add-one smoothed") {
    const std::vector<EvalPair> pairs{{w({"a", "b", "c"}), {w({"c", "b", "a"})}}};
    // p1 = 3/3, p2 = (0+1)/(2+1)
    CHECK(bleu_cumulative(pairs, 2) == doctest::Approx(100.0 * std::sqrt(1.0 / 3)).epsilon(1e-13));
  }
  SUBCASE("closest reference length, ties to the shorter") {
    const std::vector<EvalPair> pairs{{w({"a", "b", "c"}), {w({"a", "b"}), w({"a", "b", "c", "d"})}}};
    // r = 2 (tie between 2 and 4) so no penalty.
    CHECK(bleu_cumulative(pairs, 1) == doctest::Approx(100.0));
  }
  SUBCASE("bad inputs") {
    CHECK_THROWS_AS(bleu_cumulative(std::vector<EvalPair>{}, 1), InvalidArgument);
    const std::vector<EvalPair> pairs{{w({"a"}), {w({"a"})}}};
    CHECK_THROWS_AS(bleu_cumulative(pairs, 5), InvalidArgument);
    CHECK_THROWS_AS(bleu_cumulative(pairs, 0), InvalidArgument);
  }
}

TEST_CASE("unigram alignment") {
  CHECK(align_unigrams(w({"a", "b", "c", "d"}), w({"a", "b", "c", "d"})).chunks == 1);
  const Alignment swapped = align_unigrams(w({"a", "b"}), w({"b", "a"}));
  CHECK(swapped.matches == 2);
  CHECK(swapped.chunks == 2);
  // "the" can align to either occurrence; the contiguous choice wins.
  const Alignment a = align_unigrams(w({"x", "the", "y"}), w({"the", "q", "x", "the", "y"}));
  CHECK(a.matches == 3);
  CHECK(a.chunks == 1);
  CHECK(align_unigrams(w({"a"}), w({"b"})).matches == 0);
}

TEST_CASE("simplified METEOR") {
  SUBCASE("identical four-word sentences") {
    const std::vector<EvalPair> pairs{{w({"a", "b", "c", "d"}), {w({"a", "b", "c", "d"})}}};
    CHECK(meteor_simplified(pairs) == doctest::Approx(99.21875).epsilon(1e-13));
  }
  SUBCASE("swapped bigram") {
    const std::vector<EvalPair> pairs{{w({"a", "b"}), {w({"b", "a"})}}};
    CHECK(meteor_simplified(pairs) == doctest::Approx(50.0).epsilon(1e-13));
  }
  SUBCASE("no overlap") {
    const std::vector<EvalPair> pairs{{w({"a", "b"}), {w({"c"})}}};
    CHECK(meteor_simplified(pairs) == 0.0);
  }
  SUBCASE("recall-weighted harmonic mean") {
    // m = 2, P = 1, R = 1/2, one chunk.
    const Words cand = w({"a", "b"});
    const std::vector<Words> refs{w({"a", "b", "c", "d"})};
    const double f = 10 * 1.0 * 0.5 / (0.5 + 9 * 1.0);
    CHECK(meteor_sentence(cand, refs) == doctest::Approx(f * (1 - 0.5 / 8)).epsilon(1e-13));
  }
  SUBCASE("best reference is chosen") {
    const std::vector<Words> refs{w({"x"}), w({"a", "b", "c", "d"})};
    CHECK(meteor_sentence(w({"a", "b", "c", "d"}), refs) == doctest::Approx(0.9921875));
  }
  SUBCASE("empty corpus is rejected") {
    CHECK_THROWS_AS(meteor_simplified(std::vector<EvalPair>{}), InvalidArgument);
  }
}

TEST_CASE("self-referencing corpus report") {
  const std::vector<EvalPair> pairs{{w({"আমি", "ভাত", "খাই", "।"}), {w({"আমি", "ভাত", "খাই", "।"})}},
                                    {w({"সে", "বাড়ি", "যায়", "।"}), {w({"সে", "বাড়ি", "যায়", "।"})}}};
  const MetricsReport r = evaluate_corpus(pairs);
  CHECK(r.bleu_1 == doctest::Approx(100.0));
  CHECK(r.bleu_2 == doctest::Approx(100.0));
  CHECK(r.bleu_3 == doctest::Approx(100.0));
  CHECK(r.bleu_4 == doctest::Approx(100.0));
  CHECK(r.meteor == doctest::Approx(99.21875));
  CHECK(r.n_sentences == 2);
}

TEST_CASE("hand-scored mini corpus") {
  // cand 1: "a b c d" vs "a b x d": p1 3/4, p2 1/3, m=3 chunks=2
  // cand 2: "e f" vs "e f": p1 2/2, p2 1/1, m=2 chunks=1
  const std::vector<EvalPair> pairs{{w({"a", "b", "c", "d"}), {w({"a", "b", "x", "d"})}},
                                    {w({"e", "f"}), {w({"e", "f"})}}};
  const MetricsReport r = evaluate_corpus(pairs);
  CHECK(r.bleu_1 == doctest::Approx(100.0 * 5 / 6).epsilon(1e-13));
  CHECK(r.bleu_2 == doctest::Approx(100.0 * std::sqrt(5.0 / 6 * 2.0 / 4)).epsilon(1e-13));
  const double m1 = 0.75 * (1 - 0.5 * std::pow(2.0 / 3, 3));
  const double m2 = 1.0 * (1 - 0.5 * std::pow(1.0 / 2, 3));
  CHECK(r.meteor == doctest::Approx(100.0 * (m1 + m2) / 2).epsilon(1e-13));
}

TEST_CASE("metric properties on random corpora") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<EvalPair> pairs = random_corpus(rng, 1 + rng() % 6);
    const MetricsReport base = evaluate_corpus(pairs);
    for (double v : {base.bleu_1, base.bleu_2, base.bleu_3, base.bleu_4, base.meteor}) {
      CHECK(v >= 0.0);
      CHECK(v <= 100.0 + 1e-9);
    }
    for (std::size_t n = 1; n <= 4; ++n) {
      const double p = clipped_precision_n(pairs, n).value;
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
    }

    std::vector<EvalPair> shuffled = pairs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const MetricsReport again = evaluate_corpus(shuffled);
    CHECK(again.bleu_4 == doctest::Approx(base.bleu_4).epsilon(1e-12));
    CHECK(again.meteor == doctest::Approx(base.meteor).epsilon(1e-12));

    std::vector<EvalPair> more = pairs;
    more[0].references.push_back(random_corpus(rng, 1)[0].candidate);
    for (std::size_t n = 1; n <= 4; ++n) {
      CHECK(clipped_precision_n(more, n).value >= clipped_precision_n(pairs, n).value);
    }

    bool any_match = false;
    for (const EvalPair& p : pairs) {
      for (const Words& r : p.references) any_match = any_match || align_unigrams(p.candidate, r).matches > 0;
    }
    CHECK((base.meteor > 0.0) == any_match);
  }
}

TEST_CASE("report rendering") {
  const MetricsReport r{42.58, 27.95, 23.66, 16.41, 28.70, 1000};
  const std::string table = render_table(r, "BEAM-3");
  CHECK(table.find("BLEU-1") < table.find("BLEU-4"));
  CHECK(table.find("BLEU-4") < table.find("METEOR"));
  CHECK(table.find("42.58") != std::string::npos);
  CHECK(render_machine_line(r) == "BLEU1=42.58;BLEU2=27.95;BLEU3=23.66;BLEU4=16.41;METEOR=28.70;N=1000");

  const MetricsReport back = parse_machine_line(render_machine_line(r));
  CHECK(back.bleu_1 == 42.58);
  CHECK(back.meteor == 28.70);
  CHECK(back.n_sentences == 1000);
  CHECK_THROWS(parse_machine_line("BLEU1=1;BLEU2=2"));
}

TEST_CASE("machine line survives a round trip at two decimals") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int i = 0; i < 200; ++i) {
    const MetricsReport r{u(rng), u(rng), u(rng), u(rng), u(rng), rng() % 5000};
    const std::string line = render_machine_line(r);
    CHECK(render_machine_line(parse_machine_line(line)) == line);
  }
}
