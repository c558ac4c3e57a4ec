// Copyright 2026 The bncap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bncap {

using Words = std::vector<std::string>;

/// One generated caption and its human references, as words.
struct EvalPair {
  Words candidate;
  std::vector<Words> references;
};

struct ClippedPrecision {
  double value = 0.0;
  std::size_t clipped = 0;  // sum of clipped n-gram counts
  std::size_t total = 0;    // sum of candidate n-gram counts
  /// Set when no candidate has n tokens; value is then 0.
  bool degenerate = false;
};

/// Corpus-level modified n-gram precision. Each candidate n-gram count is
/// capped at its largest count in any single reference.
ClippedPrecision clipped_precision_n(std::span<const EvalPair> pairs, std::size_t n);

/// Cumulative BLEU-n on a 0..100 scale: geometric mean of p_1..p_n with
/// add-one smoothing of empty orders >= 2, times the brevity penalty
/// (closest reference length) when enabled.
double bleu_cumulative(std::span<const EvalPair> pairs, std::size_t n,
                       bool use_brevity_penalty = true);

struct Alignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
};

/// Exact-match unigram alignment with the most matches, and among those the
/// fewest chunks.
Alignment align_unigrams(const Words& candidate, const Words& reference);

/// METEOR of one candidate against its best reference, in [0, 1].
double meteor_sentence(const Words& candidate, std::span<const Words> references);

/// Mean sentence METEOR on a 0..100 scale. Exact matches only: no stemming,
/// no synonyms.
double meteor_simplified(std::span<const EvalPair> pairs);

struct MetricsReport {
  double bleu_1 = 0.0;
  double bleu_2 = 0.0;
  double bleu_3 = 0.0;
  double bleu_4 = 0.0;
  double meteor = 0.0;
  std::size_t n_sentences = 0;
};

MetricsReport evaluate_corpus(std::span<const EvalPair> pairs);

/// Plain-text table: Search | BLEU-1 | BLEU-2 | BLEU-3 | BLEU-4 | METEOR.
std::string render_table(const MetricsReport& r, std::string_view search_label);
/// "BLEU1=..;BLEU2=..;BLEU3=..;BLEU4=..;METEOR=..;N=.." at two decimals.
std::string render_machine_line(const MetricsReport& r);
MetricsReport parse_machine_line(std::string_view line);

}  // namespace bncap
