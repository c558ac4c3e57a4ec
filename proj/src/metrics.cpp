// Copyright 2026 The bncap Authors
// SPDX-License-Identifier: Apache-2.0

#include "bncap/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <unordered_map>

#include "bncap/error.hpp"

namespace bncap {

namespace {

using NgramCounts = std::unordered_map<std::string, std::size_t>;

NgramCounts count_ngrams(const Words& words, std::size_t n) {
  NgramCounts counts;
  if (words.size() < n) return counts;
  for (std::size_t i = 0; i + n <= words.size(); ++i) {
    std::string key;
    for (std::size_t k = 0; k < n; ++k) {
      if (k) key += '\x1f';
      key += words[i + k];
    }
    ++counts[key];
  }
  return counts;
}

void check_pairs(std::span<const EvalPair> pairs) {
  if (pairs.empty()) throw InvalidArgument("evaluation corpus is empty");
  for (const EvalPair& p : pairs) {
    if (p.references.empty()) throw InvalidArgument("evaluation pair without references");
  }
}

std::size_t closest_reference_length(const EvalPair& p) {
  const std::size_t c = p.candidate.size();
  std::size_t best = p.references.front().size();
  for (const Words& r : p.references) {
    const auto diff = [c](std::size_t len) { return len > c ? len - c : c - len; };
    if (diff(r.size()) < diff(best) || (diff(r.size()) == diff(best) && r.size() < best)) {
      best = r.size();
    }
  }
  return best;
}

// Depth-first search over alignments that realise the maximum match count,
// pruning on the chunk count found so far.
class ChunkMinimizer {
 public:
  ChunkMinimizer(const Words& candidate, const Words& reference)
      : cand_(candidate), ref_(reference), used_(reference.size(), false) {
    std::map<std::string_view, std::size_t> cand_count, ref_count;
    for (const auto& w : cand_) ++cand_count[w];
    for (const auto& w : ref_) ++ref_count[w];
    for (const auto& [w, c] : cand_count) {
      const auto it = ref_count.find(w);
      const std::size_t need = it == ref_count.end() ? 0 : std::min(c, it->second);
      need_[w] = need;
      left_[w] = c;
      matches_ += need;
    }
    best_chunks_ = matches_ + 1;
  }

  Alignment solve() {
    if (matches_ == 0) return {};
    visit(0, kNone, 0);
    return {matches_, best_chunks_};
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  static constexpr std::size_t kNodeBudget = 2'000'000;

  void visit(std::size_t i, std::size_t prev_ref, std::size_t chunks) {
    if (chunks >= best_chunks_ || ++nodes_ > kNodeBudget) return;
    if (i == cand_.size()) {
      best_chunks_ = chunks;
      return;
    }
    const std::string_view w = cand_[i];
    std::size_t& need = need_[w];
    std::size_t& left = left_[w];
    --left;
    if (need > 0) {
      // Continuing the current chunk first finds good bounds early.
      if (prev_ref != kNone && prev_ref + 1 < ref_.size()) try_match(i, prev_ref + 1, prev_ref, chunks);
      for (std::size_t j = 0; j < ref_.size(); ++j) {
        if (prev_ref == kNone || j != prev_ref + 1) try_match(i, j, prev_ref, chunks);
      }
    }
    if (left >= need) visit(i + 1, kNone, chunks);
    ++left;
  }

  void try_match(std::size_t i, std::size_t j, std::size_t prev_ref, std::size_t chunks) {
    if (used_[j] || ref_[j] != cand_[i]) return;
    const bool continues = prev_ref != kNone && j == prev_ref + 1;
    std::size_t& need = need_[cand_[i]];
    used_[j] = true;
    --need;
    visit(i + 1, j, chunks + (continues ? 0 : 1));
    ++need;
    used_[j] = false;
  }

  const Words& cand_;
  const Words& ref_;
  std::vector<bool> used_;
  std::map<std::string_view, std::size_t> need_;
  std::map<std::string_view, std::size_t> left_;
  std::size_t matches_ = 0;
  std::size_t best_chunks_ = 0;
  std::size_t nodes_ = 0;
};

double meteor_against(const Words& candidate, const Words& reference) {
  const Alignment a = align_unigrams(candidate, reference);
  if (a.matches == 0) return 0.0;
  const double m = static_cast<double>(a.matches);
  const double precision = m / static_cast<double>(candidate.size());
  const double recall = m / static_cast<double>(reference.size());
  const double f_mean = 10.0 * precision * recall / (recall + 9.0 * precision);
  const double penalty = 0.5 * std::pow(static_cast<double>(a.chunks) / m, 3.0);
  return f_mean * (1.0 - penalty);
}

}  // namespace

ClippedPrecision clipped_precision_n(std::span<const EvalPair> pairs, std::size_t n) {
  if (n < 1) throw InvalidArgument("n-gram order must be at least 1");
  ClippedPrecision out;
  for (const EvalPair& p : pairs) {
    const NgramCounts cand = count_ngrams(p.candidate, n);
    NgramCounts max_ref;
    for (const Words& r : p.references) {
      for (const auto& [gram, count] : count_ngrams(r, n)) {
        std::size_t& slot = max_ref[gram];
        slot = std::max(slot, count);
      }
    }
    for (const auto& [gram, count] : cand) {
      out.total += count;
      const auto it = max_ref.find(gram);
      if (it != max_ref.end()) out.clipped += std::min(count, it->second);
    }
  }
  if (out.total == 0) {
    out.degenerate = true;
    return out;
  }
  out.value = static_cast<double>(out.clipped) / static_cast<double>(out.total);
  return out;
}

double bleu_cumulative(std::span<const EvalPair> pairs, std::size_t n, bool use_brevity_penalty) {
  check_pairs(pairs);
  if (n < 1 || n > 4) throw InvalidArgument("BLEU order must be between 1 and 4");
  double log_sum = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const ClippedPrecision p = clipped_precision_n(pairs, i);
    double value = p.value;
    if (p.clipped == 0) {
      if (i == 1) return 0.0;
      value = 1.0 / (static_cast<double>(p.total) + 1.0);
    }
    log_sum += std::log(value);
  }
  double bleu = std::exp(log_sum / static_cast<double>(n));
  if (use_brevity_penalty) {
    std::size_t c = 0, r = 0;
    for (const EvalPair& p : pairs) {
      c += p.candidate.size();
      r += closest_reference_length(p);
    }
    if (c == 0) return 0.0;
    if (c <= r) bleu *= std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
  }
  return 100.0 * bleu;
}

Alignment align_unigrams(const Words& candidate, const Words& reference) {
  return ChunkMinimizer(candidate, reference).solve();
}

double meteor_sentence(const Words& candidate, std::span<const Words> references) {
  double best = 0.0;
  for (const Words& r : references) best = std::max(best, meteor_against(candidate, r));
  return best;
}

double meteor_simplified(std::span<const EvalPair> pairs) {
  check_pairs(pairs);
  double total = 0.0;
  for (const EvalPair& p : pairs) total += meteor_sentence(p.candidate, p.references);
  return 100.0 * total / static_cast<double>(pairs.size());
}

MetricsReport evaluate_corpus(std::span<const EvalPair> pairs) {
  check_pairs(pairs);
  MetricsReport r;
  r.bleu_1 = bleu_cumulative(pairs, 1);
  r.bleu_2 = bleu_cumulative(pairs, 2);
  r.bleu_3 = bleu_cumulative(pairs, 3);
  r.bleu_4 = bleu_cumulative(pairs, 4);
  r.meteor = meteor_simplified(pairs);
  r.n_sentences = pairs.size();
  return r;
}

std::string render_table(const MetricsReport& r, std::string_view search_label) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "| %-8s | %7s | %7s | %7s | %7s | %7s |\n"
                "| %-8.*s | %7.2f | %7.2f | %7.2f | %7.2f | %7.2f |\n",
                "Search", "BLEU-1", "BLEU-2", "BLEU-3", "BLEU-4", "METEOR",
                static_cast<int>(search_label.size()), search_label.data(), r.bleu_1, r.bleu_2,
                r.bleu_3, r.bleu_4, r.meteor);
  return buf;
}

std::string render_machine_line(const MetricsReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "BLEU1=%.2f;BLEU2=%.2f;BLEU3=%.2f;BLEU4=%.2f;METEOR=%.2f;N=%zu",
                r.bleu_1, r.bleu_2, r.bleu_3, r.bleu_4, r.meteor, r.n_sentences);
  return buf;
}

MetricsReport parse_machine_line(std::string_view line) {
  MetricsReport r;
  bool seen[6] = {};
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t end = line.find(';', pos);
    if (end == std::string_view::npos) end = line.size();
    const std::string_view field = line.substr(pos, end - pos);
    const std::size_t eq = field.find('=');
    if (eq == std::string_view::npos) throw InvalidArgument("metrics field without '='");
    const std::string key(field.substr(0, eq));
    const std::string value(field.substr(eq + 1));
    char* tail = nullptr;
    const double x = std::strtod(value.c_str(), &tail);
    if (value.empty() || *tail != '\0') throw InvalidArgument("bad metrics value '" + value + "'");
    static const char* const kKeys[] = {"BLEU1", "BLEU2", "BLEU3", "BLEU4", "METEOR", "N"};
    double* slots[] = {&r.bleu_1, &r.bleu_2, &r.bleu_3, &r.bleu_4, &r.meteor, nullptr};
    bool known = false;
    for (int k = 0; k < 6; ++k) {
      if (key != kKeys[k]) continue;
      known = seen[k] = true;
      if (slots[k]) {
        *slots[k] = x;
      } else {
        r.n_sentences = static_cast<std::size_t>(x);
      }
    }
    if (!known) throw InvalidArgument("unknown metrics key '" + key + "'");
    pos = end + 1;
  }
  for (bool s : seen) {
    if (!s) throw InvalidArgument("metrics line is missing a field");
  }
  return r;
}

}  // namespace bncap
