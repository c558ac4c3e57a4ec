// Copyright 2026 The bncap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace bncap {

using TokenId = std::uint32_t;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kStartId = 1;
inline constexpr TokenId kEndId = 2;
inline constexpr TokenId kUnkId = 3;
inline constexpr std::size_t kReservedTokens = 4;

/// Ids of one caption: start marker, words, end marker.
using TokenSequence = std::vector<TokenId>;

/// NFC-normalizes `text` and splits it on Unicode whitespace. Punctuation
/// hugging either end of a word (danda, ?, !, comma, quotes, ...) is split off
/// into tokens of its own.
std::vector<std::string> tokenize(std::string_view text);

/// Canonical form of a caption: its tokens joined by single spaces.
std::string normalize_caption(std::string_view text);

/// Word <-> id bijection. Ids 0..3 are <pad>, <start>, <end>, <unk>; corpus
/// words follow contiguously from 4.
class Vocabulary {
 public:
  Vocabulary();

  /// Rebuilds a vocabulary from its non-reserved words in id order.
  static Vocabulary from_words(std::span<const std::string> words);

  std::size_t size() const noexcept { return id_to_word_.size(); }
  std::optional<TokenId> find(std::string_view word) const;
  /// The word's id, or kUnkId if it is not in the vocabulary.
  TokenId id_of(std::string_view word) const;
  const std::string& word(TokenId id) const;
  /// Words with ids >= 4, in id order.
  std::span<const std::string> corpus_words() const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.id_to_word_ == b.id_to_word_;
  }

 private:
  TokenId add(std::string word);

  std::vector<std::string> id_to_word_;
  std::unordered_map<std::string, TokenId> word_to_id_;
};

/// Words seen at least `min_count` times, numbered by first appearance.
Vocabulary build_vocabulary(std::span<const std::string> corpus, std::size_t min_count = 1);

TokenSequence encode_caption(const Vocabulary& v, std::string_view text);

/// Joins the words of `ids` with single spaces, dropping markers and padding.
std::string decode_tokens(const Vocabulary& v, std::span<const TokenId> ids);
std::vector<std::string> decode_words(const Vocabulary& v, std::span<const TokenId> ids);

/// True when `ids` starts with <start>, ends with <end>, has no interior
/// padding and every id is in range.
bool is_valid_sequence(std::span<const TokenId> ids, std::size_t vocab_size);

}  // namespace bncap
