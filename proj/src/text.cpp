// Copyright 2026 The bncap Authors
// SPDX-License-Identifier: Apache-2.0

#include "bncap/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <array>
#include <string>

#include "bncap/error.hpp"

namespace bncap {

namespace {

constexpr std::array<std::string_view, kReservedTokens> kReservedWords = {"<pad>", "<start>",
                                                                          "<end>", "<unk>"};

bool is_split_punctuation(UChar32 c) {
  switch (c) {
    case 0x0964:  // danda
    case 0x0965:  // double danda
    case '?':
    case '!':
    case ',':
    case '.':
    case ';':
    case ':':
    case '"':
    case '\'':
    case 0x2018:
    case 0x2019:
    case 0x201C:
    case 0x201D:
      return true;
    default:
      return false;
  }
}

std::string to_utf8(const icu::UnicodeString& s) {
  std::string out;
  s.toUTF8String(out);
  return out;
}

void push_word(const icu::UnicodeString& word, std::vector<std::string>& out) {
  int32_t begin = 0;
  int32_t end = word.length();
  std::vector<std::string> trailing;
  while (begin < end && is_split_punctuation(word.char32At(begin))) {
    const int32_t next = word.moveIndex32(begin, 1);
    out.push_back(to_utf8(word.tempSubString(begin, next - begin)));
    begin = next;
  }
  while (end > begin) {
    const int32_t prev = word.moveIndex32(end, -1);
    if (!is_split_punctuation(word.char32At(prev))) break;
    trailing.push_back(to_utf8(word.tempSubString(prev, end - prev)));
    end = prev;
  }
  if (end > begin) out.push_back(to_utf8(word.tempSubString(begin, end - begin)));
  out.insert(out.end(), trailing.rbegin(), trailing.rend());
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  const icu::UnicodeString raw =
      icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  const icu::UnicodeString normalized = nfc->normalize(raw, status);
  if (U_FAILURE(status)) throw InvalidArgument("cannot NFC-normalize caption text");

  std::vector<std::string> tokens;
  int32_t start = -1;
  for (int32_t i = 0; i < normalized.length(); i = normalized.moveIndex32(i, 1)) {
    const bool space = u_isUWhiteSpace(normalized.char32At(i));
    if (space && start >= 0) {
      push_word(normalized.tempSubString(start, i - start), tokens);
      start = -1;
    } else if (!space && start < 0) {
      start = i;
    }
  }
  if (start >= 0) push_word(normalized.tempSubString(start), tokens);
  return tokens;
}

std::string normalize_caption(std::string_view text) {
  std::string out;
  for (const std::string& t : tokenize(text)) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

Vocabulary::Vocabulary() {
  for (std::string_view w : kReservedWords) add(std::string(w));
}

Vocabulary Vocabulary::from_words(std::span<const std::string> words) {
  Vocabulary v;
  for (const std::string& w : words) {
    if (v.find(w)) throw InvalidArgument("duplicate vocabulary word '" + w + "'");
    v.add(w);
  }
  return v;
}

TokenId Vocabulary::add(std::string word) {
  const auto id = static_cast<TokenId>(id_to_word_.size());
  word_to_id_.emplace(word, id);
  id_to_word_.push_back(std::move(word));
  return id;
}

std::optional<TokenId> Vocabulary::find(std::string_view word) const {
  const auto it = word_to_id_.find(std::string(word));
  if (it == word_to_id_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::id_of(std::string_view word) const {
  const auto id = find(word);
  // Marker spellings inside a caption are ordinary unknown text.
  if (!id || *id < kReservedTokens) return kUnkId;
  return *id;
}

const std::string& Vocabulary::word(TokenId id) const {
  if (id >= id_to_word_.size()) {
    throw InvalidArgument("token id " + std::to_string(id) + " outside vocabulary of size " +
                          std::to_string(id_to_word_.size()));
  }
  return id_to_word_[id];
}

std::span<const std::string> Vocabulary::corpus_words() const {
  return std::span<const std::string>(id_to_word_).subspan(kReservedTokens);
}

Vocabulary build_vocabulary(std::span<const std::string> corpus, std::size_t min_count) {
  if (min_count < 1) throw InvalidArgument("min_count must be at least 1");
  std::vector<std::string> order;
  std::unordered_map<std::string, std::size_t> counts;
  for (const std::string& caption : corpus) {
    for (std::string& token : tokenize(caption)) {
      auto [it, inserted] = counts.try_emplace(token, 0);
      if (inserted) order.push_back(std::move(token));
      ++it->second;
    }
  }
  Vocabulary v;
  std::vector<std::string> kept;
  for (const std::string& w : order) {
    const bool reserved =
        std::find(kReservedWords.begin(), kReservedWords.end(), w) != kReservedWords.end();
    if (!reserved && counts.at(w) >= min_count) kept.push_back(w);
  }
  return Vocabulary::from_words(kept);
}

TokenSequence encode_caption(const Vocabulary& v, std::string_view text) {
  TokenSequence ids{kStartId};
  for (const std::string& t : tokenize(text)) ids.push_back(v.id_of(t));
  ids.push_back(kEndId);
  return ids;
}

std::vector<std::string> decode_words(const Vocabulary& v, std::span<const TokenId> ids) {
  std::vector<std::string> words;
  for (TokenId id : ids) {
    const std::string& w = v.word(id);
    if (id == kPadId || id == kStartId || id == kEndId) continue;
    words.push_back(w);
  }
  return words;
}

std::string decode_tokens(const Vocabulary& v, std::span<const TokenId> ids) {
  std::string out;
  for (const std::string& w : decode_words(v, ids)) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

bool is_valid_sequence(std::span<const TokenId> ids, std::size_t vocab_size) {
  if (ids.size() < 2 || ids.front() != kStartId || ids.back() != kEndId) return false;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= vocab_size) return false;
    if (ids[i] == kPadId && i > 0 && i + 1 < ids.size()) return false;
  }
  return true;
}

}  // namespace bncap
