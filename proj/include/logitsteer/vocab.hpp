// Copyright 2026 The logitsteer Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Word-level tokenization and the shared token-id space.
//
// Text is lowercased (ASCII), split on Unicode whitespace, and every leading or
// trailing ASCII punctuation character of a field becomes its own token:
//
//   "Hello, (World)!"  ->  hello  ,  (  world  )  !
//
// Ids 0, 1 and 2 are always <unk>, <s> and </s>. Because the tokenizer splits
// '<' and '>' off as punctuation, no corpus token can collide with them.

#ifndef LOGITSTEER_VOCAB_HPP_
#define LOGITSTEER_VOCAB_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "logitsteer/error.hpp"

namespace logitsteer {

using TokenId = std::uint32_t;

namespace detail {

// Byte length of the Unicode whitespace code point starting at text[pos], or
// 0 when there is none.
inline std::size_t whitespace_length(std::string_view text, std::size_t pos) {
  const auto byte = [&](std::size_t i) -> unsigned char {
    return pos + i < text.size() ? static_cast<unsigned char>(text[pos + i]) : 0;
  };
  const unsigned char b0 = byte(0);
  if (b0 == ' ' || (b0 >= '\t' && b0 <= '\r')) return 1;
  if (b0 == 0xC2 && (byte(1) == 0x85 || byte(1) == 0xA0)) return 2;
  if (b0 == 0xE1 && byte(1) == 0x9A && byte(2) == 0x80) return 3;  // U+1680
  if (b0 == 0xE2 && byte(1) == 0x80) {
    const unsigned char b2 = byte(2);
    // U+2000..U+200A, U+2028, U+2029, U+202F
    if ((b2 >= 0x80 && b2 <= 0x8A) || b2 == 0xA8 || b2 == 0xA9 || b2 == 0xAF) {
      return 3;
    }
  }
  if (b0 == 0xE2 && byte(1) == 0x81 && byte(2) == 0x9F) return 3;  // U+205F
  if (b0 == 0xE3 && byte(1) == 0x80 && byte(2) == 0x80) return 3;  // U+3000
  return 0;
}

inline bool is_ascii_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return (u >= 0x21 && u <= 0x2F) || (u >= 0x3A && u <= 0x40) ||
         (u >= 0x5B && u <= 0x60) || (u >= 0x7B && u <= 0x7E);
}

inline char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

inline void split_field(std::string_view field, std::vector<std::string>& out) {
  std::size_t begin = 0;
  std::size_t end = field.size();
  while (begin < end && is_ascii_punct(field[begin])) {
    out.emplace_back(1, field[begin]);
    ++begin;
  }
  std::size_t core_end = end;
  while (core_end > begin && is_ascii_punct(field[core_end - 1])) --core_end;
  if (core_end > begin) {
    std::string core(field.substr(begin, core_end - begin));
    std::transform(core.begin(), core.end(), core.begin(), ascii_lower);
    out.push_back(std::move(core));
  }
  for (std::size_t i = core_end; i < end; ++i) out.emplace_back(1, field[i]);
}

}  // namespace detail

// Splits text into lowercase word and punctuation tokens.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  std::size_t field_start = 0;
  while (pos < text.size()) {
    const std::size_t ws = detail::whitespace_length(text, pos);
    if (ws == 0) {
      ++pos;
      continue;
    }
    if (pos > field_start) {
      detail::split_field(text.substr(field_start, pos - field_start), tokens);
    }
    pos += ws;
    field_start = pos;
  }
  if (text.size() > field_start) {
    detail::split_field(text.substr(field_start), tokens);
  }
  return tokens;
}

// Immutable bijection between token strings and dense ids.
class Vocabulary {
 public:
  static constexpr TokenId kUnk = 0;
  static constexpr TokenId kBos = 1;
  static constexpr TokenId kEos = 2;
  static constexpr std::string_view kUnkToken = "<unk>";
  static constexpr std::string_view kBosToken = "<s>";
  static constexpr std::string_view kEosToken = "</s>";

  // Specials only.
  Vocabulary()
      : Vocabulary(std::vector<std::string>{std::string(kUnkToken),
                                            std::string(kBosToken),
                                            std::string(kEosToken)}) {}

  // `tokens` must start with the three specials, be unique, and contain no
  // whitespace.
  explicit Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    if (tokens_.size() < 3 || tokens_[kUnk] != kUnkToken ||
        tokens_[kBos] != kBosToken || tokens_[kEos] != kEosToken) {
      throw Error("vocabulary must start with <unk>, <s>, </s>");
    }
    index_.reserve(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      const std::string& token = tokens_[i];
      if (token.empty()) throw Error("empty token in vocabulary");
      for (std::size_t pos = 0; pos < token.size(); ++pos) {
        if (detail::whitespace_length(token, pos) != 0) {
          throw Error("token contains whitespace: '" + token + "'");
        }
      }
      if (!index_.emplace(token, static_cast<TokenId>(i)).second) {
        throw Error("duplicate token in vocabulary: '" + token + "'");
      }
    }
  }

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  const std::string& token(TokenId id) const {
    if (id >= tokens_.size()) throw Error("invalid token id");
    return tokens_[id];
  }

  std::optional<TokenId> find(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  TokenId id_or_unk(std::string_view token) const {
    return find(token).value_or(kUnk);
  }

  bool contains(TokenId id) const { return id < tokens_.size(); }

  static bool is_special(TokenId id) { return id <= kEos; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

// Specials first, then every token with frequency >= min_count by descending
// frequency, ties broken lexicographically.
inline Vocabulary build_vocab(std::span<const std::string> corpus,
                              std::size_t min_count = 1) {
  if (corpus.empty()) throw Error("empty corpus");
  if (min_count == 0) throw Error("min_count must be positive");
  std::map<std::string, std::size_t> counts;
  for (const std::string& doc : corpus) {
    for (std::string& token : tokenize(doc)) ++counts[std::move(token)];
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [token, count] : counts) {
    if (count >= min_count) kept.emplace_back(token, count);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second > b.second;
  });
  std::vector<std::string> tokens{std::string(Vocabulary::kUnkToken),
                                  std::string(Vocabulary::kBosToken),
                                  std::string(Vocabulary::kEosToken)};
  tokens.reserve(kept.size() + 3);
  for (auto& [token, count] : kept) tokens.push_back(std::move(token));
  return Vocabulary(std::move(tokens));
}

inline std::vector<TokenId> encode(const Vocabulary& vocab, std::string_view text) {
  std::vector<TokenId> ids;
  for (const std::string& token : tokenize(text)) ids.push_back(vocab.id_or_unk(token));
  return ids;
}

// Joins tokens with single spaces, dropping specials.
inline std::string decode(const Vocabulary& vocab, std::span<const TokenId> ids) {
  std::string text;
  for (TokenId id : ids) {
    const std::string& token = vocab.token(id);
    if (Vocabulary::is_special(id)) continue;
    if (!text.empty()) text.push_back(' ');
    text += token;
  }
  return text;
}

}  // namespace logitsteer

#endif  // LOGITSTEER_VOCAB_HPP_
