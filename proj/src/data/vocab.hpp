// Copyright 2026 The mixup-transformer Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mixup {

/// Token <-> id map. The reserved block occupies the first ids in a fixed
/// order; corpus tokens follow by descending frequency, ties broken
/// lexicographically.
class Vocab {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;
  static constexpr std::size_t kCls = 2;
  static constexpr std::size_t kSep = 3;
  static constexpr std::size_t kUnused = 4;
  static constexpr std::size_t kReserved = 5;

  Vocab();

  /// Keeps every word occurring at least min_count times.
  static Vocab build(std::span<const std::string> corpus, std::size_t min_count);
  /// One token per line, line number = id.
  static Vocab load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::size_t size() const noexcept { return tokens_.size(); }
  /// Id of token, or kUnk.
  std::size_t id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(std::size_t id) const;

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  void add(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Lowercases and splits on whitespace; each punctuation character becomes
/// its own word.
std::vector<std::string> split_words(std::string_view text);

/// [CLS] words... [SEP], truncated at the tail so the result never exceeds
/// max_seq_len and always ends in [SEP].
std::vector<std::size_t> tokenize(std::string_view text, const Vocab& vocab,
                                  std::size_t max_seq_len);

/// Space-joined tokens with [CLS], [SEP], and [PAD] removed.
std::string detokenize(std::span<const std::size_t> ids, const Vocab& vocab);

}  // namespace mixup
