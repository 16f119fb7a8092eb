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

#include "data/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "core/error.hpp"

namespace mixup {

namespace {

const char* const kReservedTokens[Vocab::kReserved] = {
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[unused0]"};

}  // namespace

Vocab::Vocab() {
  for (const char* t : kReservedTokens) add(t);
}

void Vocab::add(std::string token) {
  index_.emplace(token, tokens_.size());
  tokens_.push_back(std::move(token));
}

Vocab Vocab::build(std::span<const std::string> corpus, std::size_t min_count) {
  require(!corpus.empty(), ErrorKind::validation, "cannot build a vocabulary from an empty corpus");
  std::map<std::string, std::size_t> counts;
  for (const auto& text : corpus) {
    for (auto& w : split_words(text)) ++counts[std::move(w)];
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [word, n] : counts) {
    if (n >= min_count) kept.emplace_back(word, n);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second > b.second;
  });
  Vocab v;
  for (auto& [word, n] : kept) v.add(word);
  return v;
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open vocabulary " + path.string());
  Vocab v;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    if (line_no < kReserved) {
      if (line != kReservedTokens[line_no]) {
        fail(ErrorKind::io, "vocabulary line " + std::to_string(line_no + 1) +
                                " must be " + kReservedTokens[line_no]);
      }
    } else {
      if (v.index_.count(line)) {
        fail(ErrorKind::io, "duplicate vocabulary token '" + line + "'");
      }
      v.add(line);
    }
    ++line_no;
  }
  if (line_no < kReserved) fail(ErrorKind::io, "vocabulary is missing the reserved block");
  return v;
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot write vocabulary " + path.string());
  for (const auto& t : tokens_) out << t << '\n';
  if (!out) fail(ErrorKind::io, "failed writing vocabulary " + path.string());
}

std::size_t Vocab::id(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

bool Vocab::contains(std::string_view token) const {
  return index_.count(std::string(token)) != 0;
}

const std::string& Vocab::token(std::size_t id) const {
  if (id >= tokens_.size()) {
    fail(ErrorKind::vocabulary, "token id " + std::to_string(id) +
                                    " outside vocabulary of size " +
                                    std::to_string(tokens_.size()));
  }
  return tokens_[id];
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) words.push_back(std::move(current));
    current.clear();
  };
  for (char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isspace(c)) {
      flush();
    } else if (std::ispunct(c)) {
      flush();
      words.emplace_back(1, raw);
    } else {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return words;
}

std::vector<std::size_t> tokenize(std::string_view text, const Vocab& vocab,
                                  std::size_t max_seq_len) {
  require(max_seq_len >= 2, ErrorKind::parameter, "max_seq_len must be >= 2");
  std::vector<std::size_t> ids{Vocab::kCls};
  for (const auto& w : split_words(text)) {
    if (ids.size() + 1 >= max_seq_len) break;
    ids.push_back(vocab.id(w));
  }
  ids.push_back(Vocab::kSep);
  return ids;
}

std::string detokenize(std::span<const std::size_t> ids, const Vocab& vocab) {
  std::string out;
  for (std::size_t id : ids) {
    if (id == Vocab::kCls || id == Vocab::kSep || id == Vocab::kPad) continue;
    if (!out.empty()) out.push_back(' ');
    out += vocab.token(id);
  }
  return out;
}

}  // namespace mixup
