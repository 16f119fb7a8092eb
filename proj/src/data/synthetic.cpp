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

#include "data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace mixup {

namespace {

const std::vector<std::string> kPositive = {
    "good",     "great",    "excellent", "wonderful", "superb",    "brilliant",
    "lovely",   "amazing",  "fantastic", "enjoyable", "charming",  "delightful",
    "splendid", "terrific", "moving",    "gripping",  "beautiful", "fun"};
const std::vector<std::string> kNegative = {
    "bad",    "awful", "terrible", "poor",    "boring", "dreadful",
    "horrible", "dull", "weak",     "lousy",   "tedious", "mediocre",
    "clumsy", "bland", "painful",  "messy",   "stale",   "ugly"};
const std::vector<std::string> kFiller = {
    "the",    "movie",  "film",   "plot",   "story", "actor",  "scene", "was",
    "is",     "it",     "this",   "that",   "and",   "very",   "really", "quite",
    "with",   "a",      "of",     "to",     "in",    "cast",   "script", "ending",
    "music",  "camera", "role",   "about",  "some",  "many",   "its",    "their",
    "director", "series", "show", "overall", "also", "still",  "part",   "time",
    "we",     "they",   "saw",    "felt",   "after", "before", "every",  "one"};

std::size_t uniform_between(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + rng.below(hi - lo + 1);
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

Example content_example(const SynthVocabSpec& spec, Rng& rng) {
  const std::size_t lex = std::min(spec.lexicon_size, kPositive.size());
  const std::size_t fill = std::min(spec.filler_size, kFiller.size());
  const std::size_t len = uniform_between(rng, spec.min_length, spec.max_length);
  const std::size_t n_sent =
      std::min(len, uniform_between(rng, spec.min_sentiment, spec.max_sentiment));
  std::size_t n_pos = 0;
  do {
    n_pos = uniform_between(rng, 0, n_sent);
  } while (2 * n_pos == n_sent);
  std::vector<std::string> words;
  for (std::size_t i = 0; i < n_pos; ++i) words.push_back(kPositive[rng.below(lex)]);
  for (std::size_t i = n_pos; i < n_sent; ++i) words.push_back(kNegative[rng.below(lex)]);
  while (words.size() < len) words.push_back(kFiller[rng.below(fill)]);
  shuffle(words, rng);
  return {join(words), 2 * n_pos > n_sent ? std::size_t{1} : std::size_t{0}};
}

bool balanced(const std::vector<int>& brackets) {
  int depth = 0;
  for (int b : brackets) {
    depth += b;
    if (depth < 0) return false;
  }
  return depth == 0;
}

Example syntax_example(const SynthVocabSpec& spec, Rng& rng) {
  const std::size_t fill = std::min(spec.filler_size, kFiller.size());
  const std::size_t pairs = uniform_between(rng, 1, std::max<std::size_t>(1, spec.max_bracket_pairs));
  const std::size_t len =
      std::max(2 * pairs, uniform_between(rng, spec.min_length, spec.max_length));
  const bool positive = rng.below(2) == 1;
  std::vector<int> brackets(2 * pairs, -1);
  std::fill(brackets.begin(), brackets.begin() + static_cast<std::ptrdiff_t>(pairs), 1);
  do {
    shuffle(brackets, rng);
  } while (balanced(brackets) != positive);
  // Bracket slots are a sorted random subset of positions.
  std::vector<std::size_t> slots(len);
  std::iota(slots.begin(), slots.end(), std::size_t{0});
  shuffle(slots, rng);
  slots.resize(brackets.size());
  std::sort(slots.begin(), slots.end());
  std::vector<std::string> words(len);
  for (auto& w : words) w = kFiller[rng.below(fill)];
  for (std::size_t i = 0; i < slots.size(); ++i) words[slots[i]] = brackets[i] > 0 ? "(" : ")";
  return {join(words), positive ? std::size_t{1} : std::size_t{0}};
}

}  // namespace

const char* to_string(TaskKind kind) noexcept {
  return kind == TaskKind::content ? "content" : "syntax";
}

TaskKind parse_task_kind(const std::string& name) {
  if (name == "content") return TaskKind::content;
  if (name == "syntax") return TaskKind::syntax;
  fail(ErrorKind::parameter, "unknown task kind '" + name + "'");
}

const std::vector<std::string>& positive_lexicon() { return kPositive; }
const std::vector<std::string>& negative_lexicon() { return kNegative; }

TaskSplits synth_task_generate(TaskKind kind, std::size_t size,
                               const SynthVocabSpec& spec, std::uint64_t seed) {
  require(size >= 2, ErrorKind::parameter, "synthetic task size must be >= 2");
  require(spec.min_length >= 1 && spec.min_length <= spec.max_length,
          ErrorKind::parameter, "invalid synthetic length range");
  require(spec.min_sentiment >= 1 && spec.min_sentiment <= spec.max_sentiment,
          ErrorKind::parameter, "invalid sentiment count range");
  require(spec.lexicon_size >= 1 && spec.filler_size >= 1, ErrorKind::parameter,
          "lexicon and filler sizes must be >= 1");
  Rng rng = Rng(seed).derive(to_string(kind));
  std::vector<Example> all;
  all.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    all.push_back(kind == TaskKind::content ? content_example(spec, rng)
                                            : syntax_example(spec, rng));
  }
  shuffle(all, rng);
  const std::size_t n_train = std::max<std::size_t>(1, size * 70 / 100);
  const std::size_t n_dev = std::max<std::size_t>(size >= 3 ? 1 : 0, size * 15 / 100);
  TaskSplits out;
  out.label_names = kind == TaskKind::content
                        ? std::vector<std::string>{"negative", "positive"}
                        : std::vector<std::string>{"unbalanced", "balanced"};
  auto fill = [&](Dataset& ds, Split split, std::size_t from, std::size_t to) {
    ds.n_classes = 2;
    ds.split = split;
    ds.examples.assign(all.begin() + static_cast<std::ptrdiff_t>(from),
                       all.begin() + static_cast<std::ptrdiff_t>(to));
  };
  const std::size_t dev_end = std::min(size, n_train + n_dev);
  fill(out.train, Split::train, 0, n_train);
  fill(out.dev, Split::dev, n_train, dev_end);
  fill(out.test, Split::test, dev_end, size);
  return out;
}

std::size_t content_label(const std::string& text) {
  std::size_t pos = 0, neg = 0;
  for (const auto& w : split_words(text)) {
    if (std::find(kPositive.begin(), kPositive.end(), w) != kPositive.end()) ++pos;
    if (std::find(kNegative.begin(), kNegative.end(), w) != kNegative.end()) ++neg;
  }
  require(pos != neg, ErrorKind::validation, "content text has no sentiment majority");
  return pos > neg ? 1 : 0;
}

double bow_probe_accuracy(const Dataset& train, const Dataset& dev) {
  require(train.size() > 0 && dev.size() > 0, ErrorKind::contract,
          "probe needs non-empty train and dev sets");
  const Vocab vocab = Vocab::build(train.texts(), 1);
  const std::size_t v = vocab.size(), k = train.n_classes;
  auto features = [&](const Dataset& ds) {
    std::vector<std::vector<double>> x;
    for (const auto& e : ds.examples) {
      std::vector<double> row(v, 0.0);
      for (const auto& w : split_words(e.text)) row[vocab.id(w)] += 1.0;
      x.push_back(std::move(row));
    }
    return x;
  };
  const auto xtr = features(train);
  const auto xdev = features(dev);
  std::vector<double> w(v * k, 0.0), b(k, 0.0);
  auto scores = [&](const std::vector<double>& x) {
    std::vector<double> s(b);
    for (std::size_t f = 0; f < v; ++f) {
      if (x[f] == 0.0) continue;
      for (std::size_t c = 0; c < k; ++c) s[c] += x[f] * w[f * k + c];
    }
    return s;
  };
  // Full-batch gradient descent on L2-regularised softmax regression.
  constexpr double kRate = 0.2;
  constexpr double kL2 = 1e-4;
  constexpr int kIterations = 400;
  const double inv_n = 1.0 / static_cast<double>(xtr.size());
  for (int it = 0; it < kIterations; ++it) {
    std::vector<double> gw(v * k, 0.0), gb(k, 0.0);
    for (std::size_t i = 0; i < xtr.size(); ++i) {
      auto s = scores(xtr[i]);
      const double mx = *std::max_element(s.begin(), s.end());
      double z = 0.0;
      for (double& si : s) z += (si = std::exp(si - mx));
      for (std::size_t c = 0; c < k; ++c) {
        const double d = s[c] / z - (train.examples[i].label == c ? 1.0 : 0.0);
        gb[c] += d;
        for (std::size_t f = 0; f < v; ++f) {
          if (xtr[i][f] != 0.0) gw[f * k + c] += d * xtr[i][f];
        }
      }
    }
    for (std::size_t j = 0; j < w.size(); ++j) w[j] -= kRate * (gw[j] * inv_n + kL2 * w[j]);
    for (std::size_t c = 0; c < k; ++c) b[c] -= kRate * gb[c] * inv_n;
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < xdev.size(); ++i) {
    const auto s = scores(xdev[i]);
    const auto pred = static_cast<std::size_t>(
        std::max_element(s.begin(), s.end()) - s.begin());
    if (pred == dev.examples[i].label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(dev.size());
}

}  // namespace mixup
