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
#include <cstdint>
#include <string>
#include <vector>

#include "data/dataset.hpp"

namespace mixup {

/// content: sentiment words from two lexicons among neutral filler; the
/// label is the majority lexicon, so a bag of words solves it.
/// syntax: bracket tokens among filler; balanced arrangements are positive,
/// unbalanced rearrangements of the same multiset negative, so unigram
/// statistics carry no label information.
enum class TaskKind { content, syntax };

const char* to_string(TaskKind kind) noexcept;
TaskKind parse_task_kind(const std::string& name);

struct SynthVocabSpec {
  std::size_t lexicon_size = 12;  // words per sentiment lexicon
  std::size_t filler_size = 40;
  std::size_t min_length = 6;
  std::size_t max_length = 16;
  std::size_t min_sentiment = 3;  // content: sentiment words per example
  std::size_t max_sentiment = 7;
  std::size_t max_bracket_pairs = 2;  // syntax: pairs per example
};

struct TaskSplits {
  Dataset train;
  Dataset dev;
  Dataset test;
  std::vector<std::string> label_names;
};

/// Generates `size` examples and splits them 70/15/15 after a seeded shuffle.
TaskSplits synth_task_generate(TaskKind kind, std::size_t size,
                               const SynthVocabSpec& spec, std::uint64_t seed);

/// Lexicons used by the content task.
const std::vector<std::string>& positive_lexicon();
const std::vector<std::string>& negative_lexicon();

/// Content-task labelling rule: 1 when positive-lexicon words outnumber
/// negative ones, 0 when fewer. A tie is a validation error.
std::size_t content_label(const std::string& text);

/// Dev accuracy of a multinomial logistic regression over token counts,
/// trained on train. Used to audit how much of a task is solvable without
/// word order.
double bow_probe_accuracy(const Dataset& train, const Dataset& dev);

}  // namespace mixup
