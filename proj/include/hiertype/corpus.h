// Copyright 2026 The hiertype Authors.
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

#ifndef HIERTYPE_CORPUS_H_
#define HIERTYPE_CORPUS_H_

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hiertype/numcore/tensor.h"
#include "hiertype/ontology.h"

namespace hiertype {

enum class Task { kMentionTyping, kEntityTyping, kLinking };

const char *task_name(Task task);
// Accepts "mention-typing", "entity-typing", "linking"; throws ConfigError.
Task parse_task(std::string_view name);

// A tokenized sentence with a distinguished span [start, end).
struct Mention {
  std::string id;
  std::vector<std::string> tokens;
  size_t start = 0;
  size_t end = 0;
  // Gold type names (typing tasks).
  std::vector<std::string> labels;
  // Gold entity name (entity typing and linking).
  std::string entity;

  size_t length() const { return tokens.size(); }
  // Tokens inside the span joined by single spaces.
  std::string surface() const;
};

// Throws SpanError unless 0 <= start < end <= tokens.size().
void validate_span(size_t sentence_length, size_t start, size_t end);

// Relative position of every token to the span: 0 inside, i - start to the
// left (in [-s, 0)), i - end + 1 to the right (in (0, s]).
std::vector<int> position_features(size_t sentence_length, size_t start,
                                   size_t end);

// JSON-lines reader. Each line is an object with "tokens" (array of strings),
// "span" ([start, end]), and "labels" (array of type names) and/or "entity"
// (string) as the task requires; "id" is optional. Blank lines are skipped.
// Throws ParseError (with line number) or SpanError.
std::vector<Mention> load_mentions(const std::string &path, Task task);
void save_mentions(const std::string &path, std::span<const Mention> mentions);

// All mentions of one entity with its entity-level label vector.
struct Bag {
  std::string entity;
  std::vector<Mention> mentions;
  // One entry per ontology concept, 1.0 for the entity's types.
  std::vector<double> label_vec;
  std::vector<ConceptId> labels;
};

// Groups mentions by gold entity (in order of first appearance). The bag's
// types are the union of its mentions' labels, expanded with ancestors when
// use_closure is set. Throws UnknownConcept for unregistered type names and
// DataError for mentions without an entity or entities without types.
std::vector<Bag> build_bags(std::span<const Mention> mentions,
                            const Ontology &types, bool use_closure);

// Draws k mention indices from a bag: without replacement when the bag has
// at least k mentions, otherwise every mention once plus draws with
// replacement up to k.
std::vector<size_t> sample_bag(const Bag &bag, size_t k, Rng &rng);

// Resolves label names to ids, with ancestors when use_closure is set.
std::vector<ConceptId> resolve_labels(const Mention &mention,
                                      const Ontology &types, bool use_closure);

// Fixed pretrained word vectors. Rows never change during training; words
// missing from the file keep a zero row.
class WordEmbeddings {
 public:
  WordEmbeddings() = default;
  WordEmbeddings(std::vector<std::string> words, numcore::Tensor matrix);

  size_t dim() const { return matrix_.cols(); }
  size_t vocab_size() const { return words_.size(); }
  bool frozen() const { return true; }
  const std::vector<std::string> &words() const { return words_; }
  const numcore::Tensor &matrix() const { return matrix_; }

  bool contains(std::string_view word) const;
  // Row for word, or a zero row when the word is out of vocabulary.
  std::span<const double> vector(std::string_view word) const;
  // Number of vocabulary words that received a vector from the file.
  size_t found() const { return found_; }

  // "word v1 ... vd" per line with round-trip exact number formatting.
  void save(const std::string &path) const;

  static WordEmbeddings load(const std::string &path,
                             const std::set<std::string> &vocab, size_t dim);

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, size_t> index_;
  numcore::Tensor matrix_;
  std::vector<double> zeros_;
  size_t found_ = 0;
};

// Every token of every mention.
std::set<std::string> collect_vocab(std::span<const Mention> mentions);

}  // namespace hiertype

#endif  // HIERTYPE_CORPUS_H_
