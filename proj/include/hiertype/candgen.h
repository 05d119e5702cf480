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

#ifndef HIERTYPE_CANDGEN_H_
#define HIERTYPE_CANDGEN_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace hiertype {

// Fixed English stop list shipped with the library (the NLTK English list).
const std::vector<std::string> &stop_words();

// Lowercases (ASCII), drops stop words, and joins the remaining
// whitespace-separated tokens with single spaces.
std::string preprocess(std::string_view text);

// Character n-grams (by code point) of an already preprocessed string,
// spaces included, with their counts.
std::vector<std::pair<std::string, std::uint32_t>> char_ngrams(
    std::string_view text, size_t min_n, size_t max_n);

struct SparseVector {
  std::vector<std::uint32_t> index;  // strictly increasing
  std::vector<double> value;

  bool empty() const { return index.empty(); }
};

double cosine(const SparseVector &a, const SparseVector &b);

struct CandidateEntry {
  size_t entity = 0;  // row in the index
  double csim = 0.0;
};

struct CandidateSet {
  std::string mention_id;
  // Sorted by csim descending, ties by entity row ascending.
  std::vector<CandidateEntry> entries;
  bool gold_in_set = false;
  // Position of the gold entity inside entries, when present.
  std::optional<size_t> gold_position;
};

// TFIDF character n-gram index over canonical entity names. Weights are
// tf * ln(1 + N / df) over the retained features and rows are L2-normalized.
class NgramIndex {
 public:
  struct Options {
    size_t min_n = 1;
    size_t max_n = 5;
    size_t max_features = 100000;
  };

  static constexpr std::uint32_t kVersion = 1;

  // names: (entity key, canonical name). Features are the max_features most
  // frequent n-grams by total count, ties broken lexicographically.
  static NgramIndex build(std::span<const std::pair<std::string, std::string>> names,
                          const Options &options);
  static NgramIndex build(std::span<const std::pair<std::string, std::string>> names) {
    return build(names, Options());
  }

  size_t num_entities() const { return entity_keys_.size(); }
  size_t num_features() const { return features_.size(); }
  const std::string &entity_key(size_t row) const { return entity_keys_.at(row); }
  std::optional<size_t> find_entity(std::string_view key) const;
  const std::vector<std::string> &features() const { return features_; }
  double idf(size_t feature) const { return idf_.at(feature); }
  const Options &options() const { return options_; }

  // TFIDF vector of a raw string (preprocessed here); unknown n-grams are
  // ignored and the result is L2-normalized unless it is all zero.
  SparseVector vectorize(std::string_view text) const;
  SparseVector entity_vector(size_t row) const;

  // Top-k entities by cosine to the mention string. gold marks gold_in_set.
  CandidateSet candidates(std::string_view mention, size_t k = 100,
                          std::optional<size_t> gold = std::nullopt) const;

  std::string serialize() const;
  static NgramIndex deserialize(const std::string &bytes);
  void save(const std::string &path) const;
  static NgramIndex load(const std::string &path);

 private:
  void build_postings();

  Options options_;
  std::vector<std::string> entity_keys_;
  std::unordered_map<std::string, size_t> entity_index_;
  std::vector<std::string> features_;
  std::unordered_map<std::string, std::uint32_t> feature_map_;
  std::vector<double> idf_;
  // CSR rows, one per entity.
  std::vector<std::uint64_t> row_ptr_;
  std::vector<std::uint32_t> cols_;
  std::vector<double> vals_;
  // Per-feature (entity row, weight) lists derived from the CSR rows.
  std::vector<std::vector<std::pair<std::uint32_t, double>>> postings_;
};

// Reads "entity<TAB>canonical name" lines ('#' comments allowed).
std::vector<std::pair<std::string, std::string>> load_names(const std::string &path);

}  // namespace hiertype

#endif  // HIERTYPE_CANDGEN_H_
