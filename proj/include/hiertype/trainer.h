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

#ifndef HIERTYPE_TRAINER_H_
#define HIERTYPE_TRAINER_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hiertype/candgen.h"
#include "hiertype/corpus.h"
#include "hiertype/encoder.h"
#include "hiertype/metrics.h"
#include "hiertype/numcore/checkpoint.h"
#include "hiertype/objectives.h"
#include "hiertype/ontology.h"

namespace hiertype {

// Model variant: the CNN base with optional complex embeddings, transitive
// label closure, and the structure loss (bilinear for real embeddings,
// ComplEx for complex ones).
struct Variant {
  bool complex = false;
  bool closure = false;
  bool hierarchy = false;

  bool operator==(const Variant &) const = default;
};

// "cnn", "cnn+complex", "cnn+hier", "cnn+closure", "cnn+complex+hier+closure",
// ... in any order after "cnn". "transitive" and "hierarchy" are synonyms.
Variant parse_variant(std::string_view text);
std::string variant_name(const Variant &variant);

struct TrainConfig {
  Task task = Task::kMentionTyping;
  Variant variant;
  double lr = 0.001;
  double dropout_keep = 0.75;
  double l2 = 1e-5;
  size_t negatives = 16;
  double gamma = 0.5;
  size_t bag_k_train = 10;
  size_t bag_k_test = 20;
  std::uint64_t seed = 1;
  size_t max_epochs = 100;
  size_t patience = 5;
  size_t batch_size = 32;
  // Stops after this many optimizer steps when nonzero.
  size_t max_steps = 0;
  size_t struct_samples_per_batch = 1;
  size_t candidates_k = 100;
  // Encoder shape; word_dim always comes from the loaded word vectors.
  size_t position_dim = 25;
  size_t dim = 300;
  size_t window = 5;
  int max_position = 50;

  // Sets one key from its text form; throws ConfigError for unknown keys or
  // unparsable values.
  void set(std::string_view key, std::string_view value);
  // Every key with its text form, in a fixed order.
  std::vector<std::pair<std::string, std::string>> entries() const;
  // Throws ConfigError for inconsistent settings.
  void validate() const;
  std::string summary() const;

  // Flat "key = value" file, '#' comments, blank lines ignored.
  static TrainConfig from_file(const std::string &path);
};

// Every file-backed input a run needs.
struct Dataset {
  // Types for typing tasks, entities for linking.
  Ontology ontology;
  WordEmbeddings words;
  std::vector<Mention> train;
  std::vector<Mention> dev;
  std::vector<Mention> test;
  // Linking only: candidate index and its row -> ontology concept map.
  std::optional<NgramIndex> index;
  std::vector<ConceptId> index_concepts;

  // Builds index_concepts; throws UnknownConcept for index keys that are not
  // ontology concepts.
  void attach_index(NgramIndex idx);
};

struct DataPaths {
  std::string ontology;
  std::string leaf_mask;  // optional
  std::string embeddings;
  std::string train;
  std::string dev;
  std::string test;
  std::string names;   // linking: entity names for the candidate index
  std::string index;   // linking: prebuilt index (takes precedence over names)
};

// Loads whatever paths are set. The vocabulary for word vectors is the union
// of tokens over all loaded splits.
Dataset load_dataset(const DataPaths &paths, Task task, size_t word_dim);

struct Model {
  TrainConfig config;
  EncoderParams encoder;
  TypeEmbeddings types;  // typing tasks
  LinkerParams linker;   // linking
  HierarchyParams hierarchy;

  static Model init(const TrainConfig &config, size_t num_concepts,
                    size_t word_dim, Rng &rng);
  std::vector<numcore::Parameter *> parameters();
  // Table the structure loss acts on.
  TypeEmbeddings &concept_table();

  numcore::TensorArchive to_archive() const;
  // Rebuilds the model from a checkpoint; throws DataError on shape or
  // metadata problems.
  static Model from_archive(const numcore::TensorArchive &archive);
};

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  size_t t = 0;
  std::vector<numcore::Tensor> m;
  std::vector<numcore::Tensor> v;
};

// One Adam update over grad + l2 * value. Moments are created on the first
// call; throws ShapeError when a gradient or moment does not match its
// parameter.
void adam_step(std::span<numcore::Parameter *const> params, AdamState &state,
               double lr, double l2);

// Forward passes without dropout.
std::vector<double> predict_type_probs(Model &model, const Mention &mention,
                                       const WordEmbeddings &words);
// Pooled bag logits over k sampled mentions.
std::vector<double> predict_bag_scores(Model &model, const Bag &bag, size_t k,
                                       const WordEmbeddings &words, Rng &rng);
// Linking scores over the candidate set, in candidate order.
std::vector<double> predict_link_scores(Model &model, const Mention &mention,
                                        const CandidateSet &candidates,
                                        const Dataset &data);

// Candidate sets for a split, with gold markers.
std::vector<CandidateSet> candidate_sets(const Dataset &data,
                                         std::span<const Mention> mentions,
                                         size_t k);

// Full evaluation of one split. Typing gold labels are used as given.
// The primary metric of each task is stored under "dev_metric".
EvalReport evaluate(Model &model, const Dataset &data,
                    std::span<const Mention> mentions, bool with_predictions = false);
double primary_metric(const EvalReport &report);

struct EpochLog {
  size_t epoch = 0;
  size_t steps = 0;
  double task_loss = 0.0;
  double struct_loss = 0.0;
  double dev_metric = 0.0;
  double wall_seconds = 0.0;

  std::string to_json() const;
};

struct TrainResult {
  numcore::TensorArchive checkpoint;
  double dev_metric = 0.0;
  size_t best_epoch = 0;
  size_t steps = 0;
  std::vector<EpochLog> log;
};

// Trains with per-epoch dev evaluation and early stopping; returns the best
// epoch's parameters. A JSON line per epoch goes to log_stream when given.
TrainResult train(const TrainConfig &config, const Dataset &data,
                  std::ostream *log_stream = nullptr);

// Mean structure loss over the given links with fixed negatives drawn from
// rng; used to check that structure is being learned.
double structure_loss(Model &model, const Ontology &ontology,
                      std::span<const Link> links, size_t negatives, Rng &rng);

struct GridCell {
  std::vector<std::pair<std::string, std::string>> overrides;
  double dev_metric = 0.0;
  size_t best_epoch = 0;
  size_t steps = 0;
};

struct GridSearchResult {
  std::vector<GridCell> cells;
  size_t best = 0;
  TrainResult best_result;

  // One tab-separated row per cell, header first.
  std::string report() const;
};

// Cartesian product of the values of every key, in key order as given.
std::vector<std::vector<std::pair<std::string, std::string>>> expand_grid(
    const std::vector<std::pair<std::string, std::vector<std::string>>> &grid);

// Trains every cell and keeps the best dev metric (first cell wins ties).
GridSearchResult grid_search(
    const TrainConfig &base,
    const std::vector<std::pair<std::string, std::vector<std::string>>> &grid,
    const Dataset &data, std::ostream *log_stream = nullptr);

// Worker cap for evaluation from HIERTYPE_THREADS (default: hardware
// concurrency, at least 1).
size_t worker_count();

}  // namespace hiertype

#endif  // HIERTYPE_TRAINER_H_
