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

#ifndef HIERTYPE_SYNTH_H_
#define HIERTYPE_SYNTH_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hiertype/corpus.h"
#include "hiertype/ontology.h"

namespace hiertype {

// Synthetic hierarchy and corpus. Types form a forest with branching[i]
// children per node at level i (the first entry is the number of roots).
// Every entity has one leaf type; each of its mentions carries cue words for
// the leaf and its ancestors (each present with its level's cue rate), the
// entity's name as the span, and filler words. With probability noise a cue
// is swapped for the cue of a random type at the same level.
struct SynthConfig {
  std::vector<size_t> branching = {4, 3, 2};
  size_t entities = 200;
  size_t mentions_per_entity = 10;
  size_t vocab_size = 400;  // filler words
  size_t cues_per_type = 3;
  size_t word_dim = 32;
  size_t sentence_length = 12;
  // Probability that a mention carries a cue of the concept at each depth,
  // from the roots down; the last value repeats for deeper levels.
  std::vector<double> cue_rates = {0.9, 0.7, 0.35};
  double noise = 0.15;
  // Spread of type prototypes around their parent's prototype.
  double prototype_spread = 0.6;
  double word_noise = 0.3;
  // Entity-typing split by entity; linking split by mention.
  double dev_fraction = 0.1;
  double test_fraction = 0.2;
  // Linking: share of mentions whose surface is a one-character edit of the
  // name, and share that use an unrelated alias.
  double typo_rate = 0.2;
  double alias_rate = 0.1;
  std::uint64_t seed = 1;
};

struct SynthData {
  Ontology types;
  // Types plus one concept per entity under its leaf type.
  Ontology kb;
  WordEmbeddings words;
  std::vector<std::pair<std::string, std::string>> names;  // entity, name
  // Typing corpora split by entity (labels = leaf type, entity set).
  std::vector<Mention> train, dev, test;
  // Linking corpora split by mention.
  std::vector<Mention> link_train, link_dev, link_test;
};

SynthData generate_synthetic(const SynthConfig &config);

// Writes types.tsv, leaf_mask.txt, kb.tsv, names.tsv, vectors.txt,
// {train,dev,test}.jsonl and link_{train,dev,test}.jsonl into dir (which must
// exist).
void write_synthetic(const SynthData &data, const std::string &dir);

}  // namespace hiertype

#endif  // HIERTYPE_SYNTH_H_
