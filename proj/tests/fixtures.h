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

#ifndef HIERTYPE_TESTS_FIXTURES_H_
#define HIERTYPE_TESTS_FIXTURES_H_

// Small models and losses shared by the objective tests and the acceptance
// runner.

#include <random>
#include <set>
#include <string>
#include <vector>

#include "hiertype/candgen.h"
#include "hiertype/corpus.h"
#include "hiertype/encoder.h"
#include "hiertype/numcore/gradcheck.h"
#include "hiertype/objectives.h"
#include "hiertype/ontology.h"
#include "hiertype/synth.h"
#include "hiertype/trainer.h"
#include "test_util.h"

namespace hiertype::testing {

inline WordEmbeddings toy_words(size_t vocab, size_t dim, std::mt19937_64 &rng) {
  std::vector<std::string> words;
  for (size_t i = 0; i < vocab; ++i) words.push_back("w" + std::to_string(i));
  return WordEmbeddings(words, random_tensor({vocab, dim}, rng));
}

// Random mention over w0..w{vocab-1}; one token is out of vocabulary.
inline Mention toy_mention(size_t vocab, std::mt19937_64 &rng) {
  std::uniform_int_distribution<size_t> len_dist(2, 7);
  const size_t n = len_dist(rng);
  Mention m;
  std::uniform_int_distribution<size_t> word(0, vocab);
  for (size_t i = 0; i < n; ++i) m.tokens.push_back("w" + std::to_string(word(rng)));
  std::uniform_int_distribution<size_t> start_dist(0, n - 1);
  m.start = start_dist(rng);
  std::uniform_int_distribution<size_t> end_dist(m.start + 1, n);
  m.end = end_dist(rng);
  return m;
}

// Root with two children, each with two children.
inline Ontology toy_ontology() {
  Ontology o;
  ConceptId root = o.add_concept("/r");
  for (int a = 0; a < 2; ++a) {
    std::string mid_name = "/r/" + std::to_string(a);
    ConceptId mid = o.add_concept(mid_name);
    o.add_edge(mid, root);
    for (int b = 0; b < 2; ++b) {
      ConceptId leaf = o.add_concept(mid_name + "/" + std::to_string(b));
      o.add_edge(leaf, mid);
    }
  }
  return o;
}

struct ToyModel {
  static constexpr size_t kVocab = 8;

  ToyModel(bool complex, StructureModel structure, std::uint64_t seed)
      : rng(seed), ontology(toy_ontology()) {
    words = toy_words(kVocab, 4, rng);
    EncoderConfig config;
    config.word_dim = 4;
    config.position_dim = 2;
    config.dim = 3;
    config.window = 3;
    config.max_position = 4;
    config.complex = complex;
    encoder = EncoderParams::init(config, rng);
    types = TypeEmbeddings::init("types", ontology.size(), config.dim, complex, rng);
    linker = LinkerParams::init(6, config.dim, complex, rng);
    hierarchy = HierarchyParams::init(structure, config.dim, 0.5, rng);
    for (int i = 0; i < 3; ++i) mentions.push_back(toy_mention(kVocab, rng));
    // Bigger than Glorot so the losses are far from their flat regions.
    for (numcore::Parameter *p : all_parameters()) {
      for (double &v : p->value.values()) v *= 1.5;
    }
  }

  MentionVar encode(numcore::Tape &tape, const Mention &m) {
    MentionVar v = encode_mention(tape, m, words, encoder);
    if (encoder.config.complex) v = project_complex(tape, v, encoder);
    return v;
  }

  std::vector<numcore::Parameter *> all_parameters() {
    std::vector<numcore::Parameter *> out = encoder.parameters();
    for (auto *p : types.parameters()) out.push_back(p);
    for (auto *p : linker.parameters()) out.push_back(p);
    for (auto *p : hierarchy.parameters()) out.push_back(p);
    return out;
  }

  numcore::Tensor gold() const {
    return numcore::Tensor::vector({1, 1, 0, 1, 0, 0, 0});
  }

  numcore::Var mention_loss(numcore::Tape &tape) {
    HierarchyParams *h = hierarchy.model == StructureModel::kBilinear ? &hierarchy : nullptr;
    return mention_typing_loss(type_logits(tape, encode(tape, mentions[0]), types, h),
                               gold());
  }

  numcore::Var bag_loss(numcore::Tape &tape) {
    std::vector<numcore::Var> rows;
    for (const Mention &m : mentions) rows.push_back(type_logits(tape, encode(tape, m), types));
    return entity_typing_loss(bag_logits(numcore::ops::stack_rows(rows)), gold());
  }

  numcore::Var link_loss(numcore::Tape &tape) {
    const size_t rows[] = {4, 1, 3, 0};
    const double csim[] = {0.9, 0.25, 0.6, 0.0};
    return linking_loss(linking_scores(tape, encode(tape, mentions[1]), rows, csim, linker), 2);
  }

  LinkSample sample() const {
    // /r/1/0 is-a /r/1, corrupted with every non-parent concept.
    LinkSample s;
    s.positive = {5, 4};
    for (ConceptId p : {0u, 1u, 2u, 3u, 6u}) s.negatives.push_back({5, p});
    return s;
  }

  numcore::Var structure(numcore::Tape &tape) {
    return struct_loss(tape, sample(), types, hierarchy);
  }

  numcore::Var joint(numcore::Tape &tape) {
    return joint_loss(mention_loss(tape), structure(tape), 0.5);
  }

  std::mt19937_64 rng;
  Ontology ontology;
  WordEmbeddings words;
  EncoderParams encoder;
  TypeEmbeddings types;
  LinkerParams linker;
  HierarchyParams hierarchy;
  std::vector<Mention> mentions;
};

// n distinct two-word names built from random syllables.
inline std::vector<std::pair<std::string, std::string>> toy_kb(size_t n, std::uint64_t seed) {
  static const char *kSyllables[] = {"ka", "lo", "mir", "tan", "sel", "bru", "vo", "ne",
                                     "dri", "pas", "qu", "ze", "ho", "fin", "gra"};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> syl(0, 14), len(2, 4);
  std::set<std::string> seen;
  std::vector<std::pair<std::string, std::string>> out;
  auto word = [&] {
    std::string w;
    for (int i = len(rng); i > 0; --i) w += kSyllables[syl(rng)];
    return w;
  };
  while (out.size() < n) {
    std::string name = word() + " " + word();
    if (!seen.insert(name).second) continue;
    out.emplace_back("e" + std::to_string(out.size()), name);
  }
  return out;
}

// Substitutes, deletes, or inserts one lowercase letter.
inline std::string one_edit(const std::string &s, std::mt19937_64 &rng) {
  std::uniform_int_distribution<size_t> pos(0, s.size() - 1);
  std::uniform_int_distribution<int> letter('a', 'z'), kind(0, 2);
  std::string out = s;
  size_t p = pos(rng);
  while (out[p] == ' ') p = pos(rng);
  switch (kind(rng)) {
    case 0: {
      char c = static_cast<char>(letter(rng));
      while (c == out[p]) c = static_cast<char>(letter(rng));
      out[p] = c;
      break;
    }
    case 1:
      out.erase(p, 1);
      break;
    default:
      out.insert(out.begin() + static_cast<std::ptrdiff_t>(p), static_cast<char>(letter(rng)));
  }
  return out;
}

inline Dataset typing_dataset(const SynthData &synth) {
  Dataset data;
  data.ontology = synth.types;
  data.words = synth.words;
  data.train = synth.train;
  data.dev = synth.dev;
  data.test = synth.test;
  return data;
}

inline Dataset linking_dataset(const SynthData &synth) {
  Dataset data;
  data.ontology = synth.kb;
  data.words = synth.words;
  data.train = synth.link_train;
  data.dev = synth.link_dev;
  data.test = synth.link_test;
  data.attach_index(NgramIndex::build(synth.names));
  return data;
}

// A few seconds of data for trainer tests.
inline SynthConfig small_synth(std::uint64_t seed) {
  SynthConfig c;
  c.branching = {2, 2};
  c.entities = 24;
  c.mentions_per_entity = 4;
  c.vocab_size = 60;
  c.word_dim = 8;
  c.sentence_length = 8;
  c.dev_fraction = 0.25;
  c.test_fraction = 0.25;
  c.seed = seed;
  return c;
}

inline TrainConfig small_config(Task task, const std::string &variant) {
  TrainConfig c;
  c.task = task;
  c.variant = parse_variant(variant);
  c.dim = 8;
  c.position_dim = 2;
  c.window = 3;
  c.max_epochs = 3;
  c.batch_size = 8;
  c.negatives = 3;
  c.bag_k_train = 3;
  c.bag_k_test = 4;
  c.candidates_k = 10;
  c.lr = 0.01;
  return c;
}

struct NamedCheck {
  std::string name;
  numcore::GradCheckResult result;
};

// Central-difference checks of every training loss against tape gradients.
inline std::vector<NamedCheck> check_all_losses(double eps, std::uint64_t seed) {
  using numcore::grad_check;
  using numcore::Tape;
  std::vector<NamedCheck> out;
  {
    ToyModel m(false, StructureModel::kBilinear, seed);
    auto params = m.all_parameters();
    out.push_back({"mention bce", grad_check([&](Tape &t) { return m.mention_loss(t); }, params, eps)});
    out.push_back({"bag bce", grad_check([&](Tape &t) { return m.bag_loss(t); }, params, eps)});
    out.push_back({"linking ce", grad_check([&](Tape &t) { return m.link_loss(t); }, params, eps)});
    out.push_back({"bilinear structure", grad_check([&](Tape &t) { return m.structure(t); }, params, eps)});
    out.push_back({"joint", grad_check([&](Tape &t) { return m.joint(t); }, params, eps)});
  }
  {
    ToyModel m(true, StructureModel::kComplex, seed);
    auto params = m.all_parameters();
    out.push_back({"complex structure", grad_check([&](Tape &t) { return m.structure(t); }, params, eps)});
    out.push_back({"complex mention bce", grad_check([&](Tape &t) { return m.mention_loss(t); }, params, eps)});
    out.push_back({"complex linking ce", grad_check([&](Tape &t) { return m.link_loss(t); }, params, eps)});
    out.push_back({"complex joint", grad_check([&](Tape &t) { return m.joint(t); }, params, eps)});
  }
  return out;
}

}  // namespace hiertype::testing

#endif  // HIERTYPE_TESTS_FIXTURES_H_
