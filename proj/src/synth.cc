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

#include "hiertype/synth.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "hiertype/errors.h"
#include "text_util.h"

namespace hiertype {

namespace {

const char *const kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p",
                               "r", "s", "t", "v", "z", "ch", "sh"};
const char *const kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};

std::string random_word(Rng &rng, size_t syllables) {
  std::uniform_int_distribution<size_t> onset(0, std::size(kOnsets) - 1);
  std::uniform_int_distribution<size_t> vowel(0, std::size(kVowels) - 1);
  std::string w;
  for (size_t i = 0; i < syllables; ++i) {
    w += kOnsets[onset(rng)];
    w += kVowels[vowel(rng)];
  }
  return w;
}

std::string one_char_edit(const std::string &s, Rng &rng) {
  std::uniform_int_distribution<size_t> pos(0, s.size() - 1);
  std::uniform_int_distribution<int> letter('a', 'z');
  std::string out = s;
  size_t p = pos(rng);
  while (out[p] == ' ') p = pos(rng);
  char c = static_cast<char>(letter(rng));
  while (c == out[p]) c = static_cast<char>(letter(rng));
  out[p] = c;
  return out;
}

std::vector<double> gaussian(size_t n, double sd, Rng &rng) {
  std::normal_distribution<double> dist(0.0, sd);
  std::vector<double> v(n);
  for (double &x : v) x = dist(rng);
  return v;
}

std::vector<std::string> split_words(const std::string &s) {
  std::vector<std::string> out;
  for (auto part : internal::split(s, ' ')) {
    if (!part.empty()) out.emplace_back(part);
  }
  return out;
}

}  // namespace

SynthData generate_synthetic(const SynthConfig &config) {
  if (config.branching.empty()) throw ConfigError("synthetic hierarchy needs a depth");
  for (size_t b : config.branching) {
    if (b == 0) throw ConfigError("branching factors must be positive");
  }
  if (config.entities == 0 || config.mentions_per_entity == 0) {
    throw ConfigError("synthetic corpus needs entities and mentions");
  }
  if (config.cue_rates.empty()) throw ConfigError("cue_rates must not be empty");
  if (config.word_dim == 0 || config.cues_per_type == 0 || config.vocab_size == 0) {
    throw ConfigError("synthetic vocabulary sizes must be positive");
  }
  if (config.sentence_length < 2) throw ConfigError("sentence_length must be >= 2");
  if (config.dev_fraction < 0 || config.test_fraction < 0 ||
      config.dev_fraction + config.test_fraction >= 1) {
    throw ConfigError("split fractions must leave a training portion");
  }

  Rng rng(config.seed);
  SynthData data;
  const size_t d = config.word_dim;

  // Types, level by level, with prototypes drifting from their parents.
  std::vector<std::vector<ConceptId>> levels;
  std::vector<size_t> depth_of;
  std::vector<std::vector<double>> prototype;
  std::vector<ConceptId> frontier;
  for (size_t level = 0; level < config.branching.size(); ++level) {
    std::vector<ConceptId> next;
    const size_t parents = level == 0 ? 1 : frontier.size();
    for (size_t pi = 0; pi < parents; ++pi) {
      for (size_t j = 0; j < config.branching[level]; ++j) {
        std::string name = level == 0 ? "/t" + std::to_string(j)
                                      : data.types.name(frontier[pi]) + "/t" + std::to_string(j);
        ConceptId c = data.types.add_concept(name);
        auto drift = gaussian(d, level == 0 ? 1.0 : config.prototype_spread, rng);
        if (level > 0) {
          data.types.add_edge(c, frontier[pi]);
          for (size_t k = 0; k < d; ++k) drift[k] += prototype[frontier[pi]][k];
        }
        prototype.push_back(std::move(drift));
        depth_of.push_back(level);
        next.push_back(c);
      }
    }
    levels.push_back(next);
    frontier = std::move(next);
  }
  const std::vector<ConceptId> &leaves = levels.back();
  for (ConceptId leaf : leaves) data.types.set_leaf_label(leaf);

  // Vocabulary: cue words near their type's prototype, filler words, names.
  std::vector<std::string> vocab;
  std::vector<std::vector<double>> vectors;
  std::vector<std::vector<std::string>> cues(data.types.size());
  for (ConceptId t = 0; t < data.types.size(); ++t) {
    for (size_t k = 0; k < config.cues_per_type; ++k) {
      std::string w = "cue" + std::to_string(t) + "_" + std::to_string(k);
      auto v = gaussian(d, config.word_noise, rng);
      for (size_t i = 0; i < d; ++i) v[i] += prototype[t][i];
      cues[t].push_back(w);
      vocab.push_back(w);
      vectors.push_back(std::move(v));
    }
  }
  std::vector<std::string> filler;
  for (size_t k = 0; k < config.vocab_size; ++k) {
    filler.push_back("w" + std::to_string(k));
    vocab.push_back(filler.back());
    vectors.push_back(gaussian(d, 1.0, rng));
  }

  // Entities with unique two-word names and a uniformly drawn leaf type.
  std::set<std::string> used_names;
  std::vector<ConceptId> entity_type(config.entities);
  std::vector<std::string> entity_key(config.entities);
  std::vector<std::string> entity_name(config.entities);
  std::uniform_int_distribution<size_t> pick_leaf(0, leaves.size() - 1);
  std::uniform_int_distribution<size_t> syllables(2, 3);
  for (size_t e = 0; e < config.entities; ++e) {
    std::string name;
    do {
      name = random_word(rng, syllables(rng)) + " " + random_word(rng, syllables(rng));
    } while (!used_names.insert(name).second);
    entity_key[e] = "ent" + std::to_string(e);
    entity_name[e] = name;
    entity_type[e] = leaves[pick_leaf(rng)];
    data.names.emplace_back(entity_key[e], name);
  }
  std::set<std::string> name_words;
  for (const auto &n : entity_name) {
    for (const auto &w : split_words(n)) name_words.insert(w);
  }
  for (const auto &w : name_words) {
    vocab.push_back(w);
    vectors.push_back(gaussian(d, 1.0, rng));
  }

  // KB: the type forest plus entities under their leaf types.
  data.kb = data.types;
  for (size_t e = 0; e < config.entities; ++e) {
    ConceptId c = data.kb.add_concept(entity_key[e]);
    data.kb.add_edge(c, entity_type[e]);
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<size_t> pick_filler(0, filler.size() - 1);
  auto cue_rate = [&](size_t level) {
    return config.cue_rates[std::min(level, config.cue_rates.size() - 1)];
  };
  auto make_mention = [&](size_t e, size_t k, const std::vector<std::string> &span) {
    std::vector<std::string> context;
    std::vector<ConceptId> chain = data.types.ancestors(entity_type[e]);
    chain.push_back(entity_type[e]);
    for (ConceptId t : chain) {
      const size_t level = depth_of[t];
      if (unit(rng) >= cue_rate(level)) continue;
      ConceptId source = t;
      if (unit(rng) < config.noise) {
        std::uniform_int_distribution<size_t> other(0, levels[level].size() - 1);
        source = levels[level][other(rng)];
      }
      std::uniform_int_distribution<size_t> pick_cue(0, cues[source].size() - 1);
      context.push_back(cues[source][pick_cue(rng)]);
    }
    const size_t target = std::max(config.sentence_length, context.size() + span.size());
    while (context.size() + span.size() < target) context.push_back(filler[pick_filler(rng)]);
    std::shuffle(context.begin(), context.end(), rng);
    std::uniform_int_distribution<size_t> pick_pos(0, context.size());
    const size_t start = pick_pos(rng);
    Mention m;
    m.id = entity_key[e] + "_" + std::to_string(k);
    m.tokens.assign(context.begin(), context.begin() + static_cast<long>(start));
    m.tokens.insert(m.tokens.end(), span.begin(), span.end());
    m.tokens.insert(m.tokens.end(), context.begin() + static_cast<long>(start), context.end());
    m.start = start;
    m.end = start + span.size();
    m.labels = {data.types.name(entity_type[e])};
    m.entity = entity_key[e];
    return m;
  };

  // Typing corpus split by entity.
  std::vector<size_t> order(config.entities);
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  const size_t n_test = static_cast<size_t>(std::round(config.test_fraction * config.entities));
  const size_t n_dev = static_cast<size_t>(std::round(config.dev_fraction * config.entities));
  for (size_t r = 0; r < order.size(); ++r) {
    const size_t e = order[r];
    auto &split = r < n_test ? data.test : (r < n_test + n_dev ? data.dev : data.train);
    for (size_t k = 0; k < config.mentions_per_entity; ++k) {
      split.push_back(make_mention(e, k, split_words(entity_name[e])));
    }
  }

  // Linking corpus split by mention; surfaces are exact, typo, or alias.
  std::set<std::string> extra_words;
  std::vector<Mention> link;
  for (size_t e = 0; e < config.entities; ++e) {
    for (size_t k = 0; k < config.mentions_per_entity; ++k) {
      const double u = unit(rng);
      std::string surface = entity_name[e];
      if (u < config.alias_rate) {
        surface = random_word(rng, 4);
      } else if (u < config.alias_rate + config.typo_rate) {
        surface = one_char_edit(entity_name[e], rng);
      }
      auto span = split_words(surface);
      for (const auto &w : span) {
        if (!name_words.count(w)) extra_words.insert(w);
      }
      Mention m = make_mention(e, k, span);
      m.labels.clear();
      link.push_back(std::move(m));
    }
  }
  std::shuffle(link.begin(), link.end(), rng);
  const size_t l_test = static_cast<size_t>(std::round(config.test_fraction * link.size()));
  const size_t l_dev = static_cast<size_t>(std::round(config.dev_fraction * link.size()));
  for (size_t i = 0; i < link.size(); ++i) {
    auto &split = i < l_test ? data.link_test : (i < l_test + l_dev ? data.link_dev : data.link_train);
    split.push_back(std::move(link[i]));
  }
  for (const auto &w : extra_words) {
    vocab.push_back(w);
    vectors.push_back(gaussian(d, 1.0, rng));
  }

  numcore::Tensor matrix({vocab.size(), d});
  for (size_t r = 0; r < vocab.size(); ++r) {
    std::copy(vectors[r].begin(), vectors[r].end(), matrix.row(r).begin());
  }
  data.words = WordEmbeddings(std::move(vocab), std::move(matrix));
  return data;
}

void write_synthetic(const SynthData &data, const std::string &dir) {
  const std::string base = dir.empty() || dir.back() == '/' ? dir : dir + "/";
  data.types.save(base + "types.tsv");
  data.types.save_leaf_mask(base + "leaf_mask.txt");
  data.kb.save(base + "kb.tsv");
  {
    auto out = internal::open_output(base + "names.tsv");
    for (const auto &[key, name] : data.names) out << key << '\t' << name << '\n';
    if (!out) throw IOError("write failed for " + base + "names.tsv");
  }
  data.words.save(base + "vectors.txt");
  save_mentions(base + "train.jsonl", data.train);
  save_mentions(base + "dev.jsonl", data.dev);
  save_mentions(base + "test.jsonl", data.test);
  save_mentions(base + "link_train.jsonl", data.link_train);
  save_mentions(base + "link_dev.jsonl", data.link_dev);
  save_mentions(base + "link_test.jsonl", data.link_test);
}

}  // namespace hiertype
