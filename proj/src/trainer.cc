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

#include "hiertype/trainer.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "hiertype/errors.h"
#include "json.hpp"
#include "text_util.h"

namespace hiertype {

using numcore::Parameter;
using numcore::Tape;
using numcore::Tensor;
using numcore::TensorArchive;
using numcore::Var;
namespace ops = numcore::ops;

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view key, std::string_view text) {
  text = internal::trim(text);
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ConfigError("bad number '" + std::string(text) + "' for " + std::string(key));
  }
  return v;
}

std::uint64_t parse_uint(std::string_view key, std::string_view text) {
  text = internal::trim(text);
  std::uint64_t v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigError("bad non-negative integer '" + std::string(text) + "' for " +
                      std::string(key));
  }
  return v;
}

// Seeds a derived stream so that parallel workers stay reproducible.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kEvalStream = 0xE7A1;

void parallel_for(size_t n, const std::function<void(size_t)> &fn) {
  const size_t workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto &t : pool) t.join();
  for (auto &e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

Tensor label_tensor(const std::vector<ConceptId> &labels, size_t n) {
  Tensor t({n});
  for (ConceptId c : labels) t[c] = 1.0;
  return t;
}

Var sum_all(std::vector<Var> &terms) {
  Var total = terms.front();
  for (size_t i = 1; i < terms.size(); ++i) total = ops::add(total, terms[i]);
  return total;
}

MentionVar encode(Tape &tape, Model &model, const Mention &mention,
                  const WordEmbeddings &words, const Dropout &dropout) {
  MentionVar mv = encode_mention(tape, mention, words, model.encoder, dropout);
  if (model.config.variant.complex) mv = project_complex(tape, mv, model.encoder);
  return mv;
}

HierarchyParams *typing_hierarchy(Model &model) {
  return model.hierarchy.model == StructureModel::kBilinear ? &model.hierarchy : nullptr;
}

Var mention_logits(Tape &tape, Model &model, const Mention &mention,
                   const WordEmbeddings &words, const Dropout &dropout) {
  MentionVar mv = encode(tape, model, mention, words, dropout);
  return type_logits(tape, mv, model.types, typing_hierarchy(model));
}

Var bag_forward(Tape &tape, Model &model, const Bag &bag,
                std::span<const size_t> picks, const WordEmbeddings &words,
                const Dropout &dropout) {
  std::vector<Var> rows;
  rows.reserve(picks.size());
  for (size_t i : picks) {
    rows.push_back(mention_logits(tape, model, bag.mentions[i], words, dropout));
  }
  return bag_logits(ops::stack_rows(rows));
}

Var link_forward(Tape &tape, Model &model, const Mention &mention,
                 const CandidateSet &set, const Dataset &data,
                 const Dropout &dropout) {
  std::vector<size_t> rows;
  std::vector<double> csim;
  rows.reserve(set.entries.size());
  for (const CandidateEntry &e : set.entries) {
    rows.push_back(data.index_concepts.at(e.entity));
    csim.push_back(e.csim);
  }
  MentionVar mv = encode(tape, model, mention, data.words, dropout);
  return linking_scores(tape, mv, rows, csim, model.linker);
}

}  // namespace

Variant parse_variant(std::string_view text) {
  auto parts = internal::split(text, '+');
  if (parts.empty() || internal::trim(parts[0]) != "cnn") {
    throw ConfigError("variant '" + std::string(text) + "' must start with 'cnn'");
  }
  Variant v;
  for (size_t i = 1; i < parts.size(); ++i) {
    std::string_view p = internal::trim(parts[i]);
    if (p == "complex") {
      v.complex = true;
    } else if (p == "closure" || p == "transitive") {
      v.closure = true;
    } else if (p == "hier" || p == "hierarchy") {
      v.hierarchy = true;
    } else {
      throw ConfigError("unknown variant component '" + std::string(p) + "'");
    }
  }
  return v;
}

std::string variant_name(const Variant &variant) {
  std::string s = "cnn";
  if (variant.complex) s += "+complex";
  if (variant.hierarchy) s += "+hier";
  if (variant.closure) s += "+closure";
  return s;
}

void TrainConfig::set(std::string_view key, std::string_view value) {
  value = internal::trim(value);
  if (key == "task") {
    task = parse_task(value);
  } else if (key == "variant") {
    variant = parse_variant(value);
  } else if (key == "lr") {
    lr = parse_double(key, value);
  } else if (key == "dropout_keep" || key == "dropout") {
    dropout_keep = parse_double(key, value);
  } else if (key == "l2") {
    l2 = parse_double(key, value);
  } else if (key == "negatives") {
    negatives = parse_uint(key, value);
  } else if (key == "gamma") {
    gamma = parse_double(key, value);
  } else if (key == "bag_k_train" || key == "bag_k") {
    bag_k_train = parse_uint(key, value);
  } else if (key == "bag_k_test") {
    bag_k_test = parse_uint(key, value);
  } else if (key == "seed") {
    seed = parse_uint(key, value);
  } else if (key == "max_epochs") {
    max_epochs = parse_uint(key, value);
  } else if (key == "patience") {
    patience = parse_uint(key, value);
  } else if (key == "batch_size") {
    batch_size = parse_uint(key, value);
  } else if (key == "max_steps") {
    max_steps = parse_uint(key, value);
  } else if (key == "struct_samples_per_batch") {
    struct_samples_per_batch = parse_uint(key, value);
  } else if (key == "candidates_k") {
    candidates_k = parse_uint(key, value);
  } else if (key == "position_dim") {
    position_dim = parse_uint(key, value);
  } else if (key == "dim") {
    dim = parse_uint(key, value);
  } else if (key == "window") {
    window = parse_uint(key, value);
  } else if (key == "max_position") {
    max_position = static_cast<int>(parse_uint(key, value));
  } else {
    throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  }
}

std::vector<std::pair<std::string, std::string>> TrainConfig::entries() const {
  return {
      {"task", task_name(task)},
      {"variant", variant_name(variant)},
      {"lr", format_double(lr)},
      {"dropout_keep", format_double(dropout_keep)},
      {"l2", format_double(l2)},
      {"negatives", std::to_string(negatives)},
      {"gamma", format_double(gamma)},
      {"bag_k_train", std::to_string(bag_k_train)},
      {"bag_k_test", std::to_string(bag_k_test)},
      {"seed", std::to_string(seed)},
      {"max_epochs", std::to_string(max_epochs)},
      {"patience", std::to_string(patience)},
      {"batch_size", std::to_string(batch_size)},
      {"max_steps", std::to_string(max_steps)},
      {"struct_samples_per_batch", std::to_string(struct_samples_per_batch)},
      {"candidates_k", std::to_string(candidates_k)},
      {"position_dim", std::to_string(position_dim)},
      {"dim", std::to_string(dim)},
      {"window", std::to_string(window)},
      {"max_position", std::to_string(max_position)},
  };
}

void TrainConfig::validate() const {
  if (lr < 0) throw ConfigError("lr must be non-negative");
  if (!(dropout_keep > 0 && dropout_keep <= 1)) {
    throw ConfigError("dropout_keep must be in (0, 1]");
  }
  if (l2 < 0) throw ConfigError("l2 must be non-negative");
  if (gamma < 0) throw ConfigError("gamma must be non-negative");
  if (variant.hierarchy && negatives == 0) {
    throw ConfigError("structure loss needs at least one negative");
  }
  if (variant.hierarchy && struct_samples_per_batch == 0) {
    throw ConfigError("struct_samples_per_batch must be positive with the structure loss");
  }
  if (task == Task::kLinking && variant.closure) {
    throw ConfigError("transitive closure applies to typing tasks only");
  }
  if (bag_k_train == 0 || bag_k_test == 0) throw ConfigError("bag sizes must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (max_epochs == 0) throw ConfigError("max_epochs must be positive");
  if (candidates_k == 0) throw ConfigError("candidates_k must be positive");
  if (dim == 0 || position_dim == 0) throw ConfigError("dimensions must be positive");
  if (window % 2 == 0) throw ConfigError("window must be odd");
  if (max_position < 1) throw ConfigError("max_position must be >= 1");
}

std::string TrainConfig::summary() const {
  std::string s;
  for (const auto &[k, v] : entries()) s += k + "=" + v + "\n";
  return s;
}

TrainConfig TrainConfig::from_file(const std::string &path) {
  auto in = internal::open_input(path);
  TrainConfig config;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (size_t hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = internal::trim(view);
    if (view.empty()) continue;
    size_t eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    try {
      config.set(internal::trim(view.substr(0, eq)), view.substr(eq + 1));
    } catch (const ConfigError &e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return config;
}

void Dataset::attach_index(NgramIndex idx) {
  index_concepts.clear();
  index_concepts.reserve(idx.num_entities());
  for (size_t r = 0; r < idx.num_entities(); ++r) {
    auto c = ontology.find(idx.entity_key(r));
    if (!c) {
      throw UnknownConcept("indexed entity '" + idx.entity_key(r) +
                           "' is not in the ontology");
    }
    index_concepts.push_back(*c);
  }
  index = std::move(idx);
}

Dataset load_dataset(const DataPaths &paths, Task task, size_t word_dim) {
  Dataset data;
  if (paths.ontology.empty()) throw ConfigError("an ontology file is required");
  data.ontology = Ontology::load(paths.ontology);
  if (!paths.leaf_mask.empty()) data.ontology.load_leaf_mask(paths.leaf_mask);
  if (!paths.train.empty()) data.train = load_mentions(paths.train, task);
  if (!paths.dev.empty()) data.dev = load_mentions(paths.dev, task);
  if (!paths.test.empty()) data.test = load_mentions(paths.test, task);
  std::set<std::string> vocab;
  for (const auto *split : {&data.train, &data.dev, &data.test}) {
    auto v = collect_vocab(*split);
    vocab.insert(v.begin(), v.end());
  }
  if (paths.embeddings.empty()) throw ConfigError("a word vector file is required");
  data.words = WordEmbeddings::load(paths.embeddings, vocab, word_dim);
  if (task == Task::kLinking) {
    if (!paths.index.empty()) {
      data.attach_index(NgramIndex::load(paths.index));
    } else if (!paths.names.empty()) {
      auto names = load_names(paths.names);
      data.attach_index(NgramIndex::build(names));
    } else {
      throw ConfigError("linking needs an entity name file or a prebuilt index");
    }
  }
  return data;
}

Model Model::init(const TrainConfig &config, size_t num_concepts, size_t word_dim,
                  Rng &rng) {
  config.validate();
  if (num_concepts == 0) throw ConfigError("ontology has no concepts");
  Model model;
  model.config = config;
  EncoderConfig enc;
  enc.word_dim = word_dim;
  enc.position_dim = config.position_dim;
  enc.dim = config.dim;
  enc.window = config.window;
  enc.max_position = config.max_position;
  enc.complex = config.variant.complex;
  model.encoder = EncoderParams::init(enc, rng);
  if (config.task == Task::kLinking) {
    model.linker = LinkerParams::init(num_concepts, config.dim, enc.complex, rng);
  } else {
    model.types = TypeEmbeddings::init("types", num_concepts, config.dim, enc.complex, rng);
  }
  StructureModel structure = StructureModel::kNone;
  if (config.variant.hierarchy) {
    structure = enc.complex ? StructureModel::kComplex : StructureModel::kBilinear;
  }
  model.hierarchy = HierarchyParams::init(structure, config.dim, config.gamma, rng);
  return model;
}

std::vector<Parameter *> Model::parameters() {
  std::vector<Parameter *> out = encoder.parameters();
  auto more = config.task == Task::kLinking ? linker.parameters() : types.parameters();
  out.insert(out.end(), more.begin(), more.end());
  auto h = hierarchy.parameters();
  out.insert(out.end(), h.begin(), h.end());
  return out;
}

TypeEmbeddings &Model::concept_table() {
  return config.task == Task::kLinking ? linker.entities : types;
}

TensorArchive Model::to_archive() const {
  TensorArchive archive;
  archive.metadata["format"] = "hiertype-model";
  for (const auto &[k, v] : config.entries()) archive.metadata["config." + k] = v;
  archive.metadata["word_dim"] = std::to_string(encoder.config.word_dim);
  const TypeEmbeddings &table =
      config.task == Task::kLinking ? linker.entities : types;
  archive.metadata["num_concepts"] = std::to_string(table.count());
  for (Parameter *p : const_cast<Model *>(this)->parameters()) {
    archive.tensors[p->name] = p->value;
  }
  return archive;
}

Model Model::from_archive(const TensorArchive &archive) {
  auto meta = [&](const std::string &key) -> const std::string & {
    auto it = archive.metadata.find(key);
    if (it == archive.metadata.end()) {
      throw DataError("checkpoint is missing metadata '" + key + "'");
    }
    return it->second;
  };
  if (meta("format") != "hiertype-model") throw DataError("not a model checkpoint");
  TrainConfig config;
  for (const auto &[k, v] : archive.metadata) {
    if (k.rfind("config.", 0) == 0) {
      try {
        config.set(k.substr(7), v);
      } catch (const ConfigError &e) {
        throw DataError(std::string("checkpoint config: ") + e.what());
      }
    }
  }
  size_t word_dim = 0, num_concepts = 0;
  try {
    word_dim = parse_uint("word_dim", meta("word_dim"));
    num_concepts = parse_uint("num_concepts", meta("num_concepts"));
  } catch (const ConfigError &e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
  Rng rng(0);
  Model model = Model::init(config, num_concepts, word_dim, rng);
  auto params = model.parameters();
  if (params.size() != archive.tensors.size()) {
    throw DataError("checkpoint holds " + std::to_string(archive.tensors.size()) +
                    " tensors, model expects " + std::to_string(params.size()));
  }
  for (Parameter *p : params) {
    auto it = archive.tensors.find(p->name);
    if (it == archive.tensors.end()) throw DataError("checkpoint lacks tensor " + p->name);
    if (it->second.shape() != p->value.shape()) {
      throw DataError("checkpoint tensor " + p->name + " has shape " +
                      numcore::shape_string(it->second.shape()) + ", expected " +
                      numcore::shape_string(p->value.shape()));
    }
    p->value = it->second;
  }
  return model;
}

void adam_step(std::span<Parameter *const> params, AdamState &state, double lr,
               double l2) {
  if (state.m.empty()) {
    for (Parameter *p : params) {
      state.m.emplace_back(p->value.shape());
      state.v.emplace_back(p->value.shape());
    }
  }
  if (state.m.size() != params.size()) {
    throw ShapeError("optimizer state was built for a different parameter list");
  }
  ++state.t;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (size_t i = 0; i < params.size(); ++i) {
    Parameter &p = *params[i];
    Tensor &m = state.m[i];
    Tensor &v = state.v[i];
    if (p.grad.shape() != p.value.shape() || m.shape() != p.value.shape() ||
        v.shape() != p.value.shape()) {
      throw ShapeError("adam_step: shape mismatch for " + p.name);
    }
    double *theta = p.value.data();
    const double *g = p.grad.data();
    double *mm = m.data();
    double *vv = v.data();
    for (size_t k = 0; k < p.value.size(); ++k) {
      const double grad = g[k] + l2 * theta[k];
      mm[k] = state.beta1 * mm[k] + (1.0 - state.beta1) * grad;
      vv[k] = state.beta2 * vv[k] + (1.0 - state.beta2) * grad * grad;
      const double mhat = mm[k] / c1;
      const double vhat = vv[k] / c2;
      theta[k] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

std::vector<double> predict_type_probs(Model &model, const Mention &mention,
                                       const WordEmbeddings &words) {
  Tape tape;
  Var logits = mention_logits(tape, model, mention, words, {});
  std::vector<double> probs(logits.size());
  for (size_t i = 0; i < probs.size(); ++i) probs[i] = numcore::sigmoid(logits.value()[i]);
  return probs;
}

std::vector<double> predict_bag_scores(Model &model, const Bag &bag, size_t k,
                                       const WordEmbeddings &words, Rng &rng) {
  Tape tape;
  auto picks = sample_bag(bag, k, rng);
  if (picks.empty()) throw DataError("entity '" + bag.entity + "' has no mentions");
  Var pooled = bag_forward(tape, model, bag, picks, words, {});
  return pooled.value().values();
}

std::vector<double> predict_link_scores(Model &model, const Mention &mention,
                                        const CandidateSet &candidates,
                                        const Dataset &data) {
  if (candidates.entries.empty()) return {};
  Tape tape;
  Var scores = link_forward(tape, model, mention, candidates, data, {});
  return scores.value().values();
}

std::vector<CandidateSet> candidate_sets(const Dataset &data,
                                         std::span<const Mention> mentions,
                                         size_t k) {
  if (!data.index) throw ConfigError("no candidate index loaded");
  std::vector<CandidateSet> sets(mentions.size());
  parallel_for(mentions.size(), [&](size_t i) {
    const Mention &m = mentions[i];
    sets[i] = data.index->candidates(m.surface(), k, data.index->find_entity(m.entity));
    sets[i].mention_id = m.id;
  });
  return sets;
}

namespace {

std::vector<std::string> names_of(const Ontology &onto, const std::vector<ConceptId> &ids) {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (ConceptId c : ids) out.push_back(onto.name(c));
  return out;
}

}  // namespace

EvalReport evaluate(Model &model, const Dataset &data,
                    std::span<const Mention> mentions, bool with_predictions) {
  EvalReport report;
  report.task = task_name(model.config.task);
  const Ontology &onto = data.ontology;
  if (model.config.task == Task::kMentionTyping) {
    std::vector<TypeSet> preds(mentions.size()), golds(mentions.size());
    parallel_for(mentions.size(), [&](size_t i) {
      preds[i] = figer_decode(predict_type_probs(model, mentions[i], data.words));
      golds[i] = resolve_labels(mentions[i], onto, false);
    });
    report.metrics["strict_accuracy"] = strict_accuracy(preds, golds);
    report.metrics["macro_f1"] = macro_f1(preds, golds);
    report.metrics["macro_f1_averaged_pr"] = macro_f1_averaged_pr(preds, golds);
    report.metrics["micro_f1"] = micro_f1(preds, golds);
    report.metrics["dev_metric"] = report.metrics["strict_accuracy"];
    if (with_predictions) {
      for (size_t i = 0; i < mentions.size(); ++i) {
        report.predictions.push_back({mentions[i].id, mentions[i].surface(),
                                      names_of(onto, golds[i]), names_of(onto, preds[i])});
      }
    }
  } else if (model.config.task == Task::kEntityTyping) {
    auto bags = build_bags(mentions, onto, false);
    Tensor scores({bags.size(), onto.size()});
    parallel_for(bags.size(), [&](size_t b) {
      Rng rng(mix_seed(model.config.seed, kEvalStream + b));
      auto s = predict_bag_scores(model, bags[b], model.config.bag_k_test, data.words, rng);
      std::copy(s.begin(), s.end(), scores.row(b).begin());
    });
    std::vector<bool> mask = onto.leaf_mask();
    if (std::none_of(mask.begin(), mask.end(), [](bool b) { return b; })) {
      mask.assign(onto.size(), true);
    }
    std::vector<TypeSet> golds;
    for (const Bag &bag : bags) golds.push_back(bag.labels);
    MapResult map = mean_average_precision(scores, golds, mask);
    report.metrics["map"] = map.map;
    report.metrics["dev_metric"] = map.map;
    for (const auto &[t, ap] : map.per_type) report.per_type_ap.emplace_back(onto.name(t), ap);
    if (with_predictions) {
      for (size_t b = 0; b < bags.size(); ++b) {
        std::vector<double> probs(onto.size());
        for (size_t t = 0; t < onto.size(); ++t) probs[t] = numcore::sigmoid(scores.at(b, t));
        report.predictions.push_back({bags[b].entity, bags[b].mentions.front().surface(),
                                      names_of(onto, golds[b]),
                                      names_of(onto, figer_decode(probs))});
      }
    }
  } else {
    auto sets = candidate_sets(data, mentions, model.config.candidates_k);
    std::vector<std::string> preds(mentions.size()), golds(mentions.size());
    parallel_for(mentions.size(), [&](size_t i) {
      golds[i] = mentions[i].entity;
      auto s = predict_link_scores(model, mentions[i], sets[i], data);
      if (s.empty()) return;
      size_t best = static_cast<size_t>(std::max_element(s.begin(), s.end()) - s.begin());
      preds[i] = data.index->entity_key(sets[i].entries[best].entity);
    });
    LinkingAccuracy acc = linking_accuracy(preds, golds, sets);
    report.metrics["accuracy_original"] = acc.original;
    report.metrics["accuracy_normalized"] = acc.normalized;
    report.metrics["alias_recall"] =
        acc.mentions ? static_cast<double>(acc.alias_hits) / static_cast<double>(acc.mentions)
                     : 0.0;
    report.metrics["dev_metric"] = acc.normalized;
    if (with_predictions) {
      for (size_t i = 0; i < mentions.size(); ++i) {
        report.predictions.push_back({mentions[i].id, mentions[i].surface(), {golds[i]},
                                      preds[i].empty() ? std::vector<std::string>{}
                                                       : std::vector<std::string>{preds[i]}});
      }
    }
  }
  return report;
}

double primary_metric(const EvalReport &report) {
  auto it = report.metrics.find("dev_metric");
  if (it == report.metrics.end()) throw InternalError("report has no primary metric");
  return it->second;
}

std::string EpochLog::to_json() const {
  nlohmann::ordered_json j;
  j["epoch"] = epoch;
  j["steps"] = steps;
  j["task_loss"] = task_loss;
  j["struct_loss"] = struct_loss;
  j["dev_metric"] = dev_metric;
  j["wall_seconds"] = wall_seconds;
  return j.dump();
}

double structure_loss(Model &model, const Ontology &ontology,
                      std::span<const Link> links, size_t negatives, Rng &rng) {
  if (model.hierarchy.model == StructureModel::kNone) {
    throw ConfigError("model has no structure parameters");
  }
  if (links.empty()) return 0.0;
  double total = 0.0;
  for (const Link &link : links) {
    LinkSample sample = ontology.corrupt_link(link, negatives, rng);
    Tape tape;
    total += struct_loss(tape, sample, model.concept_table(), model.hierarchy).item();
  }
  return total / static_cast<double>(links.size());
}

TrainResult train(const TrainConfig &config, const Dataset &data,
                  std::ostream *log_stream) {
  config.validate();
  const Ontology &onto = data.ontology;
  if (data.train.empty()) throw DataError("training split is empty");
  if (config.variant.hierarchy && onto.num_edges() == 0) {
    throw ConfigError("the structure loss needs an ontology with edges");
  }
  Rng rng(config.seed);
  Model model = Model::init(config, onto.size(), data.words.dim(), rng);
  Rng dropout_rng(mix_seed(config.seed, 1));
  Rng struct_rng(mix_seed(config.seed, 2));
  Dropout dropout{config.dropout_keep, config.dropout_keep < 1.0 ? &dropout_rng : nullptr};

  // Training examples per task.
  std::vector<Tensor> mention_gold;
  std::vector<Bag> bags;
  std::vector<CandidateSet> sets;
  std::vector<size_t> examples;
  if (config.task == Task::kMentionTyping) {
    for (size_t i = 0; i < data.train.size(); ++i) {
      mention_gold.push_back(label_tensor(
          resolve_labels(data.train[i], onto, config.variant.closure), onto.size()));
      examples.push_back(i);
    }
  } else if (config.task == Task::kEntityTyping) {
    bags = build_bags(data.train, onto, config.variant.closure);
    for (size_t i = 0; i < bags.size(); ++i) examples.push_back(i);
  } else {
    sets = candidate_sets(data, data.train, config.candidates_k);
    for (size_t i = 0; i < sets.size(); ++i) {
      if (sets[i].gold_in_set) examples.push_back(i);
    }
    if (examples.empty()) throw DataError("no training mention has its gold entity among the candidates");
  }

  auto params = model.parameters();
  AdamState adam;
  TrainResult result;
  double best = -std::numeric_limits<double>::infinity();
  size_t bad_epochs = 0;
  const auto start = std::chrono::steady_clock::now();

  for (size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(examples.begin(), examples.end(), rng);
    double task_sum = 0.0, struct_sum = 0.0;
    size_t batches = 0;
    bool step_limit = false;
    for (size_t b0 = 0; b0 < examples.size(); b0 += config.batch_size) {
      const size_t b1 = std::min(examples.size(), b0 + config.batch_size);
      for (Parameter *p : params) p->zero_grad();
      Tape tape;
      std::vector<Var> terms;
      for (size_t b = b0; b < b1; ++b) {
        const size_t ex = examples[b];
        if (config.task == Task::kMentionTyping) {
          Var logits = mention_logits(tape, model, data.train[ex], data.words, dropout);
          terms.push_back(mention_typing_loss(logits, mention_gold[ex]));
        } else if (config.task == Task::kEntityTyping) {
          auto picks = sample_bag(bags[ex], config.bag_k_train, rng);
          Var pooled = bag_forward(tape, model, bags[ex], picks, data.words, dropout);
          terms.push_back(entity_typing_loss(pooled, label_tensor(bags[ex].labels, onto.size())));
        } else {
          Var scores = link_forward(tape, model, data.train[ex], sets[ex], data, dropout);
          terms.push_back(linking_loss(scores, sets[ex].gold_position));
        }
      }
      Var task_loss = ops::scale(sum_all(terms), 1.0 / static_cast<double>(terms.size()));
      Var loss = task_loss;
      double struct_value = 0.0;
      if (config.variant.hierarchy && config.gamma > 0) {
        std::vector<Var> sterms;
        for (size_t s = 0; s < config.struct_samples_per_batch; ++s) {
          LinkSample sample = onto.sample_links(config.negatives, struct_rng);
          sterms.push_back(struct_loss(tape, sample, model.concept_table(), model.hierarchy));
        }
        Var structure = ops::scale(sum_all(sterms),
                                   1.0 / static_cast<double>(sterms.size()));
        struct_value = structure.item();
        loss = joint_loss(task_loss, structure, config.gamma);
      }
      tape.backward(loss);
      adam_step(params, adam, config.lr, config.l2);
      ++result.steps;
      ++batches;
      task_sum += task_loss.item();
      struct_sum += struct_value;
      if (config.max_steps && result.steps >= config.max_steps) {
        step_limit = true;
        break;
      }
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.steps = result.steps;
    entry.task_loss = task_sum / static_cast<double>(batches);
    entry.struct_loss = struct_sum / static_cast<double>(batches);
    // Without a dev split, selection falls back to the training loss.
    entry.dev_metric = data.dev.empty() ? -entry.task_loss
                                        : primary_metric(evaluate(model, data, data.dev));
    entry.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.log.push_back(entry);
    if (log_stream) *log_stream << entry.to_json() << std::endl;

    if (entry.dev_metric > best) {
      best = entry.dev_metric;
      result.dev_metric = best;
      result.best_epoch = epoch;
      result.checkpoint = model.to_archive();
      bad_epochs = 0;
    } else if (++bad_epochs >= config.patience) {
      break;
    }
    if (step_limit) break;
  }
  result.checkpoint.metadata["train.dev_metric"] = format_double(result.dev_metric);
  result.checkpoint.metadata["train.best_epoch"] = std::to_string(result.best_epoch);
  result.checkpoint.metadata["train.steps"] = std::to_string(result.steps);
  return result;
}

std::vector<std::vector<std::pair<std::string, std::string>>> expand_grid(
    const std::vector<std::pair<std::string, std::vector<std::string>>> &grid) {
  std::vector<std::vector<std::pair<std::string, std::string>>> cells = {{}};
  for (const auto &[key, values] : grid) {
    if (values.empty()) throw ConfigError("grid key '" + key + "' has no values");
    std::vector<std::vector<std::pair<std::string, std::string>>> next;
    for (const auto &cell : cells) {
      for (const auto &v : values) {
        auto c = cell;
        c.emplace_back(key, v);
        next.push_back(std::move(c));
      }
    }
    cells = std::move(next);
  }
  return cells;
}

GridSearchResult grid_search(
    const TrainConfig &base,
    const std::vector<std::pair<std::string, std::vector<std::string>>> &grid,
    const Dataset &data, std::ostream *log_stream) {
  GridSearchResult out;
  bool have_best = false;
  for (const auto &overrides : expand_grid(grid)) {
    TrainConfig config = base;
    for (const auto &[k, v] : overrides) config.set(k, v);
    TrainResult r = train(config, data, log_stream);
    out.cells.push_back({overrides, r.dev_metric, r.best_epoch, r.steps});
    if (!have_best || r.dev_metric > out.best_result.dev_metric) {
      out.best = out.cells.size() - 1;
      out.best_result = std::move(r);
      have_best = true;
    }
  }
  return out;
}

std::string GridSearchResult::report() const {
  std::ostringstream os;
  os << "cell\tsettings\tdev_metric\tbest_epoch\tsteps\tselected\n";
  for (size_t i = 0; i < cells.size(); ++i) {
    std::string settings;
    for (const auto &[k, v] : cells[i].overrides) {
      if (!settings.empty()) settings += ',';
      settings += k + "=" + v;
    }
    if (settings.empty()) settings = "-";
    os << i << '\t' << settings << '\t' << format_double(cells[i].dev_metric) << '\t'
       << cells[i].best_epoch << '\t' << cells[i].steps << '\t' << (i == best ? "*" : "")
       << '\n';
  }
  return os.str();
}

size_t worker_count() {
  size_t n = std::max<size_t>(1, std::thread::hardware_concurrency());
  if (const char *env = std::getenv("HIERTYPE_THREADS")) {
    std::string_view s = env;
    size_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec == std::errc() && res.ptr == s.data() + s.size() && v > 0) n = std::min(n, v);
  }
  return n;
}

}  // namespace hiertype
