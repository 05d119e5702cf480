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

#include "hiertype/corpus.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "hiertype/errors.h"
#include "json.hpp"
#include "text_util.h"

namespace hiertype {

using json = nlohmann::json;

const char *task_name(Task task) {
  switch (task) {
    case Task::kMentionTyping:
      return "mention-typing";
    case Task::kEntityTyping:
      return "entity-typing";
    case Task::kLinking:
      return "linking";
  }
  return "?";
}

Task parse_task(std::string_view name) {
  if (name == "mention-typing" || name == "typing") return Task::kMentionTyping;
  if (name == "entity-typing") return Task::kEntityTyping;
  if (name == "linking") return Task::kLinking;
  throw ConfigError("unknown task '" + std::string(name) +
                    "' (expected mention-typing, entity-typing or linking)");
}

std::string Mention::surface() const {
  std::string s;
  for (size_t i = start; i < end && i < tokens.size(); ++i) {
    if (i > start) s += ' ';
    s += tokens[i];
  }
  return s;
}

void validate_span(size_t sentence_length, size_t start, size_t end) {
  if (sentence_length == 0) throw SpanError("empty token sequence");
  if (!(start < end && end <= sentence_length)) {
    throw SpanError("invalid span [" + std::to_string(start) + ", " +
                    std::to_string(end) + ") for sentence of " +
                    std::to_string(sentence_length) + " tokens");
  }
}

std::vector<int> position_features(size_t sentence_length, size_t start,
                                   size_t end) {
  validate_span(sentence_length, start, end);
  std::vector<int> pos(sentence_length, 0);
  for (size_t i = 0; i < sentence_length; ++i) {
    if (i < start) {
      pos[i] = static_cast<int>(i) - static_cast<int>(start);
    } else if (i >= end) {
      pos[i] = static_cast<int>(i) - static_cast<int>(end) + 1;
    }
  }
  return pos;
}

namespace {

Mention parse_mention(const json &obj, Task task, const std::string &where,
                      size_t lineno) {
  auto fail = [&](const std::string &msg) -> ParseError {
    return ParseError(where + ":" + std::to_string(lineno) + ": " + msg, lineno);
  };
  if (!obj.is_object()) throw fail("expected a JSON object");
  Mention m;
  if (obj.contains("id")) {
    const auto &id = obj["id"];
    m.id = id.is_string() ? id.get<std::string>() : id.dump();
  }
  if (!obj.contains("tokens") || !obj["tokens"].is_array()) {
    throw fail("missing \"tokens\" array");
  }
  for (const auto &tok : obj["tokens"]) {
    if (!tok.is_string()) throw fail("tokens must be strings");
    m.tokens.push_back(tok.get<std::string>());
  }
  if (!obj.contains("span") || !obj["span"].is_array() ||
      obj["span"].size() != 2 || !obj["span"][0].is_number_integer() ||
      !obj["span"][1].is_number_integer()) {
    throw fail("\"span\" must be [start, end]");
  }
  long start = obj["span"][0].get<long>();
  long end = obj["span"][1].get<long>();
  if (start < 0 || end < 0) {
    throw SpanError(where + ":" + std::to_string(lineno) + ": negative span index");
  }
  m.start = static_cast<size_t>(start);
  m.end = static_cast<size_t>(end);
  try {
    validate_span(m.tokens.size(), m.start, m.end);
  } catch (const SpanError &e) {
    throw SpanError(where + ":" + std::to_string(lineno) + ": " + e.what());
  }
  const bool wants_labels = task != Task::kLinking;
  const bool wants_entity = task != Task::kMentionTyping;
  if (obj.contains("labels")) {
    if (!obj["labels"].is_array()) throw fail("\"labels\" must be an array");
    for (const auto &l : obj["labels"]) {
      if (!l.is_string()) throw fail("labels must be strings");
      m.labels.push_back(l.get<std::string>());
    }
  } else if (wants_labels) {
    throw fail("missing \"labels\"");
  }
  if (obj.contains("entity")) {
    if (!obj["entity"].is_string()) throw fail("\"entity\" must be a string");
    m.entity = obj["entity"].get<std::string>();
  } else if (wants_entity) {
    throw fail("missing \"entity\"");
  }
  return m;
}

}  // namespace

std::vector<Mention> load_mentions(const std::string &path, Task task) {
  auto in = internal::open_input(path);
  std::vector<Mention> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (internal::trim(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error &e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what(),
                       lineno);
    }
    out.push_back(parse_mention(obj, task, path, lineno));
  }
  return out;
}

void save_mentions(const std::string &path, std::span<const Mention> mentions) {
  auto out = internal::open_output(path);
  for (const Mention &m : mentions) {
    json obj = json::object();
    if (!m.id.empty()) obj["id"] = m.id;
    obj["tokens"] = m.tokens;
    obj["span"] = {m.start, m.end};
    if (!m.labels.empty()) obj["labels"] = m.labels;
    if (!m.entity.empty()) obj["entity"] = m.entity;
    out << obj.dump() << '\n';
  }
  if (!out) throw IOError("write failed for " + path);
}

std::vector<ConceptId> resolve_labels(const Mention &mention,
                                      const Ontology &types, bool use_closure) {
  std::vector<ConceptId> ids;
  for (const auto &name : mention.labels) ids.push_back(types.id(name));
  if (use_closure) return types.expand_labels(ids);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::vector<Bag> build_bags(std::span<const Mention> mentions,
                            const Ontology &types, bool use_closure) {
  std::vector<Bag> bags;
  std::unordered_map<std::string, size_t> by_entity;
  for (const Mention &m : mentions) {
    if (m.entity.empty()) throw DataError("mention without entity id in bag construction");
    auto [it, inserted] = by_entity.emplace(m.entity, bags.size());
    if (inserted) {
      bags.emplace_back();
      bags.back().entity = m.entity;
    }
    Bag &bag = bags[it->second];
    bag.mentions.push_back(m);
    for (const auto &name : m.labels) bag.labels.push_back(types.id(name));
  }
  for (Bag &bag : bags) {
    if (bag.labels.empty()) {
      throw DataError("entity '" + bag.entity + "' has no types");
    }
    if (use_closure) {
      bag.labels = types.expand_labels(bag.labels);
    } else {
      std::sort(bag.labels.begin(), bag.labels.end());
      bag.labels.erase(std::unique(bag.labels.begin(), bag.labels.end()),
                       bag.labels.end());
    }
    bag.label_vec.assign(types.size(), 0.0);
    for (ConceptId c : bag.labels) bag.label_vec[c] = 1.0;
  }
  return bags;
}

std::vector<size_t> sample_bag(const Bag &bag, size_t k, Rng &rng) {
  const size_t n = bag.mentions.size();
  if (n == 0 || k == 0) return {};
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  if (n >= k) {
    for (size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<size_t> pick(i, n - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(k);
    return idx;
  }
  std::uniform_int_distribution<size_t> pick(0, n - 1);
  while (idx.size() < k) idx.push_back(pick(rng));
  return idx;
}

std::set<std::string> collect_vocab(std::span<const Mention> mentions) {
  std::set<std::string> vocab;
  for (const Mention &m : mentions) vocab.insert(m.tokens.begin(), m.tokens.end());
  return vocab;
}

WordEmbeddings::WordEmbeddings(std::vector<std::string> words,
                               numcore::Tensor matrix)
    : words_(std::move(words)), matrix_(std::move(matrix)) {
  if (matrix_.rank() != 2 || matrix_.dim(0) != words_.size()) {
    throw DimensionError("embedding matrix rows do not match vocabulary");
  }
  for (size_t i = 0; i < words_.size(); ++i) index_.emplace(words_[i], i);
  zeros_.assign(matrix_.cols(), 0.0);
  found_ = words_.size();
}

bool WordEmbeddings::contains(std::string_view word) const {
  return index_.count(std::string(word)) > 0;
}

std::span<const double> WordEmbeddings::vector(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return zeros_;
  return matrix_.row(it->second);
}

void WordEmbeddings::save(const std::string &path) const {
  auto out = internal::open_output(path);
  char buf[64];
  for (size_t r = 0; r < words_.size(); ++r) {
    out << words_[r];
    for (double v : matrix_.row(r)) {
      auto res = std::to_chars(buf, buf + sizeof(buf), v);
      out << ' ' << std::string_view(buf, res.ptr - buf);
    }
    out << '\n';
  }
  if (!out) throw IOError("write failed for " + path);
}

WordEmbeddings WordEmbeddings::load(const std::string &path,
                                    const std::set<std::string> &vocab,
                                    size_t dim) {
  if (dim == 0) throw DimensionError("embedding dimension must be positive");
  std::vector<std::string> words(vocab.begin(), vocab.end());
  numcore::Tensor matrix({words.size(), dim});
  WordEmbeddings emb(words, std::move(matrix));
  emb.found_ = 0;
  std::vector<bool> filled(words.size(), false);

  auto in = internal::open_input(path);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = internal::trim(line);
    if (view.empty()) continue;
    std::vector<std::string_view> fields;
    size_t pos = 0;
    while (pos < view.size()) {
      size_t next = view.find_first_of(" \t", pos);
      if (next == std::string_view::npos) next = view.size();
      if (next > pos) fields.push_back(view.substr(pos, next - pos));
      pos = next + 1;
    }
    if (lineno == 1 && fields.size() == 2) {
      // word2vec-style "count dim" header.
      long a = 0, b = 0;
      auto r1 = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), a);
      auto r2 = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), b);
      if (r1.ec == std::errc() && r2.ec == std::errc() &&
          r1.ptr == fields[0].data() + fields[0].size() &&
          r2.ptr == fields[1].data() + fields[1].size()) {
        continue;
      }
    }
    if (fields.size() != dim + 1) {
      throw DimensionError(path + ":" + std::to_string(lineno) + ": expected " +
                           std::to_string(dim) + " values, got " +
                           std::to_string(fields.size() - 1));
    }
    auto it = emb.index_.find(std::string(fields[0]));
    if (it == emb.index_.end() || filled[it->second]) continue;
    auto row = emb.matrix_.row(it->second);
    for (size_t k = 0; k < dim; ++k) {
      const auto &f = fields[k + 1];
      auto res = std::from_chars(f.data(), f.data() + f.size(), row[k]);
      if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
        throw ParseError(path + ":" + std::to_string(lineno) + ": bad number '" +
                             std::string(f) + "'",
                         lineno);
      }
    }
    filled[it->second] = true;
    ++emb.found_;
  }
  return emb;
}

}  // namespace hiertype
