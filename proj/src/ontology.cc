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

#include "hiertype/ontology.h"

#include <algorithm>
#include <deque>
#include <fstream>

#include "hiertype/errors.h"
#include "text_util.h"

namespace hiertype {

Ontology::Ontology() : cache_(std::make_unique<ClosureCache>()) {}

Ontology::Ontology(const Ontology &other)
    : names_(other.names_),
      index_(other.index_),
      parents_(other.parents_),
      children_(other.children_),
      edges_(other.edges_),
      edge_set_(other.edge_set_),
      leaf_mask_(other.leaf_mask_),
      cache_(std::make_unique<ClosureCache>()) {}

Ontology::Ontology(Ontology &&other) noexcept = default;

Ontology &Ontology::operator=(Ontology other) {
  std::swap(names_, other.names_);
  std::swap(index_, other.index_);
  std::swap(parents_, other.parents_);
  std::swap(children_, other.children_);
  std::swap(edges_, other.edges_);
  std::swap(edge_set_, other.edge_set_);
  std::swap(leaf_mask_, other.leaf_mask_);
  std::swap(cache_, other.cache_);
  return *this;
}

Ontology::~Ontology() = default;

ConceptId Ontology::add_concept(std::string_view name) {
  auto it = index_.find(std::string(name));
  if (it != index_.end()) return it->second;
  auto id = static_cast<ConceptId>(names_.size());
  names_.emplace_back(name);
  index_.emplace(std::string(name), id);
  parents_.emplace_back();
  children_.emplace_back();
  leaf_mask_.push_back(false);
  return id;
}

void Ontology::check_id(ConceptId c) const {
  if (c >= names_.size()) {
    throw UnknownConcept("unknown concept id " + std::to_string(c));
  }
}

bool Ontology::has_edge(ConceptId child, ConceptId parent) const {
  return edge_set_.count(key(child, parent)) > 0;
}

void Ontology::add_edge(ConceptId child, ConceptId parent) {
  check_id(child);
  check_id(parent);
  if (child == parent) {
    throw CycleError("self-loop on " + names_[child],
                     {names_[child], names_[child]});
  }
  if (has_edge(child, parent)) {
    throw DuplicateEdge("duplicate edge " + names_[child] + " -> " +
                        names_[parent]);
  }

  // A cycle forms iff child is already reachable from parent. Walk upwards
  // from parent keeping predecessors so the offending path can be reported.
  std::unordered_map<ConceptId, ConceptId> came_from;
  std::deque<ConceptId> queue{parent};
  came_from.emplace(parent, parent);
  bool found = false;
  while (!queue.empty() && !found) {
    ConceptId cur = queue.front();
    queue.pop_front();
    for (ConceptId p : parents_[cur]) {
      if (came_from.count(p)) continue;
      came_from.emplace(p, cur);
      if (p == child) {
        found = true;
        break;
      }
      queue.push_back(p);
    }
  }
  if (found) {
    std::vector<std::string> path;
    for (ConceptId c = child;; c = came_from.at(c)) {
      path.push_back(names_[c]);
      if (c == parent) break;
    }
    std::reverse(path.begin(), path.end());
    path.insert(path.begin(), names_[child]);
    std::string what = "edge " + names_[child] + " -> " + names_[parent] +
                       " closes a cycle:";
    for (size_t i = 0; i < path.size(); ++i) {
      what += (i == 0 ? " " : " -> ") + path[i];
    }
    throw CycleError(what, std::move(path));
  }

  parents_[child].push_back(parent);
  children_[parent].push_back(child);
  edges_.push_back({child, parent});
  edge_set_.insert(key(child, parent));
  std::lock_guard<std::mutex> lock(cache_->mu);
  cache_->ancestors.clear();
}

const std::string &Ontology::name(ConceptId c) const {
  check_id(c);
  return names_[c];
}

std::optional<ConceptId> Ontology::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

ConceptId Ontology::id(std::string_view name) const {
  auto found = find(name);
  if (!found) throw UnknownConcept("unknown concept '" + std::string(name) + "'");
  return *found;
}

const std::vector<ConceptId> &Ontology::parents(ConceptId c) const {
  check_id(c);
  return parents_[c];
}

const std::vector<ConceptId> &Ontology::children(ConceptId c) const {
  check_id(c);
  return children_[c];
}

std::vector<ConceptId> Ontology::reachable(ConceptId c) const {
  std::vector<bool> seen(names_.size(), false);
  std::vector<ConceptId> stack(parents_[c].begin(), parents_[c].end());
  std::vector<ConceptId> out;
  while (!stack.empty()) {
    ConceptId cur = stack.back();
    stack.pop_back();
    if (seen[cur]) continue;
    seen[cur] = true;
    out.push_back(cur);
    for (ConceptId p : parents_[cur]) {
      if (!seen[p]) stack.push_back(p);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ConceptId> Ontology::ancestors(ConceptId c) const {
  check_id(c);
  {
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto it = cache_->ancestors.find(c);
    if (it != cache_->ancestors.end()) return it->second;
  }
  std::vector<ConceptId> result = reachable(c);
  std::lock_guard<std::mutex> lock(cache_->mu);
  cache_->ancestors.emplace(c, result);
  return result;
}

std::vector<ConceptId> Ontology::expand_labels(
    std::span<const ConceptId> labels) const {
  std::vector<ConceptId> out;
  for (ConceptId c : labels) {
    check_id(c);
    out.push_back(c);
    auto anc = ancestors(c);
    out.insert(out.end(), anc.begin(), anc.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

LinkSample Ontology::sample_links(size_t n, Rng &rng) const {
  if (edges_.empty()) throw Degenerate("ontology has no edges to sample");
  if (n == 0) throw Degenerate("at least one negative link is required");
  std::uniform_int_distribution<size_t> pick_edge(0, edges_.size() - 1);
  const Link positive = edges_[pick_edge(rng)];
  return corrupt_link(positive, n, rng);
}

LinkSample Ontology::corrupt_link(const Link &positive, size_t n, Rng &rng) const {
  check_id(positive.child);
  check_id(positive.parent);
  if (n == 0) throw Degenerate("at least one negative link is required");
  const ConceptId child = positive.child;
  if (parents_[child].size() + 1 >= names_.size()) {
    throw Degenerate("every concept is already a parent of " + names_[child]);
  }
  LinkSample sample;
  sample.positive = positive;
  std::uniform_int_distribution<ConceptId> pick_concept(
      0, static_cast<ConceptId>(names_.size() - 1));
  sample.negatives.reserve(n);
  while (sample.negatives.size() < n) {
    ConceptId corrupt = pick_concept(rng);
    if (corrupt == child || has_edge(child, corrupt)) continue;
    sample.negatives.push_back({child, corrupt});
  }
  return sample;
}

void Ontology::set_leaf_label(ConceptId c, bool value) {
  check_id(c);
  leaf_mask_[c] = value;
}

bool Ontology::is_leaf_label(ConceptId c) const {
  check_id(c);
  return leaf_mask_[c];
}

std::vector<ConceptId> Ontology::sinks() const {
  std::vector<ConceptId> out;
  for (ConceptId c = 0; c < names_.size(); ++c) {
    if (children_[c].empty()) out.push_back(c);
  }
  return out;
}

void Ontology::save(const std::string &path) const {
  auto out = internal::open_output(path);
  out << "# concepts\n";
  for (const auto &n : names_) out << n << '\n';
  out << "# edges (child<TAB>parent)\n";
  for (const Link &e : edges_) {
    out << names_[e.child] << '\t' << names_[e.parent] << '\n';
  }
  if (!out) throw IOError("write failed for " + path);
}

void Ontology::save_leaf_mask(const std::string &path) const {
  auto out = internal::open_output(path);
  for (ConceptId c = 0; c < names_.size(); ++c) {
    if (leaf_mask_[c]) out << names_[c] << '\n';
  }
  if (!out) throw IOError("write failed for " + path);
}

Ontology Ontology::load(const std::string &edges_path) {
  auto in = internal::open_input(edges_path);
  Ontology onto;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = internal::strip_cr(line);
    if (internal::trim(view).empty() || internal::trim(view).front() == '#') {
      continue;
    }
    auto fields = internal::split(view, '\t');
    if (fields.size() == 1) {
      onto.add_concept(internal::trim(fields[0]));
      continue;
    }
    if (fields.size() != 2) {
      throw ParseError(edges_path + ":" + std::to_string(lineno) +
                           ": expected child<TAB>parent",
                       lineno);
    }
    auto child_name = internal::trim(fields[0]);
    auto parent_name = internal::trim(fields[1]);
    if (child_name.empty() || parent_name.empty()) {
      throw ParseError(edges_path + ":" + std::to_string(lineno) +
                           ": empty concept name",
                       lineno);
    }
    ConceptId child = onto.add_concept(child_name);
    ConceptId parent = onto.add_concept(parent_name);
    if (onto.has_edge(child, parent)) continue;
    try {
      onto.add_edge(child, parent);
    } catch (const CycleError &e) {
      throw CycleError(edges_path + ":" + std::to_string(lineno) + ": " +
                           e.what(),
                       e.path());
    }
  }
  return onto;
}

void Ontology::load_leaf_mask(const std::string &path) {
  auto in = internal::open_input(path);
  std::string line;
  while (std::getline(in, line)) {
    auto name = internal::trim(line);
    if (name.empty() || name.front() == '#') continue;
    set_leaf_label(id(name));
  }
}

}  // namespace hiertype
