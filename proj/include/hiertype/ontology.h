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

#ifndef HIERTYPE_ONTOLOGY_H_
#define HIERTYPE_ONTOLOGY_H_

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace hiertype {

using ConceptId = std::uint32_t;
using Rng = std::mt19937_64;

struct Link {
  ConceptId child = 0;
  ConceptId parent = 0;

  bool operator==(const Link &) const = default;
};

// One positive IS-A link plus n corrupted links sharing its child.
struct LinkSample {
  Link positive;
  std::vector<Link> negatives;
};

// Directed acyclic IS-A graph over concepts (types or entities). Concept ids
// are dense and assigned in registration order; names are metadata.
//
// Construction is single-writer. Once construction ends, ancestors() and
// expand_labels() may be called from concurrent readers; the closure cache is
// guarded internally.
class Ontology {
 public:
  Ontology();
  Ontology(const Ontology &other);
  Ontology(Ontology &&other) noexcept;
  Ontology &operator=(Ontology other);
  ~Ontology();

  // Registers a concept and returns its id. Re-registering a name returns the
  // existing id.
  ConceptId add_concept(std::string_view name);

  // Adds child IS-A parent. Throws UnknownConcept, DuplicateEdge, or
  // CycleError (self-loops included) and leaves the graph unchanged.
  void add_edge(ConceptId child, ConceptId parent);

  bool has_edge(ConceptId child, ConceptId parent) const;

  size_t size() const { return names_.size(); }
  size_t num_edges() const { return edges_.size(); }
  const std::vector<Link> &edges() const { return edges_; }

  const std::string &name(ConceptId c) const;
  std::optional<ConceptId> find(std::string_view name) const;
  // Like find() but throws UnknownConcept.
  ConceptId id(std::string_view name) const;

  const std::vector<ConceptId> &parents(ConceptId c) const;
  const std::vector<ConceptId> &children(ConceptId c) const;

  // All concepts reachable from c through child->parent edges, excluding c,
  // sorted by id.
  std::vector<ConceptId> ancestors(ConceptId c) const;

  // labels plus the ancestors of every label; sorted and unique.
  std::vector<ConceptId> expand_labels(std::span<const ConceptId> labels) const;

  // Draws a positive edge uniformly and n negatives that keep its child and
  // replace the parent with a uniformly drawn concept that is neither the
  // child nor one of its true parents.
  LinkSample sample_links(size_t n, Rng &rng) const;
  // The same corruption applied to a given positive link.
  LinkSample corrupt_link(const Link &positive, size_t n, Rng &rng) const;

  // Leaf task labels (for example the Freebase types scored by MAP).
  void set_leaf_label(ConceptId c, bool value = true);
  bool is_leaf_label(ConceptId c) const;
  const std::vector<bool> &leaf_mask() const { return leaf_mask_; }

  // Concepts without children.
  std::vector<ConceptId> sinks() const;

  // Edge-list text format: one "child<TAB>parent" per line, '#' comments.
  // A line holding a single name registers an isolated concept. save() writes
  // every concept first (in id order) so that ids survive a round trip.
  void save(const std::string &path) const;
  void save_leaf_mask(const std::string &path) const;

  static Ontology load(const std::string &edges_path);
  void load_leaf_mask(const std::string &path);

 private:
  void check_id(ConceptId c) const;
  static std::uint64_t key(ConceptId child, ConceptId parent) {
    return (static_cast<std::uint64_t>(child) << 32) | parent;
  }
  std::vector<ConceptId> reachable(ConceptId c) const;

  std::vector<std::string> names_;
  std::unordered_map<std::string, ConceptId> index_;
  std::vector<std::vector<ConceptId>> parents_;
  std::vector<std::vector<ConceptId>> children_;
  std::vector<Link> edges_;
  std::unordered_set<std::uint64_t> edge_set_;
  std::vector<bool> leaf_mask_;

  struct ClosureCache {
    std::mutex mu;
    std::unordered_map<ConceptId, std::vector<ConceptId>> ancestors;
  };
  std::unique_ptr<ClosureCache> cache_;
};

}  // namespace hiertype

#endif  // HIERTYPE_ONTOLOGY_H_
