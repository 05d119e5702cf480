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

#ifndef HIERTYPE_OBJECTIVES_H_
#define HIERTYPE_OBJECTIVES_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hiertype/encoder.h"
#include "hiertype/numcore/tape.h"
#include "hiertype/ontology.h"

namespace hiertype {

// One embedding row per type (or entity); complex variants add an imaginary
// table.
struct TypeEmbeddings {
  numcore::Parameter real;
  numcore::Parameter imag;
  bool complex = false;

  static TypeEmbeddings init(const std::string &name, size_t count, size_t dim,
                             bool complex, Rng &rng);
  size_t count() const { return real.value.rows(); }
  size_t dim() const { return real.value.cols(); }
  std::vector<numcore::Parameter *> parameters();
};

enum class StructureModel { kNone, kBilinear, kComplex };

const char *structure_name(StructureModel model);

struct HierarchyParams {
  StructureModel model = StructureModel::kNone;
  numcore::Parameter bilinear;     // A, dim x dim (kBilinear)
  numcore::Parameter relation_re;  // Re(r_isa), dim (kComplex)
  numcore::Parameter relation_im;  // Im(r_isa), dim (kComplex)
  double gamma = 0.0;

  static HierarchyParams init(StructureModel model, size_t dim, double gamma,
                              Rng &rng);
  std::vector<numcore::Parameter *> parameters();
};

struct LinkerParams {
  numcore::Parameter alpha;
  numcore::Parameter beta;
  TypeEmbeddings entities;

  static LinkerParams init(size_t entity_count, size_t dim, bool complex,
                           Rng &rng);
  std::vector<numcore::Parameter *> parameters();
};

// Per-type scores. Flat real: t_j . m. Bilinear hierarchy: t_j . (A m).
// Complex: Re(sum_k m_k conj(t_jk)) = Re(t_j) . Re(m) + Im(t_j) . Im(m).
numcore::Var type_logits(numcore::Tape &tape, const MentionVar &mention,
                         TypeEmbeddings &types,
                         HierarchyParams *hierarchy = nullptr);

// Multi-label BCE over sigmoid(logits).
numcore::Var mention_typing_loss(numcore::Var logits, const numcore::Tensor &gold);

// Column-wise logsumexp over a (k x |T|) matrix of per-mention logits.
numcore::Var bag_logits(numcore::Var per_mention);

// BCE over sigmoid of pooled bag logits.
numcore::Var entity_typing_loss(numcore::Var pooled, const numcore::Tensor &gold);

// phi(m, e) = alpha * (e . m) + beta * csim(m, e) for each candidate row.
// Throws UnknownConcept for rows outside the entity table.
numcore::Var linking_scores(numcore::Tape &tape, const MentionVar &mention,
                            std::span<const size_t> entity_rows,
                            std::span<const double> csim, LinkerParams &linker);

// -phi(m, gold) + log sum_e' exp(phi(m, e')); GoldMissing without a gold.
numcore::Var linking_loss(numcore::Var scores, std::optional<size_t> gold_index);

// c1^T A c2
numcore::Var bilinear_struct_score(numcore::Var c1, numcore::Var c2,
                                   numcore::Var a);
double bilinear_struct_score(std::span<const double> c1,
                             std::span<const double> c2,
                             const numcore::Tensor &a);

struct ComplexVar {
  numcore::Var re;
  numcore::Var im;
};

struct ComplexSpan {
  std::span<const double> re;
  std::span<const double> im;
};

// Re(<c1, r, conj(c2)>) as <Re c1, Re r, Re c2> + <Re c1, Im r, Im c2>
// + <Im c1, Re r, Im c2> - <Im c1, Im r, Re c2>.
numcore::Var complex_struct_score(const ComplexVar &c1, const ComplexVar &c2,
                                  const ComplexVar &r);
double complex_struct_score(const ComplexSpan &c1, const ComplexSpan &c2,
                            const ComplexSpan &r);

// -log sigmoid(s+) - sum_neg log(1 - sigmoid(s-)) over one link sample, using
// the embedding table shared with classification.
numcore::Var struct_loss(numcore::Tape &tape, const LinkSample &sample,
                         TypeEmbeddings &embeddings, HierarchyParams &hierarchy);

// task + gamma * structure; gamma must be non-negative.
numcore::Var joint_loss(numcore::Var task, numcore::Var structure, double gamma);
double joint_loss(double task, double structure, double gamma);

}  // namespace hiertype

#endif  // HIERTYPE_OBJECTIVES_H_
