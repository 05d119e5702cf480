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

#include "hiertype/objectives.h"

#include "hiertype/errors.h"
#include "hiertype/numcore/kernels.h"

namespace hiertype {

using numcore::Parameter;
using numcore::Tape;
using numcore::Tensor;
using numcore::Var;
namespace ops = numcore::ops;

TypeEmbeddings TypeEmbeddings::init(const std::string &name, size_t count,
                                    size_t dim, bool complex, Rng &rng) {
  if (count == 0 || dim == 0) throw ConfigError(name + ": empty embedding table");
  TypeEmbeddings t;
  t.complex = complex;
  t.real = Parameter(name + ".real", glorot_uniform({count, dim}, dim, count, rng));
  if (complex) {
    t.imag = Parameter(name + ".imag", glorot_uniform({count, dim}, dim, count, rng));
  }
  return t;
}

std::vector<Parameter *> TypeEmbeddings::parameters() {
  if (complex) return {&real, &imag};
  return {&real};
}

const char *structure_name(StructureModel model) {
  switch (model) {
    case StructureModel::kNone:
      return "none";
    case StructureModel::kBilinear:
      return "bilinear";
    case StructureModel::kComplex:
      return "complex";
  }
  return "?";
}

HierarchyParams HierarchyParams::init(StructureModel model, size_t dim,
                                      double gamma, Rng &rng) {
  if (gamma < 0) throw ConfigError("gamma must be non-negative");
  HierarchyParams h;
  h.model = model;
  h.gamma = gamma;
  if (model == StructureModel::kBilinear) {
    h.bilinear = Parameter("hierarchy.A", glorot_uniform({dim, dim}, dim, dim, rng));
  } else if (model == StructureModel::kComplex) {
    h.relation_re = Parameter("hierarchy.r_re", glorot_uniform({dim}, dim, dim, rng));
    h.relation_im = Parameter("hierarchy.r_im", glorot_uniform({dim}, dim, dim, rng));
  }
  return h;
}

std::vector<Parameter *> HierarchyParams::parameters() {
  switch (model) {
    case StructureModel::kBilinear:
      return {&bilinear};
    case StructureModel::kComplex:
      return {&relation_re, &relation_im};
    case StructureModel::kNone:
      break;
  }
  return {};
}

LinkerParams LinkerParams::init(size_t entity_count, size_t dim, bool complex,
                                Rng &rng) {
  LinkerParams l;
  l.alpha = Parameter("linker.alpha", Tensor::scalar(1.0));
  l.beta = Parameter("linker.beta", Tensor::scalar(1.0));
  l.entities = TypeEmbeddings::init("linker.entities", entity_count, dim, complex, rng);
  return l;
}

std::vector<Parameter *> LinkerParams::parameters() {
  std::vector<Parameter *> out = {&alpha, &beta};
  for (Parameter *p : entities.parameters()) out.push_back(p);
  return out;
}

Var type_logits(Tape &tape, const MentionVar &mention, TypeEmbeddings &types,
                HierarchyParams *hierarchy) {
  if (mention.real.size() != types.dim()) {
    throw ShapeError("type_logits: mention width " +
                     std::to_string(mention.real.size()) + " vs embedding width " +
                     std::to_string(types.dim()));
  }
  if (mention.imag) {
    if (!types.complex) throw ShapeError("complex mention scored against real types");
    return ops::add(ops::matvec(tape.param(types.real), mention.real),
                    ops::matvec(tape.param(types.imag), *mention.imag));
  }
  if (types.complex) throw ShapeError("real mention scored against complex types");
  Var m = mention.real;
  if (hierarchy != nullptr && hierarchy->model == StructureModel::kBilinear) {
    m = ops::matvec(tape.param(hierarchy->bilinear), m);
  }
  return ops::matvec(tape.param(types.real), m);
}

Var mention_typing_loss(Var logits, const Tensor &gold) {
  return ops::bce_with_logits(logits, gold);
}

Var bag_logits(Var per_mention) { return ops::logsumexp_cols(per_mention); }

Var entity_typing_loss(Var pooled, const Tensor &gold) {
  return ops::bce_with_logits(pooled, gold);
}

Var linking_scores(Tape &tape, const MentionVar &mention,
                   std::span<const size_t> entity_rows,
                   std::span<const double> csim, LinkerParams &linker) {
  if (entity_rows.size() != csim.size()) {
    throw ShapeError("linking_scores: candidate/csim length mismatch");
  }
  if (entity_rows.empty()) throw ShapeError("linking_scores: no candidates");
  for (size_t row : entity_rows) {
    if (row >= linker.entities.count()) {
      throw UnknownConcept("candidate entity row " + std::to_string(row) +
                           " has no embedding");
    }
  }
  Var affinity = ops::matvec(
      ops::gather_rows(tape.param(linker.entities.real), entity_rows), mention.real);
  if (mention.imag) {
    if (!linker.entities.complex) {
      throw ShapeError("complex mention scored against real entities");
    }
    affinity = ops::add(
        affinity,
        ops::matvec(ops::gather_rows(tape.param(linker.entities.imag), entity_rows),
                    *mention.imag));
  }
  Var similarity = tape.constant(Tensor::vector(csim));
  return ops::add(ops::scale_by(tape.param(linker.alpha), affinity),
                  ops::scale_by(tape.param(linker.beta), similarity));
}

Var linking_loss(Var scores, std::optional<size_t> gold_index) {
  if (!gold_index) throw GoldMissing("gold entity is not among the candidates");
  return ops::softmax_xent(scores, *gold_index);
}

Var bilinear_struct_score(Var c1, Var c2, Var a) {
  return ops::dot(c1, ops::matvec(a, c2));
}

double bilinear_struct_score(std::span<const double> c1,
                             std::span<const double> c2, const Tensor &a) {
  if (a.rank() != 2 || a.dim(0) != c1.size() || a.dim(1) != c2.size()) {
    throw ShapeError("bilinear_struct_score: dimension mismatch");
  }
  std::vector<double> ac2(a.dim(0), 0.0);
  numcore::kernels::gemv_acc(a.data(), c2.data(), ac2.data(), a.dim(0), a.dim(1));
  return numcore::kernels::dot(c1.data(), ac2.data(), c1.size());
}

Var complex_struct_score(const ComplexVar &c1, const ComplexVar &c2,
                         const ComplexVar &r) {
  return ops::complex_trilinear(c1.re, c1.im, r.re, r.im, c2.re, c2.im);
}

double complex_struct_score(const ComplexSpan &c1, const ComplexSpan &c2,
                            const ComplexSpan &r) {
  return numcore::complex_trilinear(c1.re, c1.im, r.re, r.im, c2.re, c2.im);
}

namespace {

// One table row as a rank-1 node.
Var row_of(Var table, size_t row) {
  size_t idx[] = {row};
  Var gathered = ops::gather_rows(table, idx);
  return ops::concat(std::span<const Var>(&gathered, 1));
}

}  // namespace

Var struct_loss(Tape &tape, const LinkSample &sample, TypeEmbeddings &embeddings,
                HierarchyParams &hierarchy) {
  const size_t n = sample.negatives.size();
  std::vector<size_t> parents;
  parents.reserve(n + 1);
  parents.push_back(sample.positive.parent);
  for (const Link &neg : sample.negatives) {
    if (neg.child != sample.positive.child) {
      throw InternalError("negative link does not share the positive child");
    }
    parents.push_back(neg.parent);
  }
  Tensor targets({n + 1});
  targets[0] = 1.0;

  Var scores;
  if (hierarchy.model == StructureModel::kBilinear) {
    Var table = tape.param(embeddings.real);
    Var child = row_of(table, sample.positive.child);
    // s(c1, c2) = (A^T c1) . c2 for every candidate parent at once.
    Var projected = ops::matvec_t(tape.param(hierarchy.bilinear), child);
    scores = ops::matvec(ops::gather_rows(table, parents), projected);
  } else if (hierarchy.model == StructureModel::kComplex) {
    if (!embeddings.complex) throw ShapeError("complex structure over real embeddings");
    Var re = tape.param(embeddings.real);
    Var im = tape.param(embeddings.imag);
    ComplexVar r{tape.param(hierarchy.relation_re), tape.param(hierarchy.relation_im)};
    ComplexVar child{row_of(re, sample.positive.child),
                     row_of(im, sample.positive.child)};
    std::vector<Var> parts;
    parts.reserve(n + 1);
    for (size_t p : parents) {
      ComplexVar parent{row_of(re, p), row_of(im, p)};
      parts.push_back(complex_struct_score(child, parent, r));
    }
    scores = ops::concat(parts);
  } else {
    throw ConfigError("structure loss requested without a structure model");
  }
  return ops::bce_with_logits(scores, targets);
}

Var joint_loss(Var task, Var structure, double gamma) {
  if (gamma < 0) throw ConfigError("gamma must be non-negative");
  return ops::add(task, ops::scale(structure, gamma));
}

double joint_loss(double task, double structure, double gamma) {
  if (gamma < 0) throw ConfigError("gamma must be non-negative");
  return task + gamma * structure;
}

}  // namespace hiertype
