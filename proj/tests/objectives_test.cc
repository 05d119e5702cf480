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

#include <cmath>
#include <complex>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.h"
#include "hiertype/errors.h"
#include "hiertype/objectives.h"

namespace hiertype {
namespace {

using numcore::Parameter;
using numcore::Tape;
using numcore::Tensor;
using numcore::Var;

TEST(ObjectivesGradTest, EveryLossMatchesFiniteDifferences) {
  for (std::uint64_t seed : {1u, 2u}) {
    for (const auto &check : testing::check_all_losses(1e-3, seed)) {
      EXPECT_LT(check.result.max_relative_error, 1e-4)
          << check.name << " seed " << seed << " at " << check.result.worst_param << "["
          << check.result.worst_index << "]";
      EXPECT_GT(check.result.coordinates, 0u);
    }
  }
}

TEST(ObjectivesTest, MentionLossIsBceOfTypeScores) {
  testing::ToyModel m(false, StructureModel::kNone, 5);
  Tape tape;
  MentionVar v = m.encode(tape, m.mentions[0]);
  Var logits = type_logits(tape, v, m.types);
  // t_j . m by hand.
  for (size_t j = 0; j < m.types.count(); ++j) {
    double s = 0;
    for (size_t k = 0; k < m.types.dim(); ++k) {
      s += m.types.real.value.at(j, k) * v.real.value()[k];
    }
    EXPECT_NEAR(logits.value()[j], s, 1e-12);
  }
  double expected = 0;
  Tensor gold = m.gold();
  for (size_t j = 0; j < gold.size(); ++j) {
    double p = 1 / (1 + std::exp(-logits.value()[j]));
    expected -= gold[j] * std::log(p) + (1 - gold[j]) * std::log(1 - p);
  }
  EXPECT_NEAR(mention_typing_loss(logits, gold).item(), expected, 1e-10);
}

TEST(ObjectivesTest, BagPoolingIsColumnLogSumExp) {
  Tape tape;
  Var x = tape.constant(Tensor::matrix(2, 2, {0, 3, std::log(3.0), 3}));
  Var pooled = bag_logits(x);
  EXPECT_NEAR(pooled.value()[0], std::log(4.0), 1e-12);
  EXPECT_NEAR(pooled.value()[1], 3 + std::log(2.0), 1e-12);
}

TEST(ObjectivesTest, IdentityBilinearEqualsFlat) {
  testing::ToyModel m(false, StructureModel::kBilinear, 6);
  m.hierarchy.bilinear.value.fill(0.0);
  for (size_t i = 0; i < m.types.dim(); ++i) m.hierarchy.bilinear.value.at(i, i) = 1.0;
  std::mt19937_64 rng(8);
  for (int i = 0; i < 30; ++i) {
    Mention mention = testing::toy_mention(testing::ToyModel::kVocab, rng);
    Tape tape;
    MentionVar v = m.encode(tape, mention);
    Tensor hier = type_logits(tape, v, m.types, &m.hierarchy).value();
    Tensor flat = type_logits(tape, v, m.types).value();
    for (size_t j = 0; j < flat.size(); ++j) EXPECT_NEAR(hier[j], flat[j], 1e-12);
  }
}

TEST(ObjectivesTest, ComplexScoreAntisymmetricForImaginaryRelation) {
  std::mt19937_64 rng(10);
  const size_t d = 6;
  std::vector<double> zero(d, 0.0);
  for (int i = 0; i < 50; ++i) {
    Tensor a_re = testing::random_tensor({d}, rng), a_im = testing::random_tensor({d}, rng);
    Tensor b_re = testing::random_tensor({d}, rng), b_im = testing::random_tensor({d}, rng);
    Tensor r_im = testing::random_tensor({d}, rng);
    ComplexSpan a{a_re.values(), a_im.values()}, b{b_re.values(), b_im.values()};
    ComplexSpan r{zero, r_im.values()};
    EXPECT_NEAR(complex_struct_score(a, b, r), -complex_struct_score(b, a, r), 1e-12);
    // A real relation gives a symmetric score instead.
    ComplexSpan real_r{r_im.values(), zero};
    EXPECT_NEAR(complex_struct_score(a, b, real_r), complex_struct_score(b, a, real_r), 1e-12);
  }
}

TEST(ObjectivesTest, ComplexScoreAgainstStdComplex) {
  std::mt19937_64 rng(12);
  const size_t d = 5;
  Tensor v[6];
  for (auto &t : v) t = testing::random_tensor({d}, rng);
  double expected = 0;
  for (size_t k = 0; k < d; ++k) {
    std::complex<double> a(v[0][k], v[1][k]), r(v[2][k], v[3][k]), b(v[4][k], v[5][k]);
    expected += (a * r * std::conj(b)).real();
  }
  ComplexSpan a{v[0].values(), v[1].values()}, r{v[2].values(), v[3].values()},
      b{v[4].values(), v[5].values()};
  EXPECT_NEAR(complex_struct_score(a, b, r), expected, 1e-12);
}

TEST(ObjectivesTest, BilinearScoreValue) {
  Tensor a = Tensor::matrix(2, 2, {1, 2, 3, 4});
  std::vector<double> c1 = {1, -1}, c2 = {2, 0.5};
  // c2' = A c2 = {3, 8}
  EXPECT_DOUBLE_EQ(bilinear_struct_score(c1, c2, a), -5.0);
  std::vector<double> short_vec = {1};
  EXPECT_THROW(bilinear_struct_score(short_vec, c2, a), ShapeError);
}

TEST(ObjectivesTest, StructLossMatchesFormula) {
  testing::ToyModel m(false, StructureModel::kBilinear, 13);
  Tape tape;
  LinkSample s = m.sample();
  double loss = struct_loss(tape, s, m.types, m.hierarchy).item();
  auto row = [&](ConceptId c) {
    return std::span<const double>(m.types.real.value.data() + c * m.types.dim(), m.types.dim());
  };
  auto score = [&](const Link &l) {
    return bilinear_struct_score(row(l.child), row(l.parent), m.hierarchy.bilinear.value);
  };
  double expected = -std::log(1 / (1 + std::exp(-score(s.positive))));
  for (const Link &neg : s.negatives) {
    expected -= std::log(1 - 1 / (1 + std::exp(-score(neg))));
  }
  EXPECT_NEAR(loss, expected, 1e-10);
}

TEST(ObjectivesTest, StructLossNeedsModel) {
  testing::ToyModel m(false, StructureModel::kNone, 1);
  Tape tape;
  EXPECT_THROW(m.structure(tape), ConfigError);
}

TEST(ObjectivesTest, LinkingScoresAndErrors) {
  testing::ToyModel m(false, StructureModel::kNone, 14);
  m.linker.alpha.value[0] = 2.0;
  m.linker.beta.value[0] = -1.0;
  Tape tape;
  MentionVar v = m.encode(tape, m.mentions[0]);
  const size_t rows[] = {3, 0};
  const double csim[] = {0.5, 1.0};
  Tensor scores = linking_scores(tape, v, rows, csim, m.linker).value();
  for (size_t i = 0; i < 2; ++i) {
    double dot = 0;
    for (size_t k = 0; k < 3; ++k) dot += m.linker.entities.real.value.at(rows[i], k) * v.real.value()[k];
    EXPECT_NEAR(scores[i], 2 * dot - csim[i], 1e-12);
  }
  const size_t bad_rows[] = {99};
  const double one[] = {1.0};
  EXPECT_THROW(linking_scores(tape, v, bad_rows, one, m.linker), UnknownConcept);
  Var s = tape.constant(scores);
  EXPECT_THROW(linking_loss(s, std::nullopt), GoldMissing);
  EXPECT_NEAR(linking_loss(s, 0).item(),
              -scores[0] + std::log(std::exp(scores[0]) + std::exp(scores[1])), 1e-12);
}

TEST(ObjectivesHandTest, TypeLogitsTwoDimensional) {
  Rng rng(1);
  TypeEmbeddings types = TypeEmbeddings::init("t", 4, 2, false, rng);
  types.real.value = Tensor::matrix(4, 2, {1, 2, 3, 4, -1, 1, 2, 1});
  HierarchyParams h = HierarchyParams::init(StructureModel::kBilinear, 2, 0.5, rng);
  h.bilinear.value = Tensor::matrix(2, 2, {0, 1, 1, 0});
  Tape tape;
  MentionVar m{tape.constant(Tensor::vector({0.5, -1})), std::nullopt};
  EXPECT_EQ(type_logits(tape, m, types).value(), Tensor::vector({-1.5, -2.5, -1.5, 0}));
  // A m = [-1, 0.5]
  EXPECT_EQ(type_logits(tape, m, types, &h).value(), Tensor::vector({0, -1, 1.5, -1.5}));
}

TEST(ObjectivesHandTest, BceClosedForms) {
  Tape tape;
  Var zeros = tape.constant(Tensor({5}));
  EXPECT_NEAR(mention_typing_loss(zeros, Tensor({5})).item(), 5 * std::log(2.0), 1e-12);
  Var big = tape.constant(Tensor::vector({20}));
  const double loss = mention_typing_loss(big, Tensor::vector({1})).item();
  EXPECT_NEAR(loss, std::log1p(std::exp(-20.0)), 1e-20);
  EXPECT_NEAR(loss, 2.1e-9, 0.05e-9);
}

TEST(ObjectivesHandTest, PoolingIdentities) {
  std::mt19937_64 rng(3);
  Tape tape;
  Tensor x = testing::random_tensor({3, 4}, rng, 5.0);
  Tensor pooled = bag_logits(tape.constant(x)).value();
  for (size_t j = 0; j < 4; ++j) {
    double sum = 0;
    for (size_t i = 0; i < 3; ++i) sum += std::exp(x.at(i, j));
    EXPECT_NEAR(pooled[j], std::log(sum), 1e-12);
  }
  Tensor twice = Tensor::matrix(2, 2, {0.3, -1, 0.3, -1});
  Tensor p2 = bag_logits(tape.constant(twice)).value();
  EXPECT_NEAR(p2[0], 0.3 + std::log(2.0), 1e-15);
  EXPECT_NEAR(p2[1], -1 + std::log(2.0), 1e-15);
}

TEST(ObjectivesHandTest, SingleMentionBagEqualsMentionLoss) {
  testing::ToyModel m(false, StructureModel::kNone, 4);
  Tape tape;
  Var logits = type_logits(tape, m.encode(tape, m.mentions[0]), m.types);
  Var row[] = {logits};
  Var pooled = bag_logits(numcore::ops::stack_rows(row));
  EXPECT_EQ(entity_typing_loss(pooled, m.gold()).item(),
            mention_typing_loss(logits, m.gold()).item());
}

TEST(ObjectivesHandTest, PooledLogitGrowsWithBagSize) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> pos(0.5, 3.0);
  std::vector<double> column;
  double previous = -INFINITY;
  for (size_t k = 1; k <= 12; ++k) {
    column.push_back(pos(rng));
    Tape tape;
    double v = bag_logits(tape.constant(Tensor({k, 1}, column))).value()[0];
    EXPECT_GT(v, previous);
    previous = v;
  }
}

TEST(ObjectivesHandTest, LinkingScoreByHand) {
  Rng rng(1);
  LinkerParams l = LinkerParams::init(2, 2, false, rng);
  l.alpha.value[0] = 1;
  l.beta.value[0] = 2;
  l.entities.real.value = Tensor::matrix(2, 2, {3, -1, 0, 1});
  Tape tape;
  MentionVar m{tape.constant(Tensor::vector({1, 2})), std::nullopt};
  const size_t rows[] = {0, 1};
  const double csim[] = {0.5, 0.25};
  EXPECT_EQ(linking_scores(tape, m, rows, csim, l).value(), Tensor::vector({2, 2.5}));
}

TEST(ObjectivesHandTest, ComplexOneDimensional) {
  // c1 = 1 + 2i, r = i, c2 = 3.
  std::vector<double> c1_re = {1}, c1_im = {2}, r_re = {0}, r_im = {1}, c2_re = {3}, c2_im = {0};
  EXPECT_DOUBLE_EQ(complex_struct_score({c1_re, c1_im}, {c2_re, c2_im}, {r_re, r_im}), -6.0);
}

TEST(ObjectivesHandTest, OrthogonalTypeScoresZero) {
  Rng rng(1);
  TypeEmbeddings types = TypeEmbeddings::init("t", 1, 2, false, rng);
  types.real.value = Tensor::matrix(1, 2, {2, 1});
  Tape tape;
  MentionVar m{tape.constant(Tensor::vector({-1, 2})), std::nullopt};
  EXPECT_EQ(type_logits(tape, m, types).value()[0], 0.0);
}

TEST(ObjectivesTest, JointLoss) {
  EXPECT_DOUBLE_EQ(joint_loss(1.0, 0.4, 0.5), 1.2);
  EXPECT_DOUBLE_EQ(joint_loss(1.5, 2.0, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(joint_loss(1.5, 2.0, 0.0), 1.5);
  EXPECT_THROW(joint_loss(1.0, 1.0, -0.1), ConfigError);
}

TEST(ObjectivesTest, TypeLogitsShapeChecks) {
  testing::ToyModel real(false, StructureModel::kNone, 1);
  testing::ToyModel cplx(true, StructureModel::kComplex, 1);
  Tape tape;
  MentionVar r = real.encode(tape, real.mentions[0]);
  MentionVar c = cplx.encode(tape, cplx.mentions[0]);
  EXPECT_THROW(type_logits(tape, r, cplx.types), ShapeError);
  EXPECT_THROW(type_logits(tape, c, real.types), ShapeError);
}

}  // namespace
}  // namespace hiertype
