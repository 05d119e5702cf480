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
#include <cstdlib>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.h"
#include "hiertype/errors.h"
#include "hiertype/trainer.h"

namespace hiertype {
namespace {

using numcore::Parameter;
using numcore::Tensor;

TEST(VariantTest, ParseAndName) {
  EXPECT_EQ(parse_variant("cnn"), Variant{});
  Variant v = parse_variant("cnn+hier+closure");
  EXPECT_TRUE(v.hierarchy);
  EXPECT_TRUE(v.closure);
  EXPECT_FALSE(v.complex);
  EXPECT_EQ(variant_name(parse_variant("cnn+transitive+complex+hierarchy")),
            "cnn+complex+hier+closure");
  EXPECT_THROW(parse_variant("lstm"), ConfigError);
  EXPECT_THROW(parse_variant("cnn+box"), ConfigError);
}

TEST(TrainConfigTest, DefaultsFollowTheReferenceSetup) {
  TrainConfig c;
  EXPECT_DOUBLE_EQ(c.lr, 0.001);
  EXPECT_EQ(c.dim, 300u);
  EXPECT_EQ(c.bag_k_train, 10u);
  EXPECT_EQ(c.bag_k_test, 20u);
  EXPECT_EQ(c.candidates_k, 100u);
  EXPECT_NO_THROW(c.validate());
}

TEST(TrainConfigTest, SetAndFile) {
  TrainConfig c;
  c.set("lr", "0.05");
  c.set("dropout", "0.5");
  c.set("variant", "cnn+hier");
  c.set("task", "entity-typing");
  EXPECT_DOUBLE_EQ(c.lr, 0.05);
  EXPECT_DOUBLE_EQ(c.dropout_keep, 0.5);
  EXPECT_TRUE(c.variant.hierarchy);
  EXPECT_EQ(c.task, Task::kEntityTyping);
  EXPECT_THROW(c.set("learning_rate", "1"), ConfigError);
  EXPECT_THROW(c.set("lr", "fast"), ConfigError);

  testing::TempDir dir;
  auto path = dir.write("c.cfg", "# run\nlr = 0.002\nnegatives=4\n\nseed = 9\n");
  TrainConfig f = TrainConfig::from_file(path);
  EXPECT_DOUBLE_EQ(f.lr, 0.002);
  EXPECT_EQ(f.negatives, 4u);
  EXPECT_EQ(f.seed, 9u);
  EXPECT_THROW(TrainConfig::from_file(dir.write("bad.cfg", "lr\n")), ConfigError);
}

TEST(TrainConfigTest, EntriesRoundTrip) {
  TrainConfig c = testing::small_config(Task::kEntityTyping, "cnn+complex+hier");
  c.gamma = 0.25;
  TrainConfig back;
  for (const auto &[k, v] : c.entries()) back.set(k, v);
  EXPECT_EQ(back.summary(), c.summary());
}

TEST(TrainConfigTest, Validation) {
  TrainConfig c;
  c.gamma = -1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig();
  c.dropout_keep = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig();
  c.task = Task::kLinking;
  c.variant = parse_variant("cnn+closure");
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig();
  c.window = 4;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(AdamTest, ZeroGradientLeavesParameters) {
  Parameter p("p", Tensor::vector({1.0, -2.0}));
  std::vector<Parameter *> params = {&p};
  AdamState state;
  for (int i = 0; i < 5; ++i) adam_step(params, state, 0.1, 0.0);
  EXPECT_EQ(p.value, Tensor::vector({1.0, -2.0}));
  EXPECT_EQ(state.t, 5u);
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  Parameter p("p", Tensor::vector({1.0, -2.0, 0.5}));
  p.grad = Tensor::vector({3.0, -0.01, 1e3});
  std::vector<Parameter *> params = {&p};
  AdamState state;
  adam_step(params, state, 0.01, 0.0);
  // m_hat = g, v_hat = g^2, so each step is lr * g / (|g| + eps).
  EXPECT_NEAR(p.value[0], 1.0 - 0.01, 1e-8);
  EXPECT_NEAR(p.value[1], -2.0 + 0.01, 1e-6);
  EXPECT_NEAR(p.value[2], 0.5 - 0.01, 1e-8);
}

TEST(AdamTest, QuadraticFirstStep) {
  // f = theta^2 / 2 at theta = 1 has gradient 1.
  Parameter p("p", Tensor::vector({1.0}));
  p.grad = Tensor::vector({1.0});
  std::vector<Parameter *> params = {&p};
  AdamState state;
  adam_step(params, state, 0.001, 0.0);
  EXPECT_LT(p.value[0], 1.0);
  EXPECT_NEAR(1.0 - p.value[0], 0.001, 1e-10);
}

TEST(AdamTest, SecondStepMatchesHandValues) {
  Parameter p("p", Tensor::vector({0.0}));
  std::vector<Parameter *> params = {&p};
  AdamState state;
  p.grad = Tensor::vector({1.0});
  adam_step(params, state, 0.1, 0.0);
  p.grad = Tensor::vector({-1.0});
  adam_step(params, state, 0.1, 0.0);
  // m = 0.9 * 0.1 - 0.1 = -0.01, v = 0.999 * 0.001 + 0.001 = 0.001999.
  const double m_hat = -0.01 / (1 - 0.81), v_hat = 0.001999 / (1 - 0.998001);
  const double first = -0.1 / (1 + 1e-8);
  EXPECT_NEAR(p.value[0], first - 0.1 * m_hat / (std::sqrt(v_hat) + 1e-8), 1e-12);
}

TEST(AdamTest, WeightDecayAddsToGradient) {
  Parameter p("p", Tensor::vector({2.0}));
  std::vector<Parameter *> params = {&p};
  AdamState state;
  adam_step(params, state, 0.1, 0.5);
  EXPECT_NEAR(p.value[0], 1.9, 1e-8);
}

class TrainerTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { synth_ = new SynthData(generate_synthetic(testing::small_synth(2))); }
  static void TearDownTestSuite() { delete synth_; }
  static SynthData *synth_;
};
SynthData *TrainerTest::synth_ = nullptr;

TEST_F(TrainerTest, SameSeedSameCheckpoint) {
  Dataset data = testing::typing_dataset(*synth_);
  TrainConfig c = testing::small_config(Task::kMentionTyping, "cnn+hier+closure");
  TrainResult a = train(c, data), b = train(c, data);
  EXPECT_EQ(a.checkpoint.serialize(), b.checkpoint.serialize());
  EXPECT_EQ(a.dev_metric, b.dev_metric);
  c.seed = 2;
  TrainResult other = train(c, data);
  EXPECT_NE(other.checkpoint.serialize(), a.checkpoint.serialize());
}

TEST_F(TrainerTest, ReloadedCheckpointReproducesDevMetric) {
  Dataset data = testing::typing_dataset(*synth_);
  for (const char *variant : {"cnn", "cnn+complex+hier"}) {
    TrainConfig c = testing::small_config(Task::kEntityTyping, variant);
    TrainResult r = train(c, data);
    testing::TempDir dir;
    r.checkpoint.save(dir.file("m.ckpt"));
    Model m = Model::from_archive(numcore::TensorArchive::load(dir.file("m.ckpt")));
    EXPECT_EQ(primary_metric(evaluate(m, data, data.dev)), r.dev_metric) << variant;
    EXPECT_EQ(m.config.summary(), c.summary());
  }
}

TEST_F(TrainerTest, TrainingReducesLoss) {
  Dataset data = testing::typing_dataset(*synth_);
  TrainConfig c = testing::small_config(Task::kMentionTyping, "cnn");
  c.max_epochs = 6;
  c.patience = 10;
  c.dropout_keep = 1.0;
  TrainResult r = train(c, data);
  ASSERT_EQ(r.log.size(), 6u);
  EXPECT_LT(r.log.back().task_loss, r.log.front().task_loss);
  EXPECT_EQ(r.checkpoint.metadata.at("train.best_epoch"), std::to_string(r.best_epoch));
}

TEST_F(TrainerTest, MaxStepsStopsEarly) {
  Dataset data = testing::typing_dataset(*synth_);
  TrainConfig c = testing::small_config(Task::kMentionTyping, "cnn");
  c.max_steps = 3;
  TrainResult r = train(c, data);
  EXPECT_EQ(r.steps, 3u);
}

TEST_F(TrainerTest, LinkingTrainsAndEvaluates) {
  Dataset data = testing::linking_dataset(*synth_);
  TrainConfig c = testing::small_config(Task::kLinking, "cnn+hier");
  std::ostringstream log;
  TrainResult r = train(c, data, &log);
  EXPECT_NE(log.str().find("\"epoch\""), std::string::npos);
  Model m = Model::from_archive(r.checkpoint);
  EvalReport report = evaluate(m, data, data.test, true);
  EXPECT_EQ(report.task, "linking");
  EXPECT_GE(report.metrics.at("accuracy_normalized"), report.metrics.at("accuracy_original"));
  EXPECT_EQ(report.predictions.size(), data.test.size());
}

TEST_F(TrainerTest, EvaluationIsDeterministic) {
  Dataset data = testing::typing_dataset(*synth_);
  TrainConfig c = testing::small_config(Task::kEntityTyping, "cnn+hier");
  TrainResult r = train(c, data);
  Model m1 = Model::from_archive(r.checkpoint), m2 = Model::from_archive(r.checkpoint);
  EXPECT_EQ(evaluate(m1, data, data.test, true).to_json(),
            evaluate(m2, data, data.test, true).to_json());
}

TEST_F(TrainerTest, ThreadCountDoesNotChangeEvaluation) {
  Dataset data = testing::typing_dataset(*synth_);
  TrainConfig c = testing::small_config(Task::kMentionTyping, "cnn");
  Model m = Model::from_archive(train(c, data).checkpoint);
  setenv("HIERTYPE_THREADS", "1", 1);
  std::string one = evaluate(m, data, data.test).to_json();
  setenv("HIERTYPE_THREADS", "3", 1);
  std::string three = evaluate(m, data, data.test).to_json();
  unsetenv("HIERTYPE_THREADS");
  EXPECT_EQ(one, three);
}

TEST_F(TrainerTest, StructureLossDecreasesWithTraining) {
  Dataset data = testing::typing_dataset(*synth_);
  TrainConfig c = testing::small_config(Task::kMentionTyping, "cnn+hier");
  c.gamma = 1.0;
  Rng init_rng(c.seed);
  Model fresh = Model::init(c, data.ontology.size(), data.words.dim(), init_rng);
  Model trained = Model::from_archive(train(c, data).checkpoint);
  const auto &links = data.ontology.edges();
  Rng a(5), b(5);
  EXPECT_LT(structure_loss(trained, data.ontology, links, 3, a),
            structure_loss(fresh, data.ontology, links, 3, b));
}

TEST_F(TrainerTest, GridSearch) {
  Dataset data = testing::typing_dataset(*synth_);
  TrainConfig c = testing::small_config(Task::kEntityTyping, "cnn");
  c.max_epochs = 5;
  GridSearchResult single = grid_search(c, {}, data);
  ASSERT_EQ(single.cells.size(), 1u);
  EXPECT_EQ(single.best_result.checkpoint.serialize(), train(c, data).checkpoint.serialize());

  GridSearchResult g = grid_search(c, {{"lr", {"0", "0.02"}}}, data);
  ASSERT_EQ(g.cells.size(), 2u);
  EXPECT_EQ(g.best, 1u);
  EXPECT_LT(g.cells[0].dev_metric, g.cells[1].dev_metric);
  EXPECT_NE(g.report().find("lr"), std::string::npos);
}

TEST(GridTest, ExpandIsCartesian) {
  auto cells = expand_grid({{"lr", {"1", "2"}}, {"gamma", {"0", "0.5", "1"}}});
  ASSERT_EQ(cells.size(), 6u);
  EXPECT_EQ(cells[0], (std::vector<std::pair<std::string, std::string>>{{"lr", "1"}, {"gamma", "0"}}));
  EXPECT_EQ(cells[5], (std::vector<std::pair<std::string, std::string>>{{"lr", "2"}, {"gamma", "1"}}));
}

TEST(ModelTest, ArchiveRejectsForeignFiles) {
  numcore::TensorArchive a;
  a.metadata["format"] = "something-else";
  EXPECT_THROW(Model::from_archive(a), DataError);
}

TEST(SynthTest, MatchesRequestedShape) {
  SynthData d = generate_synthetic(SynthConfig());
  EXPECT_EQ(d.types.size(), 40u);
  size_t leaves = 0;
  for (bool b : d.types.leaf_mask()) leaves += b;
  EXPECT_EQ(leaves, 24u);
  EXPECT_EQ(d.train.size() + d.dev.size() + d.test.size(), 2000u);
  EXPECT_EQ(d.kb.size(), 240u);
  EXPECT_EQ(d.names.size(), 200u);
  SynthData again = generate_synthetic(SynthConfig());
  EXPECT_EQ(again.words.matrix(), d.words.matrix());
  EXPECT_EQ(again.train[7].tokens, d.train[7].tokens);
}

TEST(SynthTest, WrittenFilesLoad) {
  SynthData d = generate_synthetic(testing::small_synth(4));
  testing::TempDir dir;
  write_synthetic(d, dir.path());
  DataPaths paths;
  paths.ontology = dir.file("types.tsv");
  paths.leaf_mask = dir.file("leaf_mask.txt");
  paths.embeddings = dir.file("vectors.txt");
  paths.train = dir.file("train.jsonl");
  paths.dev = dir.file("dev.jsonl");
  paths.test = dir.file("test.jsonl");
  Dataset data = load_dataset(paths, Task::kEntityTyping, 8);
  EXPECT_EQ(data.ontology.size(), d.types.size());
  EXPECT_EQ(data.train.size(), d.train.size());
  EXPECT_EQ(data.ontology.leaf_mask(), d.types.leaf_mask());
  paths.ontology = dir.file("kb.tsv");
  paths.leaf_mask.clear();
  paths.train = dir.file("link_train.jsonl");
  paths.dev = dir.file("link_dev.jsonl");
  paths.test = dir.file("link_test.jsonl");
  paths.names = dir.file("names.tsv");
  Dataset link = load_dataset(paths, Task::kLinking, 8);
  ASSERT_TRUE(link.index.has_value());
  EXPECT_EQ(link.index->num_entities(), d.names.size());
}

}  // namespace
}  // namespace hiertype
