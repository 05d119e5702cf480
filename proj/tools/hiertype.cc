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

// Command-line front end for the hiertype pipeline.

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hiertype/candgen.h"
#include "hiertype/corpus.h"
#include "hiertype/errors.h"
#include "hiertype/metrics.h"
#include "hiertype/numcore/kernels.h"
#include "hiertype/ontology.h"
#include "hiertype/synth.h"
#include "hiertype/trainer.h"
#include "json.hpp"

namespace {

using hiertype::ConfigError;
using hiertype::TrainConfig;

std::vector<std::string> split_commas(const std::string &s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

// Width of the vectors in a word vector file, from its first data line.
size_t detect_word_dim(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw hiertype::IOError("cannot open " + path + " for reading");
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::vector<std::string> fields;
    std::string f;
    while (ss >> f) fields.push_back(f);
    if (fields.empty()) continue;
    if (first && fields.size() == 2) {
      first = false;
      continue;  // "count dim" header
    }
    if (fields.size() < 2) throw hiertype::DimensionError(path + ": word line without values");
    return fields.size() - 1;
  }
  throw hiertype::DimensionError(path + ": no word vectors");
}

void log_options(const CLI::App &cmd, const std::string &name) {
  std::cerr << "[hiertype " << name << "] resolved options:\n"
            << cmd.config_to_str(true, false);
}

std::string join(const std::vector<std::string> &v, const char *sep) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += v[i];
  }
  return s;
}

struct DataFlags {
  hiertype::DataPaths paths;

  void add(CLI::App *cmd, bool need_train) {
    cmd->add_option("--ontology,--types", paths.ontology,
                    "Type (or KB) hierarchy: child<TAB>parent lines")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--leaf-mask", paths.leaf_mask, "Types scored by MAP, one per line")
        ->check(CLI::ExistingFile);
    cmd->add_option("--embeddings", paths.embeddings, "Pretrained word vectors (text)")
        ->required()
        ->check(CLI::ExistingFile);
    if (need_train) {
      cmd->add_option("--train", paths.train, "Training mentions (JSON lines)")
          ->required()
          ->check(CLI::ExistingFile);
      cmd->add_option("--dev", paths.dev, "Development mentions (JSON lines)")
          ->check(CLI::ExistingFile);
    }
    cmd->add_option("--names", paths.names, "Linking: entity<TAB>canonical name")
        ->check(CLI::ExistingFile);
    cmd->add_option("--index", paths.index, "Linking: prebuilt candidate index")
        ->check(CLI::ExistingFile);
  }
};

int run(int argc, char **argv) {
  CLI::App app{"Hierarchy-aware entity typing and linking"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  // ontology
  auto *onto_cmd = app.add_subcommand("ontology", "Validate or expand a type hierarchy");
  onto_cmd->require_subcommand(1);
  std::string edges_path, closure_out, closure_labels;
  auto *onto_check = onto_cmd->add_subcommand("check", "Load and validate an edge list");
  onto_check->add_option("--edges", edges_path, "child<TAB>parent edge list")
      ->required()
      ->check(CLI::ExistingFile);
  auto *onto_closure = onto_cmd->add_subcommand(
      "closure", "Print every concept with its ancestors (or expand --labels)");
  onto_closure->add_option("--edges", edges_path, "child<TAB>parent edge list")
      ->required()
      ->check(CLI::ExistingFile);
  onto_closure->add_option("--labels", closure_labels, "Comma-separated labels to expand");
  onto_closure->add_option("--out", closure_out, "Output file (default stdout)");

  // index
  auto *index_cmd = app.add_subcommand("index", "Build or query the candidate index");
  index_cmd->require_subcommand(1);
  std::string names_path, index_out, index_path, query;
  size_t k = 100;
  hiertype::NgramIndex::Options ngram_opts;
  auto *index_build = index_cmd->add_subcommand("build", "Build a TFIDF n-gram index");
  index_build->add_option("--names", names_path, "entity<TAB>canonical name")
      ->required()
      ->check(CLI::ExistingFile);
  index_build->add_option("--out", index_out, "Index file to write")->required();
  index_build->add_option("--min-n", ngram_opts.min_n, "Smallest n-gram")->capture_default_str();
  index_build->add_option("--max-n", ngram_opts.max_n, "Largest n-gram")->capture_default_str();
  index_build->add_option("--max-features", ngram_opts.max_features, "Features kept")
      ->capture_default_str();
  auto *index_query = index_cmd->add_subcommand("query", "Top-k entities for a string");
  index_query->add_option("--index", index_path, "Index file")->required()->check(CLI::ExistingFile);
  index_query->add_option("--string", query, "Mention string")->required();
  index_query->add_option("--k", k, "Number of candidates")->capture_default_str();

  // train
  auto *train_cmd = app.add_subcommand("train", "Train a model; comma-separated values grid search");
  std::string config_path, out_path, log_path, report_path;
  std::vector<std::string> sets;
  struct Override {
    const char *flag;
    const char *key;
    const char *help;
    std::string value;
  };
  std::vector<Override> overrides = {
      {"--task", "task", "mention-typing | entity-typing | linking", ""},
      {"--variant", "variant", "e.g. cnn, cnn+complex, cnn+hier+closure", ""},
      {"--seed", "seed", "Random seed", ""},
      {"--lr", "lr", "Adam learning rate", ""},
      {"--dropout", "dropout_keep", "Dropout keep probability", ""},
      {"--l2", "l2", "L2 weight", ""},
      {"--negatives", "negatives", "Negative links per positive", ""},
      {"--gamma", "gamma", "Structure loss weight", ""},
      {"--bag-k", "bag_k_train", "Mentions sampled per training bag", ""},
      {"--bag-k-test", "bag_k_test", "Mentions sampled per test bag", ""},
      {"--batch-size", "batch_size", "Examples per optimizer step", ""},
      {"--max-epochs", "max_epochs", "Epoch limit", ""},
      {"--patience", "patience", "Epochs without dev improvement before stopping", ""},
      {"--max-steps", "max_steps", "Optimizer step limit (0: none)", ""},
      {"--dim", "dim", "Encoder and embedding width", ""},
      {"--position-dim", "position_dim", "Position embedding width", ""},
      {"--window", "window", "Convolution window", ""},
      {"--candidates", "candidates_k", "Linking candidates per mention", ""},
  };
  DataFlags train_data;
  train_cmd->add_option("--config", config_path, "key = value configuration file")
      ->check(CLI::ExistingFile);
  for (auto &o : overrides) train_cmd->add_option(o.flag, o.value, o.help);
  train_cmd->add_option("--set", sets, "Extra key=value settings (repeatable)");
  train_data.add(train_cmd, true);
  train_cmd->add_option("--out", out_path, "Checkpoint to write")->required();
  train_cmd->add_option("--log", log_path, "Per-epoch JSON lines (default stderr)");
  train_cmd->add_option("--report", report_path, "Grid search table (TSV)");

  // eval
  auto *eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  std::string checkpoint_path, test_path, predictions_path;
  DataFlags eval_data;
  eval_cmd->add_option("--checkpoint", checkpoint_path, "Model checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--test", test_path, "Mentions to evaluate")->required()->check(CLI::ExistingFile);
  eval_data.add(eval_cmd, false);
  eval_cmd->add_option("--out", out_path, "Also write the report here");
  eval_cmd->add_option("--predictions", predictions_path, "Per-mention prediction TSV");

  // predict
  auto *predict_cmd = app.add_subcommand("predict", "Predict types for mentions or entities");
  std::string input_path;
  DataFlags predict_data;
  predict_cmd->add_option("--checkpoint", checkpoint_path, "Model checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  predict_cmd->add_option("--input", input_path, "Mentions (JSON lines)")
      ->required()
      ->check(CLI::ExistingFile);
  predict_data.add(predict_cmd, false);
  predict_cmd->add_option("--out", out_path, "Output JSON lines (default stdout)");

  // link
  auto *link_cmd = app.add_subcommand("link", "Link mentions to entities");
  DataFlags link_data;
  link_cmd->add_option("--checkpoint", checkpoint_path, "Linking checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  link_cmd->add_option("--input", input_path, "Mentions (JSON lines)")
      ->required()
      ->check(CLI::ExistingFile);
  link_data.add(link_cmd, false);
  link_cmd->add_option("--out", out_path, "Output TSV (default stdout)");

  // synth
  auto *synth_cmd = app.add_subcommand("synth", "Write a synthetic hierarchy and corpus");
  hiertype::SynthConfig synth;
  std::string branching = "4,3,2", cue_rates = "0.9,0.7,0.35";
  synth_cmd->add_option("--out", out_path, "Existing output directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  synth_cmd->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--branching", branching,
                        "Children per node by level; its length is the depth")
      ->capture_default_str();
  synth_cmd->add_option("--entities", synth.entities, "Entities")->capture_default_str();
  synth_cmd->add_option("--mentions", synth.mentions_per_entity, "Mentions per entity")
      ->capture_default_str();
  synth_cmd->add_option("--vocab", synth.vocab_size, "Filler vocabulary size")
      ->capture_default_str();
  synth_cmd->add_option("--noise", synth.noise, "Cue swap rate")->capture_default_str();
  synth_cmd->add_option("--cue-rates", cue_rates, "Cue rate per depth")->capture_default_str();
  synth_cmd->add_option("--word-dim", synth.word_dim, "Word vector width")->capture_default_str();

  // kernels
  auto *kernels_cmd = app.add_subcommand("kernels", "Report the active numeric kernels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  }

  namespace ht = hiertype;

  if (*onto_cmd) {
    if (*onto_check) {
      log_options(*onto_check, "ontology check");
      ht::Ontology onto = ht::Ontology::load(edges_path);
      std::cout << "ok: " << onto.size() << " concepts, " << onto.num_edges()
                << " edges, " << onto.sinks().size() << " sinks\n";
      return 0;
    }
    log_options(*onto_closure, "ontology closure");
    ht::Ontology onto = ht::Ontology::load(edges_path);
    std::ostringstream os;
    if (!closure_labels.empty()) {
      std::vector<ht::ConceptId> ids;
      for (const auto &l : split_commas(closure_labels)) ids.push_back(onto.id(l));
      std::vector<std::string> names;
      for (ht::ConceptId c : onto.expand_labels(ids)) names.push_back(onto.name(c));
      os << join(names, "\t") << '\n';
    } else {
      for (ht::ConceptId c = 0; c < onto.size(); ++c) {
        std::vector<std::string> names;
        for (ht::ConceptId a : onto.ancestors(c)) names.push_back(onto.name(a));
        os << onto.name(c);
        for (const auto &n : names) os << '\t' << n;
        os << '\n';
      }
    }
    if (closure_out.empty()) {
      std::cout << os.str();
    } else {
      std::ofstream out(closure_out);
      if (!out) throw ht::IOError("cannot open " + closure_out + " for writing");
      out << os.str();
    }
    return 0;
  }

  if (*index_cmd) {
    if (*index_build) {
      log_options(*index_build, "index build");
      auto names = ht::load_names(names_path);
      auto idx = ht::NgramIndex::build(names, ngram_opts);
      idx.save(index_out);
      std::cerr << "indexed " << idx.num_entities() << " entities over "
                << idx.num_features() << " features\n";
      return 0;
    }
    log_options(*index_query, "index query");
    auto idx = ht::NgramIndex::load(index_path);
    auto set = idx.candidates(query, k);
    std::cout << "rank\tentity\tcsim\n";
    for (size_t i = 0; i < set.entries.size(); ++i) {
      std::cout << i + 1 << '\t' << idx.entity_key(set.entries[i].entity) << '\t'
                << set.entries[i].csim << '\n';
    }
    return 0;
  }

  if (*train_cmd) {
    TrainConfig base = config_path.empty() ? TrainConfig() : TrainConfig::from_file(config_path);
    std::vector<std::pair<std::string, std::vector<std::string>>> grid;
    auto apply = [&](const std::string &key, const std::string &value) {
      auto values = split_commas(value);
      if (values.empty()) throw ConfigError("empty value for " + key);
      base.set(key, values.front());
      if (values.size() > 1) grid.emplace_back(key, values);
    };
    for (const auto &o : overrides) {
      if (!o.value.empty()) apply(o.key, o.value);
    }
    for (const auto &s : sets) {
      auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
      apply(s.substr(0, eq), s.substr(eq + 1));
    }
    base.validate();
    log_options(*train_cmd, "train");
    std::cerr << "[hiertype train] resolved training config:\n" << base.summary();
    auto data = ht::load_dataset(train_data.paths, base.task,
                                 detect_word_dim(train_data.paths.embeddings));
    std::ofstream log_file;
    std::ostream *log = &std::cerr;
    if (!log_path.empty()) {
      log_file.open(log_path);
      if (!log_file) throw ht::IOError("cannot open " + log_path + " for writing");
      log = &log_file;
    }
    ht::TrainResult result;
    if (grid.empty()) {
      result = ht::train(base, data, log);
    } else {
      auto search = ht::grid_search(base, grid, data, log);
      std::cerr << search.report();
      if (!report_path.empty()) {
        std::ofstream rep(report_path);
        if (!rep) throw ht::IOError("cannot open " + report_path + " for writing");
        rep << search.report();
      }
      result = std::move(search.best_result);
    }
    result.checkpoint.save(out_path);
    nlohmann::ordered_json summary;
    summary["checkpoint"] = out_path;
    summary["dev_metric"] = result.dev_metric;
    summary["best_epoch"] = result.best_epoch;
    summary["steps"] = result.steps;
    std::cout << summary.dump() << '\n';
    return 0;
  }

  auto load_model = [&](ht::DataPaths &paths, const std::string &mentions, bool as_test) {
    auto model = ht::Model::from_archive(ht::numcore::TensorArchive::load(checkpoint_path));
    if (as_test) paths.test = mentions;
    auto data = ht::load_dataset(paths, model.config.task, model.encoder.config.word_dim);
    if (data.ontology.size() != model.concept_table().count()) {
      throw ht::DataError("ontology has " + std::to_string(data.ontology.size()) +
                          " concepts, checkpoint expects " +
                          std::to_string(model.concept_table().count()));
    }
    return std::make_pair(std::move(model), std::move(data));
  };

  if (*eval_cmd) {
    log_options(*eval_cmd, "eval");
    auto [model, data] = load_model(eval_data.paths, test_path, true);
    auto report = ht::evaluate(model, data, data.test, !predictions_path.empty());
    std::cout << report.to_json();
    if (!out_path.empty()) report.write_json(out_path);
    if (!predictions_path.empty()) report.write_predictions_tsv(predictions_path);
    return 0;
  }

  if (*predict_cmd || *link_cmd) {
    const bool linking = link_cmd->parsed();
    log_options(linking ? *link_cmd : *predict_cmd, linking ? "link" : "predict");
    auto [model, data] = load_model(linking ? link_data.paths : predict_data.paths, input_path, true);
    if (linking != (model.config.task == ht::Task::kLinking)) {
      throw ConfigError(linking ? "link needs a linking checkpoint"
                                : "predict needs a typing checkpoint; use link for linking");
    }
    std::ofstream out_file;
    std::ostream *out = &std::cout;
    if (!out_path.empty()) {
      out_file.open(out_path);
      if (!out_file) throw ht::IOError("cannot open " + out_path + " for writing");
      out = &out_file;
    }
    const auto &onto = data.ontology;
    if (model.config.task == ht::Task::kMentionTyping) {
      for (const auto &m : data.test) {
        auto probs = ht::predict_type_probs(model, m, data.words);
        nlohmann::ordered_json j;
        j["id"] = m.id;
        j["surface"] = m.surface();
        std::vector<std::string> types;
        for (auto c : ht::figer_decode(probs)) types.push_back(onto.name(c));
        j["types"] = types;
        *out << j.dump() << '\n';
      }
    } else if (model.config.task == ht::Task::kEntityTyping) {
      auto bags = ht::build_bags(data.test, onto, false);
      for (size_t b = 0; b < bags.size(); ++b) {
        ht::Rng rng(model.config.seed + b);
        auto scores = ht::predict_bag_scores(model, bags[b], model.config.bag_k_test, data.words, rng);
        nlohmann::ordered_json j;
        j["entity"] = bags[b].entity;
        nlohmann::ordered_json s = nlohmann::ordered_json::object();
        for (size_t t = 0; t < scores.size(); ++t) s[onto.name(static_cast<ht::ConceptId>(t))] = scores[t];
        j["scores"] = s;
        *out << j.dump() << '\n';
      }
    } else {
      auto sets = ht::candidate_sets(data, data.test, model.config.candidates_k);
      *out << "id\tsurface\tpredicted\tscore\tcsim\n";
      for (size_t i = 0; i < data.test.size(); ++i) {
        auto scores = ht::predict_link_scores(model, data.test[i], sets[i], data);
        if (scores.empty()) {
          *out << data.test[i].id << '\t' << data.test[i].surface() << "\t-\t-\t-\n";
          continue;
        }
        size_t best = static_cast<size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
        *out << data.test[i].id << '\t' << data.test[i].surface() << '\t'
             << data.index->entity_key(sets[i].entries[best].entity) << '\t' << scores[best]
             << '\t' << sets[i].entries[best].csim << '\n';
      }
    }
    return 0;
  }

  if (*synth_cmd) {
    log_options(*synth_cmd, "synth");
    synth.branching.clear();
    for (const auto &b : split_commas(branching)) {
      size_t v = 0;
      auto res = std::from_chars(b.data(), b.data() + b.size(), v);
      if (res.ec != std::errc() || res.ptr != b.data() + b.size()) {
        throw ConfigError("bad branching factor '" + b + "'");
      }
      synth.branching.push_back(v);
    }
    synth.cue_rates.clear();
    for (const auto &r : split_commas(cue_rates)) {
      try {
        synth.cue_rates.push_back(std::stod(r));
      } catch (const std::exception &) {
        throw ConfigError("bad cue rate '" + r + "'");
      }
    }
    auto data = ht::generate_synthetic(synth);
    ht::write_synthetic(data, out_path);
    std::cerr << "wrote " << data.types.size() << " types, " << data.names.size()
              << " entities, " << data.train.size() + data.dev.size() + data.test.size()
              << " typing mentions to " << out_path << '\n';
    return 0;
  }

  if (*kernels_cmd) {
    std::cout << "active: " << ht::numcore::kernels::backend_name(ht::numcore::kernels::active_backend())
              << "\navx2 available: "
              << (ht::numcore::kernels::backend_available(ht::numcore::kernels::Backend::kAvx2) ? "yes" : "no")
              << '\n';
    return 0;
  }
  return 2;
}

}  // namespace

int main(int argc, char **argv) {
  try {
    return run(argc, argv);
  } catch (const hiertype::Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.category());
  } catch (const std::exception &e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 4;
  }
}
