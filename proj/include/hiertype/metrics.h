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

#ifndef HIERTYPE_METRICS_H_
#define HIERTYPE_METRICS_H_

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hiertype/candgen.h"
#include "hiertype/numcore/tensor.h"
#include "hiertype/ontology.h"

namespace hiertype {

using TypeSet = std::vector<ConceptId>;  // sorted, unique

// The most probable type (lowest id on ties) plus every type with
// probability above 0.5. Never empty for non-empty input.
TypeSet figer_decode(std::span<const double> probs);

// Fraction of mentions whose predicted set equals the gold set.
double strict_accuracy(std::span<const TypeSet> preds, std::span<const TypeSet> golds);
// Mean over mentions of per-mention F1. A mention with empty prediction and
// empty gold scores 1; one empty side scores 0.
double macro_f1(std::span<const TypeSet> preds, std::span<const TypeSet> golds);
// F1 of the mean per-mention precision (over mentions with predictions) and
// the mean per-mention recall (over mentions with gold types).
double macro_f1_averaged_pr(std::span<const TypeSet> preds,
                            std::span<const TypeSet> golds);
// F1 over true/false positives pooled across all mentions.
double micro_f1(std::span<const TypeSet> preds, std::span<const TypeSet> golds);

// Sum of precision at each relevant position divided by the number of
// relevant items. Items are ranked by score descending, ties by index.
// Returns 0 when nothing is relevant.
double average_precision(std::span<const double> scores,
                         const std::vector<bool> &relevant);

struct MapResult {
  double map = 0.0;
  // Average precision of every masked type with at least one positive.
  std::vector<std::pair<ConceptId, double>> per_type;
};

// scores: (entities x types). Types outside the mask or without positives
// are skipped. Throws EmptyMask when the mask selects nothing and
// LengthMismatch when shapes disagree.
MapResult mean_average_precision(const numcore::Tensor &scores,
                                 std::span<const TypeSet> golds,
                                 const std::vector<bool> &leaf_mask);

struct LinkingAccuracy {
  double original = 0.0;
  double normalized = 0.0;
  size_t mentions = 0;
  size_t alias_hits = 0;
  size_t correct = 0;
};

// original = correct / mentions; normalized = correct / mentions whose
// candidate set contains the gold entity (0 when there are none).
LinkingAccuracy linking_accuracy(std::span<const std::string> preds,
                                 std::span<const std::string> golds,
                                 std::span<const CandidateSet> candidates);

struct PredictionRow {
  std::string id;
  std::string surface;
  std::vector<std::string> gold;
  std::vector<std::string> predicted;
};

struct EvalReport {
  std::string task;
  // Fractions in [0, 1]; written as percentages.
  std::map<std::string, double> metrics;
  std::vector<std::pair<std::string, double>> per_type_ap;
  std::vector<PredictionRow> predictions;

  std::string to_json() const;
  void write_json(const std::string &path) const;
  // id, surface, gold, predicted; label lists are '|' separated.
  void write_predictions_tsv(const std::string &path) const;
};

}  // namespace hiertype

#endif  // HIERTYPE_METRICS_H_
