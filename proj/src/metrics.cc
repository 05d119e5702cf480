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

#include "hiertype/metrics.h"

#include <algorithm>
#include <numeric>

#include "hiertype/errors.h"
#include "json.hpp"
#include "text_util.h"

namespace hiertype {

namespace {

void check_aligned(size_t a, size_t b, const char *what) {
  if (a != b) {
    throw LengthMismatch(std::string(what) + ": " + std::to_string(a) +
                         " predictions for " + std::to_string(b) + " gold entries");
  }
}

size_t overlap(const TypeSet &a, const TypeSet &b) {
  size_t n = 0, i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++n;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return n;
}

TypeSet normalized(const TypeSet &s) {
  TypeSet out = s;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double f1(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

}  // namespace

TypeSet figer_decode(std::span<const double> probs) {
  if (probs.empty()) return {};
  size_t best = 0;
  for (size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best]) best = i;
  }
  TypeSet out;
  for (size_t i = 0; i < probs.size(); ++i) {
    if (i == best || probs[i] > 0.5) out.push_back(static_cast<ConceptId>(i));
  }
  return out;
}

double strict_accuracy(std::span<const TypeSet> preds, std::span<const TypeSet> golds) {
  check_aligned(preds.size(), golds.size(), "strict_accuracy");
  if (preds.empty()) return 0.0;
  size_t hits = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    if (normalized(preds[i]) == normalized(golds[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

double macro_f1(std::span<const TypeSet> preds, std::span<const TypeSet> golds) {
  check_aligned(preds.size(), golds.size(), "macro_f1");
  if (preds.empty()) return 0.0;
  double total = 0.0;
  for (size_t i = 0; i < preds.size(); ++i) {
    const TypeSet p = normalized(preds[i]), g = normalized(golds[i]);
    if (p.empty() && g.empty()) {
      total += 1.0;
      continue;
    }
    if (p.empty() || g.empty()) continue;
    const double tp = static_cast<double>(overlap(p, g));
    total += f1(tp / static_cast<double>(p.size()), tp / static_cast<double>(g.size()));
  }
  return total / static_cast<double>(preds.size());
}

double macro_f1_averaged_pr(std::span<const TypeSet> preds,
                            std::span<const TypeSet> golds) {
  check_aligned(preds.size(), golds.size(), "macro_f1_averaged_pr");
  double p_sum = 0.0, r_sum = 0.0;
  size_t p_n = 0, r_n = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    const TypeSet p = normalized(preds[i]), g = normalized(golds[i]);
    const double tp = static_cast<double>(overlap(p, g));
    if (!p.empty()) {
      p_sum += tp / static_cast<double>(p.size());
      ++p_n;
    }
    if (!g.empty()) {
      r_sum += tp / static_cast<double>(g.size());
      ++r_n;
    }
  }
  const double p = p_n ? p_sum / static_cast<double>(p_n) : 0.0;
  const double r = r_n ? r_sum / static_cast<double>(r_n) : 0.0;
  return f1(p, r);
}

double micro_f1(std::span<const TypeSet> preds, std::span<const TypeSet> golds) {
  check_aligned(preds.size(), golds.size(), "micro_f1");
  size_t tp = 0, n_pred = 0, n_gold = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    const TypeSet p = normalized(preds[i]), g = normalized(golds[i]);
    tp += overlap(p, g);
    n_pred += p.size();
    n_gold += g.size();
  }
  if (n_pred == 0 && n_gold == 0) return preds.empty() ? 0.0 : 1.0;
  const double p = n_pred ? static_cast<double>(tp) / static_cast<double>(n_pred) : 0.0;
  const double r = n_gold ? static_cast<double>(tp) / static_cast<double>(n_gold) : 0.0;
  return f1(p, r);
}

double average_precision(std::span<const double> scores,
                         const std::vector<bool> &relevant) {
  check_aligned(scores.size(), relevant.size(), "average_precision");
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a] > scores[b]; });
  size_t hits = 0;
  double total = 0.0;
  for (size_t rank = 0; rank < order.size(); ++rank) {
    if (relevant[order[rank]]) {
      ++hits;
      total += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
  }
  return hits ? total / static_cast<double>(hits) : 0.0;
}

MapResult mean_average_precision(const numcore::Tensor &scores,
                                 std::span<const TypeSet> golds,
                                 const std::vector<bool> &leaf_mask) {
  if (std::none_of(leaf_mask.begin(), leaf_mask.end(), [](bool b) { return b; })) {
    throw EmptyMask("MAP requested with an empty type mask");
  }
  if (scores.rank() != 2) throw LengthMismatch("MAP scores must be a matrix");
  check_aligned(scores.rows(), golds.size(), "mean_average_precision");
  if (scores.cols() != leaf_mask.size()) {
    throw LengthMismatch("MAP: score columns do not match the type mask");
  }
  const size_t n_entities = scores.rows(), n_types = scores.cols();
  std::vector<std::vector<bool>> relevant(n_types, std::vector<bool>(n_entities, false));
  for (size_t e = 0; e < n_entities; ++e) {
    for (ConceptId t : golds[e]) {
      if (t >= n_types) throw UnknownConcept("gold type id out of range in MAP");
      relevant[t][e] = true;
    }
  }
  MapResult result;
  std::vector<double> column(n_entities);
  for (size_t t = 0; t < n_types; ++t) {
    if (!leaf_mask[t]) continue;
    if (std::none_of(relevant[t].begin(), relevant[t].end(), [](bool b) { return b; })) {
      continue;
    }
    for (size_t e = 0; e < n_entities; ++e) column[e] = scores.at(e, t);
    result.per_type.emplace_back(static_cast<ConceptId>(t),
                                 average_precision(column, relevant[t]));
  }
  if (!result.per_type.empty()) {
    double total = 0.0;
    for (const auto &[t, ap] : result.per_type) total += ap;
    result.map = total / static_cast<double>(result.per_type.size());
  }
  return result;
}

LinkingAccuracy linking_accuracy(std::span<const std::string> preds,
                                 std::span<const std::string> golds,
                                 std::span<const CandidateSet> candidates) {
  check_aligned(preds.size(), golds.size(), "linking_accuracy");
  check_aligned(candidates.size(), golds.size(), "linking_accuracy candidates");
  LinkingAccuracy acc;
  acc.mentions = preds.size();
  for (size_t i = 0; i < preds.size(); ++i) {
    if (candidates[i].gold_in_set) ++acc.alias_hits;
    if (candidates[i].gold_in_set && preds[i] == golds[i]) ++acc.correct;
  }
  if (acc.mentions) {
    acc.original = static_cast<double>(acc.correct) / static_cast<double>(acc.mentions);
  }
  if (acc.alias_hits) {
    acc.normalized = static_cast<double>(acc.correct) / static_cast<double>(acc.alias_hits);
  }
  return acc;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["task"] = task;
  nlohmann::ordered_json m = nlohmann::ordered_json::object();
  for (const auto &[name, value] : metrics) m[name] = 100.0 * value;
  j["metrics_percent"] = m;
  if (!per_type_ap.empty()) {
    nlohmann::ordered_json ap = nlohmann::ordered_json::object();
    for (const auto &[name, value] : per_type_ap) ap[name] = 100.0 * value;
    j["per_type_ap_percent"] = ap;
  }
  j["num_predictions"] = predictions.size();
  return j.dump(2) + "\n";
}

void EvalReport::write_json(const std::string &path) const {
  auto out = internal::open_output(path);
  out << to_json();
  if (!out) throw IOError("write failed for " + path);
}

void EvalReport::write_predictions_tsv(const std::string &path) const {
  auto join = [](const std::vector<std::string> &v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
      if (i) s += '|';
      s += v[i];
    }
    return s;
  };
  auto out = internal::open_output(path);
  out << "id\tsurface\tgold\tpredicted\n";
  for (const PredictionRow &row : predictions) {
    out << row.id << '\t' << row.surface << '\t' << join(row.gold) << '\t'
        << join(row.predicted) << '\n';
  }
  if (!out) throw IOError("write failed for " + path);
}

}  // namespace hiertype
