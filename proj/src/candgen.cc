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

#include "hiertype/candgen.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "binary_io.h"
#include "hiertype/errors.h"
#include "text_util.h"

namespace hiertype {

const std::vector<std::string> &stop_words() {
  static const std::vector<std::string> words = {
      "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you",
      "you're", "you've", "you'll", "you'd", "your", "yours", "yourself",
      "yourselves", "he", "him", "his", "himself", "she", "she's", "her",
      "hers", "herself", "it", "it's", "its", "itself", "they", "them",
      "their", "theirs", "themselves", "what", "which", "who", "whom", "this",
      "that", "that'll", "these", "those", "am", "is", "are", "was", "were",
      "be", "been", "being", "have", "has", "had", "having", "do", "does",
      "did", "doing", "a", "an", "the", "and", "but", "if", "or", "because",
      "as", "until", "while", "of", "at", "by", "for", "with", "about",
      "against", "between", "into", "through", "during", "before", "after",
      "above", "below", "to", "from", "up", "down", "in", "out", "on", "off",
      "over", "under", "again", "further", "then", "once", "here", "there",
      "when", "where", "why", "how", "all", "any", "both", "each", "few",
      "more", "most", "other", "some", "such", "no", "nor", "not", "only",
      "own", "same", "so", "than", "too", "very", "s", "t", "can", "will",
      "just", "don", "don't", "should", "should've", "now", "d", "ll", "m",
      "o", "re", "ve", "y", "ain", "aren", "aren't", "couldn", "couldn't",
      "didn", "didn't", "doesn", "doesn't", "hadn", "hadn't", "hasn",
      "hasn't", "haven", "haven't", "isn", "isn't", "ma", "mightn",
      "mightn't", "mustn", "mustn't", "needn", "needn't", "shan", "shan't",
      "shouldn", "shouldn't", "wasn", "wasn't", "weren", "weren't", "won",
      "won't", "wouldn", "wouldn't"};
  return words;
}

namespace {

const std::unordered_set<std::string> &stop_set() {
  static const std::unordered_set<std::string> set(stop_words().begin(),
                                                   stop_words().end());
  return set;
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Byte offsets of code point starts, plus the end offset.
std::vector<size_t> codepoint_offsets(std::string_view s) {
  std::vector<size_t> offsets;
  for (size_t i = 0; i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) offsets.push_back(i);
  }
  offsets.push_back(s.size());
  return offsets;
}

constexpr char kMagic[8] = {'H', 'T', 'N', 'G', 'R', 'A', 'M', '\0'};

}  // namespace

std::string preprocess(std::string_view text) {
  std::string out;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) {
      std::string token(text.substr(i, j - i));
      for (char &c : token) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      }
      if (!stop_set().count(token)) {
        if (!out.empty()) out += ' ';
        out += token;
      }
    }
    i = j;
  }
  return out;
}

std::vector<std::pair<std::string, std::uint32_t>> char_ngrams(
    std::string_view text, size_t min_n, size_t max_n) {
  std::map<std::string, std::uint32_t> counts;
  const auto offsets = codepoint_offsets(text);
  const size_t n_cp = offsets.size() - 1;
  for (size_t n = min_n; n <= max_n; ++n) {
    for (size_t i = 0; i + n <= n_cp; ++i) {
      ++counts[std::string(text.substr(offsets[i], offsets[i + n] - offsets[i]))];
    }
  }
  return {counts.begin(), counts.end()};
}

double cosine(const SparseVector &a, const SparseVector &b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (double v : a.value) na += v * v;
  for (double v : b.value) nb += v * v;
  size_t i = 0, j = 0;
  while (i < a.index.size() && j < b.index.size()) {
    if (a.index[i] == b.index[j]) {
      dot += a.value[i++] * b.value[j++];
    } else if (a.index[i] < b.index[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

void normalize(SparseVector &v) {
  double norm = 0.0;
  for (double x : v.value) norm += x * x;
  if (norm == 0.0) return;
  norm = std::sqrt(norm);
  for (double &x : v.value) x /= norm;
}

}  // namespace

NgramIndex NgramIndex::build(
    std::span<const std::pair<std::string, std::string>> names,
    const Options &options) {
  if (names.empty()) throw DataError("cannot build an index over no names");
  if (options.min_n == 0 || options.min_n > options.max_n) {
    throw ConfigError("invalid n-gram range");
  }
  NgramIndex idx;
  idx.options_ = options;

  std::vector<std::vector<std::pair<std::string, std::uint32_t>>> grams;
  grams.reserve(names.size());
  std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> stats;  // tf, df
  for (const auto &[key, name] : names) {
    if (!idx.entity_index_.emplace(key, idx.entity_keys_.size()).second) {
      throw DataError("duplicate entity key '" + key + "' in name list");
    }
    idx.entity_keys_.push_back(key);
    grams.push_back(char_ngrams(preprocess(name), options.min_n, options.max_n));
    for (const auto &[g, c] : grams.back()) {
      auto &s = stats[g];
      s.first += c;
      s.second += 1;
    }
  }

  std::vector<std::pair<std::string, std::pair<std::uint64_t, std::uint64_t>>> ranked(
      stats.begin(), stats.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto &a, const auto &b) {
    return a.second.first > b.second.first;  // stats is already lexicographic
  });
  if (ranked.size() > options.max_features) ranked.resize(options.max_features);

  const double n_docs = static_cast<double>(names.size());
  for (size_t f = 0; f < ranked.size(); ++f) {
    idx.features_.push_back(ranked[f].first);
    idx.feature_map_.emplace(ranked[f].first, static_cast<std::uint32_t>(f));
    idx.idf_.push_back(std::log(1.0 + n_docs / static_cast<double>(ranked[f].second.second)));
  }

  idx.row_ptr_.push_back(0);
  for (const auto &doc : grams) {
    SparseVector v;
    for (const auto &[g, c] : doc) {
      auto it = idx.feature_map_.find(g);
      if (it == idx.feature_map_.end()) continue;
      v.index.push_back(it->second);
      v.value.push_back(static_cast<double>(c) * idx.idf_[it->second]);
    }
    std::vector<size_t> order(v.index.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return v.index[a] < v.index[b]; });
    SparseVector sorted;
    for (size_t o : order) {
      sorted.index.push_back(v.index[o]);
      sorted.value.push_back(v.value[o]);
    }
    normalize(sorted);
    idx.cols_.insert(idx.cols_.end(), sorted.index.begin(), sorted.index.end());
    idx.vals_.insert(idx.vals_.end(), sorted.value.begin(), sorted.value.end());
    idx.row_ptr_.push_back(idx.cols_.size());
  }
  idx.build_postings();
  return idx;
}

void NgramIndex::build_postings() {
  postings_.assign(features_.size(), {});
  for (size_t r = 0; r + 1 < row_ptr_.size(); ++r) {
    for (std::uint64_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      postings_[cols_[p]].emplace_back(static_cast<std::uint32_t>(r), vals_[p]);
    }
  }
}

std::optional<size_t> NgramIndex::find_entity(std::string_view key) const {
  auto it = entity_index_.find(std::string(key));
  if (it == entity_index_.end()) return std::nullopt;
  return it->second;
}

SparseVector NgramIndex::vectorize(std::string_view text) const {
  std::vector<std::pair<std::uint32_t, double>> entries;
  for (const auto &[g, c] : char_ngrams(preprocess(text), options_.min_n, options_.max_n)) {
    auto it = feature_map_.find(g);
    if (it == feature_map_.end()) continue;
    entries.emplace_back(it->second, static_cast<double>(c) * idf_[it->second]);
  }
  std::sort(entries.begin(), entries.end());
  SparseVector v;
  for (const auto &[i, w] : entries) {
    v.index.push_back(i);
    v.value.push_back(w);
  }
  normalize(v);
  return v;
}

SparseVector NgramIndex::entity_vector(size_t row) const {
  if (row >= num_entities()) throw DataError("entity row out of range");
  SparseVector v;
  for (std::uint64_t p = row_ptr_[row]; p < row_ptr_[row + 1]; ++p) {
    v.index.push_back(cols_[p]);
    v.value.push_back(vals_[p]);
  }
  return v;
}

CandidateSet NgramIndex::candidates(std::string_view mention, size_t k,
                                    std::optional<size_t> gold) const {
  const SparseVector q = vectorize(mention);
  std::vector<double> scores(num_entities(), 0.0);
  for (size_t i = 0; i < q.index.size(); ++i) {
    const double w = q.value[i];
    for (const auto &[row, v] : postings_[q.index[i]]) scores[row] += w * v;
  }
  std::vector<size_t> order(num_entities());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  const size_t take = std::min(k, order.size());
  auto better = [&](size_t a, size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(take),
                    order.end(), better);
  CandidateSet set;
  for (size_t i = 0; i < take; ++i) {
    const double csim = std::clamp(scores[order[i]], 0.0, 1.0);
    set.entries.push_back({order[i], csim});
    if (gold && order[i] == *gold) {
      set.gold_in_set = true;
      set.gold_position = i;
    }
  }
  return set;
}

std::string NgramIndex::serialize() const {
  internal::ByteWriter out;
  out.bytes(kMagic, sizeof(kMagic));
  out.u32(kVersion);
  out.u32(static_cast<std::uint32_t>(options_.min_n));
  out.u32(static_cast<std::uint32_t>(options_.max_n));
  out.u64(options_.max_features);
  out.u64(entity_keys_.size());
  for (const auto &k : entity_keys_) out.str(k);
  out.u64(features_.size());
  for (const auto &f : features_) out.str(f);
  for (double v : idf_) out.f64(v);
  for (std::uint64_t p : row_ptr_) out.u64(p);
  for (std::uint32_t c : cols_) out.u32(c);
  for (double v : vals_) out.f64(v);
  return out.take();
}

NgramIndex NgramIndex::deserialize(const std::string &bytes) {
  internal::ByteReader in(bytes, "ngram index");
  char magic[8];
  in.bytes(magic, sizeof(magic));
  if (!std::equal(magic, magic + 8, kMagic)) throw DataError("ngram index: bad magic");
  std::uint32_t version = in.u32();
  if (version != kVersion) {
    throw DataError("ngram index: unsupported version " + std::to_string(version));
  }
  NgramIndex idx;
  idx.options_.min_n = in.u32();
  idx.options_.max_n = in.u32();
  idx.options_.max_features = in.u64();
  const std::uint64_t n_entities = in.u64();
  for (std::uint64_t i = 0; i < n_entities; ++i) {
    idx.entity_keys_.push_back(in.str());
    idx.entity_index_.emplace(idx.entity_keys_.back(), i);
  }
  const std::uint64_t n_features = in.u64();
  for (std::uint64_t i = 0; i < n_features; ++i) {
    idx.features_.push_back(in.str());
    idx.feature_map_.emplace(idx.features_.back(), static_cast<std::uint32_t>(i));
  }
  for (std::uint64_t i = 0; i < n_features; ++i) idx.idf_.push_back(in.f64());
  for (std::uint64_t i = 0; i <= n_entities; ++i) idx.row_ptr_.push_back(in.u64());
  const std::uint64_t nnz = idx.row_ptr_.back();
  if (nnz > in.remaining() / 12) throw DataError("ngram index: truncated matrix");
  for (std::uint64_t i = 0; i < nnz; ++i) {
    idx.cols_.push_back(in.u32());
    if (idx.cols_.back() >= n_features) throw DataError("ngram index: bad column");
  }
  for (std::uint64_t i = 0; i < nnz; ++i) idx.vals_.push_back(in.f64());
  if (in.remaining() != 0) throw DataError("ngram index: trailing bytes");
  idx.build_postings();
  return idx;
}

void NgramIndex::save(const std::string &path) const {
  auto out = internal::open_output(path, std::ios::binary);
  const std::string bytes = serialize();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IOError("write failed for " + path);
}

NgramIndex NgramIndex::load(const std::string &path) {
  auto in = internal::open_input(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize(buf.str());
}

std::vector<std::pair<std::string, std::string>> load_names(const std::string &path) {
  auto in = internal::open_input(path);
  std::vector<std::pair<std::string, std::string>> names;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = internal::strip_cr(line);
    if (internal::trim(view).empty() || internal::trim(view).front() == '#') continue;
    size_t tab = view.find('\t');
    if (tab == std::string_view::npos) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                           ": expected entity<TAB>name",
                       lineno);
    }
    names.emplace_back(std::string(internal::trim(view.substr(0, tab))),
                       std::string(internal::trim(view.substr(tab + 1))));
  }
  return names;
}

}  // namespace hiertype
