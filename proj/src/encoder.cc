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

#include "hiertype/encoder.h"

#include <algorithm>
#include <cmath>

#include "hiertype/errors.h"

namespace hiertype {

using numcore::Parameter;
using numcore::Tape;
using numcore::Tensor;
using numcore::Var;
namespace ops = numcore::ops;

Tensor glorot_uniform(const numcore::Shape &shape, size_t fan_in,
                      size_t fan_out, Rng &rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor t(shape);
  for (double &v : t.values()) v = dist(rng);
  return t;
}

EncoderParams EncoderParams::init(const EncoderConfig &config, Rng &rng) {
  if (config.window % 2 == 0) throw ConfigError("convolution window must be odd");
  if (config.word_dim == 0 || config.dim == 0 || config.position_dim == 0) {
    throw ConfigError("encoder dimensions must be positive");
  }
  if (config.max_position < 1) throw ConfigError("max_position must be >= 1");
  const size_t d = config.dim;
  const size_t d_in = config.word_dim + config.position_dim;
  const size_t n_pos = 2 * static_cast<size_t>(config.max_position) + 1;
  EncoderParams p;
  p.config = config;
  p.position_table = Parameter(
      "encoder.position_table",
      glorot_uniform({n_pos, config.position_dim}, n_pos, config.position_dim, rng));
  p.conv_filters = Parameter(
      "encoder.conv_filters",
      glorot_uniform({config.window, d, d_in}, config.window * d_in,
                     config.window * d, rng));
  p.conv_bias = Parameter("encoder.conv_bias", Tensor({d}));
  p.mlp_w1 = Parameter("encoder.mlp_w1",
                       glorot_uniform({d, config.word_dim + d},
                                      config.word_dim + d, d, rng));
  p.mlp_b1 = Parameter("encoder.mlp_b1", Tensor({d}));
  p.mlp_w2 = Parameter("encoder.mlp_w2", glorot_uniform({d, d}, d, d, rng));
  p.mlp_b2 = Parameter("encoder.mlp_b2", Tensor({d}));
  if (config.complex) {
    p.proj_real_w = Parameter("encoder.proj_real_w", glorot_uniform({d, d}, d, d, rng));
    p.proj_real_b = Parameter("encoder.proj_real_b", Tensor({d}));
    p.proj_imag_w = Parameter("encoder.proj_imag_w", glorot_uniform({d, d}, d, d, rng));
    p.proj_imag_b = Parameter("encoder.proj_imag_b", Tensor({d}));
  }
  return p;
}

std::vector<Parameter *> EncoderParams::parameters() {
  std::vector<Parameter *> out = {&position_table, &conv_filters, &conv_bias,
                                  &mlp_w1,         &mlp_b1,       &mlp_w2,
                                  &mlp_b2};
  if (config.complex) {
    out.insert(out.end(), {&proj_real_w, &proj_real_b, &proj_imag_w, &proj_imag_b});
  }
  return out;
}

Var embed_tokens(Tape &tape, const Mention &mention, const WordEmbeddings &words,
                 EncoderParams &params) {
  const auto pos = position_features(mention.length(), mention.start, mention.end);
  const size_t s = mention.length();
  const size_t d_w = params.config.word_dim;
  if (words.dim() != d_w) {
    throw DimensionError("word vectors have dimension " +
                         std::to_string(words.dim()) + ", encoder expects " +
                         std::to_string(d_w));
  }
  Tensor word_rows({s, d_w});
  for (size_t i = 0; i < s; ++i) {
    auto v = words.vector(mention.tokens[i]);
    std::copy(v.begin(), v.end(), word_rows.data() + i * d_w);
  }
  const int clip = params.config.max_position;
  std::vector<size_t> rows(s);
  for (size_t i = 0; i < s; ++i) {
    rows[i] = static_cast<size_t>(std::clamp(pos[i], -clip, clip) + clip);
  }
  Var position = ops::gather_rows(tape.param(params.position_table), rows);
  return ops::concat_cols(tape.constant(std::move(word_rows)), position);
}

Var encode_context(Tape &tape, Var tokens, EncoderParams &params) {
  Var conv = ops::conv1d_samepad(tokens, tape.param(params.conv_filters),
                                 tape.param(params.conv_bias));
  return ops::maxpool_time(conv);
}

Tensor surface_average(const Mention &mention, const WordEmbeddings &words) {
  validate_span(mention.length(), mention.start, mention.end);
  Tensor avg({words.dim()});
  for (size_t i = mention.start; i < mention.end; ++i) {
    auto v = words.vector(mention.tokens[i]);
    for (size_t k = 0; k < v.size(); ++k) avg[k] += v[k];
  }
  const double n = static_cast<double>(mention.end - mention.start);
  for (double &x : avg.values()) x /= n;
  return avg;
}

MentionVar encode_mention(Tape &tape, const Mention &mention,
                          const WordEmbeddings &words, EncoderParams &params,
                          const Dropout &dropout) {
  Var tokens = embed_tokens(tape, mention, words, params);
  Var context = encode_context(tape, tokens, params);
  Var surface = tape.constant(surface_average(mention, words));
  Var parts[] = {surface, context};
  Var joined = ops::concat(parts);
  Var hidden = ops::tanh(ops::add(
      ops::matvec(tape.param(params.mlp_w1), joined), tape.param(params.mlp_b1)));
  Var out = ops::add(ops::matvec(tape.param(params.mlp_w2), hidden),
                     tape.param(params.mlp_b2));
  if (dropout.rng != nullptr && dropout.keep < 1.0) {
    out = ops::dropout(out, numcore::dropout_mask(out.shape(), dropout.keep, *dropout.rng),
                       dropout.keep);
  }
  return {out, std::nullopt};
}

MentionVar project_complex(Tape &tape, const MentionVar &mention,
                           EncoderParams &params) {
  if (!params.config.complex) {
    throw ConfigError("complex projection requested on a real-valued encoder");
  }
  Var re = ops::add(ops::matvec(tape.param(params.proj_real_w), mention.real),
                    tape.param(params.proj_real_b));
  Var im = ops::add(ops::matvec(tape.param(params.proj_imag_w), mention.real),
                    tape.param(params.proj_imag_b));
  return {re, im};
}

}  // namespace hiertype
