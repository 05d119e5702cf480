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

#ifndef HIERTYPE_ENCODER_H_
#define HIERTYPE_ENCODER_H_

#include <optional>
#include <vector>

#include "hiertype/corpus.h"
#include "hiertype/numcore/tape.h"
#include "hiertype/ontology.h"

namespace hiertype {

struct EncoderConfig {
  size_t word_dim = 300;
  size_t position_dim = 25;
  // Width of the CNN output, the MLP hidden layer, and the mention vector.
  size_t dim = 300;
  size_t window = 5;
  // Relative positions are clipped to [-max_position, max_position].
  int max_position = 50;
  // Adds the real/imaginary affine projection used by complex variants.
  bool complex = false;
};

// Glorot-uniform weights, zero biases.
numcore::Tensor glorot_uniform(const numcore::Shape &shape, size_t fan_in,
                               size_t fan_out, Rng &rng);

struct EncoderParams {
  EncoderConfig config;
  numcore::Parameter position_table;  // (2 * max_position + 1) x position_dim
  numcore::Parameter conv_filters;    // window x dim x (word_dim + position_dim)
  numcore::Parameter conv_bias;       // dim
  numcore::Parameter mlp_w1;          // dim x (word_dim + dim)
  numcore::Parameter mlp_b1;          // dim
  numcore::Parameter mlp_w2;          // dim x dim
  numcore::Parameter mlp_b2;          // dim
  // Complex projection, populated only when config.complex.
  numcore::Parameter proj_real_w;     // dim x dim
  numcore::Parameter proj_real_b;     // dim
  numcore::Parameter proj_imag_w;     // dim x dim
  numcore::Parameter proj_imag_b;     // dim

  static EncoderParams init(const EncoderConfig &config, Rng &rng);
  std::vector<numcore::Parameter *> parameters();
};

// Mention representation on a tape; imag is set only for complex variants.
struct MentionVar {
  numcore::Var real;
  std::optional<numcore::Var> imag;
};

// Training-time dropout on the encoder output.
struct Dropout {
  double keep = 1.0;
  Rng *rng = nullptr;
};

// Rows are word vector (frozen) concatenated with the learned position row.
numcore::Var embed_tokens(numcore::Tape &tape, const Mention &mention,
                          const WordEmbeddings &words, EncoderParams &params);

// m_CNN: max over time of the same-padded tanh convolution.
numcore::Var encode_context(numcore::Tape &tape, numcore::Var tokens,
                            EncoderParams &params);

// m_G: average word vector over the span tokens (out-of-vocabulary tokens
// contribute zero rows).
numcore::Tensor surface_average(const Mention &mention,
                                const WordEmbeddings &words);

// m_F = W2 tanh(W1 [m_G; m_CNN] + b1) + b2, with dropout when requested.
MentionVar encode_mention(numcore::Tape &tape, const Mention &mention,
                          const WordEmbeddings &words, EncoderParams &params,
                          const Dropout &dropout = {});

// Re = W_real m_F + b_real, Im = W_img m_F + b_img.
MentionVar project_complex(numcore::Tape &tape, const MentionVar &mention,
                           EncoderParams &params);

}  // namespace hiertype

#endif  // HIERTYPE_ENCODER_H_
