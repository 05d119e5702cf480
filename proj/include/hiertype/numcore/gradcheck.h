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

#ifndef HIERTYPE_NUMCORE_GRADCHECK_H_
#define HIERTYPE_NUMCORE_GRADCHECK_H_

#include <functional>
#include <string>
#include <vector>

#include "hiertype/numcore/tape.h"

namespace hiertype::numcore {

struct GradCheckResult {
  double max_relative_error = 0.0;
  // Parameter name and flat coordinate of the worst mismatch.
  std::string worst_param;
  size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  size_t coordinates = 0;
};

// Builds the scalar loss on a fresh tape from the current parameter values.
using LossFn = std::function<Var(Tape &)>;

// Compares tape gradients with central differences
// (f(theta + eps) - f(theta - eps)) / (2 eps) for every coordinate of every
// parameter. The error of one coordinate is |analytic - numeric| divided by
// max(1, |analytic|, |numeric|), so it is relative for large gradients and
// absolute below unit magnitude. Parameter values are restored on return.
GradCheckResult grad_check(const LossFn &loss_fn,
                           const std::vector<Parameter *> &params,
                           double eps = 1e-3);

}  // namespace hiertype::numcore

#endif  // HIERTYPE_NUMCORE_GRADCHECK_H_
