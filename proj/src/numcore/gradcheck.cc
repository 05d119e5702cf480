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

#include "hiertype/numcore/gradcheck.h"

#include <algorithm>
#include <cmath>

namespace hiertype::numcore {

namespace {

double evaluate(const LossFn &loss_fn) {
  Tape tape;
  return loss_fn(tape).item();
}

}  // namespace

GradCheckResult grad_check(const LossFn &loss_fn,
                           const std::vector<Parameter *> &params,
                           double eps) {
  for (Parameter *p : params) p->grad = Tensor(p->value.shape());
  {
    Tape tape;
    Var loss = loss_fn(tape);
    tape.backward(loss);
  }
  std::vector<Tensor> analytic;
  for (Parameter *p : params) analytic.push_back(p->grad);

  GradCheckResult result;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Parameter &p = *params[pi];
    for (size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + eps;
      const double up = evaluate(loss_fn);
      p.value[i] = saved - eps;
      const double down = evaluate(loss_fn);
      p.value[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[pi][i];
      const double denom = std::max({1.0, std::abs(a), std::abs(numeric)});
      const double err = std::abs(a - numeric) / denom;
      ++result.coordinates;
      if (err > result.max_relative_error || result.worst_param.empty()) {
        if (err >= result.max_relative_error) {
          result.max_relative_error = err;
          result.worst_param = p.name;
          result.worst_index = i;
          result.analytic = a;
          result.numeric = numeric;
        }
      }
    }
  }
  for (size_t pi = 0; pi < params.size(); ++pi) params[pi]->grad = analytic[pi];
  return result;
}

}  // namespace hiertype::numcore
