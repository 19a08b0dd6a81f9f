/* Copyright 2026 The attncomp Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef ATTNCOMP_GRADCHECK_H_
#define ATTNCOMP_GRADCHECK_H_

#include <cstdint>
#include <vector>

#include "attncomp/cross_attention.h"
#include "attncomp/trainer.h"

namespace attncomp {

struct GradcheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Denominator floor for the relative error, so entries whose true gradient
  // is zero are compared on an absolute scale.
  double floor = 1e-8;
  double lambda = 0.8;
  int max_query_tokens = 3;
  int max_context_tokens = 8;
  int max_heads = 2;
  int max_d_model = 8;
};

struct GradcheckCase {
  int m = 0;
  int n = 0;
  int heads = 0;
  int d_model = 0;
  int d_a = 0;
  std::size_t entries = 0;
  double max_relative_error = 0.0;
  double max_abs_gradient = 0.0;
};

struct GradcheckReport {
  std::vector<GradcheckCase> cases;
  double max_relative_error = 0.0;
  bool passed = false;
};

// Random small problem: layout, hidden states, head and labels.
struct GradcheckInstance {
  HiddenBundle bundle;
  CrossAttentionHead head;
  std::vector<int> labels;
};
GradcheckInstance random_gradcheck_instance(const GradcheckOptions& options,
                                            std::uint64_t seed);

// Compares every analytic weight gradient against central differences of the
// total loss.
GradcheckCase check_instance(const GradcheckInstance& instance,
                             const GradcheckOptions& options);

GradcheckReport gradcheck(std::uint64_t seed, int instances,
                          const GradcheckOptions& options = {});

}  // namespace attncomp

#endif  // ATTNCOMP_GRADCHECK_H_
