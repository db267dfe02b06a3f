// Copyright 2026 the driftbench authors
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

#pragma once

#include <cstddef>
#include <span>

#include "driftbench/numkit/matrix.hpp"

namespace driftbench {

// Probabilities are always natural-log based: entropies are in nats, so the
// uniform distribution over C classes has entropy ln C.

// Max-subtracted softmax. Throws NumericError on empty or non-finite input.
Vec softmax(std::span<const double> logits);
Vec log_softmax(std::span<const double> logits);

// Row-wise softmax of a logit matrix.
Matrix softmax_rows(const Matrix& logits);

// H(p) = -sum p log p with 0 log 0 = 0. Throws NumericError when p is not on
// the simplex within 1e-9.
double entropy(std::span<const double> p);

// Entropy of softmax(logits), evaluated through log-softmax so saturated rows stay finite.
double entropy_of_logits(std::span<const double> logits);

// Argmax with ties resolved toward the lowest index.
std::size_t argmax(std::span<const double> values);

// Throws NumericError if p has a negative entry or does not sum to 1 within tol.
void check_simplex(std::span<const double> p, double tol = 1e-9);

}  // namespace driftbench
