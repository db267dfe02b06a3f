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
#include <vector>

#include "driftbench/numkit/matrix.hpp"

namespace driftbench {

struct LameConfig {
    std::size_t knn = 5;
    // Fidelity exponent lambda' on the source probabilities.
    double fidelity = 1.0;
    std::size_t max_iterations = 100;
    double tolerance = 1e-8;

    void validate() const;
};

struct LameResult {
    Matrix probs;
    // Objective at the initial point and after every sweep.
    std::vector<double> objective;
    std::size_t iterations = 0;
    bool converged = false;
};

// Symmetric kNN affinity on cosine similarity: A_ji = 1 when i is among the k
// most similar rows to j (self excluded, ties to the lower index), W = (A + A^T) / 2.
Matrix knn_affinity(const Matrix& embeddings, std::size_t k);

// F(Y) = sum_j sum_c [ y_jc log y_jc - lambda' y_jc log p_jc ] - 1/2 sum_ij w_ij <y_i, y_j>
// i.e. KL-style fidelity to the source predictions minus the Laplacian consistency reward.
double lame_objective(const Matrix& assignments, const Matrix& probs, const Matrix& affinity,
                      double fidelity);

// Minimizes F with the multiplicative update y_j ∝ p_j^lambda' * exp(sum_i w_ji y_i),
// applied row by row (Gauss-Seidel), which never increases F for any symmetric
// zero-diagonal affinity.
LameResult lame_solve(const Matrix& probs, const Matrix& affinity, double fidelity,
                      std::size_t max_iterations, double tolerance);

LameResult lame_adjust(const Matrix& probs, const Matrix& embeddings, const LameConfig& cfg);

}  // namespace driftbench
