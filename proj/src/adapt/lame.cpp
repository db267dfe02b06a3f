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

#include "driftbench/adapt/lame.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "driftbench/errors.hpp"
#include "driftbench/kernels/kernels.hpp"
#include "driftbench/numkit/prob.hpp"

namespace driftbench {
namespace {

constexpr double kLogFloor = 1e-300;

double SafeLog(double p) { return std::log(std::max(p, kLogFloor)); }

void CheckInputs(const Matrix& probs, const Matrix& affinity) {
    if (probs.rows() == 0) throw DataError("lame: empty batch");
    if (affinity.rows() != probs.rows() || affinity.cols() != probs.rows()) {
        throw DataError("lame: affinity must be B x B");
    }
    for (std::size_t r = 0; r < probs.rows(); ++r) check_simplex(probs.row(r));
}

}  // namespace

void LameConfig::validate() const {
    if (!(fidelity > 0.0)) throw UsageError("lame: fidelity weight must be > 0");
    if (!(tolerance > 0.0)) throw UsageError("lame: tolerance must be > 0");
}

Matrix knn_affinity(const Matrix& embeddings, std::size_t k) {
    const std::size_t b = embeddings.rows();
    Matrix w(b, b, 0.0);
    if (k == 0 || b < 2) return w;
    const auto& kern = kernels::active();

    Matrix unit = embeddings;
    for (std::size_t r = 0; r < b; ++r) {
        auto row = unit.row(r);
        const double n = std::sqrt(kern.dot(row.data(), row.data(), row.size()));
        for (double& v : row) v = n > 0.0 ? v / n : 0.0;
    }
    std::vector<std::size_t> others;
    std::vector<double> sim(b);
    for (std::size_t j = 0; j < b; ++j) {
        for (std::size_t i = 0; i < b; ++i) sim[i] = kern.dot(unit.row(j).data(), unit.row(i).data(), unit.cols());
        others.clear();
        for (std::size_t i = 0; i < b; ++i) {
            if (i != j) others.push_back(i);
        }
        const std::size_t take = std::min(k, others.size());
        std::partial_sort(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(take), others.end(),
                          [&](std::size_t a, std::size_t c) { return sim[a] > sim[c] || (sim[a] == sim[c] && a < c); });
        for (std::size_t t = 0; t < take; ++t) w(j, others[t]) += 0.5;
        for (std::size_t t = 0; t < take; ++t) w(others[t], j) += 0.5;
    }
    return w;
}

double lame_objective(const Matrix& assignments, const Matrix& probs, const Matrix& affinity,
                      double fidelity) {
    const std::size_t b = probs.rows();
    const std::size_t c = probs.cols();
    double f = 0.0;
    for (std::size_t j = 0; j < b; ++j) {
        for (std::size_t k = 0; k < c; ++k) {
            const double y = assignments(j, k);
            if (y > 0.0) f += y * std::log(y) - fidelity * y * SafeLog(probs(j, k));
        }
    }
    const auto& kern = kernels::active();
    for (std::size_t j = 0; j < b; ++j) {
        for (std::size_t i = 0; i < b; ++i) {
            const double w = affinity(j, i);
            if (w != 0.0) f -= 0.5 * w * kern.dot(assignments.row(i).data(), assignments.row(j).data(), c);
        }
    }
    return f;
}

LameResult lame_solve(const Matrix& probs, const Matrix& affinity, double fidelity,
                      std::size_t max_iterations, double tolerance) {
    CheckInputs(probs, affinity);
    if (!(fidelity > 0.0)) throw UsageError("lame: fidelity weight must be > 0");
    const std::size_t b = probs.rows();
    const std::size_t c = probs.cols();

    Matrix log_prior(b, c);
    for (std::size_t j = 0; j < b; ++j) {
        for (std::size_t k = 0; k < c; ++k) log_prior(j, k) = fidelity * SafeLog(probs(j, k));
    }

    LameResult out;
    out.probs = Matrix(b, c);
    for (std::size_t j = 0; j < b; ++j) {
        const Vec y = softmax(log_prior.row(j));
        std::copy(y.begin(), y.end(), out.probs.row(j).begin());
    }
    out.objective.push_back(lame_objective(out.probs, probs, affinity, fidelity));

    Vec logits(c);
    for (std::size_t it = 0; it < max_iterations; ++it) {
        double change = 0.0;
        for (std::size_t j = 0; j < b; ++j) {
            std::copy(log_prior.row(j).begin(), log_prior.row(j).end(), logits.begin());
            for (std::size_t i = 0; i < b; ++i) {
                const double w = affinity(j, i);
                if (w == 0.0) continue;
                const auto yi = out.probs.row(i);
                for (std::size_t k = 0; k < c; ++k) logits[k] += w * yi[k];
            }
            const Vec y = softmax(logits);
            auto row = out.probs.row(j);
            change = std::max(change, max_abs_difference(y, row));
            std::copy(y.begin(), y.end(), row.begin());
        }
        ++out.iterations;
        out.objective.push_back(lame_objective(out.probs, probs, affinity, fidelity));
        if (change < tolerance) {
            out.converged = true;
            break;
        }
    }
    return out;
}

LameResult lame_adjust(const Matrix& probs, const Matrix& embeddings, const LameConfig& cfg) {
    cfg.validate();
    if (embeddings.rows() != probs.rows()) throw DataError("lame: embeddings/probs row mismatch");
    return lame_solve(probs, knn_affinity(embeddings, cfg.knn), cfg.fidelity, cfg.max_iterations,
                      cfg.tolerance);
}

}  // namespace driftbench
