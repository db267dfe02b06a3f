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

#include "driftbench/numkit/prob.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "driftbench/errors.hpp"

namespace driftbench {
namespace {

void CheckLogits(std::span<const double> logits) {
    if (logits.empty()) throw NumericError("softmax: empty logits");
    if (!all_finite(logits)) throw NumericError("softmax: non-finite logits");
}

}  // namespace

Vec softmax(std::span<const double> logits) {
    CheckLogits(logits);
    const double m = *std::max_element(logits.begin(), logits.end());
    Vec out(logits.size());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - m);
        total += out[i];
    }
    for (auto& v : out) v /= total;
    return out;
}

Vec log_softmax(std::span<const double> logits) {
    CheckLogits(logits);
    const double m = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (double l : logits) total += std::exp(l - m);
    const double log_z = m + std::log(total);
    Vec out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - log_z;
    return out;
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        const Vec p = softmax(logits.row(r));
        std::copy(p.begin(), p.end(), out.row(r).begin());
    }
    return out;
}

void check_simplex(std::span<const double> p, double tol) {
    if (p.empty()) throw NumericError("probability vector is empty");
    double total = 0.0;
    for (double v : p) {
        if (!std::isfinite(v)) throw NumericError("probability vector has non-finite entry");
        if (v < 0.0) throw NumericError("probability vector has negative entry");
        total += v;
    }
    if (std::abs(total - 1.0) > tol) {
        throw NumericError("probability vector sums to " + std::to_string(total));
    }
}

double entropy(std::span<const double> p) {
    check_simplex(p);
    double h = 0.0;
    for (double v : p) {
        if (v > 0.0) h -= v * std::log(v);
    }
    return std::max(h, 0.0);
}

double entropy_of_logits(std::span<const double> logits) {
    const Vec logp = log_softmax(logits);
    double h = 0.0;
    for (double lp : logp) h -= std::exp(lp) * lp;
    return std::max(h, 0.0);
}

std::size_t argmax(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

}  // namespace driftbench
