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

#include "driftbench/numkit/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "driftbench/errors.hpp"
#include "driftbench/kernels/kernels.hpp"

namespace driftbench {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, Vec values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (data_.size() != rows_ * cols_) {
        throw DataError("matrix storage size " + std::to_string(data_.size()) +
                        " does not match " + std::to_string(rows_) + "x" + std::to_string(cols_));
    }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw DataError("ragged matrix initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::gather_rows(std::span<const std::size_t> indices) const {
    Matrix out(indices.size(), cols_);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const auto src = row(indices[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

bool all_finite(std::span<const double> values) noexcept {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DataError("dot: length mismatch");
    return kernels::active().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size()) throw DataError("axpy: length mismatch");
    kernels::active().axpy(alpha, x.data(), y.data(), x.size());
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

double squared_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DataError("squared_distance: length mismatch");
    return kernels::active().squared_distance(a.data(), b.data(), a.size());
}

double max_abs_difference(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DataError("max_abs_difference: length mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

Vec matvec(const Matrix& m, std::span<const double> x) {
    if (m.cols() != x.size()) throw DataError("matvec: dimension mismatch");
    Vec out(m.rows());
    kernels::active().gemv(m.values().data(), m.rows(), m.cols(), x.data(), out.data());
    return out;
}

void column_moments(const Matrix& m, Vec& mean, Vec& variance) {
    const std::size_t n = m.rows();
    const std::size_t d = m.cols();
    mean.assign(d, 0.0);
    variance.assign(d, 0.0);
    if (n == 0) return;
    const auto& k = kernels::active();
    for (std::size_t r = 0; r < n; ++r) k.axpy(1.0, m.row(r).data(), mean.data(), d);
    for (auto& v : mean) v /= static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r) {
        const auto row = m.row(r);
        for (std::size_t j = 0; j < d; ++j) {
            const double c = row[j] - mean[j];
            variance[j] += c * c;
        }
    }
    for (auto& v : variance) v /= static_cast<double>(n);
    // Constant columns get their exact value as mean and exactly zero variance,
    // which rounding in the running sums would otherwise miss.
    for (std::size_t j = 0; j < d; ++j) {
        const double first = m(0, j);
        bool constant = true;
        for (std::size_t r = 1; r < n && constant; ++r) constant = m(r, j) == first;
        if (constant) {
            mean[j] = first;
            variance[j] = 0.0;
        }
    }
}

}  // namespace driftbench
