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

#include "driftbench/shiftgen/shift.hpp"

#include <array>
#include <cmath>
#include <map>
#include <string>

#include "driftbench/errors.hpp"
#include "driftbench/kernels/kernels.hpp"
#include "driftbench/numkit/rng.hpp"

namespace driftbench {
namespace {

Dataset GroupOffset(const Dataset& data, const ShiftSpec& shift, std::uint64_t seed, double frac) {
    Dataset out = data;
    const std::size_t d = data.dim();
    std::map<int, Vec> offsets;
    for (std::size_t r = 0; r < data.size(); ++r) {
        const int g = data.groups[r];
        auto it = offsets.find(g);
        if (it == offsets.end()) {
            Rng rng(Rng::derive(seed, 1000 + static_cast<std::uint64_t>(static_cast<std::int64_t>(g))));
            Vec o(d);
            for (double& v : o) v = rng.normal() * shift.offset_scale * frac;
            it = offsets.emplace(g, std::move(o)).first;
        }
        kernels::active().axpy(1.0, it->second.data(), out.embeddings.row(r).data(), d);
    }
    return out;
}

Dataset Style(const Dataset& data, const ShiftSpec& shift, double frac) {
    if (!data.fully_labeled()) throw DataError("style shift needs labeled data");
    const std::size_t d = data.dim();
    Vec global(d, 0.0);
    std::map<int, std::pair<Vec, std::size_t>> means;
    for (std::size_t r = 0; r < data.size(); ++r) {
        auto& [sum, count] = means.try_emplace(data.labels[r], Vec(d, 0.0), 0).first->second;
        kernels::active().axpy(1.0, data.embeddings.row(r).data(), sum.data(), d);
        kernels::active().axpy(1.0, data.embeddings.row(r).data(), global.data(), d);
        ++count;
    }
    for (double& v : global) v /= static_cast<double>(data.size());
    for (auto& [label, mc] : means) {
        for (double& v : mc.first) v /= static_cast<double>(mc.second);
    }
    const double inflate = 1.0 + frac * shift.covariance_scale;
    const double contract = frac * shift.contraction;
    Dataset out = data;
    for (std::size_t r = 0; r < data.size(); ++r) {
        const Vec& mu = means.at(data.labels[r]).first;
        auto row = out.embeddings.row(r);
        for (std::size_t j = 0; j < d; ++j) {
            const double target = (1.0 - contract) * mu[j] + contract * global[j];
            row[j] = target + inflate * (row[j] - mu[j]);
        }
    }
    return out;
}

Dataset CorpusAffine(const Dataset& data, const ShiftSpec& shift, std::uint64_t seed, double frac) {
    const std::size_t d = data.dim();
    const double eps = shift.affine_eps.value_or(corpus_affine_eps(shift.severity));
    Rng rng(Rng::derive(seed, 2000));
    Matrix g(d, d);
    for (double& v : g.values()) v = rng.normal();
    Vec bias(d, 0.0);
    if (shift.affine_bias) {
        if (shift.affine_bias->size() != d) throw DataError("corpus-affine bias dimension mismatch");
        bias = *shift.affine_bias;
    } else {
        double norm = 0.0;
        for (double& v : bias) {
            v = rng.normal();
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (double& v : bias) v = norm > 0.0 ? v / norm * shift.bias_norm * frac : 0.0;
    }
    Dataset out = data;
    Vec mixed(d);
    for (std::size_t r = 0; r < data.size(); ++r) {
        const auto src = data.embeddings.row(r);
        auto dst = out.embeddings.row(r);
        kernels::active().gemv(g.values().data(), d, d, src.data(), mixed.data());
        for (std::size_t j = 0; j < d; ++j) dst[j] = src[j] + eps * mixed[j] + bias[j];
    }
    return out;
}

}  // namespace

std::string_view shift_kind_name(ShiftKind kind) {
    switch (kind) {
        case ShiftKind::kGroupOffset:
            return "group-offset";
        case ShiftKind::kStyle:
            return "style";
        case ShiftKind::kCorpusAffine:
            return "corpus-affine";
    }
    return "unknown";
}

ShiftKind parse_shift_kind(std::string_view name) {
    if (name == "group-offset") return ShiftKind::kGroupOffset;
    if (name == "style") return ShiftKind::kStyle;
    if (name == "corpus-affine") return ShiftKind::kCorpusAffine;
    throw UsageError("unknown shift kind '" + std::string(name) + "'");
}

double corpus_affine_eps(int severity) {
    static constexpr std::array<double, kMaxSeverity + 1> kEps{0.0, 0.05, 0.1, 0.2, 0.35, 0.5};
    if (severity < 0 || severity > kMaxSeverity) throw UsageError("severity must lie in 0..5");
    return kEps[static_cast<std::size_t>(severity)];
}

void ShiftSpec::validate() const {
    if (severity < 0 || severity > kMaxSeverity) throw UsageError("severity must lie in 0..5");
    if (!(offset_scale >= 0.0) || !(covariance_scale >= 0.0) || !(bias_norm >= 0.0)) {
        throw UsageError("shift scales must be >= 0");
    }
    if (!(contraction >= 0.0 && contraction <= 1.0)) throw UsageError("shift contraction must lie in [0, 1]");
}

Dataset apply_shift(const Dataset& data, const ShiftSpec& shift, std::uint64_t seed) {
    shift.validate();
    if (shift.severity == 0) return data;
    const double frac = static_cast<double>(shift.severity) / kMaxSeverity;
    switch (shift.kind) {
        case ShiftKind::kGroupOffset:
            return GroupOffset(data, shift, seed, frac);
        case ShiftKind::kStyle:
            return Style(data, shift, frac);
        case ShiftKind::kCorpusAffine:
            return CorpusAffine(data, shift, seed, frac);
    }
    return data;
}

}  // namespace driftbench
