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

#include "driftbench/cli/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "driftbench/adapt/lame.hpp"
#include "driftbench/head/head_model.hpp"
#include "driftbench/kernels/kernels.hpp"
#include "driftbench/numkit/cmaes.hpp"
#include "driftbench/numkit/rng.hpp"

namespace driftbench::cli {
namespace {

std::string Fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

Matrix RandomMatrix(Rng& rng, std::size_t rows, std::size_t cols, double scale) {
    Matrix m(rows, cols);
    for (double& v : m.values()) v = scale * rng.normal();
    return m;
}

HeadParams RandomParams(Rng& rng, std::size_t d, std::size_t c) {
    HeadParams p = HeadParams::zeros_like(d, c);
    for (double& v : p.norm_scale) v = 1.0 + 0.3 * rng.normal();
    for (double& v : p.norm_shift) v = 0.3 * rng.normal();
    for (double& v : p.weight.values()) v = 0.5 * rng.normal();
    for (double& v : p.bias) v = 0.3 * rng.normal();
    for (double& v : p.prompt) v = 0.3 * rng.normal();
    return p;
}

// Worst per-tensor relative error between analytic and central-difference gradients.
template <typename LossFn>
double GradientError(const HeadParams& params, const HeadGrads& analytic, LossFn loss) {
    constexpr double kH = 1e-5;
    double worst = 0.0;
    HeadParams probe = params;
    HeadGrads numeric = HeadParams::zeros_like(params.dim(), params.classes());
    zip_tensors(probe, params, [&](ParamGroup g, std::span<double> x, std::span<const double>) {
        std::span<double> out;
        for_each_tensor(numeric, [&](ParamGroup h, std::span<double> t) {
            if (h == g) out = t;
        });
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double keep = x[i];
            x[i] = keep + kH;
            const double up = loss(probe);
            x[i] = keep - kH;
            const double down = loss(probe);
            x[i] = keep;
            out[i] = (up - down) / (2.0 * kH);
        }
    });
    std::vector<std::span<const double>> a_tensors, n_tensors;
    for_each_tensor(analytic, [&](ParamGroup, std::span<const double> t) { a_tensors.push_back(t); });
    for_each_tensor(static_cast<const HeadParams&>(numeric),
                    [&](ParamGroup, std::span<const double> t) { n_tensors.push_back(t); });
    for (std::size_t k = 0; k < a_tensors.size(); ++k) {
        double diff = 0.0, na = 0.0, nn = 0.0;
        for (std::size_t i = 0; i < a_tensors[k].size(); ++i) {
            diff += (a_tensors[k][i] - n_tensors[k][i]) * (a_tensors[k][i] - n_tensors[k][i]);
            na += a_tensors[k][i] * a_tensors[k][i];
            nn += n_tensors[k][i] * n_tensors[k][i];
        }
        worst = std::max(worst, std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nn), 1e-4}));
    }
    return worst;
}

SelftestCheck CheckGradients(std::uint64_t seed, bool crossentropy) {
    constexpr std::size_t kD = 5, kC = 3, kB = 6;
    Rng rng(seed);
    double worst = 0.0;
    for (int inst = 0; inst < 20; ++inst) {
        const HeadParams p = RandomParams(rng, kD, kC);
        const SourceStats stats = compute_source_stats(RandomMatrix(rng, 12, kD, 1.5));
        const Matrix x = RandomMatrix(rng, kB, kD, 1.0);
        Vec w(kB);
        for (double& v : w) v = rng.uniform() < 0.2 ? 0.0 : rng.uniform();
        w[0] = 1.0;
        Matrix targets(kB, kC);
        for (std::size_t r = 0; r < kB; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < kC; ++c) s += (targets(r, c) = rng.uniform() + 0.05);
            for (std::size_t c = 0; c < kC; ++c) targets(r, c) /= s;
        }
        for (NormMode mode : {NormMode::kSourceStats, NormMode::kBatchStats}) {
            const ParamSet all{ParamGroup::kNormScale, ParamGroup::kNormShift, ParamGroup::kWeight, ParamGroup::kBias,
                               ParamGroup::kPrompt};
            if (crossentropy) {
                const auto lg = grad_crossentropy(p, stats, x, mode, targets, all, w);
                worst = std::max(worst, GradientError(p, lg.grads, [&](const HeadParams& q) {
                                     return grad_crossentropy(q, stats, x, mode, targets, ParamSet{}, w).loss;
                                 }));
            } else {
                const auto lg = grad_entropy(p, stats, x, mode, all, w);
                worst = std::max(worst, GradientError(p, lg.grads, [&](const HeadParams& q) {
                                     return grad_entropy(q, stats, x, mode, ParamSet{}, w).loss;
                                 }));
            }
        }
    }
    return {crossentropy ? "gradient/cross-entropy" : "gradient/entropy", worst < 1e-6,
            "max relative error " + Fmt("%.3g", worst)};
}

SelftestCheck CheckLameMonotone(std::uint64_t seed) {
    Rng rng(seed);
    double worst_rise = 0.0;
    for (int inst = 0; inst < 100; ++inst) {
        const std::size_t n = 4 + rng.uniform_index(12);
        const std::size_t c = 2 + rng.uniform_index(4);
        Matrix probs(n, c);
        for (std::size_t r = 0; r < n; ++r) {
            double s = 0.0;
            for (std::size_t k = 0; k < c; ++k) s += (probs(r, k) = std::exp(2.0 * rng.normal()));
            for (std::size_t k = 0; k < c; ++k) probs(r, k) /= s;
        }
        const Matrix emb = RandomMatrix(rng, n, 6, 1.0);
        const Matrix affinity = knn_affinity(emb, std::min<std::size_t>(3, n - 1));
        const LameResult res = lame_solve(probs, affinity, 0.5 + rng.uniform(), 50, 0.0);
        for (std::size_t i = 1; i < res.objective.size(); ++i) {
            worst_rise = std::max(worst_rise, res.objective[i] - res.objective[i - 1]);
        }
    }
    return {"lame/monotone", worst_rise <= 1e-12, "largest objective increase " + Fmt("%.3g", worst_rise)};
}

SelftestCheck CheckCmaesSphere(std::uint64_t seed) {
    int hits = 0;
    for (int s = 0; s < 10; ++s) {
        CmaesConfig cfg;
        cfg.dimension = 8;
        cfg.sigma0 = 0.5;
        cfg.max_evaluations = 2000;
        cfg.seed = Rng::derive(seed, static_cast<std::uint64_t>(s));
        const Vec x0(8, 1.0);
        const CmaesResult r = cmaes_minimize(
            [](std::span<const double> x) {
                double f = 0.0;
                for (double v : x) f += v * v;
                return f;
            },
            x0, cfg);
        if (r.best_fitness < 1e-8) ++hits;
    }
    return {"cmaes/sphere", hits >= 9, std::to_string(hits) + "/10 seeds below 1e-8"};
}

SelftestCheck CheckKernels(std::uint64_t seed) {
    if (!kernels::isa_supported(kernels::Isa::kAvx2)) return {"kernels/simd", true, "no SIMD variant on this CPU"};
    Rng rng(seed);
    double worst = 0.0;
    const auto& ref = kernels::scalar::table();
    {
        kernels::ScopedIsa use(kernels::Isa::kAvx2);
        const auto& fast = kernels::active();
        for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 16u, 33u, 100u}) {
            Vec a(n), b(n), y1(n), y2(n);
            for (std::size_t i = 0; i < n; ++i) {
                a[i] = rng.normal();
                b[i] = rng.normal();
                y1[i] = y2[i] = rng.normal();
            }
            const double scale = 1.0 + static_cast<double>(n);
            worst = std::max(worst, std::abs(ref.dot(a.data(), b.data(), n) - fast.dot(a.data(), b.data(), n)) / scale);
            worst = std::max(worst, std::abs(ref.squared_distance(a.data(), b.data(), n) -
                                             fast.squared_distance(a.data(), b.data(), n)) / scale);
            ref.axpy(0.7, a.data(), y1.data(), n);
            fast.axpy(0.7, a.data(), y2.data(), n);
            for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(y1[i] - y2[i]));
        }
    }
    return {"kernels/simd", worst < 1e-12, "max scaled deviation " + Fmt("%.3g", worst)};
}

}  // namespace

std::size_t SelftestSummary::passed() const {
    return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const auto& c) { return c.passed; }));
}

SelftestSummary run_selftest(std::uint64_t seed) {
    SelftestSummary s;
    s.checks.push_back(CheckGradients(Rng::derive(seed, 1), false));
    s.checks.push_back(CheckGradients(Rng::derive(seed, 2), true));
    s.checks.push_back(CheckLameMonotone(Rng::derive(seed, 3)));
    s.checks.push_back(CheckCmaesSphere(Rng::derive(seed, 4)));
    s.checks.push_back(CheckKernels(Rng::derive(seed, 5)));
    return s;
}

}  // namespace driftbench::cli
