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

#include "driftbench/head/head_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "driftbench/errors.hpp"
#include "driftbench/kernels/kernels.hpp"
#include "driftbench/numkit/prob.hpp"

namespace driftbench {
namespace {

void RequireSize(std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
        throw DataError(std::string(what) + ": expected size " + std::to_string(want) + ", got " +
                        std::to_string(got));
    }
}

void CheckWeights(std::span<const double> weights, std::size_t rows) {
    if (weights.empty()) return;
    RequireSize(weights.size(), rows, "loss weights");
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0) throw NumericError("loss weights must be finite and >= 0");
    }
}

}  // namespace

HeadParams HeadParams::zeros_like(std::size_t dim, std::size_t classes) {
    HeadParams p;
    p.norm_scale.assign(dim, 1.0);
    p.norm_shift.assign(dim, 0.0);
    p.weight = Matrix(classes, dim, 0.0);
    p.bias.assign(classes, 0.0);
    p.prompt.assign(dim, 0.0);
    return p;
}

void HeadParams::validate() const {
    const std::size_t d = dim();
    const std::size_t c = classes();
    if (d == 0 || c == 0) throw DataError("head parameters: empty dimension or class count");
    RequireSize(norm_shift.size(), d, "norm_shift");
    RequireSize(prompt.size(), d, "prompt");
    RequireSize(weight.rows(), c, "weight rows");
    RequireSize(weight.cols(), d, "weight cols");
    for_each_tensor(*this, [](ParamGroup g, std::span<const double> t) {
        if (!all_finite(t)) {
            throw NumericError("head parameters: non-finite values in " +
                               std::string(param_group_name(g)));
        }
    });
}

ParamSet ParamSet::parse(std::string_view text) {
    ParamSet out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find(',', start), text.size());
        std::string_view tok = text.substr(start, end - start);
        while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
        while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
        if (tok == "norm_scale") {
            out.mask_ |= static_cast<unsigned>(ParamGroup::kNormScale);
        } else if (tok == "norm_shift") {
            out.mask_ |= static_cast<unsigned>(ParamGroup::kNormShift);
        } else if (tok == "norm") {
            out.mask_ |= norm_affine().mask();
        } else if (tok == "weight") {
            out.mask_ |= static_cast<unsigned>(ParamGroup::kWeight);
        } else if (tok == "bias") {
            out.mask_ |= static_cast<unsigned>(ParamGroup::kBias);
        } else if (tok == "prompt") {
            out.mask_ |= static_cast<unsigned>(ParamGroup::kPrompt);
        } else if (tok == "all") {
            out.mask_ |= trainable().mask();
        } else if (!tok.empty()) {
            throw UsageError("unknown parameter group '" + std::string(tok) + "'");
        }
        start = end + 1;
    }
    return out;
}

std::string_view param_group_name(ParamGroup g) {
    switch (g) {
        case ParamGroup::kNormScale:
            return "norm_scale";
        case ParamGroup::kNormShift:
            return "norm_shift";
        case ParamGroup::kWeight:
            return "weight";
        case ParamGroup::kBias:
            return "bias";
        case ParamGroup::kPrompt:
            return "prompt";
    }
    return "unknown";
}

void for_each_tensor(HeadParams& p, const std::function<void(ParamGroup, std::span<double>)>& fn) {
    fn(ParamGroup::kNormScale, p.norm_scale);
    fn(ParamGroup::kNormShift, p.norm_shift);
    fn(ParamGroup::kWeight, p.weight.values());
    fn(ParamGroup::kBias, p.bias);
    fn(ParamGroup::kPrompt, p.prompt);
}

void for_each_tensor(const HeadParams& p,
                     const std::function<void(ParamGroup, std::span<const double>)>& fn) {
    fn(ParamGroup::kNormScale, p.norm_scale);
    fn(ParamGroup::kNormShift, p.norm_shift);
    fn(ParamGroup::kWeight, p.weight.values());
    fn(ParamGroup::kBias, p.bias);
    fn(ParamGroup::kPrompt, p.prompt);
}

void zip_tensors(HeadParams& a, const HeadParams& b,
                 const std::function<void(ParamGroup, std::span<double>, std::span<const double>)>& fn) {
    auto visit = [&](ParamGroup g, std::span<double> x, std::span<const double> y) {
        if (x.size() != y.size()) {
            throw DataError("parameter shape mismatch in " + std::string(param_group_name(g)));
        }
        fn(g, x, y);
    };
    if (a.weight.rows() != b.weight.rows() || a.weight.cols() != b.weight.cols()) {
        throw DataError("parameter shape mismatch in weight");
    }
    visit(ParamGroup::kNormScale, a.norm_scale, b.norm_scale);
    visit(ParamGroup::kNormShift, a.norm_shift, b.norm_shift);
    visit(ParamGroup::kWeight, a.weight.values(), b.weight.values());
    visit(ParamGroup::kBias, a.bias, b.bias);
    visit(ParamGroup::kPrompt, a.prompt, b.prompt);
}

double params_norm(const HeadParams& p, ParamSet groups) {
    double total = 0.0;
    for_each_tensor(p, [&](ParamGroup g, std::span<const double> t) {
        if (groups.empty() || groups.contains(g)) total += dot(t, t);
    });
    return std::sqrt(total);
}

double params_max_abs_difference(const HeadParams& a, const HeadParams& b) {
    double m = 0.0;
    HeadParams copy = a;
    zip_tensors(copy, b, [&](ParamGroup, std::span<double> x, std::span<const double> y) {
        m = std::max(m, max_abs_difference(x, y));
    });
    return m;
}

void SourceStats::validate() const {
    const std::size_t d = dim();
    if (d == 0) throw DataError("source stats: empty");
    RequireSize(feat_std.size(), d, "feat_std");
    RequireSize(norm_running_mean.size(), d, "norm_running_mean");
    RequireSize(norm_running_var.size(), d, "norm_running_var");
    if (count < 1) throw DataError("source stats: count must be >= 1");
    for (double s : feat_std) {
        if (!(s >= 0.0)) throw NumericError("source stats: feat_std must be >= 0");
    }
    for (double v : norm_running_var) {
        if (!(v >= 0.0)) throw NumericError("source stats: running variance must be >= 0");
    }
}

SourceStats compute_source_stats(const Matrix& embeddings) {
    if (embeddings.rows() < 2) throw DataError("source stats need at least 2 rows");
    if (!all_finite(embeddings.values())) throw NumericError("source stats: non-finite embeddings");
    SourceStats s;
    Vec var;
    column_moments(embeddings, s.feat_mean, var);
    s.feat_std.resize(var.size());
    std::transform(var.begin(), var.end(), s.feat_std.begin(), [](double v) { return std::sqrt(v); });
    s.norm_running_mean = s.feat_mean;
    s.norm_running_var = var;
    s.count = embeddings.rows();
    return s;
}

void FeatureBatch::validate(std::size_t classes) const {
    if (embeddings.rows() == 0) throw DataError("feature batch is empty");
    if (labels) {
        RequireSize(labels->size(), embeddings.rows(), "labels");
        for (std::size_t i = 0; i < labels->size(); ++i) {
            const int y = (*labels)[i];
            if (y < 0 || static_cast<std::size_t>(y) >= classes) {
                throw DataError("label " + std::to_string(y) + " at row " + std::to_string(i) +
                                " outside [0, " + std::to_string(classes) + ")");
            }
        }
    }
    if (group_ids) RequireSize(group_ids->size(), embeddings.rows(), "group ids");
}

std::string_view norm_mode_name(NormMode mode) {
    return mode == NormMode::kSourceStats ? "source-stats" : "batch-stats";
}

ForwardResult forward(const HeadParams& params, const SourceStats& stats, const Matrix& embeddings,
                      NormMode mode) {
    const std::size_t b = embeddings.rows();
    const std::size_t d = params.dim();
    const std::size_t c = params.classes();
    if (b == 0) throw DataError("forward: empty batch");
    RequireSize(embeddings.cols(), d, "forward: embedding dimension");
    if (!all_finite(embeddings.values())) throw NumericError("forward: non-finite embeddings");

    const auto& k = kernels::active();
    Matrix shifted = embeddings;
    for (std::size_t r = 0; r < b; ++r) k.axpy(1.0, params.prompt.data(), shifted.row(r).data(), d);

    ForwardResult out;
    ForwardCache& cache = out.cache;
    cache.mode = mode;
    Vec var;
    if (mode == NormMode::kSourceStats) {
        RequireSize(stats.norm_running_mean.size(), d, "forward: source stats dimension");
        cache.mean = stats.norm_running_mean;
        var = stats.norm_running_var;
    } else {
        column_moments(shifted, cache.mean, var);
    }
    cache.inv_std.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        const double denom = var[j] + kNormEpsilon;
        cache.inv_std[j] = denom > 0.0 ? 1.0 / std::sqrt(denom) : 0.0;
    }

    cache.standardized = Matrix(b, d);
    cache.features = Matrix(b, d);
    out.logits = Matrix(b, c);
    out.probs = Matrix(b, c);
    out.log_probs = Matrix(b, c);
    for (std::size_t r = 0; r < b; ++r) {
        const auto src = shifted.row(r);
        auto stdz = cache.standardized.row(r);
        auto feat = cache.features.row(r);
        for (std::size_t j = 0; j < d; ++j) {
            stdz[j] = (src[j] - cache.mean[j]) * cache.inv_std[j];
            feat[j] = stdz[j] * params.norm_scale[j] + params.norm_shift[j];
        }
        auto logits = out.logits.row(r);
        k.gemv(params.weight.values().data(), c, d, feat.data(), logits.data());
        for (std::size_t cls = 0; cls < c; ++cls) logits[cls] += params.bias[cls];
        const Vec p = softmax(logits);
        const Vec lp = log_softmax(logits);
        std::copy(p.begin(), p.end(), out.probs.row(r).begin());
        std::copy(lp.begin(), lp.end(), out.log_probs.row(r).begin());
    }
    return out;
}

HeadGrads backward_from_logits(const HeadParams& params, const ForwardResult& fwd,
                               const Matrix& grad_logits, ParamSet groups) {
    const std::size_t b = fwd.logits.rows();
    const std::size_t c = params.classes();
    const std::size_t d = params.dim();
    RequireSize(grad_logits.rows(), b, "grad_logits rows");
    RequireSize(grad_logits.cols(), c, "grad_logits cols");

    const auto& k = kernels::active();
    HeadGrads g = HeadParams::zeros_like(d, c);
    std::fill(g.norm_scale.begin(), g.norm_scale.end(), 0.0);

    const bool want_scale = groups.contains(ParamGroup::kNormScale);
    const bool want_shift = groups.contains(ParamGroup::kNormShift);
    const bool want_prompt =
        groups.contains(ParamGroup::kPrompt) && fwd.cache.mode == NormMode::kSourceStats;
    const bool need_feature_grad = want_scale || want_shift || want_prompt;

    Vec dfeat(d);
    for (std::size_t r = 0; r < b; ++r) {
        const auto gl = grad_logits.row(r);
        const auto feat = fwd.cache.features.row(r);
        if (groups.contains(ParamGroup::kWeight)) {
            for (std::size_t cls = 0; cls < c; ++cls) k.axpy(gl[cls], feat.data(), g.weight.row(cls).data(), d);
        }
        if (groups.contains(ParamGroup::kBias)) {
            for (std::size_t cls = 0; cls < c; ++cls) g.bias[cls] += gl[cls];
        }
        if (!need_feature_grad) continue;
        std::fill(dfeat.begin(), dfeat.end(), 0.0);
        for (std::size_t cls = 0; cls < c; ++cls) k.axpy(gl[cls], params.weight.row(cls).data(), dfeat.data(), d);
        const auto stdz = fwd.cache.standardized.row(r);
        for (std::size_t j = 0; j < d; ++j) {
            if (want_scale) g.norm_scale[j] += dfeat[j] * stdz[j];
            if (want_shift) g.norm_shift[j] += dfeat[j];
            if (want_prompt) g.prompt[j] += dfeat[j] * params.norm_scale[j] * fwd.cache.inv_std[j];
        }
    }
    return g;
}

LossAndGrads grad_entropy(const HeadParams& params, const SourceStats& stats,
                          const Matrix& embeddings, NormMode mode, ParamSet groups,
                          std::span<const double> weights) {
    LossAndGrads out;
    out.fwd = forward(params, stats, embeddings, mode);
    const std::size_t b = embeddings.rows();
    const std::size_t c = params.classes();
    CheckWeights(weights, b);

    std::size_t active = 0;
    for (std::size_t r = 0; r < b; ++r) {
        if (weights.empty() || weights[r] > 0.0) ++active;
    }
    Matrix grad_logits(b, c, 0.0);
    if (active > 0) {
        const double inv = 1.0 / static_cast<double>(active);
        for (std::size_t r = 0; r < b; ++r) {
            const double w = weights.empty() ? 1.0 : weights[r];
            if (w == 0.0) continue;
            const auto p = out.fwd.probs.row(r);
            const auto lp = out.fwd.log_probs.row(r);
            double h = 0.0;
            for (std::size_t cls = 0; cls < c; ++cls) h -= p[cls] * lp[cls];
            out.loss += w * h * inv;
            auto gl = grad_logits.row(r);
            for (std::size_t cls = 0; cls < c; ++cls) gl[cls] = -w * inv * p[cls] * (lp[cls] + h);
        }
    }
    out.grads = backward_from_logits(params, out.fwd, grad_logits, groups);
    return out;
}

LossAndGrads grad_crossentropy(const HeadParams& params, const SourceStats& stats,
                               const Matrix& embeddings, NormMode mode, const Matrix& targets,
                               ParamSet groups, std::span<const double> weights) {
    const std::size_t b = embeddings.rows();
    const std::size_t c = params.classes();
    RequireSize(targets.rows(), b, "targets rows");
    RequireSize(targets.cols(), c, "targets cols");
    for (std::size_t r = 0; r < b; ++r) check_simplex(targets.row(r));
    CheckWeights(weights, b);

    LossAndGrads out;
    out.fwd = forward(params, stats, embeddings, mode);
    double total_w = 0.0;
    for (std::size_t r = 0; r < b; ++r) total_w += weights.empty() ? 1.0 : weights[r];

    Matrix grad_logits(b, c, 0.0);
    if (total_w > 0.0) {
        for (std::size_t r = 0; r < b; ++r) {
            const double w = (weights.empty() ? 1.0 : weights[r]) / total_w;
            if (w == 0.0) continue;
            const auto t = targets.row(r);
            const auto p = out.fwd.probs.row(r);
            const auto lp = out.fwd.log_probs.row(r);
            double ce = 0.0;
            for (std::size_t cls = 0; cls < c; ++cls) {
                if (t[cls] > 0.0) ce -= t[cls] * lp[cls];
            }
            out.loss += w * ce;
            auto gl = grad_logits.row(r);
            for (std::size_t cls = 0; cls < c; ++cls) gl[cls] = w * (p[cls] - t[cls]);
        }
    }
    out.grads = backward_from_logits(params, out.fwd, grad_logits, groups);
    return out;
}

}  // namespace driftbench
