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

#include "driftbench/adapt/entropy_min.hpp"

#include <cmath>
#include <string>

#include "driftbench/errors.hpp"
#include "driftbench/numkit/prob.hpp"

namespace driftbench {
namespace {

bool AllZero(const Vec& w) {
    for (double v : w) {
        if (v != 0.0) return false;
    }
    return true;
}

Prediction PredictBatchStats(const HeadParams& params, const SourceStats& stats, const Matrix& x) {
    return prediction_from_probs(forward(params, stats, x, NormMode::kBatchStats).probs);
}

}  // namespace

double default_filter_threshold(std::size_t classes) {
    return 0.4 * std::log(static_cast<double>(classes));
}

void EmConfig::validate(std::size_t classes) const {
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw UsageError("em: lr must be finite and >= 0");
    if (filter_threshold) {
        const double e0 = *filter_threshold;
        if (!(e0 > 0.0) || e0 > std::log(static_cast<double>(classes)) + 1e-12) {
            throw UsageError("em: filter threshold must lie in (0, ln C]");
        }
    }
    if (sharpness_rho && !(*sharpness_rho > 0.0)) throw UsageError("em: sharpness rho must be > 0");
}

EmState EmState::create(const HeadParams& source, const EmConfig& cfg) {
    AdamWConfig adam;
    adam.lr = cfg.lr;
    return EmState{source, OptState::create(source, adam, cfg.params_to_update), 0};
}

Vec eata_filter(const Matrix& probs, double threshold) {
    Vec w(probs.rows(), 0.0);
    for (std::size_t r = 0; r < probs.rows(); ++r) {
        const double h = entropy(probs.row(r));
        if (h < threshold) w[r] = std::exp(threshold - h);
    }
    return w;
}

Vec em_sample_weights(const Matrix& probs, const EmConfig& cfg) {
    if (!cfg.filter_threshold) return {};
    Vec w = eata_filter(probs, *cfg.filter_threshold);
    if (!cfg.filter_weighting) {
        for (double& v : w) v = v > 0.0 ? 1.0 : 0.0;
    }
    return w;
}

Prediction tent_adapt_batch(EmState& state, const EmConfig& cfg, const SourceStats& stats,
                            const UnlabeledBatch& batch) {
    const Matrix& x = batch.embeddings;
    std::optional<double> first_loss;
    std::string incident;
    for (std::size_t step = 0; step < cfg.steps_per_batch; ++step) {
        Vec weights;
        if (cfg.filter_threshold) {
            weights = em_sample_weights(forward(state.params, stats, x, NormMode::kBatchStats).probs, cfg);
        }
        if (!weights.empty() && AllZero(weights)) {
            if (!first_loss) first_loss = 0.0;
            break;
        }
        const auto lg = grad_entropy(state.params, stats, x, NormMode::kBatchStats,
                                     cfg.params_to_update, weights);
        if (!first_loss) first_loss = lg.loss;
        if (!std::isfinite(lg.loss)) {
            incident = "non-finite entropy loss; update skipped";
            break;
        }
        const HeadParams before = state.params;
        const OptState opt_before = state.opt;
        try {
            optimizer_step(state.params, lg.grads, state.opt);
            state.params.validate();
        } catch (const NumericError& e) {
            state.params = before;
            state.opt = opt_before;
            incident = e.what();
            break;
        }
    }
    ++state.batches;
    Prediction out = PredictBatchStats(state.params, stats, x);
    out.loss = first_loss;
    if (!incident.empty()) {
        out.incident = true;
        out.incident_detail = incident;
    }
    return out;
}

Prediction sam_adapt_batch(EmState& state, const EmConfig& cfg, const SourceStats& stats,
                           const UnlabeledBatch& batch, double rho) {
    if (!(rho > 0.0)) throw UsageError("sam: rho must be > 0");
    const Matrix& x = batch.embeddings;
    const ParamSet groups = cfg.params_to_update;

    const auto probe = forward(state.params, stats, x, NormMode::kBatchStats);
    EmConfig filtered = cfg;
    if (!filtered.filter_threshold) filtered.filter_threshold = default_filter_threshold(state.params.classes());
    const Vec weights = em_sample_weights(probe.probs, filtered);

    Prediction out;
    ++state.batches;
    if (AllZero(weights)) {
        out = PredictBatchStats(state.params, stats, x);
        out.loss = 0.0;
        return out;
    }

    const auto at_origin = grad_entropy(state.params, stats, x, NormMode::kBatchStats, groups, weights);
    std::string incident;
    if (!std::isfinite(at_origin.loss)) {
        incident = "non-finite entropy loss; update skipped";
    } else {
        const double gnorm = params_norm(at_origin.grads, groups);
        HeadGrads step_grads = at_origin.grads;
        if (gnorm > 0.0 && std::isfinite(gnorm)) {
            HeadParams perturbed = state.params;
            zip_tensors(perturbed, at_origin.grads, [&](ParamGroup g, std::span<double> p, std::span<const double> gr) {
                if (!groups.contains(g)) return;
                for (std::size_t i = 0; i < p.size(); ++i) p[i] += rho * gr[i] / gnorm;
            });
            step_grads = grad_entropy(perturbed, stats, x, NormMode::kBatchStats, groups, weights).grads;
        }
        const HeadParams before = state.params;
        const OptState opt_before = state.opt;
        try {
            optimizer_step(state.params, step_grads, state.opt);
            state.params.validate();
        } catch (const NumericError& e) {
            state.params = before;
            state.opt = opt_before;
            incident = e.what();
        }
    }
    out = PredictBatchStats(state.params, stats, x);
    out.loss = at_origin.loss;
    if (!incident.empty()) {
        out.incident = true;
        out.incident_detail = incident;
    }
    return out;
}

}  // namespace driftbench
