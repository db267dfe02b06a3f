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

#include "driftbench/adapt/pseudo_label.hpp"

#include <cmath>

#include "driftbench/errors.hpp"
#include "driftbench/numkit/prob.hpp"

namespace driftbench {

void PlConfig::validate() const {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw UsageError("pl: gamma must lie in [0, 1]");
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw UsageError("pl: lr must be finite and >= 0");
    if (restore_rate && !(*restore_rate >= 0.0 && *restore_rate <= 1.0)) {
        throw UsageError("pl: restore rate must lie in [0, 1]");
    }
}

PlState PlState::create(const HeadParams& source, const PlConfig& cfg) {
    cfg.validate();
    AdamWConfig adam;
    adam.lr = cfg.lr;
    return PlState{source, source, source, OptState::create(source, adam, cfg.params_to_update),
                   Rng(cfg.seed), 0};
}

HeadParams ema_update(const HeadParams& anchor, const HeadParams& main, double gamma) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw UsageError("ema: gamma must lie in [0, 1]");
    HeadParams out = anchor;
    zip_tensors(out, main, [&](ParamGroup, std::span<double> a, std::span<const double> m) {
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = gamma * a[i] + (1.0 - gamma) * m[i];
    });
    return out;
}

HeadParams stochastic_restore(const HeadParams& params, const HeadParams& source, double rate,
                              Rng& rng) {
    if (!(rate >= 0.0 && rate <= 1.0)) throw UsageError("restore: rate must lie in [0, 1]");
    HeadParams out = params;
    zip_tensors(out, source, [&](ParamGroup, std::span<double> p, std::span<const double> s) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (rng.uniform() < rate) p[i] = s[i];
        }
    });
    return out;
}

Prediction pl_adapt_batch(PlState& state, const PlConfig& cfg, const SourceStats& stats,
                          const UnlabeledBatch& batch) {
    const Matrix& x = batch.embeddings;
    const auto teacher = forward(state.anchor, stats, x, cfg.norm_mode);

    Matrix targets = teacher.probs;
    if (!cfg.soft_targets) {
        targets = Matrix(teacher.probs.rows(), teacher.probs.cols(), 0.0);
        for (std::size_t r = 0; r < targets.rows(); ++r) targets(r, argmax(teacher.probs.row(r))) = 1.0;
    }

    const auto student = grad_crossentropy(state.main, stats, x, cfg.norm_mode, targets,
                                           cfg.params_to_update);
    Prediction out = prediction_from_probs(cfg.predict_from_anchor ? teacher.probs : student.fwd.probs);
    out.loss = student.loss;

    if (!std::isfinite(student.loss)) {
        out.incident = true;
        out.incident_detail = "non-finite pseudo-label loss; update skipped";
    } else {
        const HeadParams before = state.main;
        const OptState opt_before = state.opt;
        try {
            optimizer_step(state.main, student.grads, state.opt);
            state.main.validate();
            state.anchor = ema_update(state.anchor, state.main, cfg.gamma);
            if (cfg.restore_rate) {
                state.main = stochastic_restore(state.main, state.source, *cfg.restore_rate, state.rng);
            }
        } catch (const NumericError& e) {
            state.main = before;
            state.opt = opt_before;
            out.incident = true;
            out.incident_detail = e.what();
        }
    }
    ++state.batches;
    return out;
}

}  // namespace driftbench
