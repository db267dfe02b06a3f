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

#include "driftbench/adapt/foa.hpp"

#include <cmath>
#include <limits>

#include "driftbench/errors.hpp"

namespace driftbench {
namespace {

HeadParams WithPrompt(const HeadParams& params, std::span<const double> prompt) {
    HeadParams p = params;
    p.prompt.assign(prompt.begin(), prompt.end());
    return p;
}

}  // namespace

FoaTerms foa_fitness(const HeadParams& params, const SourceStats& stats, const Matrix& embeddings,
                     std::span<const double> prompt) {
    if (prompt.size() != params.dim()) throw DataError("foa: prompt dimension mismatch");
    if (stats.dim() != params.dim()) throw DataError("foa: source stats dimension mismatch");
    const HeadParams prompted = WithPrompt(params, prompt);
    const auto fwd = forward(prompted, stats, embeddings, NormMode::kSourceStats);

    FoaTerms t;
    for (std::size_t r = 0; r < fwd.probs.rows(); ++r) {
        const auto p = fwd.probs.row(r);
        const auto lp = fwd.log_probs.row(r);
        for (std::size_t c = 0; c < p.size(); ++c) t.entropy -= p[c] * lp[c];
    }
    t.entropy /= static_cast<double>(fwd.probs.rows());

    Vec mean, var;
    column_moments(embeddings, mean, var);
    double mean_sq = 0.0;
    double std_sq = 0.0;
    for (std::size_t j = 0; j < mean.size(); ++j) {
        const double dm = mean[j] + prompt[j] - stats.feat_mean[j];
        const double ds = std::sqrt(var[j]) - stats.feat_std[j];
        mean_sq += dm * dm;
        std_sq += ds * ds;
    }
    t.mean_gap = std::sqrt(mean_sq);
    t.std_gap = std::sqrt(std_sq);
    return t;
}

FoaState FoaState::create(std::size_t dim) {
    FoaState s;
    s.prompt.assign(dim, 0.0);
    return s;
}

Prediction foa_adapt_batch(FoaState& state, const HeadParams& params, const SourceStats& stats,
                           const UnlabeledBatch& batch, const FoaConfig& cfg) {
    const Matrix& x = batch.embeddings;
    auto fitness = [&](std::span<const double> prompt) {
        const double f = foa_fitness(params, stats, x, prompt).total();
        return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
    };

    std::vector<double> trace;
    double best = fitness(state.prompt);
    trace.push_back(best);
    std::string incident;

    if (cfg.generations_per_batch > 0) {
        if (!state.search) {
            CmaesConfig cc;
            cc.dimension = params.dim();
            cc.population = cfg.population;
            cc.sigma0 = cfg.sigma0;
            cc.seed = cfg.seed;
            state.search.emplace(cc, state.prompt);
        }
        Cmaes& es = *state.search;
        std::vector<double> f(es.population());
        for (std::size_t g = 0; g < cfg.generations_per_batch; ++g) {
            const auto candidates = es.ask();
            for (std::size_t i = 0; i < candidates.size(); ++i) {
                f[i] = fitness(candidates[i]);
                if (f[i] < best) {
                    best = f[i];
                    state.prompt = candidates[i];
                }
            }
            try {
                es.tell(candidates, f);
            } catch (const NumericError& e) {
                incident = std::string(e.what()) + "; prompt unchanged";
            }
            trace.push_back(best);
            if (!incident.empty()) break;
        }
    }
    state.history.push_back(std::move(trace));

    Prediction out = prediction_from_probs(
        forward(WithPrompt(params, state.prompt), stats, x, NormMode::kSourceStats).probs);
    out.loss = best;
    if (!incident.empty()) {
        out.incident = true;
        out.incident_detail = incident;
    }
    return out;
}

}  // namespace driftbench
