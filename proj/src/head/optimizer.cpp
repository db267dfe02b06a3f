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

#include "driftbench/head/optimizer.hpp"

#include <cmath>
#include <string>

#include "driftbench/errors.hpp"

namespace driftbench {
namespace {

HeadGrads ZerosLike(const HeadParams& like) {
    HeadGrads z = HeadParams::zeros_like(like.dim(), like.classes());
    std::fill(z.norm_scale.begin(), z.norm_scale.end(), 0.0);
    return z;
}

bool Decays(ParamGroup g) { return g == ParamGroup::kWeight || g == ParamGroup::kBias; }

}  // namespace

OptState OptState::create(const HeadParams& like, const AdamWConfig& config, ParamSet params) {
    OptState s;
    s.config = config;
    s.params = params;
    s.first_moment = ZerosLike(like);
    s.second_moment = ZerosLike(like);
    return s;
}

void optimizer_step(HeadParams& params, const HeadGrads& grads, OptState& opt) {
    for_each_tensor(grads, [&](ParamGroup g, std::span<const double> t) {
        if (opt.params.contains(g) && !all_finite(t)) {
            throw NumericError("optimizer step rejected: non-finite gradient in " +
                               std::string(param_group_name(g)));
        }
    });

    const AdamWConfig& cfg = opt.config;
    opt.step += 1;
    const double t = static_cast<double>(opt.step);
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);

    HeadParams grads_copy = grads;
    zip_tensors(opt.first_moment, grads, [&](ParamGroup g, std::span<double> m, std::span<const double> gr) {
        if (!opt.params.contains(g)) return;
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gr[i];
    });
    zip_tensors(opt.second_moment, grads, [&](ParamGroup g, std::span<double> v, std::span<const double> gr) {
        if (!opt.params.contains(g)) return;
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gr[i] * gr[i];
        }
    });

    // Build the step direction in grads_copy, then apply it.
    zip_tensors(grads_copy, opt.first_moment, [&](ParamGroup g, std::span<double> dir, std::span<const double> m) {
        if (!opt.params.contains(g)) return;
        for (std::size_t i = 0; i < dir.size(); ++i) dir[i] = m[i] / bc1;
    });
    zip_tensors(grads_copy, opt.second_moment, [&](ParamGroup g, std::span<double> dir, std::span<const double> v) {
        if (!opt.params.contains(g)) return;
        for (std::size_t i = 0; i < dir.size(); ++i) dir[i] /= std::sqrt(v[i] / bc2) + cfg.eps;
    });
    zip_tensors(params, grads_copy, [&](ParamGroup g, std::span<double> p, std::span<const double> dir) {
        if (!opt.params.contains(g)) return;
        const double decay = Decays(g) ? 1.0 - cfg.lr * cfg.weight_decay : 1.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (decay != 1.0) p[i] *= decay;
            p[i] -= cfg.lr * dir[i];
        }
    });
}

}  // namespace driftbench
