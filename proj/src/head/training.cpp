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

#include "driftbench/head/training.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "driftbench/errors.hpp"
#include "driftbench/head/optimizer.hpp"
#include "driftbench/numkit/rng.hpp"

namespace driftbench {

double warmup_linear_factor(std::size_t step, std::size_t total, std::size_t warmup) {
    if (step < warmup) return static_cast<double>(step) / static_cast<double>(warmup);
    if (total <= warmup) return 0.0;
    return std::max(0.0, static_cast<double>(total - step) / static_cast<double>(total - warmup));
}

HeadParams init_head(std::size_t dim, std::size_t classes, double init_std, std::uint64_t seed) {
    HeadParams p = HeadParams::zeros_like(dim, classes);
    Rng rng(seed);
    for (double& w : p.weight.values()) w = rng.normal(0.0, init_std);
    return p;
}

TrainResult train_source(const FeatureBatch& train, std::size_t classes, const TrainConfig& cfg) {
    if (!train.labels) throw DataError("train_source: training data is unlabeled");
    train.validate(classes);
    std::set<int> seen(train.labels->begin(), train.labels->end());
    if (seen.size() < 2) throw DataError("train_source: training data has a single class");
    if (cfg.batch_size == 0) throw UsageError("train_source: batch size must be positive");

    TrainResult out;
    out.stats = compute_source_stats(train.embeddings);
    out.params = init_head(train.dim(), classes, cfg.init_std, Rng::derive(cfg.seed, 1));

    const std::size_t n = train.size();
    const std::size_t per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
    const std::size_t total = per_epoch * cfg.epochs;
    const auto warmup = static_cast<std::size_t>(cfg.warmup_fraction * static_cast<double>(total));

    AdamWConfig adam;
    adam.lr = cfg.lr;
    adam.weight_decay = cfg.weight_decay;
    OptState opt = OptState::create(out.params, adam, ParamSet::trainable());

    Rng shuffle_rng(Rng::derive(cfg.seed, 2));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t stop = std::min(n, start + cfg.batch_size);
            const std::span<const std::size_t> idx(order.data() + start, stop - start);
            const Matrix x = train.embeddings.gather_rows(idx);
            Matrix targets(idx.size(), classes, 0.0);
            for (std::size_t r = 0; r < idx.size(); ++r) {
                targets(r, static_cast<std::size_t>((*train.labels)[idx[r]])) = 1.0;
            }
            const auto lg = grad_crossentropy(out.params, out.stats, x, NormMode::kSourceStats,
                                              targets, ParamSet::trainable());
            opt.config.lr = cfg.lr * warmup_linear_factor(step, total, warmup);
            optimizer_step(out.params, lg.grads, opt);
            epoch_loss += lg.loss * static_cast<double>(idx.size());
            ++step;
        }
        out.epoch_loss.push_back(epoch_loss / static_cast<double>(n));
    }
    return out;
}

}  // namespace driftbench
