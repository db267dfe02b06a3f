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

#include <gtest/gtest.h>

#include <cmath>

#include "driftbench/adapt/pseudo_label.hpp"
#include "driftbench/errors.hpp"
#include "driftbench/numkit/prob.hpp"
#include "driftbench/numkit/rng.hpp"

using namespace driftbench;

namespace {

HeadParams RandomParams(Rng& rng, std::size_t d, std::size_t c) {
    HeadParams p = HeadParams::zeros_like(d, c);
    for (double& v : p.norm_scale) v = 1.0 + 0.2 * rng.normal();
    for (double& v : p.norm_shift) v = 0.2 * rng.normal();
    for (double& v : p.weight.values()) v = rng.normal();
    for (double& v : p.bias) v = 0.2 * rng.normal();
    return p;
}

struct Fixture {
    HeadParams params;
    SourceStats stats;
    Matrix batch;
};

Fixture RandomSetup(std::uint64_t seed) {
    Rng rng(seed);
    Fixture s{RandomParams(rng, 5, 3), {}, Matrix(12, 5)};
    Matrix src(40, 5);
    for (double& v : src.values()) v = rng.normal();
    s.stats = compute_source_stats(src);
    for (double& v : s.batch.values()) v = 0.8 + rng.normal();
    return s;
}

double LinfDistance(const HeadParams& a, const HeadParams& b) { return params_max_abs_difference(a, b); }

}  // namespace

TEST(Ema, ScalarExample) {
    HeadParams a = HeadParams::zeros_like(1, 1), m = HeadParams::zeros_like(1, 1);
    a.bias[0] = 1.0;
    m.bias[0] = 0.0;
    EXPECT_NEAR(ema_update(a, m, 0.9).bias[0], 0.9, 1e-15);
    EXPECT_EQ(ema_update(a, m, 1.0), a);
    EXPECT_THROW(ema_update(a, m, 1.5), UsageError);
}

TEST(Ema, ClosedFormDecay) {
    Rng rng(1);
    const HeadParams main = RandomParams(rng, 4, 3);
    const HeadParams start = RandomParams(rng, 4, 3);
    const double gamma = 0.93;
    HeadParams anchor = start;
    HeadParams diff0 = start;
    zip_tensors(diff0, main, [](ParamGroup, std::span<double> d, std::span<const double> m) {
        for (std::size_t i = 0; i < d.size(); ++i) d[i] -= m[i];
    });
    const double n0 = params_norm(diff0);
    for (int n = 1; n <= 100; ++n) {
        anchor = ema_update(anchor, main, gamma);
        if (n == 1 || n == 10 || n == 100) {
            HeadParams diff = anchor;
            zip_tensors(diff, main, [](ParamGroup, std::span<double> d, std::span<const double> m) {
                for (std::size_t i = 0; i < d.size(); ++i) d[i] -= m[i];
            });
            EXPECT_NEAR(params_norm(diff), std::pow(gamma, n) * n0, 1e-10) << n;
        }
    }
}

TEST(Restore, RateZeroAndOne) {
    Rng rng(2);
    const HeadParams p = RandomParams(rng, 6, 3), src = RandomParams(rng, 6, 3);
    Rng r1(5);
    EXPECT_EQ(stochastic_restore(p, src, 0.0, r1), p);
    EXPECT_EQ(stochastic_restore(p, src, 1.0, r1), src);
    EXPECT_THROW(stochastic_restore(p, src, -0.1, r1), UsageError);
}

TEST(Restore, HalfRateConcentrates) {
    HeadParams p = HeadParams::zeros_like(100, 99);
    HeadParams src = p;
    for (double& v : src.weight.values()) v = 1.0;
    const auto total = static_cast<double>(p.weight.size());
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng(seed);
        const HeadParams out = stochastic_restore(p, src, 0.5, rng);
        double restored = 0.0;
        for (double v : out.weight.values()) restored += v;
        EXPECT_GE(restored / total, 0.47);
        EXPECT_LE(restored / total, 0.53);
    }
}

TEST(PseudoLabel, FrozenModelsMatchSource) {
    const Fixture s = RandomSetup(3);
    PlConfig cfg;
    cfg.lr = 0.0;
    cfg.gamma = 1.0;
    PlState st = PlState::create(s.params, cfg);
    for (int i = 0; i < 3; ++i) {
        const auto pred = pl_adapt_batch(st, cfg, s.stats, UnlabeledBatch{s.batch});
        EXPECT_EQ(pred.probs, forward(s.params, s.stats, s.batch, NormMode::kSourceStats).probs);
    }
    EXPECT_EQ(st.main, s.params);
    EXPECT_EQ(st.anchor, s.params);
}

TEST(PseudoLabel, FirstBatchLossIsNegLogMaxProb) {
    const Fixture s = RandomSetup(4);
    PlConfig cfg;
    cfg.lr = 1e-3;
    PlState st = PlState::create(s.params, cfg);
    const auto pred = pl_adapt_batch(st, cfg, s.stats, UnlabeledBatch{s.batch});
    const auto fwd = forward(s.params, s.stats, s.batch, NormMode::kSourceStats);
    double expect = 0.0;
    for (std::size_t r = 0; r < s.batch.rows(); ++r) {
        expect -= std::log(fwd.probs(r, argmax(fwd.probs.row(r))));
        EXPECT_EQ(pred.labels[r], static_cast<int>(argmax(fwd.probs.row(r))));
    }
    ASSERT_TRUE(pred.loss.has_value());
    EXPECT_NEAR(*pred.loss, expect / static_cast<double>(s.batch.rows()), 1e-12);
}

TEST(PseudoLabel, GammaZeroKeepsAnchorOnMain) {
    const Fixture s = RandomSetup(5);
    PlConfig cfg;
    cfg.lr = 1e-2;
    cfg.gamma = 0.0;
    PlState st = PlState::create(s.params, cfg);
    for (int i = 0; i < 4; ++i) {
        pl_adapt_batch(st, cfg, s.stats, UnlabeledBatch{s.batch});
        EXPECT_EQ(LinfDistance(st.anchor, st.main), 0.0);
    }
    EXPECT_NE(st.main, s.params);
}

TEST(PseudoLabel, AnchorMovesAtMostOneMinusGamma) {
    const Fixture s = RandomSetup(6);
    PlConfig cfg;
    cfg.lr = 5e-2;
    cfg.gamma = 0.8;
    PlState st = PlState::create(s.params, cfg);
    for (int i = 0; i < 5; ++i) {
        const HeadParams prev = st.anchor;
        pl_adapt_batch(st, cfg, s.stats, UnlabeledBatch{s.batch});
        EXPECT_LE(LinfDistance(st.anchor, prev), (1 - cfg.gamma) * LinfDistance(st.main, prev) + 1e-15);
    }
}

TEST(PseudoLabel, FrozenTeacherKeepsSourcePredictions) {
    const Fixture s = RandomSetup(7);
    PlConfig cfg;
    cfg.lr = 1e-1;
    cfg.gamma = 1.0;
    PlState st = PlState::create(s.params, cfg);
    const auto ref = forward(s.params, s.stats, s.batch, NormMode::kSourceStats).probs;
    for (int i = 0; i < 4; ++i) EXPECT_EQ(pl_adapt_batch(st, cfg, s.stats, UnlabeledBatch{s.batch}).probs, ref);
    EXPECT_NE(st.main, s.params);
}

TEST(PseudoLabel, SoftTargetsWithZeroLrGiveMeanEntropy) {
    const Fixture s = RandomSetup(8);
    PlConfig cfg;
    cfg.lr = 0.0;
    cfg.soft_targets = true;
    PlState st = PlState::create(s.params, cfg);
    const auto pred = pl_adapt_batch(st, cfg, s.stats, UnlabeledBatch{s.batch});
    const auto fwd = forward(s.params, s.stats, s.batch, NormMode::kSourceStats);
    double h = 0.0;
    for (std::size_t r = 0; r < s.batch.rows(); ++r) h += entropy(fwd.probs.row(r));
    EXPECT_NEAR(*pred.loss, h / static_cast<double>(s.batch.rows()), 1e-12);
}

TEST(PseudoLabel, StudentPredictionsOnRequest) {
    const Fixture s = RandomSetup(9);
    PlConfig cfg;
    cfg.lr = 1e-1;
    cfg.gamma = 0.99;
    cfg.predict_from_anchor = false;
    PlState st = PlState::create(s.params, cfg);
    pl_adapt_batch(st, cfg, s.stats, UnlabeledBatch{s.batch});
    const HeadParams main_before = st.main;
    const auto pred = pl_adapt_batch(st, cfg, s.stats, UnlabeledBatch{s.batch});
    EXPECT_EQ(pred.probs, forward(main_before, s.stats, s.batch, NormMode::kSourceStats).probs);
}

TEST(PseudoLabel, RestoreRateOneReturnsMainToSource) {
    const Fixture s = RandomSetup(10);
    PlConfig cfg;
    cfg.lr = 1e-1;
    cfg.restore_rate = 1.0;
    PlState st = PlState::create(s.params, cfg);
    pl_adapt_batch(st, cfg, s.stats, UnlabeledBatch{s.batch});
    EXPECT_EQ(st.main, s.params);
    EXPECT_NE(st.anchor, s.params);
}

TEST(PseudoLabel, ConfigValidation) {
    PlConfig cfg;
    cfg.gamma = -0.1;
    EXPECT_THROW(cfg.validate(), UsageError);
    cfg.gamma = 0.5;
    cfg.restore_rate = 2.0;
    EXPECT_THROW(cfg.validate(), UsageError);
}
