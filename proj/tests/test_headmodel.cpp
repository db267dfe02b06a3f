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
#include <filesystem>
#include <fstream>

#include "driftbench/errors.hpp"
#include "driftbench/head/checkpoint.hpp"
#include "driftbench/head/head_model.hpp"
#include "driftbench/head/optimizer.hpp"
#include "driftbench/head/training.hpp"
#include "driftbench/numkit/prob.hpp"
#include "driftbench/numkit/rng.hpp"
#include "oracles.hpp"

using namespace driftbench;

namespace {

constexpr ParamSet kAll{ParamGroup::kNormScale, ParamGroup::kNormShift, ParamGroup::kWeight, ParamGroup::kBias,
                        ParamGroup::kPrompt};

Matrix Randn(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
    Matrix m(r, c);
    for (double& v : m.values()) v = scale * rng.normal();
    return m;
}

HeadParams RandomParams(Rng& rng, std::size_t d, std::size_t c) {
    HeadParams p = HeadParams::zeros_like(d, c);
    for (double& v : p.norm_scale) v = 1.0 + 0.3 * rng.normal();
    for (double& v : p.norm_shift) v = 0.3 * rng.normal();
    for (double& v : p.weight.values()) v = 0.6 * rng.normal();
    for (double& v : p.bias) v = 0.3 * rng.normal();
    for (double& v : p.prompt) v = 0.3 * rng.normal();
    return p;
}

SourceStats UnitStats(std::size_t d) {
    SourceStats s;
    s.feat_mean.assign(d, 0.0);
    s.feat_std.assign(d, 1.0);
    s.norm_running_mean.assign(d, 0.0);
    s.norm_running_var.assign(d, 1.0);
    s.count = 1;
    return s;
}

struct Instance {
    HeadParams params;
    SourceStats stats;
    Matrix x;
    Matrix targets;
    Vec weights;
};

Instance RandomInstance(Rng& rng) {
    const std::size_t d = 2 + rng.uniform_index(9), c = 2 + rng.uniform_index(4), b = 2 + rng.uniform_index(7);
    Instance in{RandomParams(rng, d, c), compute_source_stats(Randn(rng, 16, d, 1.4)), Randn(rng, b, d), Matrix(b, c),
                Vec(b)};
    for (std::size_t r = 0; r < b; ++r) {
        double s = 0.0;
        for (std::size_t k = 0; k < c; ++k) s += (in.targets(r, k) = 0.05 + rng.uniform());
        for (std::size_t k = 0; k < c; ++k) in.targets(r, k) /= s;
        in.weights[r] = rng.uniform() < 0.25 ? 0.0 : 0.2 + rng.uniform();
    }
    in.weights[0] = 1.0;
    return in;
}

std::string TmpPath(const std::string& name) {
    std::filesystem::create_directories(DRIFTBENCH_TEST_TMP);
    return std::string(DRIFTBENCH_TEST_TMP) + "/" + name;
}

}  // namespace

TEST(Forward, IdentityNormalizationGivesLinearLogits) {
    Rng rng(1);
    HeadParams p = HeadParams::zeros_like(4, 3);
    for (double& v : p.weight.values()) v = rng.normal();
    for (double& v : p.bias) v = rng.normal();
    SourceStats s = UnitStats(4);
    s.norm_running_var.assign(4, 1.0 - 1e-5);  // so that v + eps == 1
    const Matrix x = Randn(rng, 5, 4);
    const auto fwd = forward(p, s, x, NormMode::kSourceStats);
    for (std::size_t r = 0; r < 5; ++r) {
        for (std::size_t k = 0; k < 3; ++k) {
            double expect = p.bias[k];
            for (std::size_t j = 0; j < 4; ++j) expect += p.weight(k, j) * x(r, j);
            EXPECT_NEAR(fwd.logits(r, k), expect, 1e-12);
        }
    }
}

TEST(Forward, IdenticalRowsInBatchStatsGiveShift) {
    Rng rng(2);
    const HeadParams p = RandomParams(rng, 6, 4);
    Matrix x(5, 6);
    for (std::size_t r = 0; r < 5; ++r)
        for (std::size_t j = 0; j < 6; ++j) x(r, j) = 0.1 * static_cast<double>(j) + 0.3;
    const auto fwd = forward(p, UnitStats(6), x, NormMode::kBatchStats);
    for (std::size_t r = 0; r < 5; ++r)
        for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(fwd.cache.features(r, j), p.norm_shift[j]);
}

TEST(Forward, ProbabilityRowsSumToOne) {
    Rng rng(3);
    const HeadParams p = RandomParams(rng, 6, 4);
    const auto fwd = forward(p, compute_source_stats(Randn(rng, 30, 6)), Randn(rng, 20, 6, 3.0), NormMode::kSourceStats);
    for (std::size_t r = 0; r < 20; ++r) {
        double s = 0.0;
        for (double v : fwd.probs.row(r)) s += v;
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(Forward, MatchesLoopOracleInBothModes) {
    Rng rng(4);
    for (int t = 0; t < 20; ++t) {
        const Instance in = RandomInstance(rng);
        for (bool batch : {false, true}) {
            const auto fwd = forward(in.params, in.stats, in.x, batch ? NormMode::kBatchStats : NormMode::kSourceStats);
            const auto ref = oracle::head_logits(in.params, in.stats, oracle::to_rows(in.x), batch);
            for (std::size_t r = 0; r < ref.size(); ++r)
                for (std::size_t k = 0; k < ref[r].size(); ++k) EXPECT_NEAR(fwd.logits(r, k), ref[r][k], 1e-11);
        }
    }
}

TEST(Forward, SourceStatsRowsIndependentOfBatch) {
    Rng rng(5);
    const HeadParams p = RandomParams(rng, 5, 3);
    const SourceStats s = compute_source_stats(Randn(rng, 20, 5));
    const Matrix x = Randn(rng, 8, 5);
    const auto full = forward(p, s, x, NormMode::kSourceStats);
    for (std::size_t r = 0; r < 8; ++r) {
        const std::size_t idx[] = {r};
        const auto one = forward(p, s, x.gather_rows(idx), NormMode::kSourceStats);
        for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(one.logits(0, k), full.logits(r, k));
    }
}

TEST(Forward, BatchStatsPermutationEquivariant) {
    Rng rng(6);
    const HeadParams p = RandomParams(rng, 5, 3);
    const Matrix x = Randn(rng, 8, 5);
    const std::size_t perm[] = {3, 7, 0, 1, 6, 2, 5, 4};
    const auto a = forward(p, UnitStats(5), x, NormMode::kBatchStats);
    const auto b = forward(p, UnitStats(5), x.gather_rows(perm), NormMode::kBatchStats);
    for (std::size_t r = 0; r < 8; ++r)
        for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(b.logits(r, k), a.logits(perm[r], k), 1e-12);
}

TEST(Forward, RejectsMismatchedDimension) {
    const HeadParams p = HeadParams::zeros_like(4, 2);
    EXPECT_THROW(forward(p, UnitStats(4), Matrix(3, 5), NormMode::kSourceStats), DataError);
    EXPECT_THROW(forward(p, UnitStats(4), Matrix(0, 4), NormMode::kSourceStats), DataError);
}

TEST(Gradients, EntropyMatchesCentralDifferences) {
    Rng rng(10);
    for (int t = 0; t < 20; ++t) {
        const Instance in = RandomInstance(rng);
        const auto rows = oracle::to_rows(in.x);
        for (bool batch : {false, true}) {
            for (bool weighted : {false, true}) {
                const Vec w = weighted ? in.weights : Vec{};
                const auto lg =
                    grad_entropy(in.params, in.stats, in.x, batch ? NormMode::kBatchStats : NormMode::kSourceStats, kAll, w);
                EXPECT_NEAR(lg.loss, oracle::entropy_loss(in.params, in.stats, rows, batch, w), 1e-12);
                const auto numeric = oracle::central_differences(
                    in.params, [&](const HeadParams& q) { return oracle::entropy_loss(q, in.stats, rows, batch, w); },
                    1e-5);
                EXPECT_LT(oracle::worst_relative_error(oracle::flatten(lg.grads), numeric, 1e-4), 1e-6)
                    << "instance " << t << " batch " << batch;
            }
        }
    }
}

TEST(Gradients, CrossEntropyMatchesCentralDifferences) {
    Rng rng(11);
    for (int t = 0; t < 20; ++t) {
        const Instance in = RandomInstance(rng);
        const auto rows = oracle::to_rows(in.x);
        const auto targets = oracle::to_rows(in.targets);
        for (bool batch : {false, true}) {
            const auto lg = grad_crossentropy(in.params, in.stats, in.x,
                                              batch ? NormMode::kBatchStats : NormMode::kSourceStats, in.targets, kAll,
                                              in.weights);
            EXPECT_NEAR(lg.loss, oracle::crossentropy_loss(in.params, in.stats, rows, batch, targets, in.weights), 1e-12);
            const auto numeric = oracle::central_differences(
                in.params,
                [&](const HeadParams& q) {
                    return oracle::crossentropy_loss(q, in.stats, rows, batch, targets, in.weights);
                },
                1e-5);
            EXPECT_LT(oracle::worst_relative_error(oracle::flatten(lg.grads), numeric, 1e-4), 1e-6) << t;
        }
    }
}

TEST(Gradients, UniformPredictionsAreCriticalPoint) {
    Rng rng(12);
    HeadParams p = RandomParams(rng, 5, 4);
    std::fill(p.weight.values().begin(), p.weight.values().end(), 0.0);
    std::fill(p.bias.begin(), p.bias.end(), 0.0);
    const auto lg = grad_entropy(p, UnitStats(5), Randn(rng, 6, 5), NormMode::kBatchStats, kAll);
    EXPECT_NEAR(lg.loss, std::log(4.0), 1e-12);
    EXPECT_LT(params_norm(lg.grads), 1e-12);
}

TEST(Gradients, SaturatedPredictionHasVanishingGradient) {
    HeadParams p = HeadParams::zeros_like(2, 3);
    p.bias = {800.0, 0.0, 0.0};
    Matrix x{{0.3, -0.2}};
    const auto lg = grad_entropy(p, UnitStats(2), x, NormMode::kSourceStats, kAll);
    EXPECT_LT(lg.loss, 1e-12);
    EXPECT_LT(params_norm(lg.grads), 1e-8);
}

TEST(Gradients, CrossEntropySelfTargetHasZeroLogitGradient) {
    Rng rng(13);
    const HeadParams p = RandomParams(rng, 4, 3);
    const SourceStats s = UnitStats(4);
    const Matrix x = Randn(rng, 5, 4);
    const auto fwd = forward(p, s, x, NormMode::kSourceStats);
    const auto lg = grad_crossentropy(p, s, x, NormMode::kSourceStats, fwd.probs, kAll);
    EXPECT_LT(params_norm(lg.grads), 1e-12);
}

TEST(Gradients, OneHotArgmaxTargetGivesNegLogMaxProb) {
    Rng rng(14);
    const HeadParams p = RandomParams(rng, 4, 3);
    const SourceStats s = UnitStats(4);
    const Matrix x = Randn(rng, 6, 4);
    const auto fwd = forward(p, s, x, NormMode::kSourceStats);
    Matrix t(6, 3);
    double expect = 0.0;
    for (std::size_t r = 0; r < 6; ++r) {
        const auto k = argmax(fwd.probs.row(r));
        t(r, k) = 1.0;
        expect -= std::log(fwd.probs(r, k)) / 6.0;
    }
    EXPECT_NEAR(grad_crossentropy(p, s, x, NormMode::kSourceStats, t, kAll).loss, expect, 1e-12);
}

TEST(Gradients, PromptGradientZeroUnderBatchStats) {
    Rng rng(15);
    const Instance in = RandomInstance(rng);
    const auto lg = grad_entropy(in.params, in.stats, in.x, NormMode::kBatchStats, kAll);
    for (double g : lg.grads.prompt) EXPECT_EQ(g, 0.0);
}

TEST(Gradients, UnselectedGroupsComeBackZero) {
    Rng rng(16);
    const Instance in = RandomInstance(rng);
    const auto lg = grad_entropy(in.params, in.stats, in.x, NormMode::kSourceStats, ParamSet::norm_affine());
    for (double g : lg.grads.weight.values()) EXPECT_EQ(g, 0.0);
    for (double g : lg.grads.bias) EXPECT_EQ(g, 0.0);
    EXPECT_GT(params_norm(lg.grads), 0.0);
}

TEST(Gradients, RejectsOffSimplexTargets) {
    const HeadParams p = HeadParams::zeros_like(2, 2);
    Matrix t{{0.7, 0.7}};
    EXPECT_THROW(grad_crossentropy(p, UnitStats(2), Matrix{{1.0, 2.0}}, NormMode::kSourceStats, t, kAll), NumericError);
}

TEST(Optimizer, ZeroLearningRateLeavesParamsBitIdentical) {
    Rng rng(20);
    HeadParams p = RandomParams(rng, 5, 3);
    const HeadParams before = p;
    AdamWConfig cfg;
    cfg.lr = 0.0;
    cfg.weight_decay = 0.1;
    OptState opt = OptState::create(p, cfg, kAll);
    HeadGrads g = RandomParams(rng, 5, 3);
    optimizer_step(p, g, opt);
    EXPECT_EQ(p, before);
    EXPECT_EQ(opt.step, 1u);
}

TEST(Optimizer, SingleStepMatchesHandRecursion) {
    HeadParams p = HeadParams::zeros_like(1, 1);
    p.bias[0] = 0.5;
    AdamWConfig cfg;
    cfg.lr = 0.01;
    OptState opt = OptState::create(p, cfg, ParamSet::classifier());
    HeadGrads g = HeadParams::zeros_like(1, 1);
    g.norm_scale[0] = 0.0;
    g.bias[0] = 0.3;
    optimizer_step(p, g, opt);
    const double m = (1 - 0.9) * 0.3 / (1 - 0.9);
    const double v = (1 - 0.999) * 0.09 / (1 - 0.999);
    EXPECT_NEAR(p.bias[0], 0.5 - 0.01 * m / (std::sqrt(v) + 1e-8), 1e-15);
    // Second step reuses the accumulated moments.
    optimizer_step(p, g, opt);
    const double m2 = (0.9 * 0.03 + 0.1 * 0.3) / (1 - 0.81);
    const double v2 = (0.999 * 0.00009 + 0.001 * 0.09) / (1 - 0.999 * 0.999);
    EXPECT_NEAR(p.bias[0], 0.5 - 0.01 * m / (std::sqrt(v) + 1e-8) - 0.01 * m2 / (std::sqrt(v2) + 1e-8), 1e-14);
}

TEST(Optimizer, PureDecayOnlyTouchesClassifier) {
    Rng rng(21);
    HeadParams p = RandomParams(rng, 4, 2);
    const HeadParams before = p;
    AdamWConfig cfg;
    cfg.lr = 0.1;
    cfg.weight_decay = 0.01;
    OptState opt = OptState::create(p, cfg, kAll);
    HeadGrads zero = HeadParams::zeros_like(4, 2);
    std::fill(zero.norm_scale.begin(), zero.norm_scale.end(), 0.0);
    optimizer_step(p, zero, opt);
    for (std::size_t i = 0; i < p.weight.size(); ++i)
        EXPECT_DOUBLE_EQ(p.weight.values()[i], before.weight.values()[i] * (1 - 0.1 * 0.01));
    for (std::size_t i = 0; i < p.bias.size(); ++i) EXPECT_DOUBLE_EQ(p.bias[i], before.bias[i] * (1 - 0.1 * 0.01));
    EXPECT_EQ(p.norm_scale, before.norm_scale);
    EXPECT_EQ(p.norm_shift, before.norm_shift);
    EXPECT_EQ(p.prompt, before.prompt);
}

TEST(Optimizer, NonFiniteGradientRejectedWithoutMutation) {
    Rng rng(22);
    HeadParams p = RandomParams(rng, 3, 2);
    const HeadParams before = p;
    OptState opt = OptState::create(p, AdamWConfig{}, kAll);
    HeadGrads g = HeadParams::zeros_like(3, 2);
    g.norm_shift[1] = std::nan("");
    EXPECT_THROW(optimizer_step(p, g, opt), NumericError);
    EXPECT_EQ(p, before);
    EXPECT_EQ(opt.step, 0u);
}

TEST(SourceStats, SmallExamples) {
    const auto s = compute_source_stats(Matrix{{0, 0}, {2, 2}});
    EXPECT_EQ(s.feat_mean, (Vec{1, 1}));
    EXPECT_EQ(s.feat_std, (Vec{1, 1}));
    EXPECT_EQ(s.count, 2u);
    const auto same = compute_source_stats(Matrix{{0.3, -1.7}, {0.3, -1.7}, {0.3, -1.7}});
    EXPECT_EQ(same.feat_std, (Vec{0, 0}));
    EXPECT_THROW(compute_source_stats(Matrix{{1, 2}}), DataError);
}

TEST(SourceStats, MatchesTwoPassReference) {
    Rng rng(23);
    const Matrix m = Randn(rng, 100, 5, 2.5);
    const auto s = compute_source_stats(m);
    for (std::size_t j = 0; j < 5; ++j) {
        double mu = 0.0;
        for (std::size_t r = 0; r < 100; ++r) mu += m(r, j);
        mu /= 100;
        double v = 0.0;
        for (std::size_t r = 0; r < 100; ++r) v += (m(r, j) - mu) * (m(r, j) - mu);
        EXPECT_NEAR(s.feat_mean[j], mu, 1e-12);
        EXPECT_NEAR(s.feat_std[j], std::sqrt(v / 100), 1e-12);
    }
}

TEST(ParamSetText, ParsesNames) {
    EXPECT_EQ(ParamSet::parse("norm"), ParamSet::norm_affine());
    EXPECT_EQ(ParamSet::parse("weight, bias"), ParamSet::classifier());
    EXPECT_EQ(ParamSet::parse("all"), ParamSet::trainable());
    EXPECT_TRUE(ParamSet::parse("prompt").contains(ParamGroup::kPrompt));
    EXPECT_THROW(ParamSet::parse("gamma"), UsageError);
}

namespace {

FeatureBatch TwoBlobs(std::uint64_t seed, std::size_t per_class, std::size_t d, double separation) {
    Rng rng(seed);
    FeatureBatch b;
    b.embeddings = Matrix(2 * per_class, d);
    b.labels = std::vector<int>(2 * per_class);
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        const int y = static_cast<int>(i % 2);
        (*b.labels)[i] = y;
        for (std::size_t j = 0; j < d; ++j) b.embeddings(i, j) = rng.normal();
        b.embeddings(i, 0) += y == 0 ? -separation / 2 : separation / 2;
    }
    return b;
}

}  // namespace

TEST(Training, SeparableBlobsReachHighAccuracy) {
    const FeatureBatch b = TwoBlobs(1, 500, 8, 6.0);
    TrainConfig cfg;
    cfg.seed = 3;
    cfg.lr = 1e-2;
    const TrainResult r = train_source(b, 2, cfg);
    const auto fwd = forward(r.params, r.stats, b.embeddings, NormMode::kSourceStats);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < b.size(); ++i) hits += static_cast<int>(argmax(fwd.probs.row(i))) == (*b.labels)[i];
    EXPECT_GE(static_cast<double>(hits) / static_cast<double>(b.size()), 0.99);
    ASSERT_EQ(r.epoch_loss.size(), 50u);
    EXPECT_LT(r.epoch_loss.back(), r.epoch_loss.front());
}

TEST(Training, ZeroEpochsKeepsInitialization) {
    const FeatureBatch b = TwoBlobs(2, 20, 4, 2.0);
    TrainConfig cfg;
    cfg.epochs = 0;
    cfg.seed = 5;
    const TrainResult r = train_source(b, 2, cfg);
    EXPECT_EQ(r.params, init_head(4, 2, cfg.init_std, Rng::derive(5, 1)));
    EXPECT_EQ(r.stats, compute_source_stats(b.embeddings));
    EXPECT_TRUE(r.epoch_loss.empty());
}

TEST(Training, ConstantFeatureStaysFinite) {
    FeatureBatch b = TwoBlobs(3, 30, 4, 3.0);
    for (std::size_t i = 0; i < b.size(); ++i) b.embeddings(i, 2) = 1.25;
    TrainConfig cfg;
    cfg.epochs = 3;
    const TrainResult r = train_source(b, 2, cfg);
    EXPECT_EQ(r.stats.feat_std[2], 0.0);
    const auto fwd = forward(r.params, r.stats, b.embeddings, NormMode::kSourceStats);
    EXPECT_TRUE(all_finite(fwd.probs.values()));
}

TEST(Training, SameSeedIsBitIdentical) {
    const FeatureBatch b = TwoBlobs(4, 40, 5, 2.0);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.seed = 9;
    EXPECT_EQ(train_source(b, 2, cfg).params, train_source(b, 2, cfg).params);
}

TEST(Training, RejectsUnlabeledAndSingleClass) {
    FeatureBatch b = TwoBlobs(5, 10, 3, 2.0);
    FeatureBatch unlabeled{b.embeddings, std::nullopt, std::nullopt};
    EXPECT_THROW(train_source(unlabeled, 2, TrainConfig{}), DataError);
    std::fill(b.labels->begin(), b.labels->end(), 1);
    EXPECT_THROW(train_source(b, 2, TrainConfig{}), DataError);
}

TEST(Training, WarmupThenLinearDecay) {
    EXPECT_DOUBLE_EQ(warmup_linear_factor(0, 100, 10), 0.0);
    EXPECT_DOUBLE_EQ(warmup_linear_factor(5, 100, 10), 0.5);
    EXPECT_DOUBLE_EQ(warmup_linear_factor(10, 100, 10), 1.0);
    EXPECT_DOUBLE_EQ(warmup_linear_factor(55, 100, 10), 0.5);
    EXPECT_DOUBLE_EQ(warmup_linear_factor(100, 100, 10), 0.0);
}

TEST(Checkpoint, RoundTripIsExact) {
    Rng rng(30);
    Checkpoint ck{RandomParams(rng, 6, 3), compute_source_stats(Randn(rng, 10, 6)), {{"lr", 3e-5}, {"epochs", 50}}};
    const std::string path = TmpPath("roundtrip.ttah");
    save_checkpoint(path, ck);
    const Checkpoint back = load_checkpoint(path);
    EXPECT_EQ(back.params, ck.params);
    EXPECT_EQ(back.stats, ck.stats);
    EXPECT_EQ(back.train_config, ck.train_config);
    EXPECT_TRUE(std::filesystem::exists(checkpoint_sidecar(path)));
}

TEST(Checkpoint, TruncatedFileNamesOffset) {
    Rng rng(31);
    const std::string path = TmpPath("trunc.ttah");
    save_checkpoint(path, Checkpoint{RandomParams(rng, 4, 2), compute_source_stats(Randn(rng, 5, 4)), {}});
    std::filesystem::resize_file(path, 40);
    try {
        load_checkpoint(path);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos) << e.what();
    }
}

TEST(Checkpoint, BadMagicRejected) {
    const std::string path = TmpPath("bad.ttah");
    std::ofstream(path) << "NOPE0000000000000000";
    EXPECT_THROW(load_checkpoint(path), DataError);
}
