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
#include <limits>

#include "driftbench/errors.hpp"
#include "driftbench/numkit/cmaes.hpp"

using namespace driftbench;

namespace {

double Sphere(std::span<const double> x) {
    double f = 0.0;
    for (double v : x) f += v * v;
    return f;
}

}  // namespace

TEST(Cmaes, DefaultPopulation) {
    EXPECT_EQ(default_population(1), 4u);
    EXPECT_EQ(default_population(8), 4u + static_cast<std::size_t>(std::floor(3.0 * std::log(8.0))));
    EXPECT_EQ(default_population(64), 16u);
    CmaesConfig c;
    c.dimension = 10;
    EXPECT_EQ(c.resolved_population(), default_population(10));
}

TEST(Cmaes, ConfigValidation) {
    CmaesConfig c;
    c.dimension = 2;
    c.sigma0 = 0.0;
    EXPECT_THROW(c.validate(), UsageError);
    c.sigma0 = 1.0;
    c.population = 1;
    EXPECT_THROW(c.validate(), UsageError);
    c.population = 0;
    c.dimension = 0;
    EXPECT_THROW(c.validate(), UsageError);
}

TEST(Cmaes, SphereEightDimensions) {
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        CmaesConfig c;
        c.dimension = 8;
        c.sigma0 = 0.5;
        c.max_evaluations = 2000;
        c.seed = seed;
        const Vec x0(8, 1.0);
        const auto r = cmaes_minimize(Sphere, x0, c);
        EXPECT_LE(r.evaluations, 2000u);
        hits += r.best_fitness < 1e-8;
    }
    EXPECT_GE(hits, 9);
}

TEST(Cmaes, ConstantFitnessSingleGeneration) {
    CmaesConfig c;
    c.dimension = 3;
    c.max_evaluations = c.resolved_population();
    const Vec x0(3, 0.0);
    const auto r = cmaes_minimize([](std::span<const double>) { return 3.0; }, x0, c);
    EXPECT_EQ(r.best_fitness, 3.0);
    EXPECT_EQ(r.evaluations, c.resolved_population());
    EXPECT_EQ(r.history.size(), 1u);
    EXPECT_EQ(r.best_x.size(), 3u);
}

TEST(Cmaes, OneDimensionalQuadratic) {
    CmaesConfig c;
    c.dimension = 1;
    c.max_evaluations = 500;
    c.seed = 2;
    const Vec x0{0.0};
    const auto r = cmaes_minimize([](std::span<const double> x) { return (x[0] - 5.0) * (x[0] - 5.0); }, x0, c);
    EXPECT_LT(std::abs(r.best_x[0] - 5.0), 1e-4);
}

TEST(Cmaes, HistoryIsMonotone) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        CmaesConfig c;
        c.dimension = 5;
        c.max_evaluations = 600;
        c.seed = seed;
        const Vec x0(5, 2.0);
        const auto r = cmaes_minimize(
            [](std::span<const double> x) {
                double f = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) f += (i + 1.0) * x[i] * x[i] + std::sin(3 * x[i]);
                return f;
            },
            x0, c);
        for (std::size_t i = 1; i < r.history.size(); ++i) EXPECT_LE(r.history[i], r.history[i - 1]);
        EXPECT_EQ(r.history.back(), r.best_fitness);
    }
}

TEST(Cmaes, NanCandidatesArePenalized) {
    CmaesConfig c;
    c.dimension = 2;
    c.max_evaluations = 400;
    const Vec x0{1.0, 1.0};
    const auto r = cmaes_minimize(
        [](std::span<const double> x) { return x[0] < 0.0 ? std::numeric_limits<double>::quiet_NaN() : Sphere(x); },
        x0, c);
    EXPECT_TRUE(std::isfinite(r.best_fitness));
    EXPECT_GE(r.best_x[0], 0.0);
}

TEST(Cmaes, AllNanGenerationThrows) {
    CmaesConfig c;
    c.dimension = 2;
    c.max_evaluations = 100;
    const Vec x0{1.0, 1.0};
    EXPECT_THROW(cmaes_minimize([](std::span<const double>) { return std::nan(""); }, x0, c), NumericError);
}

TEST(Cmaes, AskTellIsDeterministic) {
    CmaesConfig c;
    c.dimension = 4;
    c.seed = 99;
    const Vec x0(4, 0.5);
    Cmaes a(c, x0), b(c, x0);
    for (int g = 0; g < 5; ++g) {
        const auto ca = a.ask(), cb = b.ask();
        ASSERT_EQ(ca, cb);
        std::vector<double> f;
        for (const auto& x : ca) f.push_back(Sphere(x));
        a.tell(ca, f);
        b.tell(cb, f);
    }
    EXPECT_EQ(a.mean(), b.mean());
    EXPECT_EQ(a.sigma(), b.sigma());
    EXPECT_EQ(a.generation(), 5u);
}

TEST(Cmaes, BudgetBelowPopulationRejected) {
    CmaesConfig c;
    c.dimension = 4;
    c.max_evaluations = 2;
    const Vec x0(4, 0.0);
    EXPECT_THROW(cmaes_minimize(Sphere, x0, c), UsageError);
}
