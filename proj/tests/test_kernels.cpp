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
#include <vector>

#include "driftbench/kernels/kernels.hpp"
#include "driftbench/numkit/rng.hpp"

namespace k = driftbench::kernels;

namespace {

std::vector<double> Randn(driftbench::Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal();
    return v;
}

class SimdEquivalence : public ::testing::TestWithParam<std::size_t> {
protected:
    void SetUp() override {
        if (!k::isa_supported(k::Isa::kAvx2)) GTEST_SKIP() << "no AVX2 on this machine";
    }
};

}  // namespace

TEST_P(SimdEquivalence, DotAndDistanceMatchScalar) {
    const std::size_t n = GetParam();
    driftbench::Rng rng(n + 1);
    const auto a = Randn(rng, n), b = Randn(rng, n);
    const auto& ref = k::scalar::table();
    const auto& fast = k::avx2::table();
    const double tol = 1e-13 * (1.0 + static_cast<double>(n));
    EXPECT_NEAR(ref.dot(a.data(), b.data(), n), fast.dot(a.data(), b.data(), n), tol);
    EXPECT_NEAR(ref.squared_distance(a.data(), b.data(), n), fast.squared_distance(a.data(), b.data(), n), tol);
}

TEST_P(SimdEquivalence, ElementwiseUpdatesAreExact) {
    const std::size_t n = GetParam();
    driftbench::Rng rng(n + 7);
    const auto x = Randn(rng, n);
    auto y1 = Randn(rng, n);
    auto y2 = y1;
    k::scalar::table().axpy(0.37, x.data(), y1.data(), n);
    k::avx2::table().axpy(0.37, x.data(), y2.data(), n);
    EXPECT_EQ(y1, y2);
    k::scalar::table().axpby(-1.5, x.data(), 0.25, y1.data(), n);
    k::avx2::table().axpby(-1.5, x.data(), 0.25, y2.data(), n);
    EXPECT_EQ(y1, y2);
}

TEST_P(SimdEquivalence, GemvMatchesScalar) {
    const std::size_t n = GetParam();
    const std::size_t rows = 5;
    driftbench::Rng rng(n + 13);
    const auto m = Randn(rng, rows * n), x = Randn(rng, n);
    std::vector<double> o1(rows), o2(rows);
    k::scalar::table().gemv(m.data(), rows, n, x.data(), o1.data());
    k::avx2::table().gemv(m.data(), rows, n, x.data(), o2.data());
    for (std::size_t r = 0; r < rows; ++r) EXPECT_NEAR(o1[r], o2[r], 1e-13 * (1.0 + static_cast<double>(n)));
}

INSTANTIATE_TEST_SUITE_P(Lengths, SimdEquivalence, ::testing::Values(0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 64, 65, 1000));

TEST(KernelDispatch, ScopedIsaRestoresPrevious) {
    const k::Isa before = k::active().isa;
    {
        k::ScopedIsa guard(k::Isa::kScalar);
        EXPECT_EQ(k::active().isa, k::Isa::kScalar);
    }
    EXPECT_EQ(k::active().isa, before);
}

TEST(KernelDispatch, NamesAreStable) {
    EXPECT_EQ(k::isa_name(k::Isa::kScalar), "scalar");
    EXPECT_EQ(k::isa_name(k::Isa::kAvx2), "avx2");
    EXPECT_TRUE(k::isa_supported(k::Isa::kScalar));
}
