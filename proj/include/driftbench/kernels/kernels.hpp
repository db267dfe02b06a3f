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

#pragma once

#include <cstddef>
#include <string_view>

namespace driftbench::kernels {

enum class Isa { kScalar, kAvx2 };

// One entry per data-parallel inner loop. Every ISA provides the full table;
// the scalar table is the reference the others are tested against.
struct KernelTable {
    Isa isa;
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // y = alpha * x + beta * y
    void (*axpby)(double alpha, const double* x, double beta, double* y, std::size_t n);
    double (*squared_distance)(const double* a, const double* b, std::size_t n);
    // out[r] = dot(m + r*cols, x) for r in [0, rows)
    void (*gemv)(const double* m, std::size_t rows, std::size_t cols, const double* x,
                 double* out);
};

namespace scalar {
const KernelTable& table();
}

#if defined(DRIFTBENCH_HAS_AVX2)
namespace avx2 {
const KernelTable& table();
}
#endif

bool isa_supported(Isa isa);

// The table in use. Chosen once from CPU features unless the
// DRIFTBENCH_SIMD environment variable ("scalar" | "avx2") or set_isa() says otherwise.
const KernelTable& active();

// Throws std::invalid_argument when the ISA is not available on this CPU/build.
void set_isa(Isa isa);

std::string_view isa_name(Isa isa);

// RAII override, used by tests that need the reference path.
class ScopedIsa {
public:
    explicit ScopedIsa(Isa isa);
    ~ScopedIsa();
    ScopedIsa(const ScopedIsa&) = delete;
    ScopedIsa& operator=(const ScopedIsa&) = delete;

private:
    Isa previous_;
};

}  // namespace driftbench::kernels
