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

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "driftbench/kernels/kernels.hpp"

namespace driftbench::kernels {
namespace {

const KernelTable& TableFor(Isa isa) {
#if defined(DRIFTBENCH_HAS_AVX2)
    if (isa == Isa::kAvx2) return avx2::table();
#endif
    (void)isa;
    return scalar::table();
}

Isa DetectDefault() {
    if (const char* env = std::getenv("DRIFTBENCH_SIMD")) {
        const std::string want(env);
        if (want == "scalar") return Isa::kScalar;
        if (want == "avx2" && isa_supported(Isa::kAvx2)) return Isa::kAvx2;
    }
    return isa_supported(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar;
}

std::atomic<const KernelTable*>& Current() {
    static std::atomic<const KernelTable*> current{&TableFor(DetectDefault())};
    return current;
}

}  // namespace

bool isa_supported(Isa isa) {
    switch (isa) {
        case Isa::kScalar:
            return true;
        case Isa::kAvx2:
#if defined(DRIFTBENCH_HAS_AVX2)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
    }
    return false;
}

const KernelTable& active() { return *Current().load(std::memory_order_acquire); }

void set_isa(Isa isa) {
    if (!isa_supported(isa)) {
        throw std::invalid_argument("kernel ISA not supported: " + std::string(isa_name(isa)));
    }
    Current().store(&TableFor(isa), std::memory_order_release);
}

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::kScalar:
            return "scalar";
        case Isa::kAvx2:
            return "avx2";
    }
    return "unknown";
}

ScopedIsa::ScopedIsa(Isa isa) : previous_(active().isa) { set_isa(isa); }

ScopedIsa::~ScopedIsa() { set_isa(previous_); }

}  // namespace driftbench::kernels
