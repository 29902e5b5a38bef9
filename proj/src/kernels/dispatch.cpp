// Runtime backend selection. Compiled without SIMD flags so the CPU feature
// check itself never executes an unsupported instruction.

#include <atomic>
#include <cstdlib>
#include <string_view>

#include "natboost/common.hpp"
#include "natboost/kernels.hpp"

namespace natboost::kernels {

const Backend* avx2_backend_table();  // defined in avx2.cpp

const Backend* avx2_backend() {
#if defined(__x86_64__)
    static const bool supported = __builtin_cpu_supports("avx2");
    return supported ? avx2_backend_table() : nullptr;
#else
    return nullptr;
#endif
}

namespace {

const Backend* pick_default() {
    if (const char* env = std::getenv("NATBOOST_KERNELS")) {
        const std::string_view requested(env);
        if (requested == "scalar") return &scalar_backend();
        if (requested == "avx2") {
            if (const Backend* b = avx2_backend()) return b;
            warn("NATBOOST_KERNELS=avx2 requested but AVX2 is unavailable; "
                 "using scalar kernels");
            return &scalar_backend();
        }
        if (requested != "auto")
            warn("unknown NATBOOST_KERNELS value '" + std::string(requested) +
                 "'; using auto selection");
    }
    if (const Backend* b = avx2_backend()) return b;
    return &scalar_backend();
}

std::atomic<const Backend*>& active_slot() {
    static std::atomic<const Backend*> slot{pick_default()};
    return slot;
}

}  // namespace

const Backend& active() { return *active_slot().load(std::memory_order_relaxed); }

bool select(std::string_view name) {
    if (name == "scalar") {
        active_slot().store(&scalar_backend(), std::memory_order_relaxed);
        return true;
    }
    if (name == "avx2") {
        if (const Backend* b = avx2_backend()) {
            active_slot().store(b, std::memory_order_relaxed);
            return true;
        }
        return false;
    }
    if (name == "auto") {
        const Backend* b = avx2_backend();
        active_slot().store(b ? b : &scalar_backend(), std::memory_order_relaxed);
        return true;
    }
    return false;
}

}  // namespace natboost::kernels
