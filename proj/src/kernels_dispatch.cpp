#include <cstdlib>
#include <string>

#include "ergolab/errors.hpp"
#include "ergolab/kernels.hpp"

namespace ergolab::simd {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Level pick_initial_level() {
    const char* env = std::getenv("ERGOLAB_SIMD");
    std::string v = env ? env : "auto";
    if (v == "scalar") return Level::scalar;
    if (v == "avx2") {
        if (!cpu_has_avx2() || kernels_avx2_or_null() == nullptr)
            throw unsupported_error("ERGOLAB_SIMD=avx2 but AVX2 is unavailable");
        return Level::avx2;
    }
    return (cpu_has_avx2() && kernels_avx2_or_null() != nullptr) ? Level::avx2
                                                                 : Level::scalar;
}

Level& level_slot() {
    static Level level = pick_initial_level();
    return level;
}

}  // namespace

bool avx2_available() { return cpu_has_avx2() && kernels_avx2_or_null() != nullptr; }

Level active_level() { return level_slot(); }

const char* level_name(Level level) {
    return level == Level::avx2 ? "avx2" : "scalar";
}

void force_level(Level level) {
    if (level == Level::avx2 && !avx2_available())
        throw unsupported_error("AVX2 kernels unavailable on this host");
    level_slot() = level;
}

const Kernels& kernels() {
    if (level_slot() == Level::avx2) return *kernels_avx2_or_null();
    return kernels_scalar();
}

}  // namespace ergolab::simd
