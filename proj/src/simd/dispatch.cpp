#include "pvn/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace pvn::simd {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Level initial_level() {
    if (const char* env = std::getenv("PVN_SIMD"); env != nullptr && std::string(env) == "scalar") {
        return Level::scalar;
    }
    return detect_level();
}

std::atomic<Level>& current() {
    static std::atomic<Level> level{initial_level()};
    return level;
}

}  // namespace

Level detect_level() {
    return (avx2_table() != nullptr && cpu_has_avx2()) ? Level::avx2 : Level::scalar;
}

Level active_level() { return current().load(std::memory_order_relaxed); }

void set_level(Level level) {
    if (level == Level::avx2 && detect_level() != Level::avx2) {
        throw std::runtime_error("AVX2 kernels are not available on this CPU");
    }
    current().store(level, std::memory_order_relaxed);
}

std::string_view level_name(Level level) { return level == Level::avx2 ? "avx2" : "scalar"; }

const KernelTable& kernels() {
    return active_level() == Level::avx2 ? *avx2_table() : scalar_table();
}

}  // namespace pvn::simd
