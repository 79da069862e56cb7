#include "pvn/rng.hpp"

namespace pvn {
namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30U)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27U)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31U);
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index, std::uint64_t salt) {
    return splitmix64(splitmix64(splitmix64(master) ^ index) ^ (salt * 0xD1B54A32D192ED03ULL));
}

}  // namespace pvn
