#include "pvn/ofdm.hpp"

#include <fmt/format.h>

namespace pvn {

void OfdmConfig::validate() const {
    if (f_c <= 0.0 || delta_f <= 0.0) {
        throw ConfigError("carrier and subcarrier spacing must be positive");
    }
    if (n_sub < 2 || n_cp < 0 || n_cp >= n_sub) {
        throw ConfigError("need n_sub >= 2 and 0 <= n_cp < n_sub");
    }
    if (g_symbols < 2) {
        throw ConfigError("need at least two symbols");
    }
    if (m_r < 1 || m_u < 1) {
        throw ConfigError("antenna counts must be positive");
    }
    if (d_over_lambda <= 0.0) {
        throw ConfigError("antenna spacing must be positive");
    }
}

std::uint64_t OfdmConfig::hash() const {
    const std::string canon = fmt::format("{:.17g}|{:.17g}|{}|{}|{}|{}|{}|{:.17g}", f_c, delta_f, n_sub, n_cp,
                                          g_symbols, m_r, m_u, d_over_lambda);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char ch : canon) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

double range_unit(const OfdmConfig& cfg) { return kSpeedOfLight / (cfg.n_sub * cfg.delta_f); }

double velocity_unit(const OfdmConfig& cfg, int g_eff) {
    return kSpeedOfLight / (cfg.f_c * cfg.t_sym() * g_eff);
}

}  // namespace pvn
