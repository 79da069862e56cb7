#pragma once

#include "pvn/types.hpp"

#include <cstdint>

namespace pvn {

/// Frame numerology shared by every module.
struct OfdmConfig {
    double f_c = 28e9;
    double delta_f = 100e3;
    int n_sub = 128;
    int n_cp = 16;
    int g_symbols = 256;
    int m_r = 64;
    int m_u = 2;
    double d_over_lambda = 0.5;

    [[nodiscard]] double t_s() const { return 1.0 / (n_sub * delta_f); }
    [[nodiscard]] int n_s() const { return n_sub + n_cp; }
    [[nodiscard]] double t_sym() const { return n_s() * t_s(); }
    [[nodiscard]] double wavelength() const { return kSpeedOfLight / f_c; }
    /// Largest delay the cyclic prefix absorbs.
    [[nodiscard]] double max_delay() const { return n_cp * t_s(); }

    /// Normalized frequency xi = N_sub * f * T_s.
    [[nodiscard]] double normalize(double freq_hz) const { return n_sub * freq_hz * t_s(); }
    /// Per-symbol phase progression in cycles for a normalized frequency.
    [[nodiscard]] double cycles_per_symbol(double xi) const {
        return xi * static_cast<double>(n_s()) / n_sub;
    }

    void validate() const;
    /// Stable 64-bit digest of the numerology, used to tag persisted fingerprints.
    [[nodiscard]] std::uint64_t hash() const;
};

/// Range-bin width c/(N_sub * delta_f).
double range_unit(const OfdmConfig& cfg);
/// Velocity-bin width c/(f_c * T_sym * g_eff).
double velocity_unit(const OfdmConfig& cfg, int g_eff);

}  // namespace pvn
