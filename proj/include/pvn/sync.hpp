#pragma once

#include "pvn/preprocess.hpp"
#include "pvn/rv_estimator.hpp"
#include "pvn/scenario.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace pvn {

/// Delay-axis slice of the static-clutter ridge, the reference for offset estimation.
struct Fingerprint {
    CVector zeta;  ///< first Q_B = floor(cols/2) bins of the ridge row
    int k_c = 0;
    std::int64_t captured_at = 0;  ///< caller-defined capture label (trial or frame counter)
    std::uint64_t numerology_hash = 0;
    int k_doppler = 1;
    int k_range = 1;
    int g_eff = 0;
};

struct SyncEstimate {
    double d_xi = 0.0;   ///< normalized CFO drift
    double d_tau = 0.0;  ///< TO drift, s
    double score = 0.0;  ///< correlation magnitude at the chosen lag
    int row_shift = 0;
    int col_shift = 0;
};

/// Picks the strongest row in the non-negative Doppler half. Input must be built without clutter cancellation.
Fingerprint capture_fingerprint(const DelayDopplerSpectrum& spec, const OfdmConfig& cfg, std::int64_t captured_at = 0);

/// Joint search over rows [0, rows/2) and circular lags of the first Q_B bins.
SyncEstimate cmcc_estimate(const Fingerprint& fp, const DelayDopplerSpectrum& updated, const OfdmConfig& cfg);

/// Row chosen by power match with the fingerprint, then a 1-D circular correlation on that row.
SyncEstimate scmcc_estimate(const Fingerprint& fp, const DelayDopplerSpectrum& updated, const OfdmConfig& cfg);

/// Subtracts the estimated offset drift from mapped estimates.
std::vector<RangeVelocity> apply_sync(const std::vector<RangeVelocity>& estimates, const SyncEstimate& sync,
                                      const OfdmConfig& cfg);

/// Removes the common CFO/TO phase of known offsets from a compensated stack.
void remove_offsets(CompensatedStack& stack, const OffsetState& offsets, const OfdmConfig& cfg);

/// Header "# k_c=..., hash=..., ..." followed by rows of (index, re, im).
void write_fingerprint_csv(const std::filesystem::path& file, const Fingerprint& fp);
Fingerprint read_fingerprint_csv(const std::filesystem::path& file);

}  // namespace pvn
