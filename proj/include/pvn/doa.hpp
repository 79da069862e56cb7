#pragma once

#include "pvn/rv_estimator.hpp"

#include <filesystem>
#include <span>
#include <vector>

namespace pvn {

inline constexpr double kDefaultAngleStep = 0.1 * kPi / 180.0;

struct DoaEstimate {
    std::vector<double> angles;           ///< strongest first
    std::vector<double> grid;             ///< scanned angles
    std::vector<double> pseudo_spectrum;  ///< MUSIC value at each grid angle
};

/// MUSIC over spatial snapshots taken from every (symbol, subcarrier) cell. A half-wavelength array cannot
/// tell phi from pi - phi, so the scan covers [0, pi/2].
DoaEstimate estimate_doa(std::span<const CMatrix> frames, int n_sources, double grid_step = kDefaultAngleStep,
                         double d_over_lambda = 0.5);

struct Association {
    int peak = 0;
    int doa = 0;
    double score = 0.0;
};

struct AssociationResult {
    std::vector<Association> pairs;  ///< one entry per peak, in peak order
};

/// Score of every DOA at every peak: |2-D DFT of Re(spatially filtered stack)| at the peak bin.
RMatrix association_scores_full(std::span<const CMatrix> frames, const DoaEstimate& doas, const PeakSet& peaks,
                                const DelayDopplerSpectrum& layout, double d_over_lambda = 0.5);

AssociationResult associate_full(std::span<const CMatrix> frames, const DoaEstimate& doas, const PeakSet& peaks,
                                 const DelayDopplerSpectrum& layout, double d_over_lambda = 0.5);

/// Delay-only variant on a single symbol matrix (M_R x N_sub).
AssociationResult associate_delay_domain(const CMatrix& frame, const DoaEstimate& doas, const PeakSet& peaks,
                                         const DelayDopplerSpectrum& layout, double d_over_lambda = 0.5);

/// Doppler-only variant on one subcarrier across symbols (M_R x G_eff).
AssociationResult associate_doppler_domain(const CMatrix& column_stack, const DoaEstimate& doas,
                                           const PeakSet& peaks, const DelayDopplerSpectrum& layout,
                                           double d_over_lambda = 0.5);

/// Symbol with the largest Frobenius power.
int select_symbol(std::span<const CMatrix> frames);
/// Subcarrier with the largest power summed over antennas and symbols.
int select_subcarrier(std::span<const CMatrix> frames);
/// Columns are subcarrier n of every symbol.
CMatrix column_stack(std::span<const CMatrix> frames, int n);

/// Rows of (angle_rad, value).
void write_pseudo_spectrum_csv(const std::filesystem::path& file, const DoaEstimate& doas);

}  // namespace pvn
