#pragma once

#include "pvn/ofdm.hpp"

#include <filesystem>
#include <vector>

namespace pvn {

enum class Window { rectangular, hamming };

Window parse_window(const std::string& name);
std::string_view window_name(Window w);
/// Taper of the given length; all ones for rectangular.
Eigen::VectorXd window_taper(Window w, Eigen::Index length);

/// Zero-padded delay-Doppler grid. Rows index Doppler, columns index delay.
struct DelayDopplerSpectrum {
    CMatrix grid;
    int k_doppler = 1;
    int k_range = 1;
    int g_eff = 0;
    int n_sub = 0;
    double f_r = 0.0;  ///< Doppler bin width, Hz
    double t_r = 0.0;  ///< delay bin width, s
    Window window = Window::rectangular;

    [[nodiscard]] Eigen::Index rows() const { return grid.rows(); }
    [[nodiscard]] Eigen::Index cols() const { return grid.cols(); }
};

/// 2-D DFT of window * Re(gamma), zero padded to (K G_eff) x (K_r N_sub).
DelayDopplerSpectrum spectrum(const CMatrix& gamma, int k_doppler, int k_range, Window window,
                              const OfdmConfig& cfg);

struct Peak {
    int kappa = 0;    ///< Doppler bin, 0-based
    int epsilon = 0;  ///< delay bin, 0-based
    double magnitude = 0.0;
};

/// Peaks sorted by decreasing magnitude.
struct PeakSet {
    std::vector<Peak> peaks;
};

/// The n strongest quarter-plane local maxima above the median floor, one mainlobe apart.
PeakSet find_peaks(const DelayDopplerSpectrum& spec, int n_expected);
/// Every separated quarter-plane local maximum at least threshold above the median floor.
PeakSet find_peaks_blind(const DelayDopplerSpectrum& spec, Decibel threshold = Decibel{12.0});

struct RangeVelocity {
    double range = 0.0;     ///< bistatic path length, m
    double velocity = 0.0;  ///< bistatic range rate, m/s
};

std::vector<RangeVelocity> map_to_physical(const PeakSet& peaks, const DelayDopplerSpectrum& spec,
                                           const OfdmConfig& cfg);

/// Rows of (row, col, magnitude).
void write_spectrum_csv(const std::filesystem::path& file, const DelayDopplerSpectrum& spec);

}  // namespace pvn
