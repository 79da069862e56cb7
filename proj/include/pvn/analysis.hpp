#pragma once

#include "pvn/ofdm.hpp"
#include "pvn/preprocess.hpp"
#include "pvn/rv_estimator.hpp"
#include "pvn/scenario.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace pvn {

// ---- Cramér–Rao bound of paired (normalized Doppler, delay) estimates --------------------------------

struct PathBound {
    double var_velocity = 0.0;  ///< (m/s)^2
    double var_range = 0.0;     ///< m^2
};

struct CrlbResult {
    /// Ordered [xi_1..xi_L, tau_1..tau_L]; tau in seconds.
    Eigen::MatrixXd j_matrix;
    std::vector<PathBound> per_path_bounds;
};

/// Noise-free antenna-row model sum_l beta_l u_l(s) exp(-j 2 pi n df tau_l) with u_l the per-symbol phase
/// progression, passed through a lag-g_d canceller when g_d >= 1. Entries are indexed [s * N_sub + n].
CVector crlb_mean(std::span<const double> xi, std::span<const double> tau, std::span<const cd> beta,
                  const OfdmConfig& cfg, int g_d);

/// Columns d(mean)/d(xi_l) then d(mean)/d(tau_l), tau in seconds.
CMatrix crlb_jacobian(std::span<const double> xi, std::span<const double> tau, std::span<const cd> beta,
                      const OfdmConfig& cfg, int g_d);

/// Bound with the complex amplitudes treated as unknown nuisance parameters. noise_var is the per-element
/// noise power before cancellation; the canceller doubles it when g_d >= 1.
CrlbResult crlb(std::span<const double> xi, std::span<const double> tau, std::span<const cd> beta,
                const OfdmConfig& cfg, int g_d, double noise_var);

/// Convenience overload: xi from each path's Doppler, tau from its delay.
CrlbResult crlb(std::span<const PathParam> paths, std::span<const cd> beta, const OfdmConfig& cfg, int g_d,
                double noise_var);

/// Per-path amplitude seen at receive antenna m, excluding the per-symbol phase.
std::vector<cd> antenna_amplitudes(std::span<const PathParam> paths, const OffsetState& offsets,
                                   const CVector& precoder, const OfdmConfig& cfg, int m);

// ---- Gaussian orthant probabilities ---------------------------------------------------------------------

struct MvnOptions {
    int points = 2048;
    std::uint64_t seed = 0x5EEDULL;
};

/// P(Y > 0 componentwise) for Y ~ N(mean, cov), by separation of variables with randomized lattice QMC.
double mvn_orthant(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, const MvnOptions& options = {});

// ---- Synchronization MSE bound --------------------------------------------------------------------------

struct SyncMseBound {
    std::vector<int> lags;    ///< signed delay-bin lags in the evaluated window
    std::vector<double> chi;  ///< probability that each lag wins
    double mse = 0.0;         ///< m^2
};

/// Second-order statistics of the fingerprint correlation for noisy rows a = s1 + z1, b = s2 + z2 where
/// the noise in both rows has lag covariance rho.
struct CorrelationStats {
    std::vector<cd> mean;     ///< E c[q]
    Eigen::MatrixXcd cov;     ///< E (c[q]-m[q]) conj(c[q']-m[q'])
};

/// c[q] = sum_i b[(q+i) mod Q] conj(a[i]). Only the lags listed get a covariance row.
CorrelationStats correlation_stats(std::span<const cd> s1, std::span<const cd> s2, std::span<const cd> rho,
                                   std::span<const int> lags);

/// Lag covariance of one spectrum row for white noise of the given power in the antenna stack.
std::vector<cd> spectrum_row_noise(const DelayDopplerSpectrum& layout, double noise_var);

/// chi and MSE from noise-free fingerprint rows, the row noise covariance and the true delay drift.
SyncMseBound sync_mse_bound(std::span<const cd> s1, std::span<const cd> s2, std::span<const cd> rho, double t_r,
                            double true_delay, int window_radius, const MvnOptions& options = {});

// ---- Clutter suppression --------------------------------------------------------------------------------

/// Returned where the ratio would be infinite.
inline constexpr double kSaturatedRatio = 1e15;

/// Noise-free split of one antenna stack into clutter and moving-target parts, before and after cancellation.
struct SuppressionInputs {
    std::span<const CMatrix> clutter_before;
    std::span<const CMatrix> target_before;
    std::span<const CMatrix> clutter_after;
    std::span<const CMatrix> target_after;
    int g_d = 0;  ///< after-stack entry s corresponds to before-stack symbol s + g_d
};

/// Per-frame powers of the same four stacks.
struct SuppressionPowers {
    std::span<const double> clutter_before;
    std::span<const double> target_before;
    std::span<const double> clutter_after;
    std::span<const double> target_after;
    int g_d = 0;
};

/// rho_b / rho_a per output symbol, each rho being clutter power over target power.
std::vector<double> suppression_ratio(const SuppressionInputs& in);
std::vector<double> suppression_ratio(const SuppressionPowers& in);

// ---- Curve export ---------------------------------------------------------------------------------------

/// Rows of (snr_db, value).
void write_curve_csv(const std::filesystem::path& file, std::span<const double> snr_db, std::span<const double> value);

}  // namespace pvn
