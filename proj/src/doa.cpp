#include "pvn/doa.hpp"

#include "pvn/simd/kernels.hpp"
#include "pvn/waveform.hpp"

#include <Eigen/Eigenvalues>
#include <fmt/os.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pvn {
namespace {

constexpr double kRankTolerance = 1e-10;

/// Matched spatial filter: s = a(phi)^H Y, one output per column of Y.
Eigen::RowVectorXcd spatial_filter(const CMatrix& y, const CVector& steer) { return steer.adjoint() * y; }

/// sum_i taper[i] Re(s[i]) exp(-j 2 pi bin i / length)
cd dft_bin(const Eigen::RowVectorXcd& s, const Eigen::VectorXd& taper, int bin, Eigen::Index length) {
    cd acc{0.0, 0.0};
    const double step = -kTwoPi * bin / static_cast<double>(length);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        acc += taper[i] * s[i].real() * expj(step * static_cast<double>(i));
    }
    return acc;
}

AssociationResult pick_best(const RMatrix& scores) {
    AssociationResult r;
    for (Eigen::Index l = 0; l < scores.rows(); ++l) {
        Eigen::Index best = 0;
        const double s = scores.row(l).maxCoeff(&best);
        r.pairs.push_back({static_cast<int>(l), static_cast<int>(best), s});
    }
    return r;
}

void require_inputs(const DoaEstimate& doas, const PeakSet& peaks) {
    if (doas.angles.empty() || peaks.peaks.empty()) {
        throw ConfigError("association needs at least one DOA and one peak");
    }
}

std::vector<CVector> steering_set(const DoaEstimate& doas, int m_r, double d_over_lambda) {
    std::vector<CVector> out;
    for (double a : doas.angles) {
        out.push_back(steering_vector(m_r, a, d_over_lambda));
    }
    return out;
}

}  // namespace

DoaEstimate estimate_doa(std::span<const CMatrix> frames, int n_sources, double grid_step, double d_over_lambda) {
    if (frames.empty()) {
        throw ConfigError("no snapshots");
    }
    const Eigen::Index m_r = frames.front().rows();
    if (n_sources < 1 || n_sources >= m_r) {
        throw ConfigError("source count must lie in [1, M_R)");
    }
    if (!(grid_step > 0.0)) {
        throw ConfigError("angle step must be positive");
    }
    const Eigen::Index cols = frames.front().cols();
    CMatrix snapshots(m_r, cols * static_cast<Eigen::Index>(frames.size()));
    for (std::size_t g = 0; g < frames.size(); ++g) {
        snapshots.middleCols(static_cast<Eigen::Index>(g) * cols, cols) = frames[g];
    }
    Eigen::MatrixXcd cov = snapshots * snapshots.adjoint();
    cov /= static_cast<double>(snapshots.cols());

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(cov);
    const Eigen::VectorXd& values = eig.eigenvalues();
    const double top = values[m_r - 1];
    const auto rank = std::count_if(values.begin(), values.end(), [&](double v) { return v > kRankTolerance * top; });
    if (!(top > 0.0) || rank < n_sources) {
        throw EstimationError("spatial covariance rank below the source count");
    }
    const Eigen::MatrixXcd signal = eig.eigenvectors().rightCols(n_sources);

    DoaEstimate est;
    const int steps = static_cast<int>(std::floor(kPi / 2.0 / grid_step + 1e-9));
    for (int i = 0; i <= steps; ++i) {
        const double angle = i * grid_step;
        const CVector a = steering_vector(static_cast<int>(m_r), angle, d_over_lambda);
        const double projected = (signal.adjoint() * a).squaredNorm();
        const double residual = std::max(static_cast<double>(m_r) - projected, 1e-12 * static_cast<double>(m_r));
        est.grid.push_back(angle);
        est.pseudo_spectrum.push_back(1.0 / residual);
    }

    const auto& p = est.pseudo_spectrum;
    std::vector<std::size_t> maxima;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const bool left = i == 0 || p[i] >= p[i - 1];
        const bool right = i + 1 == p.size() || p[i] > p[i + 1];
        if (left && right) {
            maxima.push_back(i);
        }
    }
    std::stable_sort(maxima.begin(), maxima.end(), [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
    if (maxima.size() < static_cast<std::size_t>(n_sources)) {
        throw EstimationError("fewer pseudo-spectrum maxima than sources");
    }
    for (int s = 0; s < n_sources; ++s) {
        est.angles.push_back(est.grid[maxima[s]]);
    }
    return est;
}

RMatrix association_scores_full(std::span<const CMatrix> frames, const DoaEstimate& doas, const PeakSet& peaks,
                                const DelayDopplerSpectrum& layout, double d_over_lambda) {
    require_inputs(doas, peaks);
    const auto g_count = static_cast<Eigen::Index>(frames.size());
    const Eigen::Index m_r = frames.front().rows();
    const Eigen::Index n_sub = frames.front().cols();
    const Eigen::VectorXd wr = window_taper(layout.window, g_count);
    const Eigen::VectorXd wc = window_taper(layout.window, n_sub);
    const auto steer = steering_set(doas, static_cast<int>(m_r), d_over_lambda);

    RMatrix scores(static_cast<Eigen::Index>(peaks.peaks.size()), static_cast<Eigen::Index>(steer.size()));
    for (std::size_t i = 0; i < steer.size(); ++i) {
        // Real part of the filtered stack, tapered: G x N_sub.
        RMatrix filtered(g_count, n_sub);
        for (Eigen::Index g = 0; g < g_count; ++g) {
            filtered.row(g) = spatial_filter(frames[g], steer[i]).real().cwiseProduct(wc.transpose());
        }
        filtered = wr.asDiagonal() * filtered;
        const CMatrix tapered = filtered.cast<cd>();
        for (std::size_t l = 0; l < peaks.peaks.size(); ++l) {
            const Peak& pk = peaks.peaks[l];
            Eigen::RowVectorXcd row_phase(g_count);
            for (Eigen::Index g = 0; g < g_count; ++g) {
                row_phase[g] = expj(-kTwoPi * pk.kappa * static_cast<double>(g) / static_cast<double>(layout.rows()));
            }
            Eigen::VectorXcd col_phase(n_sub);
            for (Eigen::Index n = 0; n < n_sub; ++n) {
                col_phase[n] = expj(-kTwoPi * pk.epsilon * static_cast<double>(n) / static_cast<double>(layout.cols()));
            }
            const cd value = row_phase * (tapered * col_phase);
            scores(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(i)) = std::abs(value);
        }
    }
    return scores;
}

AssociationResult associate_full(std::span<const CMatrix> frames, const DoaEstimate& doas, const PeakSet& peaks,
                                 const DelayDopplerSpectrum& layout, double d_over_lambda) {
    return pick_best(association_scores_full(frames, doas, peaks, layout, d_over_lambda));
}

AssociationResult associate_delay_domain(const CMatrix& frame, const DoaEstimate& doas, const PeakSet& peaks,
                                         const DelayDopplerSpectrum& layout, double d_over_lambda) {
    require_inputs(doas, peaks);
    const auto steer = steering_set(doas, static_cast<int>(frame.rows()), d_over_lambda);
    const Eigen::VectorXd taper = window_taper(layout.window, frame.cols());
    RMatrix scores(static_cast<Eigen::Index>(peaks.peaks.size()), static_cast<Eigen::Index>(steer.size()));
    for (std::size_t i = 0; i < steer.size(); ++i) {
        const Eigen::RowVectorXcd s = spatial_filter(frame, steer[i]);
        for (std::size_t l = 0; l < peaks.peaks.size(); ++l) {
            scores(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(i)) =
                std::abs(dft_bin(s, taper, peaks.peaks[l].epsilon, layout.cols()));
        }
    }
    return pick_best(scores);
}

AssociationResult associate_doppler_domain(const CMatrix& column_stack, const DoaEstimate& doas,
                                           const PeakSet& peaks, const DelayDopplerSpectrum& layout,
                                           double d_over_lambda) {
    require_inputs(doas, peaks);
    const auto steer = steering_set(doas, static_cast<int>(column_stack.rows()), d_over_lambda);
    const Eigen::VectorXd taper = window_taper(layout.window, column_stack.cols());
    RMatrix scores(static_cast<Eigen::Index>(peaks.peaks.size()), static_cast<Eigen::Index>(steer.size()));
    for (std::size_t i = 0; i < steer.size(); ++i) {
        const Eigen::RowVectorXcd s = spatial_filter(column_stack, steer[i]);
        for (std::size_t l = 0; l < peaks.peaks.size(); ++l) {
            scores(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(i)) =
                std::abs(dft_bin(s, taper, peaks.peaks[l].kappa, layout.rows()));
        }
    }
    return pick_best(scores);
}

int select_symbol(std::span<const CMatrix> frames) {
    if (frames.empty()) {
        throw ConfigError("empty symbol stack");
    }
    std::size_t best = 0;
    double best_power = -1.0;
    for (std::size_t g = 0; g < frames.size(); ++g) {
        const double p = simd::energy({frames[g].data(), static_cast<std::size_t>(frames[g].size())});
        if (p > best_power) {
            best_power = p;
            best = g;
        }
    }
    return static_cast<int>(best);
}

int select_subcarrier(std::span<const CMatrix> frames) {
    if (frames.empty()) {
        throw ConfigError("empty symbol stack");
    }
    Eigen::RowVectorXd power = Eigen::RowVectorXd::Zero(frames.front().cols());
    for (const CMatrix& f : frames) {
        power += f.cwiseAbs2().colwise().sum();
    }
    Eigen::Index best = 0;
    power.maxCoeff(&best);
    return static_cast<int>(best);
}

CMatrix column_stack(std::span<const CMatrix> frames, int n) {
    if (frames.empty() || n < 0 || n >= frames.front().cols()) {
        throw ConfigError("subcarrier index out of range");
    }
    CMatrix out(frames.front().rows(), static_cast<Eigen::Index>(frames.size()));
    for (std::size_t g = 0; g < frames.size(); ++g) {
        out.col(static_cast<Eigen::Index>(g)) = frames[g].col(n);
    }
    return out;
}

void write_pseudo_spectrum_csv(const std::filesystem::path& file, const DoaEstimate& doas) {
    auto out = fmt::output_file(file.string());
    out.print("angle_rad,value\n");
    for (std::size_t i = 0; i < doas.grid.size(); ++i) {
        out.print("{:.17g},{:.17g}\n", doas.grid[i], doas.pseudo_spectrum[i]);
    }
}

}  // namespace pvn
