#include "pvn/analysis.hpp"

#include "pvn/waveform.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace pvn {
namespace {

constexpr double kConditionLimit = 1e-13;

struct SymbolTiming {
    int rows;
    int lag;
    double lag_cycles;  // G_d N_s / N_sub
    const OfdmConfig& cfg;

    SymbolTiming(const OfdmConfig& c, int g_d)
        : rows(c.g_symbols - g_d), lag(g_d), lag_cycles(static_cast<double>(g_d) * c.n_s() / c.n_sub), cfg(c) {
        if (g_d < 0 || g_d >= c.g_symbols) {
            throw ConfigError("canceller lag must lie in [0, G)");
        }
    }

    /// Phase origin of output row s in symbol units.
    [[nodiscard]] double origin(int s) const {
        return (static_cast<double>(s + lag) * cfg.n_s() + cfg.n_cp) / cfg.n_sub;
    }

    [[nodiscard]] cd progression(double xi, int s) const {
        const double a = origin(s);
        cd u = expj(-kTwoPi * xi * a);
        if (lag > 0) {
            u -= expj(-kTwoPi * xi * (a - lag_cycles));
        }
        return u;
    }

    [[nodiscard]] cd progression_derivative(double xi, int s) const {
        const double a = origin(s);
        cd du = cd(0.0, -kTwoPi * a) * expj(-kTwoPi * xi * a);
        if (lag > 0) {
            du += cd(0.0, kTwoPi * (a - lag_cycles)) * expj(-kTwoPi * xi * (a - lag_cycles));
        }
        return du;
    }
};

void require_sizes(std::span<const double> xi, std::span<const double> tau, std::span<const cd> beta) {
    if (xi.empty() || xi.size() != tau.size() || xi.size() != beta.size()) {
        throw ConfigError("per-path parameter lists must be non-empty and of equal length");
    }
}

Eigen::RowVectorXcd delay_row(const OfdmConfig& cfg, double tau) {
    Eigen::RowVectorXcd r(cfg.n_sub);
    for (int n = 0; n < cfg.n_sub; ++n) {
        r[n] = expj(-kTwoPi * n * cfg.delta_f * tau);
    }
    return r;
}

/// Columns: d/d xi, d/d (tau / T_s), d/d Re beta, d/d Im beta, each block L wide.
CMatrix full_jacobian(std::span<const double> xi, std::span<const double> tau, std::span<const cd> beta,
                      const OfdmConfig& cfg, int g_d) {
    const SymbolTiming timing(cfg, g_d);
    const auto n_paths = static_cast<Eigen::Index>(xi.size());
    const Eigen::Index n_obs = static_cast<Eigen::Index>(timing.rows) * cfg.n_sub;
    CMatrix d(n_obs, 4 * n_paths);
    for (Eigen::Index l = 0; l < n_paths; ++l) {
        const Eigen::RowVectorXcd row = delay_row(cfg, tau[l]);
        for (int s = 0; s < timing.rows; ++s) {
            const cd u = timing.progression(xi[l], s);
            const cd du = timing.progression_derivative(xi[l], s);
            for (int n = 0; n < cfg.n_sub; ++n) {
                const Eigen::Index i = static_cast<Eigen::Index>(s) * cfg.n_sub + n;
                const cd base = u * row[n];
                d(i, l) = beta[l] * du * row[n];
                d(i, n_paths + l) = beta[l] * base * cd(0.0, -kTwoPi * n / static_cast<double>(cfg.n_sub));
                d(i, 2 * n_paths + l) = base;
                d(i, 3 * n_paths + l) = cd(0.0, 1.0) * base;
            }
        }
    }
    return d;
}

}  // namespace

CVector crlb_mean(std::span<const double> xi, std::span<const double> tau, std::span<const cd> beta,
                  const OfdmConfig& cfg, int g_d) {
    require_sizes(xi, tau, beta);
    const SymbolTiming timing(cfg, g_d);
    CVector mean = CVector::Zero(static_cast<Eigen::Index>(timing.rows) * cfg.n_sub);
    for (std::size_t l = 0; l < xi.size(); ++l) {
        const Eigen::RowVectorXcd row = delay_row(cfg, tau[l]);
        for (int s = 0; s < timing.rows; ++s) {
            mean.segment(static_cast<Eigen::Index>(s) * cfg.n_sub, cfg.n_sub) +=
                (beta[l] * timing.progression(xi[l], s) * row).transpose();
        }
    }
    return mean;
}

CMatrix crlb_jacobian(std::span<const double> xi, std::span<const double> tau, std::span<const cd> beta,
                      const OfdmConfig& cfg, int g_d) {
    require_sizes(xi, tau, beta);
    const auto n_paths = static_cast<Eigen::Index>(xi.size());
    CMatrix full = full_jacobian(xi, tau, beta, cfg, g_d);
    CMatrix out = full.leftCols(2 * n_paths);
    out.middleCols(n_paths, n_paths) /= cfg.t_s();
    return out;
}

CrlbResult crlb(std::span<const double> xi, std::span<const double> tau, std::span<const cd> beta,
                const OfdmConfig& cfg, int g_d, double noise_var) {
    require_sizes(xi, tau, beta);
    if (!(noise_var > 0.0)) {
        throw ConfigError("noise power must be positive");
    }
    const auto n_paths = static_cast<Eigen::Index>(xi.size());
    const CMatrix d = full_jacobian(xi, tau, beta, cfg, g_d);
    const Eigen::MatrixXd fisher = (d.adjoint() * d).real();

    const Eigen::VectorXd scale = fisher.diagonal().cwiseSqrt().cwiseInverse();
    if (!scale.allFinite()) {
        throw EstimationError("Fisher matrix has an empty parameter direction");
    }
    const Eigen::MatrixXd normalized = scale.asDiagonal() * fisher * scale.asDiagonal();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normalized);
    if (eig.eigenvalues().minCoeff() < kConditionLimit * eig.eigenvalues().maxCoeff()) {
        throw EstimationError("singular Fisher matrix");
    }
    const Eigen::MatrixXd inv_normalized =
        eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
    const Eigen::MatrixXd inverse = scale.asDiagonal() * inv_normalized * scale.asDiagonal();

    const double effective_noise = g_d >= 1 ? 2.0 * noise_var : noise_var;
    Eigen::MatrixXd j = 0.5 * effective_noise * inverse.topLeftCorner(2 * n_paths, 2 * n_paths);
    j.middleRows(n_paths, n_paths) *= cfg.t_s();
    j.middleCols(n_paths, n_paths) *= cfg.t_s();
    j = 0.5 * (j + j.transpose()).eval();

    CrlbResult r;
    r.j_matrix = j;
    const double v_per_xi = kSpeedOfLight * cfg.delta_f / (2.0 * cfg.f_c);
    for (Eigen::Index l = 0; l < n_paths; ++l) {
        r.per_path_bounds.push_back({j(l, l) * v_per_xi * v_per_xi,
                                     j(n_paths + l, n_paths + l) * kSpeedOfLight * kSpeedOfLight});
    }
    return r;
}

CrlbResult crlb(std::span<const PathParam> paths, std::span<const cd> beta, const OfdmConfig& cfg, int g_d,
                double noise_var) {
    std::vector<double> xi;
    std::vector<double> tau;
    for (const PathParam& p : paths) {
        xi.push_back(cfg.normalize(p.doppler));
        tau.push_back(p.delay);
    }
    return crlb(xi, tau, beta, cfg, g_d, noise_var);
}

std::vector<cd> antenna_amplitudes(std::span<const PathParam> paths, const OffsetState& offsets,
                                   const CVector& precoder, const OfdmConfig& cfg, int m) {
    std::vector<cd> out;
    const cd common = expj(-kTwoPi * cfg.f_c * offsets.to);
    for (const PathParam& p : paths) {
        const cd tx = steering_vector(cfg.m_u, p.aod, cfg.d_over_lambda).transpose() * precoder;
        const cd rx = steering_vector(cfg.m_r, p.doa, cfg.d_over_lambda)[m];
        out.push_back(p.gain * common * tx * rx);
    }
    return out;
}

}  // namespace pvn
