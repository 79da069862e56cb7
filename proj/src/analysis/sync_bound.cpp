#include "pvn/analysis.hpp"

#include "pvn/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pvn {
namespace {

constexpr double kPruneSigmas = 10.0;

/// out[d] = sum_k a[k] b[(d-k) mod Q]
std::vector<cd> circular_convolve(std::vector<cd> a, std::vector<cd> b) {
    const double n = static_cast<double>(a.size());
    fft::transform(a, fft::Direction::forward);
    fft::transform(b, fft::Direction::forward);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] *= b[i] / n;
    }
    fft::transform(a, fft::Direction::backward);
    return a;
}

int wrap(int i, int q) { return ((i % q) + q) % q; }

int signed_lag(int q, int size) { return q <= size / 2 ? q : q - size; }

}  // namespace

std::vector<cd> spectrum_row_noise(const DelayDopplerSpectrum& layout, double noise_var) {
    const Eigen::VectorXd wr = window_taper(layout.window, layout.g_eff);
    const Eigen::VectorXd wc = window_taper(layout.window, layout.n_sub);
    const double row_gain = 0.5 * noise_var * wr.squaredNorm();
    const auto q_b = static_cast<int>(layout.cols() / 2);
    std::vector<cd> rho(static_cast<std::size_t>(q_b));
    for (int d = 0; d < q_b; ++d) {
        const int lag = signed_lag(d, q_b);
        cd acc{0.0, 0.0};
        for (Eigen::Index t = 0; t < wc.size(); ++t) {
            acc += wc[t] * wc[t] * expj(-kTwoPi * static_cast<double>(t * lag) / static_cast<double>(layout.cols()));
        }
        rho[static_cast<std::size_t>(d)] = row_gain * acc;
    }
    return rho;
}

CorrelationStats correlation_stats(std::span<const cd> s1, std::span<const cd> s2, std::span<const cd> rho,
                                   std::span<const int> lags) {
    if (s1.size() != s2.size() || s1.size() != rho.size() || s1.empty()) {
        throw ConfigError("fingerprint rows and noise covariance must share a length");
    }
    const auto q = static_cast<int>(s1.size());
    CorrelationStats st;
    st.mean = fft::circular_xcorr(s2, s1);
    const std::vector<cd> r1 = fft::circular_xcorr(s1, s1);
    const std::vector<cd> r2 = fft::circular_xcorr(s2, s2);
    std::vector<cd> r_sum(r1.size());
    for (std::size_t i = 0; i < r1.size(); ++i) {
        r_sum[i] = r1[i] + r2[i];
    }
    const std::vector<cd> rho_v(rho.begin(), rho.end());
    const std::vector<cd> signal_part = circular_convolve(rho_v, r_sum);
    const std::vector<cd> noise_part = circular_convolve(rho_v, rho_v);

    const auto n = static_cast<Eigen::Index>(lags.size());
    st.cov.resize(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) {
            const auto d = static_cast<std::size_t>(wrap(lags[a] - lags[b], q));
            st.cov(a, b) = signal_part[d] + static_cast<double>(q) * noise_part[d];
        }
    }
    return st;
}

SyncMseBound sync_mse_bound(std::span<const cd> s1, std::span<const cd> s2, std::span<const cd> rho, double t_r,
                            double true_delay, int window_radius, const MvnOptions& options) {
    if (window_radius < 1) {
        throw ConfigError("window radius must be at least 1");
    }
    const auto q_size = static_cast<int>(s1.size());
    const std::vector<cd> mean_all = fft::circular_xcorr(s2, s1);
    const auto peak = static_cast<int>(
        std::max_element(mean_all.begin(), mean_all.end(),
                         [](const cd& a, const cd& b) { return std::abs(a) < std::abs(b); }) -
        mean_all.begin());

    std::vector<int> window;
    for (int k = -window_radius; k <= window_radius; ++k) {
        window.push_back(wrap(peak + k, q_size));
    }
    const CorrelationStats st = correlation_stats(s1, s2, rho, window);

    // In-phase projection of each correlation value onto its mean direction.
    const auto w = static_cast<Eigen::Index>(window.size());
    Eigen::VectorXd mu(w);
    Eigen::VectorXcd dir(w);
    for (Eigen::Index a = 0; a < w; ++a) {
        const cd m = st.mean[static_cast<std::size_t>(window[a])];
        mu[a] = std::abs(m);
        dir[a] = std::abs(m) > 0.0 ? m / std::abs(m) : cd(1.0, 0.0);
    }
    Eigen::MatrixXd sigma(w, w);
    for (Eigen::Index a = 0; a < w; ++a) {
        for (Eigen::Index b = 0; b < w; ++b) {
            sigma(a, b) = 0.5 * (std::conj(dir[a]) * dir[b] * st.cov(a, b)).real();
        }
    }

    SyncMseBound out;
    const bool degenerate = !(sigma.diagonal().maxCoeff() > 0.0);
    for (Eigen::Index a = 0; a < w; ++a) {
        out.lags.push_back(signed_lag(window[a], q_size));
        if (degenerate) {
            out.chi.push_back(window[a] == peak ? 1.0 : 0.0);
            continue;
        }
        Eigen::VectorXd gap(w - 1);
        Eigen::MatrixXd cov(w - 1, w - 1);
        std::vector<Eigen::Index> others;
        for (Eigen::Index b = 0; b < w; ++b) {
            if (b != a) {
                others.push_back(b);
            }
        }
        bool hopeless = false;
        for (Eigen::Index i = 0; i < w - 1; ++i) {
            const Eigen::Index bi = others[static_cast<std::size_t>(i)];
            gap[i] = mu[a] - mu[bi];
            for (Eigen::Index j = 0; j < w - 1; ++j) {
                const Eigen::Index bj = others[static_cast<std::size_t>(j)];
                cov(i, j) = sigma(a, a) - sigma(a, bj) - sigma(bi, a) + sigma(bi, bj);
            }
            const double sd = std::sqrt(std::max(cov(i, i), 0.0));
            hopeless = hopeless || gap[i] < -kPruneSigmas * sd;
        }
        out.chi.push_back(hopeless ? 0.0 : mvn_orthant(gap, cov, options));
    }
    const double total = std::accumulate(out.chi.begin(), out.chi.end(), 0.0);
    if (total > 1.0) {
        for (double& c : out.chi) {
            c /= total;
        }
    }
    for (std::size_t i = 0; i < out.chi.size(); ++i) {
        const double err = (out.lags[i] * t_r - true_delay) * kSpeedOfLight;
        out.mse += out.chi[i] * err * err;
    }
    return out;
}

}  // namespace pvn
