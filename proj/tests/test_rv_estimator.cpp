#include "pvn/preprocess.hpp"
#include "pvn/rv_estimator.hpp"
#include "pvn/waveform.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>

using namespace pvn;

namespace {

/// alpha * exp(-j2pi (row_freq * s + col_freq * n)) with frequencies in cycles per sample.
CMatrix exponential(Eigen::Index rows, Eigen::Index cols, cd alpha, double row_freq, double col_freq) {
    CMatrix m(rows, cols);
    for (Eigen::Index s = 0; s < rows; ++s) {
        for (Eigen::Index n = 0; n < cols; ++n) {
            m(s, n) = alpha * expj(-kTwoPi * (row_freq * s + col_freq * n));
        }
    }
    return m;
}

/// |DTFT| of real(gamma) at continuous frequencies in cycles per sample.
double dtft_magnitude(const RMatrix& x, double fr, double fc) {
    cd acc{0.0, 0.0};
    for (Eigen::Index s = 0; s < x.rows(); ++s) {
        for (Eigen::Index n = 0; n < x.cols(); ++n) {
            acc += x(s, n) * expj(-kTwoPi * (fr * s + fc * n));
        }
    }
    return std::abs(acc);
}

CMatrix pipeline_stack(const OfdmConfig& cfg, const std::vector<PathParam>& paths) {
    const ChannelBasis basis(cfg, paths, {}, default_precoder(cfg.m_u));
    CompensatedStack c;
    for (int g = 0; g < cfg.g_symbols; ++g) {
        c.hat_y.push_back(basis.frame(g));
    }
    return stack_antenna_row(mti_cancel(c, 1).breve_y, 0);
}

}  // namespace

TEST_CASE("zero stack gives a zero grid") {
    const OfdmConfig cfg = test::small_ofdm();
    const auto s = spectrum(CMatrix::Zero(8, cfg.n_sub), 3, 2, Window::hamming, cfg);
    CHECK(s.rows() == 24);
    CHECK(s.cols() == 2 * cfg.n_sub);
    CHECK(s.grid.norm() == 0.0);
}

TEST_CASE("on-bin path gives a conjugate pair of impulses") {
    const OfdmConfig cfg = test::small_ofdm(16, 1, 32, 4);
    const cd alpha{0.6, -0.8};
    const CMatrix gamma = exponential(16, 32, alpha, 3.0 / 16.0, 5.0 / 32.0);
    const auto s = spectrum(gamma, 1, 1, Window::rectangular, cfg);
    const CMatrix oracle = test::naive_dft2(gamma.real(), 16, 32);
    CHECK(test::relative_error(s.grid, oracle) < 1e-12);

    const double expected = 16.0 * 32.0 * std::abs(alpha) / 2.0;
    CHECK(std::abs(s.grid(3, 5)) == doctest::Approx(expected));
    CHECK(std::abs(s.grid(13, 27)) == doctest::Approx(expected));
    int nonzero = 0;
    for (Eigen::Index i = 0; i < s.grid.size(); ++i) {
        nonzero += std::abs(s.grid.data()[i]) > 1e-9 ? 1 : 0;
    }
    CHECK(nonzero == 2);

    const PeakSet p = find_peaks(s, 1);
    CHECK(p.peaks[0].kappa == 3);
    CHECK(p.peaks[0].epsilon == 5);
}

TEST_CASE("off-bin peak lies within one bin of the dense DTFT maximum") {
    const OfdmConfig cfg = test::small_ofdm(16, 1, 32, 4);
    const int k = 5;
    const int k_r = 25;
    const double fr = 2.37 / 16.0;
    const double fc = 6.61 / 32.0;
    const CMatrix gamma = exponential(16, 32, {1.0, 0.0}, -fr, -fc);
    const auto s = spectrum(gamma, k, k_r, Window::rectangular, cfg);
    const PeakSet p = find_peaks(s, 1);

    const RMatrix re = gamma.real();
    double best = -1.0;
    double best_r = 0.0;
    double best_c = 0.0;
    for (double r = fr - 0.03; r <= fr + 0.03; r += 0.0005) {
        for (double c = fc - 0.015; c <= fc + 0.015; c += 0.0002) {
            const double v = dtft_magnitude(re, r, c);
            if (v > best) {
                best = v;
                best_r = r;
                best_c = c;
            }
        }
    }
    CHECK(std::abs(p.peaks[0].kappa - best_r * 16 * k) <= 1.0);
    CHECK(std::abs(p.peaks[0].epsilon - best_c * 32 * k_r) <= 1.0);
    CHECK(std::abs(p.peaks[0].kappa - 2.37 * k) <= 1.0);
    CHECK(std::abs(p.peaks[0].epsilon - 6.61 * k_r) <= 1.0);
}

TEST_CASE("separated paths are found in magnitude order") {
    const OfdmConfig cfg = test::small_ofdm(32, 1, 64, 8);
    const CMatrix gamma = exponential(32, 64, {1.0, 0.0}, -4.0 / 32, -10.0 / 64) +
                          exponential(32, 64, {2.5, 0.0}, -11.0 / 32, -3.0 / 64) +
                          exponential(32, 64, {0.4, 0.0}, -7.0 / 32, -20.0 / 64);
    const auto s = spectrum(gamma, 2, 2, Window::hamming, cfg);
    const PeakSet p = find_peaks(s, 3);

    // Exhaustive oracle: sort every quarter-plane cell and greedily skip cells near an accepted one.
    std::vector<Peak> cells;
    for (int r = 0; r <= s.rows() / 2; ++r) {
        for (int c = 0; c <= s.cols() / 2; ++c) {
            cells.push_back({r, c, std::abs(s.grid(r, c))});
        }
    }
    std::sort(cells.begin(), cells.end(), [](const Peak& a, const Peak& b) { return a.magnitude > b.magnitude; });
    std::vector<Peak> oracle;
    for (const Peak& c : cells) {
        const bool near = std::any_of(oracle.begin(), oracle.end(), [&](const Peak& o) {
            return std::abs(o.kappa - c.kappa) <= 4 && std::abs(o.epsilon - c.epsilon) <= 4;
        });
        if (!near) {
            oracle.push_back(c);
        }
        if (oracle.size() == 3) {
            break;
        }
    }
    REQUIRE(p.peaks.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(p.peaks[i].kappa == oracle[i].kappa);
        CHECK(p.peaks[i].epsilon == oracle[i].epsilon);
    }
    CHECK(p.peaks[0].kappa == 22);
    CHECK(p.peaks[0].epsilon == 6);
    CHECK(p.peaks[2].kappa == 14);
    CHECK(p.peaks[2].epsilon == 40);
}

TEST_CASE("paths within one mainlobe merge into a single peak") {
    const OfdmConfig cfg = test::small_ofdm(32, 1, 64, 8);
    const CMatrix gamma = exponential(32, 64, {1.0, 0.0}, -6.0 / 32, -12.0 / 64) +
                          exponential(32, 64, {0.9, 0.0}, -6.3 / 32, -12.3 / 64);
    const auto s = spectrum(gamma, 4, 4, Window::hamming, cfg);
    const PeakSet blind = find_peaks_blind(s);
    const auto near = std::count_if(blind.peaks.begin(), blind.peaks.end(), [](const Peak& p) {
        return std::abs(p.kappa - 24.6) <= 8.0 && std::abs(p.epsilon - 48.6) <= 8.0;
    });
    CHECK(near == 1);

    // Dense oracle: the DTFT has a single maximum between the two true frequencies.
    const RMatrix re = gamma.real();
    double prev = 0.0;
    int turns = 0;
    bool rising = true;
    for (double t = -0.5; t <= 1.5; t += 0.01) {
        const double v = dtft_magnitude(re, (6.0 + 0.3 * t) / 32, (12.0 + 0.3 * t) / 64);
        if (rising && v < prev) {
            ++turns;
            rising = false;
        } else if (!rising && v > prev) {
            rising = true;
        }
        prev = v;
    }
    CHECK(turns == 1);
}

TEST_CASE("too few peaks is an estimation error") {
    const OfdmConfig cfg = test::small_ofdm(8, 1, 16, 2);
    const auto s = spectrum(CMatrix::Zero(8, 16), 1, 1, Window::rectangular, cfg);
    CHECK_THROWS_AS(find_peaks(s, 1), EstimationError);
    CHECK_THROWS_AS(find_peaks(s, 0), ConfigError);
}

TEST_CASE("resolution units") {
    const OfdmConfig cfg;
    CHECK(range_unit(cfg) == doctest::Approx(23.4375).epsilon(1e-12));
    CHECK(velocity_unit(cfg, 256) == doctest::Approx(3.0e8 / (28e9 * 11.25e-6 * 256)).epsilon(1e-12));
    CHECK(velocity_unit(cfg, 256) == doctest::Approx(3.72).epsilon(1e-3));

    DelayDopplerSpectrum s;
    s.k_doppler = 5;
    s.k_range = 25;
    s.g_eff = 255;
    const auto origin = map_to_physical({{Peak{0, 0, 1.0}}}, s, cfg);
    CHECK(origin[0].range == 0.0);
    CHECK(origin[0].velocity == 0.0);
    const auto one = map_to_physical({{Peak{5, 25, 1.0}}}, s, cfg);
    CHECK(one[0].range == doctest::Approx(range_unit(cfg)));
    CHECK(one[0].velocity == doctest::Approx(velocity_unit(cfg, 255)));
}

TEST_CASE("Parseval without padding") {
    const OfdmConfig cfg = test::small_ofdm(12, 1, 32, 4);
    Rng rng = make_rng(8);
    const CMatrix gamma = test::random_matrix(rng, 12, 32);
    const auto s = spectrum(gamma, 1, 1, Window::rectangular, cfg);
    CHECK(s.grid.squaredNorm() == doctest::Approx(12.0 * 32.0 * gamma.real().squaredNorm()).epsilon(1e-6));
}

TEST_CASE("doubling range padding halves the delay bin") {
    const OfdmConfig cfg = test::small_ofdm(8, 1, 16, 2);
    const CMatrix gamma = CMatrix::Ones(8, 16);
    const auto a = spectrum(gamma, 1, 3, Window::rectangular, cfg);
    const auto b = spectrum(gamma, 1, 6, Window::rectangular, cfg);
    CHECK(b.t_r == a.t_r / 2.0);
    CHECK(a.f_r == doctest::Approx(1.0 / (8 * cfg.t_sym())));
}

TEST_CASE("spectrum of a real input is centrosymmetric") {
    const OfdmConfig cfg = test::small_ofdm(10, 1, 16, 2);
    Rng rng = make_rng(9);
    const CMatrix gamma = test::random_matrix(rng, 10, 16);
    for (Window w : {Window::rectangular, Window::hamming}) {
        const auto s = spectrum(gamma, 3, 5, w, cfg);
        const Eigen::Index r = s.rows();
        const Eigen::Index c = s.cols();
        double worst = 0.0;
        for (Eigen::Index k = 0; k < r; ++k) {
            for (Eigen::Index n = 0; n < c; ++n) {
                const double a = std::abs(s.grid(k, n));
                const double b = std::abs(s.grid((r - k) % r, (c - n) % c));
                worst = std::max(worst, std::abs(a - b) / std::max(a, 1e-300));
            }
        }
        CHECK(worst < 1e-9);
    }
}

TEST_CASE("single path maps within half a bin") {
    const OfdmConfig cfg = test::small_ofdm(32, 2, 64, 8);
    for (auto [v, r] : {std::pair{12.3, 97.0}, {30.8, 310.0}, {45.1, 180.5}}) {
        CAPTURE(v);
        const double doppler = v * cfg.f_c / kSpeedOfLight;
        const std::vector<PathParam> paths{test::make_path({1e-3, 0.0}, 0.2, r / kSpeedOfLight, doppler)};
        const auto s = spectrum(pipeline_stack(cfg, paths), 5, 25, Window::rectangular, cfg);
        const auto est = map_to_physical(find_peaks(s, 1), s, cfg);
        CHECK(std::abs(est[0].range - r) <= 0.5 * range_unit(cfg) / 25 + 1e-9);
        CHECK(std::abs(est[0].velocity - v) <= 0.5 * velocity_unit(cfg, s.g_eff) / 5 + 1e-9);
    }
}

TEST_CASE("window names") {
    CHECK(parse_window("hamming") == Window::hamming);
    CHECK(window_name(Window::rectangular) == "rectangular");
    CHECK_THROWS_AS(parse_window("kaiser"), ConfigError);
    const auto t = window_taper(Window::hamming, 5);
    CHECK(t[0] == doctest::Approx(0.08));
    CHECK(t[2] == doctest::Approx(1.0));
}
