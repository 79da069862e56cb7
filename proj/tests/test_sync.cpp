#include "pvn/preprocess.hpp"
#include "pvn/sync.hpp"
#include "pvn/waveform.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <filesystem>

using namespace pvn;

namespace {

const OfdmConfig kCfg = test::small_ofdm(64, 2, 128, 16);

std::vector<PathParam> clutter_scene() {
    return {test::make_path({1.0, 0.2}, 0.3, 2.0e-7, 0.0, true), test::make_path({0.7, -0.4}, 0.8, 3.1e-7, 0.0, true),
            test::make_path({-0.5, 0.5}, 1.1, 4.4e-7, 0.0, true),
            test::make_path({0.3, 0.1}, 0.5, 3.7e-7, cfo_from_velocity(14.0, kCfg))};
}

DelayDopplerSpectrum sync_spectrum(const std::vector<PathParam>& paths, const OffsetState& o, Decibel snr,
                                   std::uint64_t seed, int k = 5, int k_r = 25, Window w = Window::rectangular) {
    Rng rng = make_rng(seed);
    const FrameStack f = synthesize_frames(kCfg, paths, o, snr, default_precoder(kCfg.m_u), rng);
    const CompensatedStack c = compensate(f);
    return spectrum(stack_antenna_row(c.hat_y, 0), k, k_r, w, kCfg);
}

int expected_row_shift(double xi, const DelayDopplerSpectrum& s) {
    return static_cast<int>(std::lround(xi * kCfg.n_s() * static_cast<double>(s.rows()) / kCfg.n_sub));
}

int expected_col_shift(double to, const DelayDopplerSpectrum& s) {
    return static_cast<int>(std::lround(to / s.t_r));
}

CMatrix circshift(const CMatrix& m, Eigen::Index dr, Eigen::Index dc) {
    CMatrix out(m.rows(), m.cols());
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            out((r + dr) % m.rows(), (c + dc) % m.cols()) = m(r, c);
        }
    }
    return out;
}

/// Residual of the best complex-scaled copy of the reference, relative to the updated row.
double projection_residual(const CVector& updated, const CVector& reference) {
    const cd scale = reference.dot(updated) / reference.squaredNorm();
    return (updated - scale * reference).norm() / updated.norm();
}

}  // namespace

TEST_CASE("ridge row sits at the Doppler of the common offset") {
    const auto zero = sync_spectrum(clutter_scene(), {}, kNoiseOff, 1);
    CHECK(capture_fingerprint(zero, kCfg).k_c == 0);

    const double cfo = cfo_from_velocity(3.0, kCfg);
    const auto moved = sync_spectrum(clutter_scene(), {cfo, 0.0}, kNoiseOff, 1);
    const Fingerprint fp = capture_fingerprint(moved, kCfg, 17);
    CHECK(fp.k_c == expected_row_shift(kCfg.normalize(cfo), moved));
    CHECK(fp.k_c == 2);
    CHECK(fp.zeta.size() == moved.cols() / 2);
    CHECK(fp.captured_at == 17);
    CHECK(fp.numerology_hash == kCfg.hash());
}

TEST_CASE("pure noise has no ridge") {
    Rng rng = make_rng(2);
    const CMatrix noise = test::random_matrix(rng, 64, kCfg.n_sub);
    const auto s = spectrum(noise, 5, 4, Window::rectangular, kCfg);
    CHECK_THROWS_AS(capture_fingerprint(s, kCfg), EstimationError);
}

TEST_CASE("identical spectra give zero drift at the fingerprint energy") {
    const auto s = sync_spectrum(clutter_scene(), {}, Decibel{10.0}, 3, 5, 4);
    const Fingerprint fp = capture_fingerprint(s, kCfg);
    for (const SyncEstimate& e : {cmcc_estimate(fp, s, kCfg), scmcc_estimate(fp, s, kCfg)}) {
        CHECK(e.row_shift == 0);
        CHECK(e.col_shift == 0);
        CHECK(e.d_xi == 0.0);
        CHECK(e.d_tau == 0.0);
        CHECK(e.score == doctest::Approx(fp.zeta.squaredNorm()).epsilon(1e-12));
    }
}

TEST_CASE("circularly shifted grid is recovered and matches brute force") {
    const auto s = sync_spectrum(clutter_scene(), {}, kNoiseOff, 4, 2, 4);
    const Fingerprint fp = capture_fingerprint(s, kCfg);
    DelayDopplerSpectrum up = s;
    up.grid = circshift(s.grid, 2, 7);
    const SyncEstimate e = cmcc_estimate(fp, up, kCfg);

    const Eigen::Index q_b = up.cols() / 2;
    double best = -1.0;
    Eigen::Index bk = 0;
    Eigen::Index bq = 0;
    for (Eigen::Index k = 0; k < up.rows() / 2; ++k) {
        for (Eigen::Index q = 0; q < q_b; ++q) {
            cd acc{0.0, 0.0};
            for (Eigen::Index i = 0; i < q_b; ++i) {
                acc += up.grid(k, (q + i) % q_b) * std::conj(fp.zeta[i]);
            }
            if (std::abs(acc) > best) {
                best = std::abs(acc);
                bk = k;
                bq = q;
            }
        }
    }
    CHECK(e.row_shift + fp.k_c == bk);
    CHECK(e.col_shift == bq);
    CHECK(e.score == doctest::Approx(best).epsilon(1e-10));
    CHECK(e.row_shift == 2);
    CHECK(e.col_shift == 7);
    CHECK(e.d_tau == doctest::Approx(7 * s.t_r));
    CHECK(e.d_xi == doctest::Approx(2.0 * kCfg.n_sub / (kCfg.n_s() * static_cast<double>(s.rows()))));
}

TEST_CASE("field-style offsets are recovered to the bin at 10 dB") {
    const double cfo = cfo_from_velocity(3.0, kCfg);
    const double to = to_from_range(10.0);
    const auto ref = sync_spectrum(clutter_scene(), {}, Decibel{10.0}, 5);
    const auto up = sync_spectrum(clutter_scene(), {cfo, to}, Decibel{10.0}, 6);
    const Fingerprint fp = capture_fingerprint(ref, kCfg);
    const SyncEstimate e = cmcc_estimate(fp, up, kCfg);
    CHECK(std::abs(e.row_shift - expected_row_shift(kCfg.normalize(cfo), up)) <= 1);
    CHECK(std::abs(e.col_shift - expected_col_shift(to, up)) <= 1);
    CHECK(expected_col_shift(to, up) == 11);
}

TEST_CASE("noise-free S-CMCC agrees with CMCC") {
    const auto ref = sync_spectrum(clutter_scene(), {}, kNoiseOff, 7);
    const Fingerprint fp = capture_fingerprint(ref, kCfg);
    for (auto [v, r] : {std::pair{15.0, 55.0}, {33.0, 70.0}, {65.0, 95.0}}) {
        CAPTURE(v);
        const auto up = sync_spectrum(clutter_scene(), {cfo_from_velocity(v, kCfg), to_from_range(r)}, kNoiseOff, 7);
        const SyncEstimate a = cmcc_estimate(fp, up, kCfg);
        const SyncEstimate b = scmcc_estimate(fp, up, kCfg);
        CHECK(a.row_shift == b.row_shift);
        CHECK(a.col_shift == b.col_shift);
        CHECK(a.score == doctest::Approx(b.score).epsilon(1e-9));
    }
}

TEST_CASE("S-CMCC takes the lower row on equal power") {
    DelayDopplerSpectrum s;
    s.grid = CMatrix::Zero(8, 8);
    s.k_doppler = 1;
    s.k_range = 1;
    s.g_eff = 8;
    s.t_r = 1.0;
    Fingerprint fp;
    fp.zeta = CVector::Zero(4);
    fp.zeta << 1.0, 2.0, 0.0, 0.0;
    fp.g_eff = 8;
    s.grid(1, 0) = 2.0;
    s.grid(1, 1) = 1.0;
    s.grid(3, 2) = 1.0;
    s.grid(3, 3) = 2.0;
    const SyncEstimate e = scmcc_estimate(fp, s, kCfg);
    CHECK(e.row_shift == 1);
}

TEST_CASE("apply_sync subtracts the converted drift") {
    const std::vector<RangeVelocity> est{{100.0, 10.0}, {40.0, -3.0}};
    const auto same = apply_sync(est, SyncEstimate{}, kCfg);
    CHECK(same[0].range == 100.0);
    CHECK(same[1].velocity == -3.0);

    SyncEstimate a;
    a.d_tau = 1e-8;
    a.d_xi = 0.01;
    SyncEstimate b;
    b.d_tau = -4e-8;
    b.d_xi = 0.002;
    SyncEstimate ab;
    ab.d_tau = a.d_tau + b.d_tau;
    ab.d_xi = a.d_xi + b.d_xi;
    const auto twice = apply_sync(apply_sync(est, a, kCfg), b, kCfg);
    const auto once = apply_sync(est, ab, kCfg);
    for (std::size_t i = 0; i < est.size(); ++i) {
        CHECK(twice[i].range == doctest::Approx(once[i].range));
        CHECK(twice[i].velocity == doctest::Approx(once[i].velocity));
    }
    CHECK(apply_sync(est, a, kCfg)[0].range == doctest::Approx(100.0 - 3.0));
    CHECK(apply_sync(est, a, kCfg)[0].velocity == doctest::Approx(10.0 - 0.01 * kCfg.delta_f * kSpeedOfLight / kCfg.f_c));
}

TEST_CASE("removing known offsets restores the offset-free stack") {
    const OffsetState o{cfo_from_velocity(40.0, kCfg), to_from_range(80.0)};
    const ChannelBasis with(kCfg, clutter_scene(), o, default_precoder(kCfg.m_u));
    const ChannelBasis without(kCfg, clutter_scene(), {}, default_precoder(kCfg.m_u));
    CompensatedStack s;
    for (int g = 0; g < kCfg.g_symbols; ++g) {
        s.hat_y.push_back(with.frame(g));
    }
    remove_offsets(s, o, kCfg);
    for (int g = 0; g < kCfg.g_symbols; ++g) {
        CHECK(test::relative_error(s.hat_y[g], without.frame(g)) < 1e-9);
    }
}

TEST_CASE("offsets circularly shift the fingerprint row") {
    // Sidelobes of the mirrored lobes leak into the ridge row; the taper keeps them below the shift error.
    for (auto [w, limit] : {std::pair{Window::hamming, 0.05}, {Window::rectangular, 0.12}}) {
        CAPTURE(window_name(w));
        const auto ref = sync_spectrum(clutter_scene(), {}, kNoiseOff, 8, 5, 25, w);
        const Fingerprint fp = capture_fingerprint(ref, kCfg);
        Rng rng = make_rng(8);
        for (int trial = 0; trial < 6; ++trial) {
            const double cfo = cfo_from_velocity(uniform(rng, {15.0, 65.0}), kCfg);
            const double to = to_from_range(uniform(rng, {55.0, 95.0}));
            const auto up = sync_spectrum(clutter_scene(), {cfo, to}, kNoiseOff, 8, 5, 25, w);
            const int dk = expected_row_shift(kCfg.normalize(cfo), up);
            const int dn = expected_col_shift(to, up);
            const CMatrix shifted = circshift(ref.grid, dk, dn);
            const CVector expected = shifted.row(fp.k_c + dk).head(fp.zeta.size()).transpose();
            const CVector got = up.grid.row(fp.k_c + dk).head(fp.zeta.size()).transpose();
            // Columns below the shift receive the mirrored lobes, which move the other way.
            const Eigen::Index keep = fp.zeta.size() - dn;
            CHECK(projection_residual(got.tail(keep), expected.tail(keep)) <= limit);
            // Parseval: the ridge row keeps its power when only the offsets change.
            CHECK(got.squaredNorm() == doctest::Approx(fp.zeta.squaredNorm()).epsilon(0.10));
        }
    }
}

TEST_CASE("estimates ignore a global complex scale") {
    const auto ref = sync_spectrum(clutter_scene(), {}, Decibel{5.0}, 9);
    auto up = sync_spectrum(clutter_scene(), {cfo_from_velocity(20.0, kCfg), to_from_range(60.0)}, Decibel{5.0}, 10);
    const Fingerprint fp = capture_fingerprint(ref, kCfg);
    const SyncEstimate a = cmcc_estimate(fp, up, kCfg);
    up.grid *= cd(-0.3, 2.0);
    const SyncEstimate b = cmcc_estimate(fp, up, kCfg);
    CHECK(a.row_shift == b.row_shift);
    CHECK(a.col_shift == b.col_shift);
}

TEST_CASE("mismatched layouts are rejected") {
    const auto a = sync_spectrum(clutter_scene(), {}, kNoiseOff, 11, 5, 25);
    const auto b = sync_spectrum(clutter_scene(), {}, kNoiseOff, 11, 5, 4);
    const Fingerprint fp = capture_fingerprint(a, kCfg);
    CHECK_THROWS_AS(cmcc_estimate(fp, b, kCfg), ConfigError);
}

TEST_CASE("fingerprint CSV round trip") {
    const auto s = sync_spectrum(clutter_scene(), {}, Decibel{0.0}, 12, 2, 2);
    const Fingerprint fp = capture_fingerprint(s, kCfg, 42);
    const auto file = std::filesystem::temp_directory_path() / "pvn_fp_test.csv";
    write_fingerprint_csv(file, fp);
    const Fingerprint back = read_fingerprint_csv(file);
    std::filesystem::remove(file);
    CHECK(back.k_c == fp.k_c);
    CHECK(back.numerology_hash == fp.numerology_hash);
    CHECK(back.captured_at == 42);
    CHECK(back.g_eff == fp.g_eff);
    CHECK(back.k_range == 2);
    CHECK(back.zeta == fp.zeta);
}
