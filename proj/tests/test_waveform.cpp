#include "pvn/preprocess.hpp"
#include "pvn/waveform.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <filesystem>

using namespace pvn;

namespace {

/// Compensated equivalent channel evaluated term by term.
cd equivalent_channel(const OfdmConfig& cfg, const PathParam& p, const OffsetState& o, const CVector& w, int g, int m,
                      int n) {
    const double xi = (p.doppler + o.cfo) * cfg.n_sub * cfg.t_s();
    const double tau = p.delay + o.to;
    cd tx{0.0, 0.0};
    for (int u = 0; u < cfg.m_u; ++u) {
        tx += std::exp(cd(0.0, -kTwoPi * u * cfg.d_over_lambda * std::sin(p.aod))) * w[u];
    }
    const double phase = -kTwoPi * cfg.f_c * o.to
                         - kTwoPi * xi * (cfg.n_cp + g * (cfg.n_sub + cfg.n_cp)) / static_cast<double>(cfg.n_sub)
                         - kTwoPi * m * cfg.d_over_lambda * std::sin(p.doa)
                         - kTwoPi * n * cfg.delta_f * tau;
    return p.gain * tx * std::exp(cd(0.0, phase));
}

}  // namespace

TEST_CASE("steering vector examples") {
    const CVector a0 = steering_vector(5, 0.0, 0.5);
    CHECK((a0 - CVector::Ones(5)).norm() < 1e-15);
    const CVector a1 = steering_vector(4, kPi / 2, 0.5);
    CVector expected(4);
    expected << 1.0, -1.0, 1.0, -1.0;
    CHECK((a1 - expected).norm() < 1e-12);
    const CVector a2 = steering_vector(2, kPi / 6, 0.5);
    CHECK(std::abs(a2[1] - cd(0.0, -1.0)) < 1e-12);
}

TEST_CASE("field numerology") {
    const OfdmConfig cfg;
    CHECK(cfg.t_s() == doctest::Approx(7.8125e-8).epsilon(1e-14));
    CHECK(cfg.t_sym() == doctest::Approx(11.25e-6).epsilon(1e-14));
    OfdmConfig bad;
    bad.n_cp = bad.n_sub;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("static path without offsets gives identical equivalent channels") {
    const OfdmConfig cfg = test::small_ofdm();
    const std::vector<PathParam> paths{test::make_path({0.3, 0.4}, 0.2, 1e-7, 0.0, true)};
    Rng rng = make_rng(1);
    const FrameStack frames = synthesize_frames(cfg, paths, {}, kNoiseOff, default_precoder(cfg.m_u), rng);
    const CompensatedStack comp = compensate(frames);
    for (int g = 1; g < cfg.g_symbols; ++g) {
        CHECK(test::relative_error(comp.hat_y[g], comp.hat_y[0]) < 1e-12);
    }
    // Unit-modulus data with a unitary transform: the received frame equals the channel with data applied.
    const ChannelBasis basis(cfg, paths, {}, default_precoder(cfg.m_u));
    CHECK(test::relative_error(comp.hat_y[3], basis.frame(3)) < 1e-12);
}

TEST_CASE("compensated frames match the term-by-term channel") {
    const OfdmConfig cfg = test::small_ofdm(12, 6, 32, 4);
    // Two static paths share a Doppler and take the grouped branch of the basis.
    const std::vector<PathParam> paths{test::make_path({0.3, -0.1}, 0.4, 1.5e-7, 4000.0),
                                       test::make_path({-0.2, 0.5}, -0.9, 2.5e-7, -1500.0, false),
                                       test::make_path({0.1, 0.2}, 0.2, 1.0e-7, 0.0, true),
                                       test::make_path({0.4, 0.1}, 1.1, 4.0e-7, 0.0, true)};
    const OffsetState offsets{2500.0, 3e-7};
    const CVector w = default_precoder(cfg.m_u);
    Rng rng = make_rng(2);
    const CompensatedStack comp = compensate(synthesize_frames(cfg, paths, offsets, kNoiseOff, w, rng));
    double worst = 0.0;
    for (int g = 0; g < cfg.g_symbols; ++g) {
        for (int m = 0; m < cfg.m_r; ++m) {
            for (int n = 0; n < cfg.n_sub; ++n) {
                cd expected{0.0, 0.0};
                for (const PathParam& p : paths) {
                    expected += equivalent_channel(cfg, p, offsets, w, g, m, n);
                }
                worst = std::max(worst, std::abs(comp.hat_y[g](m, n) - expected));
            }
        }
    }
    // Carrier phase of several thousand cycles limits the agreement to ~1e-11.
    CHECK(worst < 1e-10);
}

TEST_CASE("single noise-free path keeps a constant magnitude") {
    const OfdmConfig cfg = test::small_ofdm();
    const std::vector<PathParam> paths{test::make_path({0.5, 0.0}, 0.3, 2e-7, 3000.0)};
    Rng rng = make_rng(3);
    const CompensatedStack comp =
        compensate(synthesize_frames(cfg, paths, {1000.0, 1e-7}, kNoiseOff, default_precoder(cfg.m_u), rng));
    const double ref = std::abs(comp.hat_y[0](0, 0));
    for (const CMatrix& y : comp.hat_y) {
        CHECK((y.cwiseAbs().array() - ref).abs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("a CFO change rotates each frame by one unit-modulus scalar") {
    const OfdmConfig cfg = test::small_ofdm();
    const std::vector<PathParam> paths{test::make_path({0.5, 0.1}, 0.3, 2e-7, 3000.0),
                                       test::make_path({0.2, 0.1}, -0.6, 1e-7, -700.0)};
    const CVector w = default_precoder(cfg.m_u);
    Rng r1 = make_rng(4);
    Rng r2 = make_rng(4);
    const FrameStack a = synthesize_frames(cfg, paths, {0.0, 1e-7}, Decibel{10.0}, w, r1);
    const FrameStack b = synthesize_frames(cfg, paths, {5000.0, 1e-7}, Decibel{10.0}, w, r2);
    const CompensatedStack ca = compensate(a);
    const CompensatedStack cb = compensate(b);
    const double xi = cfg.normalize(5000.0);
    for (int g = 0; g < cfg.g_symbols; ++g) {
        const cd rotation = expj(-kTwoPi * xi * (cfg.n_cp + g * cfg.n_s()) / cfg.n_sub);
        const CMatrix signal_a = ChannelBasis(cfg, paths, {0.0, 1e-7}, w).frame(g);
        const CMatrix signal_b = ChannelBasis(cfg, paths, {5000.0, 1e-7}, w).frame(g);
        CHECK(test::relative_error(signal_b, CMatrix(signal_a * rotation)) < 1e-12);
        // Noise draws are identical, so the frame-level difference is the signal difference alone.
        const CMatrix diff = (cb.hat_y[g] - ca.hat_y[g]) - (signal_b - signal_a);
        CHECK(diff.norm() < 1e-10);
    }
}

TEST_CASE("noise power matches the configured variance") {
    OfdmConfig cfg = test::small_ofdm(100, 8, 128, 16);
    const std::vector<PathParam> paths{test::make_path({1e-3, 0.0}, 0.0, 1e-7, 0.0, true)};
    Rng rng = make_rng(5);
    const FrameStack f = synthesize_frames(cfg, paths, {}, Decibel{0.0}, default_precoder(cfg.m_u), rng);
    const ChannelBasis basis(cfg, paths, {}, default_precoder(cfg.m_u));
    const CompensatedStack comp = compensate(f);
    double energy = 0.0;
    double raw = 0.0;
    std::size_t count = 0;
    for (int g = 0; g < cfg.g_symbols; ++g) {
        energy += (comp.hat_y[g] - basis.frame(g)).squaredNorm();
        count += static_cast<std::size_t>(comp.hat_y[g].size());
    }
    for (int g = 0; g < cfg.g_symbols; ++g) {
        CMatrix clean = basis.frame(g);
        for (Eigen::Index m = 0; m < clean.rows(); ++m) {
            clean.row(m) = clean.row(m).cwiseProduct(f.data[g].transpose());
        }
        // Unitary transform: time-domain signal energy equals the frequency-domain one.
        raw += f.symbols[g].squaredNorm() - clean.squaredNorm();
    }
    REQUIRE(count >= 100000);
    CHECK(f.noise_var == doctest::Approx(std::norm(cd(1e-3, 0.0))));
    CHECK(energy / count == doctest::Approx(f.noise_var).epsilon(0.01));
    CHECK(std::abs(raw / count - f.noise_var) < 0.03 * f.noise_var);
}

TEST_CASE("aliased Doppler is rejected") {
    const OfdmConfig cfg = test::small_ofdm();
    const std::vector<PathParam> paths{test::make_path({1.0, 0.0}, 0.0, 1e-7, 0.6 * cfg.delta_f)};
    Rng rng = make_rng(6);
    CHECK_THROWS_AS(synthesize_frames(cfg, paths, {}, kNoiseOff, default_precoder(cfg.m_u), rng), ConfigError);
}

TEST_CASE("frame dump round trip") {
    const OfdmConfig cfg = test::small_ofdm(4, 3, 16, 2);
    const std::vector<PathParam> paths{test::make_path({1.0, 0.0}, 0.1, 1e-7, 100.0)};
    Rng rng = make_rng(7);
    const FrameStack f = synthesize_frames(cfg, paths, {}, Decibel{5.0}, default_precoder(cfg.m_u), rng);
    const auto file = std::filesystem::temp_directory_path() / "pvn_frames_test.bin";
    write_frame_dump(file, f);
    const auto back = read_frame_dump(file);
    std::filesystem::remove(file);
    REQUIRE(back.size() == f.symbols.size());
    for (std::size_t g = 0; g < back.size(); ++g) {
        CHECK(back[g] == f.symbols[g]);
    }
}
