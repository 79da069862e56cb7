#include "pvn/waveform.hpp"

#include "pvn/fft.hpp"
#include "pvn/simd/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>

namespace pvn {
namespace {

constexpr std::uint64_t kFrameMagic = 0x314D524650564E50ULL;  // "PNVPFRM1" little-endian

std::span<cd> row_span(CMatrix& m, Eigen::Index r) { return {m.row(r).data(), static_cast<std::size_t>(m.cols())}; }

std::span<const cd> flat(const CMatrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
std::span<cd> flat(CMatrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }

cd transmit_gain(const OfdmConfig& cfg, double aod, const CVector& precoder) {
    return steering_vector(cfg.m_u, aod, cfg.d_over_lambda).transpose() * precoder;
}

CVector qpsk(Rng& rng, int n) {
    static constexpr double kAmp = 0.70710678118654752440;
    CVector x(n);
    for (int u = 0; u < n; ++u) {
        const int sym = uniform_int(rng, {0, 3});
        x[u] = cd((sym & 1) != 0 ? -kAmp : kAmp, (sym & 2) != 0 ? -kAmp : kAmp);
    }
    return x;
}

}  // namespace

CVector steering_vector(int n_antennas, double angle, double d_over_lambda) {
    CVector a(n_antennas);
    const double step = -kTwoPi * d_over_lambda * std::sin(angle);
    for (int m = 0; m < n_antennas; ++m) {
        a[m] = expj(step * m);
    }
    return a;
}

CVector default_precoder(int m_u) { return CVector::Constant(m_u, cd(1.0 / std::sqrt(static_cast<double>(m_u)), 0.0)); }

ChannelBasis::ChannelBasis(const OfdmConfig& cfg, std::span<const PathParam> paths, const OffsetState& offsets,
                           const CVector& precoder)
    : cfg_(cfg) {
    if (precoder.size() != cfg.m_u) {
        throw ConfigError("precoder length must equal the transmit antenna count");
    }
    const double xi_o = offsets.xi(cfg);
    const cd to_phase = expj(-kTwoPi * cfg.f_c * offsets.to);
    for (const PathParam& p : paths) {
        const double xi = cfg.normalize(p.doppler) + xi_o;
        if (std::abs(xi) >= 0.5) {
            throw ConfigError("normalized Doppler outside (-0.5, 0.5)");
        }
        xi_.push_back(xi);
        base_.push_back(p.gain * to_phase * transmit_gain(cfg, p.aod, precoder) *
                        expj(-kTwoPi * xi * cfg.n_cp / cfg.n_sub));
        const CVector a = steering_vector(cfg.m_r, p.doa, cfg.d_over_lambda);
        const double tau = p.delay + offsets.to;
        Eigen::RowVectorXcd delay_row(cfg.n_sub);
        for (int n = 0; n < cfg.n_sub; ++n) {
            delay_row[n] = expj(-kTwoPi * n * cfg.delta_f * tau);
        }
        CMatrix outer = base_.back() * a * delay_row;
        const auto same = std::find_if(groups_.begin(), groups_.end(), [&](const DopplerGroup& d) { return d.xi == xi; });
        if (same == groups_.end()) {
            groups_.push_back({xi, std::move(outer)});
        } else {
            same->sum += outer;
        }
    }
}

cd ChannelBasis::weight(std::size_t l, int g) const {
    return base_[l] * expj(-kTwoPi * xi_[l] * g * static_cast<double>(cfg_.n_s()) / cfg_.n_sub);
}

CMatrix ChannelBasis::frame(int g) const {
    if (groups_.empty()) {
        return CMatrix::Zero(cfg_.m_r, cfg_.n_sub);
    }
    const auto rotation = [&](const DopplerGroup& d) {
        return expj(-kTwoPi * d.xi * g * static_cast<double>(cfg_.n_s()) / cfg_.n_sub);
    };
    CMatrix h = groups_.front().sum * rotation(groups_.front());
    for (std::size_t i = 1; i < groups_.size(); ++i) {
        simd::axpy(rotation(groups_[i]), flat(groups_[i].sum), flat(h));
    }
    return h;
}

double noise_variance_for(const OfdmConfig& cfg, std::span<const PathParam> paths, const CVector& precoder,
                          Decibel snr) {
    if (std::isinf(snr.value) && snr.value > 0.0) {
        return 0.0;
    }
    double strongest = 0.0;
    for (const PathParam& p : paths) {
        strongest = std::max(strongest, std::norm(p.gain * transmit_gain(cfg, p.aod, precoder)));
    }
    return strongest / snr.linear_power();
}

FrameStack synthesize_frames(const OfdmConfig& cfg, std::span<const PathParam> paths, const OffsetState& offsets,
                             Decibel snr, const CVector& precoder, Rng& rng) {
    cfg.validate();
    if (paths.empty()) {
        throw ConfigError("synthesis needs at least one path");
    }
    const ChannelBasis basis(cfg, paths, offsets, precoder);
    FrameStack out;
    out.noise_var = noise_variance_for(cfg, paths, precoder, snr);
    out.data.reserve(cfg.g_symbols);
    for (int g = 0; g < cfg.g_symbols; ++g) {
        out.data.push_back(qpsk(rng, cfg.n_sub));
    }

    const double unitary = 1.0 / std::sqrt(static_cast<double>(cfg.n_sub));
    out.symbols.reserve(cfg.g_symbols);
    for (int g = 0; g < cfg.g_symbols; ++g) {
        CMatrix y = basis.frame(g);
        const std::span<const cd> x{out.data[g].data(), static_cast<std::size_t>(cfg.n_sub)};
        for (Eigen::Index m = 0; m < y.rows(); ++m) {
            simd::mul(row_span(y, m), x, row_span(y, m));
        }
        fft::transform_rows(y, fft::Direction::backward);
        y *= unitary;
        if (out.noise_var > 0.0) {
            for (Eigen::Index i = 0; i < y.size(); ++i) {
                y.data()[i] += complex_normal(rng, out.noise_var);
            }
        }
        out.symbols.push_back(std::move(y));
    }
    return out;
}

void write_frame_dump(const std::filesystem::path& file, const FrameStack& frames) {
    std::ofstream os(file, std::ios::binary);
    if (!os) {
        throw std::runtime_error("cannot open " + file.string());
    }
    const auto rows = frames.symbols.empty() ? 0 : frames.symbols.front().rows();
    const auto cols = frames.symbols.empty() ? 0 : frames.symbols.front().cols();
    const std::array<std::uint64_t, 4> header{kFrameMagic, static_cast<std::uint64_t>(rows),
                                              static_cast<std::uint64_t>(cols),
                                              static_cast<std::uint64_t>(frames.symbols.size())};
    os.write(reinterpret_cast<const char*>(header.data()), sizeof(header));
    for (const CMatrix& y : frames.symbols) {
        os.write(reinterpret_cast<const char*>(y.data()), static_cast<std::streamsize>(y.size() * sizeof(cd)));
    }
}

std::vector<CMatrix> read_frame_dump(const std::filesystem::path& file) {
    std::ifstream is(file, std::ios::binary);
    std::array<std::uint64_t, 4> header{};
    if (!is.read(reinterpret_cast<char*>(header.data()), sizeof(header)) || header[0] != kFrameMagic) {
        throw std::runtime_error("not a frame dump: " + file.string());
    }
    std::vector<CMatrix> out;
    for (std::uint64_t g = 0; g < header[3]; ++g) {
        CMatrix y(static_cast<Eigen::Index>(header[1]), static_cast<Eigen::Index>(header[2]));
        if (!is.read(reinterpret_cast<char*>(y.data()), static_cast<std::streamsize>(y.size() * sizeof(cd)))) {
            throw std::runtime_error("truncated frame dump: " + file.string());
        }
        out.push_back(std::move(y));
    }
    return out;
}

}  // namespace pvn
