#pragma once

#include "pvn/ofdm.hpp"
#include "pvn/rng.hpp"
#include "pvn/scenario.hpp"

#include <filesystem>
#include <limits>
#include <span>
#include <vector>

namespace pvn {

/// Received antenna-domain symbols Y_g with the data they carried.
struct FrameStack {
    std::vector<CMatrix> symbols;  ///< G matrices, M_R x N_sub
    std::vector<CVector> data;     ///< G data vectors x_g, length N_sub
    double noise_var = 0.0;        ///< per-element noise power, zero when noise is off
};

/// Sentinel SNR that disables noise.
inline constexpr Decibel kNoiseOff{std::numeric_limits<double>::infinity()};

/// Element m equals exp(-j 2 pi m d/lambda sin(angle)).
CVector steering_vector(int n_antennas, double angle, double d_over_lambda);

/// All-ones precoder with unit norm.
CVector default_precoder(int m_u);

/// Per-path constant spatial-delay outer products, reused across symbols.
class ChannelBasis {
public:
    ChannelBasis(const OfdmConfig& cfg, std::span<const PathParam> paths, const OffsetState& offsets,
                 const CVector& precoder);

    /// Noise-free equivalent channel of symbol g (0-based): the compensated frame without noise.
    [[nodiscard]] CMatrix frame(int g) const;
    /// Complex weight of path l in symbol g, including CP rotation and transmit gain.
    [[nodiscard]] cd weight(std::size_t l, int g) const;
    /// Per-element receive power of path l.
    [[nodiscard]] double element_power(std::size_t l) const { return std::norm(base_[l]); }
    [[nodiscard]] std::size_t size() const { return base_.size(); }

private:
    /// Paths with one normalized Doppler share a per-symbol rotation; their frames are pre-summed.
    struct DopplerGroup {
        double xi = 0.0;
        CMatrix sum;
    };

    OfdmConfig cfg_;
    std::vector<double> xi_;
    std::vector<cd> base_;
    std::vector<DopplerGroup> groups_;
};

/// Noise power giving the requested per-element SNR against the strongest path.
double noise_variance_for(const OfdmConfig& cfg, std::span<const PathParam> paths, const CVector& precoder,
                          Decibel snr);

/// Builds Y_g = H_g D(x_g) F + Z_g for g = 0..G-1 with unit-modulus QPSK data and a unitary IDFT F.
FrameStack synthesize_frames(const OfdmConfig& cfg, std::span<const PathParam> paths, const OffsetState& offsets,
                             Decibel snr, const CVector& precoder, Rng& rng);

/// Flat binary dump: 32-byte header (magic, M_R, N_sub, G as u64) then interleaved float64 re/im.
void write_frame_dump(const std::filesystem::path& file, const FrameStack& frames);
std::vector<CMatrix> read_frame_dump(const std::filesystem::path& file);

}  // namespace pvn
