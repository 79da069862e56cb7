#include "pvn/sync.hpp"

#include "pvn/fft.hpp"
#include "pvn/simd/kernels.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace pvn {
namespace {

constexpr double kRidgeContrast = 2.0;  // 3 dB

Eigen::Index half_cols(const DelayDopplerSpectrum& s) { return s.cols() / 2; }
Eigen::Index search_rows(const DelayDopplerSpectrum& s) { return s.rows() / 2; }

void require_compatible(const Fingerprint& fp, const DelayDopplerSpectrum& updated) {
    if (fp.zeta.size() != half_cols(updated) || fp.k_doppler != updated.k_doppler ||
        fp.k_range != updated.k_range || fp.g_eff != updated.g_eff) {
        throw ConfigError("fingerprint and spectrum layouts differ");
    }
}

std::span<const cd> row_head(const DelayDopplerSpectrum& s, Eigen::Index k) {
    return {s.grid.row(k).data(), static_cast<std::size_t>(half_cols(s))};
}

SyncEstimate to_estimate(const Fingerprint& fp, const DelayDopplerSpectrum& s, const OfdmConfig& cfg, Eigen::Index k,
                         Eigen::Index q, double score) {
    const Eigen::Index q_b = half_cols(s);
    SyncEstimate e;
    e.row_shift = static_cast<int>(k) - fp.k_c;
    e.col_shift = static_cast<int>(q <= q_b / 2 ? q : q - q_b);
    e.d_xi = e.row_shift * static_cast<double>(cfg.n_sub) / (static_cast<double>(cfg.n_s()) * s.rows());
    e.d_tau = e.col_shift * s.t_r;
    e.score = score;
    return e;
}

}  // namespace

Fingerprint capture_fingerprint(const DelayDopplerSpectrum& spec, const OfdmConfig& cfg, std::int64_t captured_at) {
    const Eigen::Index q_b = half_cols(spec);
    const Eigen::Index last = spec.rows() / 2;
    std::vector<double> power(static_cast<std::size_t>(last + 1));
    for (Eigen::Index k = 0; k <= last; ++k) {
        power[static_cast<std::size_t>(k)] = simd::energy(row_head(spec, k));
    }
    const auto best = std::max_element(power.begin(), power.end());
    std::vector<double> sorted = power;
    auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2);
    std::nth_element(sorted.begin(), mid, sorted.end());
    if (!(*best > kRidgeContrast * *mid)) {
        throw EstimationError("no static ridge stands out of the spectrum");
    }
    Fingerprint fp;
    fp.k_c = static_cast<int>(best - power.begin());
    fp.zeta = spec.grid.row(fp.k_c).head(q_b).transpose();
    fp.captured_at = captured_at;
    fp.numerology_hash = cfg.hash();
    fp.k_doppler = spec.k_doppler;
    fp.k_range = spec.k_range;
    fp.g_eff = spec.g_eff;
    return fp;
}

SyncEstimate cmcc_estimate(const Fingerprint& fp, const DelayDopplerSpectrum& updated, const OfdmConfig& cfg) {
    require_compatible(fp, updated);
    const std::span<const cd> zeta{fp.zeta.data(), static_cast<std::size_t>(fp.zeta.size())};
    Eigen::Index best_k = 0;
    Eigen::Index best_q = 0;
    double best = -1.0;
    for (Eigen::Index k = 0; k < search_rows(updated); ++k) {
        const auto corr = fft::circular_xcorr(row_head(updated, k), zeta);
        for (std::size_t q = 0; q < corr.size(); ++q) {
            const double v = std::abs(corr[q]);
            if (v > best) {
                best = v;
                best_k = k;
                best_q = static_cast<Eigen::Index>(q);
            }
        }
    }
    return to_estimate(fp, updated, cfg, best_k, best_q, best);
}

SyncEstimate scmcc_estimate(const Fingerprint& fp, const DelayDopplerSpectrum& updated, const OfdmConfig& cfg) {
    require_compatible(fp, updated);
    const std::span<const cd> zeta{fp.zeta.data(), static_cast<std::size_t>(fp.zeta.size())};
    const double reference = simd::energy(zeta);
    Eigen::Index row = 0;
    double closest = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < search_rows(updated); ++k) {
        const double gap = std::abs(simd::energy(row_head(updated, k)) - reference);
        if (gap < closest) {
            closest = gap;
            row = k;
        }
    }

    const std::size_t q_b = zeta.size();
    std::vector<cd> doubled(2 * q_b);
    const auto head = row_head(updated, row);
    std::copy(head.begin(), head.end(), doubled.begin());
    std::copy(head.begin(), head.end(), doubled.begin() + static_cast<std::ptrdiff_t>(q_b));
    std::size_t best_q = 0;
    double best = -1.0;
    for (std::size_t q = 0; q < q_b; ++q) {
        const double v = std::abs(simd::dot_conj(std::span<const cd>(doubled).subspan(q, q_b), zeta));
        if (v > best) {
            best = v;
            best_q = q;
        }
    }
    return to_estimate(fp, updated, cfg, row, static_cast<Eigen::Index>(best_q), best);
}

std::vector<RangeVelocity> apply_sync(const std::vector<RangeVelocity>& estimates, const SyncEstimate& sync,
                                      const OfdmConfig& cfg) {
    const double dr = kSpeedOfLight * sync.d_tau;
    const double dv = sync.d_xi * cfg.delta_f * kSpeedOfLight / cfg.f_c;
    std::vector<RangeVelocity> out = estimates;
    for (RangeVelocity& e : out) {
        e.range -= dr;
        e.velocity -= dv;
    }
    return out;
}

void remove_offsets(CompensatedStack& stack, const OffsetState& offsets, const OfdmConfig& cfg) {
    const double xi = offsets.xi(cfg);
    Eigen::RowVectorXcd delay_fix(cfg.n_sub);
    for (int n = 0; n < cfg.n_sub; ++n) {
        delay_fix[n] = expj(kTwoPi * n * cfg.delta_f * offsets.to);
    }
    const cd common = expj(kTwoPi * cfg.f_c * offsets.to);
    for (std::size_t g = 0; g < stack.hat_y.size(); ++g) {
        const double cycles = xi * (cfg.n_cp + static_cast<double>(g) * cfg.n_s()) / cfg.n_sub;
        const Eigen::RowVectorXcd fix = delay_fix * (common * expj(kTwoPi * cycles));
        stack.hat_y[g].array().rowwise() *= fix.array();
    }
}

void write_fingerprint_csv(const std::filesystem::path& file, const Fingerprint& fp) {
    auto out = fmt::output_file(file.string());
    out.print("# k_c={},hash={},k_doppler={},k_range={},g_eff={},captured_at={}\n", fp.k_c, fp.numerology_hash,
              fp.k_doppler, fp.k_range, fp.g_eff, fp.captured_at);
    out.print("index,re,im\n");
    for (Eigen::Index i = 0; i < fp.zeta.size(); ++i) {
        out.print("{},{:.17g},{:.17g}\n", i, fp.zeta[i].real(), fp.zeta[i].imag());
    }
}

Fingerprint read_fingerprint_csv(const std::filesystem::path& file) {
    std::ifstream is(file);
    std::string line;
    if (!std::getline(is, line) || line.rfind("# ", 0) != 0) {
        throw std::runtime_error("missing fingerprint header: " + file.string());
    }
    Fingerprint fp;
    std::istringstream header(line.substr(2));
    std::string item;
    while (std::getline(header, item, ',')) {
        const auto eq = item.find('=');
        const std::string key = item.substr(0, eq);
        const std::string value = item.substr(eq + 1);
        if (key == "k_c") {
            fp.k_c = std::stoi(value);
        } else if (key == "hash") {
            fp.numerology_hash = std::stoull(value);
        } else if (key == "k_doppler") {
            fp.k_doppler = std::stoi(value);
        } else if (key == "k_range") {
            fp.k_range = std::stoi(value);
        } else if (key == "g_eff") {
            fp.g_eff = std::stoi(value);
        } else if (key == "captured_at") {
            fp.captured_at = std::stoll(value);
        }
    }
    std::getline(is, line);
    std::vector<cd> values;
    while (std::getline(is, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream row(line);
        std::string idx, re, im;
        std::getline(row, idx, ',');
        std::getline(row, re, ',');
        std::getline(row, im, ',');
        values.emplace_back(std::stod(re), std::stod(im));
    }
    fp.zeta = Eigen::Map<const CVector>(values.data(), static_cast<Eigen::Index>(values.size()));
    return fp;
}

}  // namespace pvn
