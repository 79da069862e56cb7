#include "pvn/rv_estimator.hpp"

#include "pvn/fft.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <algorithm>
#include <cmath>

namespace pvn {
namespace {

struct QuarterView {
    const DelayDopplerSpectrum& spec;
    Eigen::Index last_row;
    Eigen::Index last_col;
    RMatrix mag;

    explicit QuarterView(const DelayDopplerSpectrum& s)
        : spec(s), last_row(s.rows() / 2), last_col(s.cols() / 2), mag(s.grid.cwiseAbs()) {}

    [[nodiscard]] double at(Eigen::Index k, Eigen::Index n) const {
        const Eigen::Index r = (k % mag.rows() + mag.rows()) % mag.rows();
        const Eigen::Index c = (n % mag.cols() + mag.cols()) % mag.cols();
        return mag(r, c);
    }

    [[nodiscard]] double median_floor() const {
        std::vector<double> v;
        v.reserve(static_cast<std::size_t>((last_row + 1) * (last_col + 1)));
        for (Eigen::Index k = 0; k <= last_row; ++k) {
            for (Eigen::Index n = 0; n <= last_col; ++n) {
                v.push_back(mag(k, n));
            }
        }
        auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
        std::nth_element(v.begin(), mid, v.end());
        return *mid;
    }

    [[nodiscard]] std::vector<Peak> local_maxima(double floor) const {
        std::vector<Peak> out;
        for (Eigen::Index k = 0; k <= last_row; ++k) {
            for (Eigen::Index n = 0; n <= last_col; ++n) {
                const double v = mag(k, n);
                if (!(v > floor)) {
                    continue;
                }
                bool is_max = true;
                for (int dk = -1; dk <= 1 && is_max; ++dk) {
                    for (int dn = -1; dn <= 1 && is_max; ++dn) {
                        if ((dk != 0 || dn != 0) && at(k + dk, n + dn) > v) {
                            is_max = false;
                        }
                    }
                }
                if (is_max) {
                    out.push_back({static_cast<int>(k), static_cast<int>(n), v});
                }
            }
        }
        std::stable_sort(out.begin(), out.end(), [](const Peak& a, const Peak& b) { return a.magnitude > b.magnitude; });
        return out;
    }
};

std::vector<Peak> suppress(const std::vector<Peak>& candidates, int guard_rows, int guard_cols, std::size_t limit) {
    std::vector<Peak> kept;
    for (const Peak& p : candidates) {
        if (kept.size() >= limit) {
            break;
        }
        const bool clear = std::none_of(kept.begin(), kept.end(), [&](const Peak& q) {
            return std::abs(p.kappa - q.kappa) <= guard_rows && std::abs(p.epsilon - q.epsilon) <= guard_cols;
        });
        if (clear) {
            kept.push_back(p);
        }
    }
    return kept;
}

}  // namespace

Window parse_window(const std::string& name) {
    if (name == "rectangular") {
        return Window::rectangular;
    }
    if (name == "hamming") {
        return Window::hamming;
    }
    throw ConfigError("unknown window: " + name);
}

std::string_view window_name(Window w) { return w == Window::hamming ? "hamming" : "rectangular"; }

Eigen::VectorXd window_taper(Window w, Eigen::Index length) {
    Eigen::VectorXd t = Eigen::VectorXd::Ones(length);
    if (w == Window::hamming && length > 1) {
        for (Eigen::Index i = 0; i < length; ++i) {
            t[i] = 0.54 - 0.46 * std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(length - 1));
        }
    }
    return t;
}

DelayDopplerSpectrum spectrum(const CMatrix& gamma, int k_doppler, int k_range, Window window,
                              const OfdmConfig& cfg) {
    if (k_doppler < 1 || k_range < 1) {
        throw ConfigError("padding factors must be at least 1");
    }
    if (gamma.rows() < 1 || gamma.cols() != cfg.n_sub) {
        throw ConfigError("antenna stack must have N_sub columns");
    }
    const Eigen::VectorXd wr = window_taper(window, gamma.rows());
    const Eigen::VectorXd wc = window_taper(window, gamma.cols());
    const RMatrix tapered = (wr * wc.transpose()).cwiseProduct(gamma.real());

    DelayDopplerSpectrum s;
    s.k_doppler = k_doppler;
    s.k_range = k_range;
    s.g_eff = static_cast<int>(gamma.rows());
    s.n_sub = cfg.n_sub;
    s.window = window;
    s.grid = fft::real_forward_2d(tapered, gamma.rows() * k_doppler, gamma.cols() * k_range);
    s.f_r = 1.0 / (static_cast<double>(k_doppler) * s.g_eff * cfg.t_sym());
    s.t_r = cfg.t_s() / k_range;
    return s;
}

PeakSet find_peaks(const DelayDopplerSpectrum& spec, int n_expected) {
    if (n_expected < 1) {
        throw ConfigError("need at least one expected peak");
    }
    const QuarterView view(spec);
    const auto kept = suppress(view.local_maxima(view.median_floor()), spec.k_doppler, spec.k_range,
                               static_cast<std::size_t>(n_expected));
    if (kept.size() < static_cast<std::size_t>(n_expected)) {
        throw EstimationError(fmt::format("found {} of {} peaks", kept.size(), n_expected));
    }
    return {kept};
}

PeakSet find_peaks_blind(const DelayDopplerSpectrum& spec, Decibel threshold) {
    const QuarterView view(spec);
    const double floor = view.median_floor() * std::sqrt(threshold.linear_power());
    return {suppress(view.local_maxima(floor), spec.k_doppler, spec.k_range, std::numeric_limits<std::size_t>::max())};
}

std::vector<RangeVelocity> map_to_physical(const PeakSet& peaks, const DelayDopplerSpectrum& spec,
                                           const OfdmConfig& cfg) {
    const double r_unit = range_unit(cfg) / spec.k_range;
    const double v_unit = velocity_unit(cfg, spec.g_eff) / spec.k_doppler;
    std::vector<RangeVelocity> out;
    out.reserve(peaks.peaks.size());
    for (const Peak& p : peaks.peaks) {
        out.push_back({p.epsilon * r_unit, p.kappa * v_unit});
    }
    return out;
}

void write_spectrum_csv(const std::filesystem::path& file, const DelayDopplerSpectrum& spec) {
    auto out = fmt::output_file(file.string());
    out.print("row,col,magnitude\n");
    for (Eigen::Index k = 0; k < spec.rows(); ++k) {
        for (Eigen::Index n = 0; n < spec.cols(); ++n) {
            out.print("{},{},{:.17g}\n", k, n, std::abs(spec.grid(k, n)));
        }
    }
}

}  // namespace pvn
