#include "pvn/analysis.hpp"

#include "pvn/simd/kernels.hpp"

#include <fmt/os.h>

namespace pvn {
namespace {

std::vector<double> powers(std::span<const CMatrix> stack) {
    std::vector<double> out;
    out.reserve(stack.size());
    for (const CMatrix& m : stack) {
        out.push_back(simd::energy({m.data(), static_cast<std::size_t>(m.size())}));
    }
    return out;
}

}  // namespace

std::vector<double> suppression_ratio(const SuppressionPowers& in) {
    if (in.clutter_after.size() != in.target_after.size() || in.clutter_before.size() != in.target_before.size() ||
        in.clutter_after.size() + static_cast<std::size_t>(in.g_d) > in.clutter_before.size()) {
        throw ConfigError("suppression inputs do not line up");
    }
    std::vector<double> ratio;
    ratio.reserve(in.clutter_after.size());
    for (std::size_t s = 0; s < in.clutter_after.size(); ++s) {
        const std::size_t g = s + static_cast<std::size_t>(in.g_d);
        const double cb = in.clutter_before[g];
        const double tb = in.target_before[g];
        const double ca = in.clutter_after[s];
        const double ta = in.target_after[s];
        if (cb <= 0.0 || ca <= 0.0) {
            ratio.push_back(kSaturatedRatio);
        } else if (ta <= 0.0 || tb <= 0.0) {
            ratio.push_back(0.0);
        } else {
            ratio.push_back(std::min((cb / tb) / (ca / ta), kSaturatedRatio));
        }
    }
    return ratio;
}

std::vector<double> suppression_ratio(const SuppressionInputs& in) {
    const auto cb = powers(in.clutter_before);
    const auto tb = powers(in.target_before);
    const auto ca = powers(in.clutter_after);
    const auto ta = powers(in.target_after);
    return suppression_ratio(SuppressionPowers{cb, tb, ca, ta, in.g_d});
}

void write_curve_csv(const std::filesystem::path& file, std::span<const double> snr_db, std::span<const double> value) {
    if (snr_db.size() != value.size()) {
        throw ConfigError("curve axes differ in length");
    }
    auto out = fmt::output_file(file.string());
    out.print("snr_db,value\n");
    for (std::size_t i = 0; i < snr_db.size(); ++i) {
        out.print("{:.17g},{:.17g}\n", snr_db[i], value[i]);
    }
}

}  // namespace pvn
