#include "pvn/preprocess.hpp"

#include "pvn/fft.hpp"
#include "pvn/simd/kernels.hpp"

#include <cmath>

namespace pvn {
namespace {

constexpr double kMinDataMagnitude = 1e-9;

std::span<const cd> flat(const CMatrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
std::span<cd> flat(CMatrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }

void require_uniform(std::span<const CMatrix> frames) {
    if (frames.empty()) {
        throw ConfigError("empty symbol stack");
    }
    for (const CMatrix& f : frames) {
        if (f.rows() != frames.front().rows() || f.cols() != frames.front().cols()) {
            throw ConfigError("symbol matrices differ in shape");
        }
    }
}

}  // namespace

CompensatedStack compensate(const FrameStack& frames) {
    require_uniform(frames.symbols);
    if (frames.data.size() != frames.symbols.size()) {
        throw ConfigError("one data vector per symbol required");
    }
    CompensatedStack out;
    out.hat_y.reserve(frames.symbols.size());
    for (std::size_t g = 0; g < frames.symbols.size(); ++g) {
        const CVector& x = frames.data[g];
        if (x.size() != frames.symbols[g].cols()) {
            throw ConfigError("data length differs from the subcarrier count");
        }
        if (x.cwiseAbs().minCoeff() < kMinDataMagnitude) {
            throw ConfigError("data symbol too small to divide by");
        }
        CMatrix y = frames.symbols[g];
        fft::transform_rows(y, fft::Direction::forward);
        const double unitary = 1.0 / std::sqrt(static_cast<double>(y.cols()));
        const Eigen::RowVectorXcd inv = (x.cwiseInverse() * unitary).transpose();
        y.array().rowwise() *= inv.array();
        out.hat_y.push_back(std::move(y));
    }
    return out;
}

MtiStack mti_cancel(const CompensatedStack& stack, int g_d) {
    require_uniform(stack.hat_y);
    const int g = static_cast<int>(stack.hat_y.size());
    if (g_d < 1 || g_d >= g) {
        throw ConfigError("canceller lag must lie in [1, G)");
    }
    MtiStack out{{}, g_d};
    out.breve_y.reserve(g - g_d);
    for (int s = g_d; s < g; ++s) {
        CMatrix d(stack.hat_y[s].rows(), stack.hat_y[s].cols());
        simd::sub(flat(stack.hat_y[s]), flat(stack.hat_y[s - g_d]), flat(d));
        out.breve_y.push_back(std::move(d));
    }
    return out;
}

MtiStack rma_cancel(const CompensatedStack& stack, double forgetting) {
    require_uniform(stack.hat_y);
    if (!(forgetting > 0.0 && forgetting <= 1.0)) {
        throw ConfigError("forgetting factor must lie in (0, 1]");
    }
    MtiStack out{{}, 0};
    out.breve_y.reserve(stack.hat_y.size());
    CMatrix avg = CMatrix::Zero(stack.hat_y.front().rows(), stack.hat_y.front().cols());
    for (const CMatrix& y : stack.hat_y) {
        avg *= 1.0 - forgetting;
        simd::axpy(cd(forgetting, 0.0), flat(y), flat(avg));
        CMatrix d(y.rows(), y.cols());
        simd::sub(flat(y), flat(avg), flat(d));
        out.breve_y.push_back(std::move(d));
    }
    return out;
}

std::vector<double> mti_power(const CompensatedStack& stack, int g_d) {
    require_uniform(stack.hat_y);
    const int g = static_cast<int>(stack.hat_y.size());
    if (g_d < 1 || g_d >= g) {
        throw ConfigError("canceller lag must lie in [1, G)");
    }
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(g - g_d));
    CMatrix d(stack.hat_y.front().rows(), stack.hat_y.front().cols());
    for (int s = g_d; s < g; ++s) {
        simd::sub(flat(stack.hat_y[s]), flat(stack.hat_y[s - g_d]), flat(d));
        out.push_back(simd::energy(flat(d)));
    }
    return out;
}

std::vector<double> rma_power(const CompensatedStack& stack, double forgetting) {
    require_uniform(stack.hat_y);
    if (!(forgetting > 0.0 && forgetting <= 1.0)) {
        throw ConfigError("forgetting factor must lie in (0, 1]");
    }
    std::vector<double> out;
    out.reserve(stack.hat_y.size());
    CMatrix avg = CMatrix::Zero(stack.hat_y.front().rows(), stack.hat_y.front().cols());
    CMatrix d(avg.rows(), avg.cols());
    for (const CMatrix& y : stack.hat_y) {
        avg *= 1.0 - forgetting;
        simd::axpy(cd(forgetting, 0.0), flat(y), flat(avg));
        simd::sub(flat(y), flat(avg), flat(d));
        out.push_back(simd::energy(flat(d)));
    }
    return out;
}

int select_antenna(std::span<const CMatrix> frames) {
    require_uniform(frames);
    Eigen::VectorXd power = Eigen::VectorXd::Zero(frames.front().rows());
    for (const CMatrix& f : frames) {
        power += f.rowwise().squaredNorm();
    }
    Eigen::Index best = 0;
    power.maxCoeff(&best);
    return static_cast<int>(best);
}

CMatrix stack_antenna_row(std::span<const CMatrix> frames, int m) {
    require_uniform(frames);
    if (m < 0 || m >= frames.front().rows()) {
        throw ConfigError("antenna index out of range");
    }
    CMatrix gamma(static_cast<Eigen::Index>(frames.size()), frames.front().cols());
    for (std::size_t g = 0; g < frames.size(); ++g) {
        gamma.row(static_cast<Eigen::Index>(g)) = frames[g].row(m);
    }
    return gamma;
}

}  // namespace pvn
