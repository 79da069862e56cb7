#pragma once

#include "pvn/ofdm.hpp"
#include "pvn/rng.hpp"
#include "pvn/scenario.hpp"

#include <cmath>
#include <vector>

namespace pvn::test {

/// Reduced numerology for fast tests.
inline OfdmConfig small_ofdm(int g = 16, int m_r = 8, int n_sub = 32, int n_cp = 4) {
    OfdmConfig c;
    c.g_symbols = g;
    c.m_r = m_r;
    c.n_sub = n_sub;
    c.n_cp = n_cp;
    return c;
}

inline CVector random_vector(Rng& rng, Eigen::Index n) {
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v[i] = complex_normal(rng, 1.0);
    }
    return v;
}

inline CMatrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
    CMatrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        m.data()[i] = complex_normal(rng, 1.0);
    }
    return m;
}

/// Direct O(N^2) forward DFT.
inline std::vector<cd> naive_dft(const std::vector<cd>& x) {
    const auto n = x.size();
    std::vector<cd> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        cd acc{0.0, 0.0};
        for (std::size_t i = 0; i < n; ++i) {
            acc += x[i] * expj(-kTwoPi * static_cast<double>(k * i % n) / static_cast<double>(n));
        }
        out[k] = acc;
    }
    return out;
}

/// Direct 2-D DFT of a real matrix zero padded to rows x cols.
inline CMatrix naive_dft2(const RMatrix& x, Eigen::Index rows, Eigen::Index cols) {
    CMatrix out(rows, cols);
    for (Eigen::Index k = 0; k < rows; ++k) {
        for (Eigen::Index n = 0; n < cols; ++n) {
            cd acc{0.0, 0.0};
            for (Eigen::Index g = 0; g < x.rows(); ++g) {
                for (Eigen::Index t = 0; t < x.cols(); ++t) {
                    const double ph = static_cast<double>(k * g % rows) / rows + static_cast<double>(n * t % cols) / cols;
                    acc += x(g, t) * expj(-kTwoPi * ph);
                }
            }
            out(k, n) = acc;
        }
    }
    return out;
}

template <typename A, typename B>
double relative_error(const A& a, const B& b) {
    return (a - b).norm() / std::max(b.norm(), 1e-300);
}

/// Single path with explicit parameters.
inline PathParam make_path(cd gain, double doa, double delay, double doppler, bool is_static = false) {
    PathParam p;
    p.gain = gain;
    p.doa = doa;
    p.aod = 0.3;
    p.delay = delay;
    p.doppler = doppler;
    p.is_static = is_static;
    return p;
}

}  // namespace pvn::test
