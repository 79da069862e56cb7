// Compiled with -mavx2 -mfma; only reached through the dispatcher after a CPU check.
#include "pvn/simd/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace pvn::simd {
namespace {

inline const double* raw(std::span<const cd> v) { return reinterpret_cast<const double*>(v.data()); }
inline double* raw(std::span<cd> v) { return reinterpret_cast<double*>(v.data()); }

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// [re, im] pairs swapped within each complex lane.
inline __m256d swap_pairs(__m256d v) { return _mm256_permute_pd(v, 0b0101); }

cd dot_conj_avx2(std::span<const cd> a, std::span<const cd> b) {
    const std::size_t n = a.size();
    const double* pa = raw(a);
    const double* pb = raw(b);
    __m256d same0 = _mm256_setzero_pd();
    __m256d same1 = _mm256_setzero_pd();
    __m256d cross0 = _mm256_setzero_pd();
    __m256d cross1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d va0 = _mm256_loadu_pd(pa + 2 * i);
        const __m256d vb0 = _mm256_loadu_pd(pb + 2 * i);
        const __m256d va1 = _mm256_loadu_pd(pa + 2 * i + 4);
        const __m256d vb1 = _mm256_loadu_pd(pb + 2 * i + 4);
        same0 = _mm256_fmadd_pd(va0, vb0, same0);
        same1 = _mm256_fmadd_pd(va1, vb1, same1);
        cross0 = _mm256_fmadd_pd(va0, swap_pairs(vb0), cross0);
        cross1 = _mm256_fmadd_pd(va1, swap_pairs(vb1), cross1);
    }
    for (; i + 2 <= n; i += 2) {
        const __m256d va = _mm256_loadu_pd(pa + 2 * i);
        const __m256d vb = _mm256_loadu_pd(pb + 2 * i);
        same0 = _mm256_fmadd_pd(va, vb, same0);
        cross0 = _mm256_fmadd_pd(va, swap_pairs(vb), cross0);
    }
    const __m256d same = _mm256_add_pd(same0, same1);
    const __m256d cross = _mm256_add_pd(cross0, cross1);
    // cross holds [ar*bi, ai*br]; the imaginary part is ai*br - ar*bi.
    const __m256d sign = _mm256_setr_pd(-1.0, 1.0, -1.0, 1.0);
    double re = hsum(same);
    double im = hsum(_mm256_mul_pd(cross, sign));
    for (; i < n; ++i) {
        re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
        im += a[i].imag() * b[i].real() - a[i].real() * b[i].imag();
    }
    return {re, im};
}

void axpy_avx2(cd alpha, std::span<const cd> x, std::span<cd> y) {
    const std::size_t n = x.size();
    const double* px = raw(x);
    double* py = raw(y);
    const __m256d vp = _mm256_set1_pd(alpha.real());
    const __m256d vq = _mm256_set1_pd(alpha.imag());
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d vx = _mm256_loadu_pd(px + 2 * i);
        const __m256d u = _mm256_mul_pd(swap_pairs(vx), vq);
        const __m256d prod = _mm256_fmaddsub_pd(vx, vp, u);
        _mm256_storeu_pd(py + 2 * i, _mm256_add_pd(_mm256_loadu_pd(py + 2 * i), prod));
    }
    for (; i < n; ++i) {
        y[i] += alpha * x[i];
    }
}

void mul_avx2(std::span<const cd> a, std::span<const cd> b, std::span<cd> out) {
    const std::size_t n = a.size();
    const double* pa = raw(a);
    const double* pb = raw(b);
    double* po = raw(out);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d va = _mm256_loadu_pd(pa + 2 * i);
        const __m256d vb = _mm256_loadu_pd(pb + 2 * i);
        const __m256d b_re = _mm256_movedup_pd(vb);
        const __m256d b_im = _mm256_permute_pd(vb, 0b1111);
        const __m256d u = _mm256_mul_pd(swap_pairs(va), b_im);
        _mm256_storeu_pd(po + 2 * i, _mm256_fmaddsub_pd(va, b_re, u));
    }
    for (; i < n; ++i) {
        out[i] = a[i] * b[i];
    }
}

void mul_conj_avx2(std::span<const cd> a, std::span<const cd> b, std::span<cd> out) {
    const std::size_t n = a.size();
    const double* pa = raw(a);
    const double* pb = raw(b);
    double* po = raw(out);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d va = _mm256_loadu_pd(pa + 2 * i);
        const __m256d vb = _mm256_loadu_pd(pb + 2 * i);
        const __m256d b_re = _mm256_movedup_pd(vb);
        const __m256d b_im = _mm256_permute_pd(vb, 0b1111);
        const __m256d u = _mm256_mul_pd(swap_pairs(va), b_im);
        _mm256_storeu_pd(po + 2 * i, _mm256_fmsubadd_pd(va, b_re, u));
    }
    for (; i < n; ++i) {
        out[i] = a[i] * std::conj(b[i]);
    }
}

void sub_avx2(std::span<const cd> a, std::span<const cd> b, std::span<cd> out) {
    const std::size_t n2 = 2 * a.size();
    const double* pa = raw(a);
    const double* pb = raw(b);
    double* po = raw(out);
    std::size_t i = 0;
    for (; i + 4 <= n2; i += 4) {
        _mm256_storeu_pd(po + i, _mm256_sub_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i)));
    }
    for (; i < n2; ++i) {
        po[i] = pa[i] - pb[i];
    }
}

double energy_avx2(std::span<const cd> a) {
    const std::size_t n2 = 2 * a.size();
    const double* pa = raw(a);
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n2; i += 8) {
        const __m256d v0 = _mm256_loadu_pd(pa + i);
        const __m256d v1 = _mm256_loadu_pd(pa + i + 4);
        acc0 = _mm256_fmadd_pd(v0, v0, acc0);
        acc1 = _mm256_fmadd_pd(v1, v1, acc1);
    }
    for (; i + 4 <= n2; i += 4) {
        const __m256d v = _mm256_loadu_pd(pa + i);
        acc0 = _mm256_fmadd_pd(v, v, acc0);
    }
    double total = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n2; ++i) {
        total += pa[i] * pa[i];
    }
    return total;
}

void magnitude_avx2(std::span<const cd> a, std::span<double> out) {
    const std::size_t n = a.size();
    const double* pa = raw(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d v = _mm256_loadu_pd(pa + 2 * i);
        const __m256d sq = _mm256_mul_pd(v, v);
        const __m256d pair = _mm256_hadd_pd(sq, sq);
        const __m256d packed = _mm256_permute4x64_pd(pair, 0b1000);
        _mm_storeu_pd(out.data() + i, _mm_sqrt_pd(_mm256_castpd256_pd128(packed)));
    }
    for (; i < n; ++i) {
        out[i] = std::sqrt(a[i].real() * a[i].real() + a[i].imag() * a[i].imag());
    }
}

}  // namespace

const KernelTable* avx2_table() {
    static const KernelTable table{dot_conj_avx2, axpy_avx2,   mul_avx2,      mul_conj_avx2,
                                   sub_avx2,      energy_avx2, magnitude_avx2};
    return &table;
}

}  // namespace pvn::simd
