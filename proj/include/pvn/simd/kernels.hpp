#pragma once

#include <complex>
#include <span>
#include <string_view>

namespace pvn::simd {

using cd = std::complex<double>;

enum class Level { scalar, avx2 };

/// Function table for the complex-vector kernels. Every entry has a scalar
/// reference and an AVX2+FMA variant with identical semantics.
struct KernelTable {
    /// sum_i a[i] * conj(b[i])
    cd (*dot_conj)(std::span<const cd> a, std::span<const cd> b);
    /// y[i] += alpha * x[i]
    void (*axpy)(cd alpha, std::span<const cd> x, std::span<cd> y);
    /// out[i] = a[i] * b[i]
    void (*mul)(std::span<const cd> a, std::span<const cd> b, std::span<cd> out);
    /// out[i] = a[i] * conj(b[i])
    void (*mul_conj)(std::span<const cd> a, std::span<const cd> b, std::span<cd> out);
    /// out[i] = a[i] - b[i]
    void (*sub)(std::span<const cd> a, std::span<const cd> b, std::span<cd> out);
    /// sum_i |a[i]|^2
    double (*energy)(std::span<const cd> a);
    /// out[i] = |a[i]|
    void (*magnitude)(std::span<const cd> a, std::span<double> out);
};

const KernelTable& scalar_table();
/// Null when the binary was built without the AVX2 translation unit.
const KernelTable* avx2_table();

/// Best level supported by the running CPU.
Level detect_level();
/// Currently dispatched level; defaults to detect_level() unless PVN_SIMD=scalar is set.
Level active_level();
/// Forces a level for the rest of the process. Requesting avx2 on a CPU without it throws.
void set_level(Level level);
std::string_view level_name(Level level);

const KernelTable& kernels();

inline cd dot_conj(std::span<const cd> a, std::span<const cd> b) { return kernels().dot_conj(a, b); }
inline void axpy(cd alpha, std::span<const cd> x, std::span<cd> y) { kernels().axpy(alpha, x, y); }
inline void mul(std::span<const cd> a, std::span<const cd> b, std::span<cd> out) { kernels().mul(a, b, out); }
inline void mul_conj(std::span<const cd> a, std::span<const cd> b, std::span<cd> out) {
    kernels().mul_conj(a, b, out);
}
inline void sub(std::span<const cd> a, std::span<const cd> b, std::span<cd> out) { kernels().sub(a, b, out); }
inline double energy(std::span<const cd> a) { return kernels().energy(a); }
inline void magnitude(std::span<const cd> a, std::span<double> out) { kernels().magnitude(a, out); }

}  // namespace pvn::simd
