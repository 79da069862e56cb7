#include "pvn/simd/kernels.hpp"

#include <cmath>

namespace pvn::simd {
namespace {

cd dot_conj_ref(std::span<const cd> a, std::span<const cd> b) {
    double re = 0.0;
    double im = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
        im += a[i].imag() * b[i].real() - a[i].real() * b[i].imag();
    }
    return {re, im};
}

void axpy_ref(cd alpha, std::span<const cd> x, std::span<cd> y) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] += alpha * x[i];
    }
}

void mul_ref(std::span<const cd> a, std::span<const cd> b, std::span<cd> out) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = a[i] * b[i];
    }
}

void mul_conj_ref(std::span<const cd> a, std::span<const cd> b, std::span<cd> out) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = a[i] * std::conj(b[i]);
    }
}

void sub_ref(std::span<const cd> a, std::span<const cd> b, std::span<cd> out) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = a[i] - b[i];
    }
}

double energy_ref(std::span<const cd> a) {
    double acc = 0.0;
    for (const cd& v : a) {
        acc += v.real() * v.real() + v.imag() * v.imag();
    }
    return acc;
}

void magnitude_ref(std::span<const cd> a, std::span<double> out) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = std::hypot(a[i].real(), a[i].imag());
    }
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable table{dot_conj_ref, axpy_ref, mul_ref, mul_conj_ref, sub_ref, energy_ref, magnitude_ref};
    return table;
}

}  // namespace pvn::simd
