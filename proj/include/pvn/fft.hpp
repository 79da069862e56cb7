#pragma once

#include "pvn/types.hpp"

#include <span>

namespace pvn::fft {

enum class Direction { forward, backward };

/// Unnormalized in-place 1-D DFT. forward uses e^{-j}, backward e^{+j}.
void transform(std::span<cd> data, Direction dir);

/// Unnormalized in-place 1-D DFT of every row of a row-major matrix.
void transform_rows(CMatrix& m, Direction dir);

/// Forward 2-D DFT of a real matrix zero-padded to rows x cols. Returns the full complex grid.
CMatrix real_forward_2d(const RMatrix& input, Eigen::Index rows, Eigen::Index cols);

/// c[q] = sum_i u[(q+i) mod n] * conj(z[i]) for all q, via the convolution theorem.
std::vector<cd> circular_xcorr(std::span<const cd> u, std::span<const cd> z);

}  // namespace pvn::fft
