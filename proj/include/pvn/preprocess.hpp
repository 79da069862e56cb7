#pragma once

#include "pvn/waveform.hpp"

#include <span>
#include <vector>

namespace pvn {

/// Equivalent-channel matrices after removing data and the IDFT.
struct CompensatedStack {
    std::vector<CMatrix> hat_y;
};

/// Clutter-cancelled stack. g_d is the canceller lag, 0 for the recursive baseline.
struct MtiStack {
    std::vector<CMatrix> breve_y;
    int g_d = 0;
};

CompensatedStack compensate(const FrameStack& frames);

/// Y_g - Y_{g-G_d} for g = G_d..G-1.
MtiStack mti_cancel(const CompensatedStack& stack, int g_d);

/// Recursive moving-average canceller: avg <- (1-a) avg + a Y_g, output Y_g - avg, avg starting at zero.
MtiStack rma_cancel(const CompensatedStack& stack, double forgetting);

/// Frame powers of mti_cancel(stack, g_d) without storing the cancelled stack.
std::vector<double> mti_power(const CompensatedStack& stack, int g_d);

/// Frame powers of rma_cancel(stack, forgetting) without storing the cancelled stack.
std::vector<double> rma_power(const CompensatedStack& stack, double forgetting);

/// Antenna with the largest summed row power.
int select_antenna(std::span<const CMatrix> frames);

/// Row g holds antenna m of frame g.
CMatrix stack_antenna_row(std::span<const CMatrix> frames, int m);

}  // namespace pvn
