#pragma once

#include <vector>

#include "dnls/direct.hpp"

namespace dnls {

struct EvolutionConfig {
    double dt = 1e-3;
    double t_end = 1.0;
    double dealias_fraction = 2.0 / 3.0;
    std::size_t record_stride = 0;  // 0: no frames
    // the periodic box is the input window zero-padded to pad_factor times its length
    std::size_t pad_factor = 4;
    double tail_threshold = 1e-4;
    double blowup_factor = 10.0;
};

struct Frame {
    double t;
    Potential u;
};

struct EvolutionResult {
    Potential u;
    std::vector<Frame> frames;
    double mass_drift = 0.0;  // max |M(t) - M(0)| / M(0) over the steps
    std::size_t steps = 0;
};

// Split-step spectral integration of i u_t + u_xx + i (|u|^2 u)_x = 0.
EvolutionResult evolve_pde(const Potential& u0, const EvolutionConfig& cfg = {});

struct CompareMetrics {
    double sup = 0.0;
    double l2 = 0.0;
    double weighted_l2 = 0.0;  // weight (1 + x^2)^{1/2}
};

// u2 is resampled onto the grid of u1 when the grids differ.
CompareMetrics compare(const Potential& u1, const Potential& u2);

}  // namespace dnls
