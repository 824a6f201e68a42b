#pragma once

#include <utility>
#include <vector>

#include "dnls/scattering.hpp"

namespace dnls {

struct SolitonParams {
    double omega = 0.25;
    double v = 0.0;
    double x0 = 0.0;
    double gamma = 0.0;
};

SolitonParams params_from_pole(cplx z1, cplx c1);
std::pair<cplx, cplx> pole_from_params(const SolitonParams& p);

// phi_{omega,v}(y)
double soliton_amplitude(double omega, double v, double y);
// int_y^inf phi^2, closed form
double soliton_mass_tail(double omega, double v, double y);
double soliton_mass(double omega, double v);

cplx one_soliton(const SolitonParams& p, double x, double t);
Potential one_soliton(const SolitonParams& p, const RealGrid& xgrid, double t);

struct NSolitonMoments {
    cplx w;      // -4 lim z m12
    cplx mom21;  // lim z m21
};

NSolitonMoments n_soliton_moments(const std::vector<PoleData>& poles, double x, double t);
cplx n_soliton(const std::vector<PoleData>& poles, double x, double t);
Potential n_soliton(const std::vector<PoleData>& poles, const RealGrid& xgrid, double t);

}  // namespace dnls
