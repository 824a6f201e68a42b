#pragma once

#include <cmath>
#include <functional>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dnls/numerics.hpp"

namespace oracle {

using dnls::cplx;

// (1/pi) pv int_{-L}^{L} f(s)/(s-z) ds via singularity subtraction.
inline cplx pv_hilbert(const std::function<cplx(double)>& f, double L, double z) {
    using boost::math::quadrature::gauss_kronrod;
    const cplx fz = f(z);
    auto g = [&](double s) {
        if (std::abs(s - z) < 1e-13) return cplx(0.0);
        return (f(s) - fz) / (s - z);
    };
    auto re = [&](double s) { return g(s).real(); };
    auto im = [&](double s) { return g(s).imag(); };
    double r = 0.0, i = 0.0;
    for (auto [a, b] : {std::pair{-L, z}, std::pair{z, L}}) {
        r += gauss_kronrod<double, 61>::integrate(re, a, b, 20, 1e-15);
        i += gauss_kronrod<double, 61>::integrate(im, a, b, 20, 1e-15);
    }
    return (cplx(r, i) + fz * std::log((L - z) / (L + z))) / dnls::pi;
}

// Random sum of Gaussian wave packets (width 2.5) centred at |k| in [3, 8]; the DC
// content is below 1e-11.
inline std::function<cplx(double)> wave_packets(std::mt19937_64& rng, double L) {
    std::uniform_real_distribution<double> pos(-L / 4, L / 4), k(3.0, 8.0), ph(0.0, 2 * dnls::pi), amp(0.2, 1.0),
        sgn(-1.0, 1.0);
    struct Packet {
        double a, x0, k, phi;
    };
    std::vector<Packet> ps;
    for (int j = 0; j < 4; ++j) ps.push_back({amp(rng), pos(rng), (sgn(rng) < 0 ? -1.0 : 1.0) * k(rng), ph(rng)});
    return [ps](double x) {
        cplx s = 0.0;
        for (const auto& p : ps) {
            const double y = x - p.x0;
            s += p.a * std::exp(-y * y / 12.5) * std::exp(dnls::I * (p.k * y + p.phi));
        }
        return s;
    };
}

}  // namespace oracle
