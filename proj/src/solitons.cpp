#include "dnls/solitons.hpp"

#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace dnls {

SolitonParams params_from_pole(cplx z1, cplx c1) {
    if (!(z1.imag() > 0)) throw ValidationError("soliton pole must have Im z > 0");
    if (c1 == 0.0) throw ValidationError("soliton norming constant must be nonzero");
    SolitonParams p;
    p.omega = 4.0 * std::norm(z1);
    p.v = -4.0 * z1.real();
    const double kappa = std::sqrt(4.0 * p.omega - p.v * p.v);
    p.x0 = 2.0 * std::log(std::abs(c1) / (2.0 * z1.imag())) / kappa;
    p.gamma = std::arg(c1) + pi / 2 - 0.5 * std::arg(z1);
    return p;
}

std::pair<cplx, cplx> pole_from_params(const SolitonParams& p) {
    const double k2 = 4.0 * p.omega - p.v * p.v;
    if (!(p.omega > 0) || !(k2 > 0)) throw ValidationError("soliton parameters need v^2 < 4 omega");
    const double kappa = std::sqrt(k2);
    const cplx z1{-p.v / 4.0, kappa / 4.0};
    const double mod = 2.0 * z1.imag() * std::exp(p.x0 * kappa / 2.0);
    const double arg = p.gamma - pi / 2 + 0.5 * std::arg(z1);
    return {z1, std::polar(mod, arg)};
}

double soliton_amplitude(double omega, double v, double y) {
    const double k2 = 4.0 * omega - v * v;
    const double kappa = std::sqrt(k2);
    const double e = v / (2.0 * std::sqrt(omega));
    const double ky = kappa * std::abs(y);
    if (ky > 700.0) return 0.0;
    return 1.0 / std::sqrt(std::sqrt(omega) / k2 * (std::cosh(ky) - e));
}

namespace {

// antiderivative of phi^2 = (kappa^2/sqrt(omega)) / (cosh(kappa y) - e)
double mass_antiderivative(double omega, double v, double th) {
    const double kappa = std::sqrt(4.0 * omega - v * v);
    const double e = v / (2.0 * std::sqrt(omega));
    const double pref = kappa * kappa / std::sqrt(omega) * 2.0 / (kappa * std::sqrt(1.0 - e * e));
    return pref * std::atan(std::sqrt((1.0 + e) / (1.0 - e)) * th);
}

}  // namespace

double soliton_mass_tail(double omega, double v, double y) {
    const double kappa = std::sqrt(4.0 * omega - v * v);
    return mass_antiderivative(omega, v, 1.0) - mass_antiderivative(omega, v, std::tanh(kappa * y / 2.0));
}

double soliton_mass(double omega, double v) {
    return mass_antiderivative(omega, v, 1.0) - mass_antiderivative(omega, v, -1.0);
}

cplx one_soliton(const SolitonParams& p, double x, double t) {
    const double y = x - p.v * t - p.x0;
    const double amp = soliton_amplitude(p.omega, p.v, y);
    const double phase =
        -p.gamma + p.omega * t + 0.5 * p.v * (x - p.v * t) + 0.75 * soliton_mass_tail(p.omega, p.v, y);
    return std::polar(amp, phase);
}

Potential one_soliton(const SolitonParams& p, const RealGrid& xgrid, double t) {
    pole_from_params(p);  // admissibility
    return Potential::sample(xgrid, [&](double x) { return one_soliton(p, x, t); });
}

NSolitonMoments n_soliton_moments(const std::vector<PoleData>& poles, double x, double t) {
    const std::size_t N = poles.size();
    if (N == 0) return {0.0, 0.0};
    for (std::size_t k = 0; k < N; ++k) {
        if (!(poles[k].z.imag() > 0)) throw ValidationError("pole must have Im z > 0");
        for (std::size_t j = 0; j < k; ++j)
            if (std::abs(poles[k].z - poles[j].z) < 1e-12) throw ValidationError("coincident poles");
    }
    std::vector<cplx> C(N), D(N);
    for (std::size_t k = 0; k < N; ++k) {
        const cplx z = poles[k].z, lam = poles[k].lambda, c = poles[k].c;
        const cplx zb = std::conj(z);
        C[k] = 2.0 * I * lam * c * std::exp(2.0 * I * x * z + 4.0 * I * t * z * z);
        D[k] = -std::conj(c) * std::exp(-2.0 * I * x * zb - 4.0 * I * t * zb * zb) / (2.0 * I * std::conj(lam));
    }
    // unknowns per row: A_k (k < N), B_k (k >= N)
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(2 * N, 2 * N);
    for (std::size_t k = 0; k < N; ++k)
        for (std::size_t j = 0; j < N; ++j) {
            M(k, N + j) = -C[k] / (poles[k].z - std::conj(poles[j].z));
            M(N + k, j) = -D[k] / (std::conj(poles[k].z) - poles[j].z);
        }
    Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(2 * N, 2);
    for (std::size_t k = 0; k < N; ++k) {
        rhs(N + k, 0) = D[k];
        rhs(k, 1) = C[k];
    }
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
    const double rc = lu.rcond();
    if (!(rc > 1e-13)) throw SingularMatrixError("n-soliton system is singular", rc > 0 ? 1.0 / rc : INFINITY);
    const Eigen::MatrixXcd X = lu.solve(rhs);
    NSolitonMoments out{0.0, 0.0};
    cplx m12 = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
        m12 += X(N + k, 0);
        out.mom21 += X(k, 1);
    }
    out.w = -4.0 * m12;
    return out;
}

namespace {

double tail_integral(const std::vector<PoleData>& poles, double x, double t) {
    using boost::math::quadrature::gauss_kronrod;
    auto f = [&](double y) { return std::norm(n_soliton_moments(poles, y, t).w); };
    return gauss_kronrod<double, 31>::integrate(f, x, std::numeric_limits<double>::infinity(), 15, 1e-14);
}

}  // namespace

cplx n_soliton(const std::vector<PoleData>& poles, double x, double t) {
    const cplx w = n_soliton_moments(poles, x, t).w;
    return w * std::exp(I * tail_integral(poles, x, t));
}

Potential n_soliton(const std::vector<PoleData>& poles, const RealGrid& xgrid, double t) {
    const std::size_t n = xgrid.n;
    cvec w(n);
    rvec d(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = n_soliton_moments(poles, xgrid.at(i), t).w;
        d[i] = std::norm(w[i]);
    }
    const rvec phi = cumulative_from_right(d, xgrid.h());
    const double beyond = poles.empty() ? 0.0 : tail_integral(poles, xgrid.z_max, t);
    cvec u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = w[i] * std::exp(I * (phi[i] + beyond));
    return Potential(xgrid, std::move(u));
}

}  // namespace dnls
