#include "dnls/pde.hpp"

#include <algorithm>
#include <cmath>

namespace dnls {

namespace {

class Stepper {
public:
    Stepper(std::size_t n, double dx, double dealias) : n_(n), fft_(n), k_(n), keep_(n) {
        const double L = dx * static_cast<double>(n);
        const double kmax = pi / dx;
        for (std::size_t j = 0; j < n; ++j) {
            const long m = j <= n / 2 ? static_cast<long>(j) : static_cast<long>(j) - static_cast<long>(n);
            k_[j] = 2.0 * pi * static_cast<double>(m) / L;
            keep_[j] = std::abs(k_[j]) <= dealias * kmax && !(n % 2 == 0 && j == n / 2);
        }
    }

    void linear(cvec& u, double dt) const {
        fft_.forward(u.data());
        const double s = 1.0 / static_cast<double>(n_);
        for (std::size_t j = 0; j < n_; ++j) u[j] *= std::exp(-I * k_[j] * k_[j] * dt) * s;
        fft_.backward(u.data());
    }

    // -(|u|^2 u)_x with the product dealiased before differentiation
    cvec rhs(const cvec& u) const {
        cvec f(n_);
        for (std::size_t j = 0; j < n_; ++j) f[j] = std::norm(u[j]) * u[j];
        fft_.forward(f.data());
        const double s = 1.0 / static_cast<double>(n_);
        for (std::size_t j = 0; j < n_; ++j) f[j] = keep_[j] ? -I * k_[j] * f[j] * s : 0.0;
        fft_.backward(f.data());
        return f;
    }

    void nonlinear(cvec& u, double dt) const {
        const cvec k1 = rhs(u);
        cvec t(n_);
        for (std::size_t j = 0; j < n_; ++j) t[j] = u[j] + 0.5 * dt * k1[j];
        const cvec k2 = rhs(t);
        for (std::size_t j = 0; j < n_; ++j) t[j] = u[j] + 0.5 * dt * k2[j];
        const cvec k3 = rhs(t);
        for (std::size_t j = 0; j < n_; ++j) t[j] = u[j] + dt * k3[j];
        const cvec k4 = rhs(t);
        for (std::size_t j = 0; j < n_; ++j) u[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }

private:
    std::size_t n_;
    Fft fft_;
    rvec k_;
    std::vector<bool> keep_;
};

double box_mass(const cvec& u, double dx) {
    double m = 0.0;
    for (const cplx& v : u) m += std::norm(v);
    return m * dx;
}

}  // namespace

EvolutionResult evolve_pde(const Potential& u0, const EvolutionConfig& cfg) {
    check_grid(u0.x_grid, false);
    if (!(cfg.dt > 0) || !(cfg.t_end >= 0)) throw ValidationError("evolution needs dt > 0 and t_end >= 0");
    if (cfg.pad_factor < 1) throw ValidationError("pad factor must be at least 1");
    if (!(cfg.dealias_fraction > 0 && cfg.dealias_fraction <= 1))
        throw ValidationError("dealias fraction must lie in (0, 1]");
    if (!u0.tails_decay(cfg.tail_threshold)) throw ValidationError("initial data does not decay at the window edges");

    const std::size_t n = u0.x_grid.n;
    const double dx = u0.x_grid.h();
    const std::size_t N = n * cfg.pad_factor;
    const std::size_t off = (N - n) / 2;
    cvec u(N, 0.0);
    std::copy(u0.u.begin(), u0.u.end(), u.begin() + static_cast<long>(off));

    Stepper st(N, dx, cfg.dealias_fraction);
    const double sup0 = std::max(sup_norm(u0.u), 1e-300);
    const double m0 = box_mass(u, dx);

    auto window = [&](const cvec& v) {
        return Potential(u0.x_grid, cvec(v.begin() + static_cast<long>(off), v.begin() + static_cast<long>(off + n)));
    };

    EvolutionResult R;
    const auto steps = static_cast<std::size_t>(std::ceil(cfg.t_end / cfg.dt - 1e-9));
    const double dt = steps > 0 ? cfg.t_end / static_cast<double>(steps) : 0.0;
    if (cfg.record_stride > 0) R.frames.push_back({0.0, u0});
    for (std::size_t s = 1; s <= steps; ++s) {
        st.linear(u, 0.5 * dt);
        st.nonlinear(u, dt);
        st.linear(u, 0.5 * dt);
        const double sup = sup_norm(u);
        if (!std::isfinite(sup) || sup > cfg.blowup_factor * sup0)
            throw ConvergenceError("PDE solution blew up at t = " + std::to_string(s * dt));
        if (m0 > 0) R.mass_drift = std::max(R.mass_drift, std::abs(box_mass(u, dx) - m0) / m0);
        if (cfg.record_stride > 0 && s % cfg.record_stride == 0) R.frames.push_back({s * dt, window(u)});
    }
    R.steps = steps;
    R.u = window(u);
    return R;
}

CompareMetrics compare(const Potential& u1, const Potential& u2) {
    cvec b = u2.u;
    if (!(u1.x_grid == u2.x_grid)) b = fourier_resample(u2.x_grid, u2.u, u1.x_grid.points());
    const double dx = u1.x_grid.h();
    CompareMetrics m;
    for (std::size_t i = 0; i < u1.u.size(); ++i) {
        const double d = std::abs(u1.u[i] - b[i]);
        const double x = u1.x_grid.at(i);
        m.sup = std::max(m.sup, d);
        m.l2 += d * d;
        m.weighted_l2 += (1.0 + x * x) * d * d;
    }
    m.l2 = std::sqrt(m.l2 * dx);
    m.weighted_l2 = std::sqrt(m.weighted_l2 * dx);
    return m;
}

}  // namespace dnls
