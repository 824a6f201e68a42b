#include "dnls/direct.hpp"

#include <algorithm>
#include <cmath>

namespace dnls {

Potential::Potential(RealGrid g, cvec values) : x_grid(g), u(std::move(values)) {
    if (u.size() != x_grid.n) throw ValidationError("potential length mismatch");
}

Potential Potential::sample(const RealGrid& g, const std::function<cplx(double)>& f) {
    cvec v(g.n);
    for (std::size_t i = 0; i < g.n; ++i) v[i] = f(g.at(i));
    return Potential(g, std::move(v));
}

cvec Potential::u_x() const { return spectral_derivative(u, x_grid.h()); }

rvec Potential::mass_from_right() const {
    rvec d(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) d[i] = std::norm(u[i]);
    return cumulative_from_right(d, x_grid.h());
}

double Potential::mass() const { return mass_from_right().front(); }

cvec Potential::w() const {
    rvec phi = mass_from_right();
    cvec out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] * std::exp(-I * phi[i]);
    return out;
}

cvec Potential::v() const {
    rvec phi = mass_from_right();
    cvec out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = std::conj(u[i]) * std::exp(-0.5 * I * phi[i]);
    return out;
}

bool Potential::tails_decay(double threshold) const {
    return std::abs(u.front()) <= threshold && std::abs(u.back()) <= threshold;
}

Mat2 assemble_Q1(cplx u, cplx ux) {
    const double a = std::norm(u);
    Mat2 Q;
    Q << a, u, -2.0 * I * std::conj(ux) - std::conj(u) * a, -a;
    return Q / (2.0 * I);
}

Mat2 assemble_Q2(cplx u, cplx ux) {
    const double a = std::norm(u);
    Mat2 Q;
    Q << a, -2.0 * I * ux + u * a, -std::conj(u), -a;
    return Q / (2.0 * I);
}

Mat2 expm2(const Mat2& B) {
    const cplx half_tr = 0.5 * (B(0, 0) + B(1, 1));
    Mat2 B0 = B;
    B0(0, 0) -= half_tr;
    B0(1, 1) -= half_tr;
    const cplx s2 = B0(0, 0) * B0(0, 0) + B0(0, 1) * B0(1, 0);
    cplx ch, sh;
    if (std::abs(s2) < 1e-6) {
        ch = 1.0 + s2 / 2.0 + s2 * s2 / 24.0;
        sh = 1.0 + s2 / 6.0 + s2 * s2 / 120.0;
    } else {
        const cplx s = std::sqrt(s2);
        ch = std::cosh(s);
        sh = std::sinh(s) / s;
    }
    Mat2 out = sh * B0;
    out(0, 0) += ch;
    out(1, 1) += ch;
    return std::exp(half_tr) * out;
}

// ---------------------------------------------------------------------------

JostPropagator::JostPropagator(const Potential& pot, JostOptions opt) : pot_(pot), k_(opt.upsample_log2) {
    check_grid(pot.x_grid, false);
    if (k_ < 1) throw ValidationError("Jost integrator needs at least one level of upsampling");
    const std::size_t n = pot.x_grid.n;
    const double dx = pot.x_grid.h();
    cvec uf = upsample(pot.u, k_);
    cvec uxf = upsample(spectral_derivative(pot.u, dx), k_);
    const std::size_t nf = uf.size();
    steps_ = (nf - 1) / 2;
    H_ = 2.0 * dx / static_cast<double>(std::size_t(1) << k_);
    (void)n;
    b0q1_.resize(steps_);
    b1q1_.resize(steps_);
    b0q2_.resize(steps_);
    b1q2_.resize(steps_);
    for (std::size_t s = 0; s < steps_; ++s) {
        const std::size_t i0 = 2 * s, im = 2 * s + 1, i1 = 2 * s + 2;
        Mat2 q10 = assemble_Q1(uf[i0], uxf[i0]), q1m = assemble_Q1(uf[im], uxf[im]),
             q11 = assemble_Q1(uf[i1], uxf[i1]);
        Mat2 q20 = assemble_Q2(uf[i0], uxf[i0]), q2m = assemble_Q2(uf[im], uxf[im]),
             q21 = assemble_Q2(uf[i1], uxf[i1]);
        b0q1_[s] = H_ / 6.0 * (q10 + 4.0 * q1m + q11);
        b1q1_[s] = H_ / 12.0 * (q11 - q10);
        b0q2_[s] = H_ / 6.0 * (q20 + 4.0 * q2m + q21);
        b1q2_[s] = H_ / 12.0 * (q21 - q20);
    }
}

void JostPropagator::step(Vec2& y, std::size_t s, cplx z, bool msys, bool backward) const {
    Mat2 B0 = msys ? b0q1_[s] : b0q2_[s];
    const Mat2& B1 = msys ? b1q1_[s] : b1q2_[s];
    if (msys)
        B0(1, 1) += H_ * 2.0 * I * z;
    else
        B0(0, 0) -= H_ * 2.0 * I * z;
    if (backward) B0 = -B0;
    y = expm2(0.5 * B0 + 2.0 * B1) * (expm2(0.5 * B0 - 2.0 * B1) * y);
}

Vec2 JostPropagator::m_minus_at_end(cplx z) const {
    Vec2 y(1.0, 0.0);
    for (std::size_t s = 0; s < steps_; ++s) step(y, s, z, true, false);
    return y;
}

JostSolution JostPropagator::solve(cplx z, JostKind kind) const {
    const bool msys = kind == JostKind::MMinus || kind == JostKind::MPlus;
    const bool from_left = kind == JostKind::MMinus || kind == JostKind::NMinus;
    if ((kind == JostKind::MMinus || kind == JostKind::NPlus) && z.imag() < 0)
        throw ValidationError("M-/N+ need Im z >= 0");
    if ((kind == JostKind::MPlus || kind == JostKind::NMinus) && z.imag() > 0)
        throw ValidationError("M+/N- need Im z <= 0");
    const std::size_t n = pot_.x_grid.n;
    const std::size_t per = std::size_t(1) << (k_ - 1);  // Magnus steps per coarse cell
    JostSolution out{z, kind, std::vector<Vec2>(n), 0.0};
    Vec2 e = msys ? Vec2(1.0, 0.0) : Vec2(0.0, 1.0);
    Vec2 y = e;
    if (from_left) {
        out.values[0] = y;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            for (std::size_t s = i * per; s < (i + 1) * per; ++s) step(y, s, z, msys, false);
            out.values[i + 1] = y;
        }
        out.boundary_deviation = (out.values[1] - e).norm();
    } else {
        out.values[n - 1] = y;
        for (std::size_t i = n - 1; i > 0; --i) {
            for (std::size_t s = i * per; s-- > (i - 1) * per;) step(y, s, z, msys, true);
            out.values[i - 1] = y;
        }
        out.boundary_deviation = (out.values[n - 2] - e).norm();
    }
    return out;
}

JostSolution solve_jost(const Potential& pot, cplx z, JostKind which, JostOptions opt) {
    return JostPropagator(pot, opt).solve(z, which);
}

// ---------------------------------------------------------------------------

TransferData compute_transfer(const Potential& pot, const RealGrid& zgrid, TransferOptions opt) {
    return compute_transfer(JostPropagator(pot, opt.jost), zgrid, opt);
}

TransferData compute_transfer(const JostPropagator& prop, const RealGrid& zgrid, TransferOptions opt) {
    check_grid(zgrid);
    const std::size_t n = zgrid.n;
    const double X = prop.potential().x_grid.z_max;
    cvec a(n), rm(n), rp(n);
    parallel_for(n, opt.threads, [&](std::size_t i) {
        const double z = zgrid.at(i);
        Vec2 m = prop.m_minus_at_end(z);
        a[i] = m(0);
        rm[i] = m(1) * std::exp(-2.0 * I * X * z) / m(0);
        rp[i] = z != 0.0 ? rm[i] / (4.0 * z) : cplx(0.0);
    });
    for (std::size_t i = 0; i < n; ++i) {
        if (zgrid.at(i) != 0.0) continue;
        // quadratic extrapolation from offsets -2, -1, +1, +2
        if (i >= 2 && i + 2 < n)
            rp[i] = (4.0 * (rp[i - 1] + rp[i + 1]) - (rp[i - 2] + rp[i + 2])) / 6.0;
        else if (i >= 1 && i + 1 < n)
            rp[i] = 0.5 * (rp[i - 1] + rp[i + 1]);
    }
    TransferData td;
    td.a = GridFunction(zgrid, a);
    td.r_plus = GridFunction(zgrid, rp);
    td.r_minus = GridFunction(zgrid, rm);
    double sup_neg = 0.0, mina = std::numeric_limits<double>::infinity(), cons = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = zgrid.at(i);
        const double aa = std::abs(a[i]);
        mina = std::min(mina, aa);
        if (z < 0) sup_neg = std::max(sup_neg, aa);
        if (z != 0.0) cons = std::max(cons, std::abs(aa * aa * (1.0 + std::conj(rp[i]) * rm[i]) - 1.0));
    }
    td.c0 = sup_neg > 0 ? 1.0 / sup_neg : 1.0;
    td.min_abs_a = mina;
    td.conservation_error = cons;
    auto shared = std::make_shared<JostPropagator>(prop);
    td.a_offline = [shared](cplx z) { return shared->a(z); };
    if (opt.check_resonance && mina < opt.resonance_threshold)
        throw ResonanceError("min |a| on the real grid is " + std::to_string(mina) +
                             ", below the resonance threshold");
    return td;
}

// ---------------------------------------------------------------------------

cplx first_quadrant_sqrt(cplx z) {
    cplx s = std::sqrt(z);
    if (s.real() < 0) s = -s;
    return s;
}

cplx a_derivative(const JostPropagator& prop, cplx z, double r, int nodes) {
    cplx acc = 0.0;
    for (int j = 0; j < nodes; ++j) {
        const cplx e = std::exp(I * (2.0 * pi * j / nodes));
        acc += prop.a(z + r * e) / e;
    }
    return acc / (static_cast<double>(nodes) * r);
}

namespace {

double arg_change(const JostPropagator& prop, cplx z0, cplx z1, cplx a0, cplx a1, int depth) {
    const double d = std::arg(a1 / a0);
    if (depth > 0 && (std::abs(d) > pi / 4 || std::abs(a1 - a0) > 0.5 * std::min(std::abs(a0), std::abs(a1)))) {
        const cplx zm = 0.5 * (z0 + z1);
        const cplx am = prop.a(zm);
        return arg_change(prop, z0, zm, a0, am, depth - 1) + arg_change(prop, zm, z1, am, a1, depth - 1);
    }
    return d;
}

double rect_winding(const JostPropagator& prop, const Rect& r) {
    const cplx corners[4] = {{r.re_min, r.im_min}, {r.re_max, r.im_min}, {r.re_max, r.im_max}, {r.re_min, r.im_max}};
    double total = 0.0;
    for (int e = 0; e < 4; ++e) {
        const cplx z0 = corners[e], z1 = corners[(e + 1) % 4];
        // a varies on the scale of the eigenvalue heights near the axis; coarse steps alias whole turns
        const int seg = std::max(32, static_cast<int>(std::ceil(std::abs(z1 - z0) / 0.05)));
        cplx zp = z0, ap = prop.a(z0);
        for (int j = 1; j <= seg; ++j) {
            const cplx zn = z0 + (z1 - z0) * (double(j) / seg);
            const cplx an = prop.a(zn);
            total += arg_change(prop, zp, zn, ap, an, 18);
            zp = zn;
            ap = an;
        }
    }
    return total / (2.0 * pi);
}

bool newton(const JostPropagator& prop, cplx& z, const Rect& box, const EigenOptions& opt) {
    const double wr = box.re_max - box.re_min, wi = box.im_max - box.im_min;
    for (int it = 0; it < 60; ++it) {
        const cplx a = prop.a(z);
        if (std::abs(a) <= opt.newton_tol) return true;
        const double rad = std::min(0.01, 0.5 * z.imag());
        const cplx ap = a_derivative(prop, z, rad);
        if (std::abs(ap) == 0.0) return false;
        cplx dz = a / ap;
        const double lim = 0.5 * std::max(wr, wi);
        if (std::abs(dz) > lim) dz *= lim / std::abs(dz);
        z -= dz;
        if (z.imag() <= 0.0) return false;
        if (z.real() < box.re_min - wr || z.real() > box.re_max + wr || z.imag() > box.im_max + wi ||
            z.imag() < box.im_min - wi)
            return false;
    }
    return std::abs(prop.a(z)) <= opt.newton_tol;
}

void search(const JostPropagator& prop, const Rect& r, int count, int depth, const EigenOptions& opt,
            std::vector<cplx>& roots) {
    if (count <= 0) return;
    if (count == 1) {
        cplx z{0.5 * (r.re_min + r.re_max), 0.5 * (r.im_min + r.im_max)};
        if (newton(prop, z, r, opt)) {
            const double slack = 1e-8;
            if (z.real() >= r.re_min - slack && z.real() <= r.re_max + slack && z.imag() >= r.im_min - slack &&
                z.imag() <= r.im_max + slack) {
                roots.push_back(z);
                return;
            }
        }
    }
    if (depth >= opt.max_depth) throw ConvergenceError("eigenvalue search lost a root (Newton/winding disagreement)");
    // split the longer side slightly off-centre
    Rect a = r, b = r;
    if (r.re_max - r.re_min >= r.im_max - r.im_min) {
        const double s = r.re_min + 0.4837 * (r.re_max - r.re_min);
        a.re_max = s;
        b.re_min = s;
    } else {
        const double s = r.im_min + 0.4837 * (r.im_max - r.im_min);
        a.im_max = s;
        b.im_min = s;
    }
    const int ca = static_cast<int>(std::lround(rect_winding(prop, a)));
    const int cb = count - ca;
    search(prop, a, ca, depth + 1, opt, roots);
    search(prop, b, cb, depth + 1, opt, roots);
}

}  // namespace

int winding_number(const JostPropagator& prop, const Rect& region) {
    return static_cast<int>(std::lround(rect_winding(prop, region)));
}

std::vector<cplx> find_eigenvalues(const JostPropagator& prop, const Rect& region, EigenOptions opt) {
    if (region.im_min < 0.01) throw ValidationError("search region must stay 0.01 above the real axis");
    const int count = winding_number(prop, region);
    if (count < 0) throw ConvergenceError("negative winding number; a is not analytic in the region");
    std::vector<cplx> roots;
    search(prop, region, count, 0, opt, roots);
    if (static_cast<int>(roots.size()) != count)
        throw ConvergenceError("eigenvalue count mismatch between winding number and Newton");
    for (auto z : roots) {
        const cplx ap = a_derivative(prop, z, std::min(0.01, 0.5 * z.imag()));
        if (std::abs(ap) < opt.simplicity_threshold) throw ValidationError("eigenvalue is not simple");
    }
    std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
    return roots;
}

std::vector<cplx> find_eigenvalues(const Potential& pot, const Rect& region, EigenOptions opt) {
    return find_eigenvalues(JostPropagator(pot), region, opt);
}

// ---------------------------------------------------------------------------

NormingConstant compute_norming_constants(const JostPropagator& prop, cplx zk) {
    const Potential& pot = prop.potential();
    const JostSolution M = prop.solve(zk, JostKind::MMinus);
    const JostSolution N = prop.solve(zk, JostKind::NPlus);
    NormingConstant out;
    out.lambda = first_quadrant_sqrt(zk);
    const double X = std::max(std::abs(pot.x_grid.z_min), std::abs(pot.x_grid.z_max));
    // keep e^{2ixz} within range
    const double xlim = std::min(0.5 * X, 200.0 / std::max(1e-12, 2.0 * zk.imag()));
    cplx num = 0.0;
    double den = 0.0;
    std::vector<std::pair<cplx, double>> samples;
    for (std::size_t i = 0; i < pot.x_grid.n; ++i) {
        const double x = pot.x_grid.at(i);
        if (std::abs(x) >= xlim) continue;
        const cplx u = pot.u[i];
        const Vec2& n = N.values[i];
        Vec2 P;
        P(0) = -(n(0) + u * n(1)) / (4.0 * zk);
        P(1) = -(-std::conj(u) * n(0) + (-std::norm(u) - 4.0 * zk) * n(1)) / (4.0 * zk);
        const Vec2 Pv = 2.0 * I * out.lambda * std::exp(2.0 * I * x * zk) * P;
        const cplx ip = Pv.dot(M.values[i]);  // conj(Pv) . M
        const double pp = Pv.squaredNorm();
        num += ip;
        den += pp;
        if (pp > 0) samples.emplace_back(ip / pp, pp);
    }
    if (den == 0.0) throw ValidationError("norming constant: empty sampling window");
    out.gamma = num / den;
    double var = 0.0;
    for (auto& [g, w] : samples) var += w * std::norm(g - out.gamma);
    out.spread = std::sqrt(var / den) / std::abs(out.gamma);
    out.a_prime = a_derivative(prop, zk, std::min(0.01, 0.5 * zk.imag()));
    out.c = out.gamma / out.a_prime;
    if (out.spread > 1e-2)
        throw ValidationError("norming constant ratio varies with x (spread " + std::to_string(out.spread) + ")");
    return out;
}

NormingConstant compute_norming_constants(const Potential& pot, cplx zk) {
    return compute_norming_constants(JostPropagator(pot), zk);
}

}  // namespace dnls
