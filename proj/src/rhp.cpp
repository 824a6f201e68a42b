#include "dnls/rhp.hpp"

#include <algorithm>
#include <cmath>

namespace dnls {

bool resolution_ok(const RealGrid& zgrid, double x) { return std::abs(x) * zgrid.h() <= pi / 4 + 1e-12; }

void require_resolution(const RealGrid& zgrid, double x) {
    if (!resolution_ok(zgrid, x))
        throw ResolutionError("z-grid too coarse for x = " + std::to_string(x) + ": need |x| h_z <= pi/4, have " +
                              std::to_string(std::abs(x) * zgrid.h()));
}

JumpData JumpData::build(const RealGrid& g, const cvec& r_plus, const cvec& r_minus, double x) {
    JumpData J;
    J.x = x;
    J.rho_plus.resize(g.n);
    J.rho_minus.resize(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        const double z = g.at(i);
        J.rho_plus[i] = std::conj(r_plus[i]) * std::exp(-2.0 * I * z * x);
        J.rho_minus[i] = r_minus[i] * std::exp(2.0 * I * z * x);
    }
    return J;
}

Mat2 JumpData::jump(std::size_t i) const {
    Mat2 V;
    V << 1.0 + rho_plus[i] * rho_minus[i], rho_plus[i], rho_minus[i], 1.0;
    return V;
}

double JumpData::max_det_defect() const {
    double m = 0;
    for (std::size_t i = 0; i < rho_plus.size(); ++i) m = std::max(m, std::abs(jump(i).determinant() - 1.0));
    return m;
}

Mat2 BoundaryValues::plus_at(std::size_t i) const {
    Mat2 M;
    M << m_plus[0][i], m_plus[1][i], m_plus[2][i], m_plus[3][i];
    return M;
}

Mat2 BoundaryValues::minus_at(std::size_t i) const {
    Mat2 M;
    M << m_minus[0][i], m_minus[1][i], m_minus[2][i], m_minus[3][i];
    return M;
}

Mat2 BoundaryValues::offline(cplx z) const {
    Mat2 M;
    M << 1.0 + cauchy_offline(grid, density[0], z), cauchy_offline(grid, density[1], z),
        cauchy_offline(grid, density[2], z), 1.0 + cauchy_offline(grid, density[3], z);
    return M;
}

cplx DeltaFunction::operator()(cplx z) const {
    cvec L(log_density.begin(), log_density.end());
    return std::exp(cauchy_offline(grid, L, z));
}

namespace {

DeltaFunction delta_with(const ScatteringData& S, const HilbertOperator& H) {
    DeltaFunction d;
    d.grid = S.grid;
    const std::size_t n = S.grid.n;
    d.log_density.resize(n);
    cvec L(n);
    for (std::size_t i = 0; i < n; ++i) {
        const cplx q = 1.0 + std::conj(S.r_plus.values[i]) * S.r_minus.values[i];
        if (!(q.real() > 0))
            throw ValidationError("1 + conj(r+) r- is not positive at z = " + std::to_string(S.grid.at(i)));
        d.log_density[i] = std::log(q.real());
        L[i] = d.log_density[i];
    }
    cvec lp = H.plus(L), lm = H.minus(L);
    d.delta_plus.resize(n);
    d.delta_minus.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        d.delta_plus[i] = std::exp(lp[i]);
        d.delta_minus[i] = std::exp(lm[i]);
        const cplx q = 1.0 + std::conj(S.r_plus.values[i]) * S.r_minus.values[i];
        d.jump_error = std::max(d.jump_error, std::abs(d.delta_plus[i] - q * d.delta_minus[i]));
    }
    return d;
}

}  // namespace

DeltaFunction compute_delta(const ScatteringData& S) { return delta_with(S, HilbertOperator(S.grid.n)); }

RhpSolver::RhpSolver(const ScatteringData& S, RhpOptions opt) : S_(S), opt_(opt) {
    check_grid(S.grid);
    hilbert_ = std::make_shared<HilbertOperator>(S.grid.n);
    delta_ = delta_with(S, *hilbert_);
    const std::size_t n = S.grid.n;
    rpd_.resize(n);
    rmd_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const cplx f = std::conj(delta_.delta_plus[i] * delta_.delta_minus[i]);
        rpd_[i] = S.r_plus.values[i] * f;
        rmd_[i] = S.r_minus.values[i] * f;
    }
}

BoundaryValues RhpSolver::solve_regular(double x) const { return solve_impl(x, false); }
BoundaryValues RhpSolver::solve_conjugated(double x) const { return solve_impl(x, true); }

BoundaryValues RhpSolver::solve_impl(double x, bool conj) const {
    if (opt_.check_resolution) require_resolution(S_.grid, x);
    const std::size_t n = S_.grid.n;
    const HilbertOperator& H = *hilbert_;
    const JumpData J = conj ? JumpData::build(S_.grid, rpd_, rmd_, x)
                            : JumpData::build(S_.grid, S_.r_plus.values, S_.r_minus.values, x);
    const cvec& rp = J.rho_plus;
    const cvec& rm = J.rho_minus;
    // row = (first, second): first = [row==0] + Pa(second rho-), second = [row==1] + Pb(first rho+)
    auto Pa = [&](const cvec& v) { return conj ? H.plus(v) : H.minus(v); };
    auto Pb = [&](const cvec& v) { return conj ? H.minus(v) : H.plus(v); };
    auto mul = [n](const cvec& a, const cvec& b) {
        cvec o(n);
        for (std::size_t i = 0; i < n; ++i) o[i] = a[i] * b[i];
        return o;
    };

    std::array<cvec, 2> first, second;
    BoundaryValues bv;
    bv.x = x;
    bv.conjugated = conj;
    bv.grid = S_.grid;

    bool dense = opt_.method == RhpOptions::Method::Dense ||
                 (opt_.method == RhpOptions::Method::Automatic && n <= opt_.dense_max_n);
    if (dense) {
        const Eigen::MatrixXcd Hm = H.matrix();
        const Eigen::MatrixXcd Id = Eigen::MatrixXcd::Identity(n, n);
        const Eigen::MatrixXcd Pp = 0.5 * (Id - I * Hm);
        const Eigen::MatrixXcd Pm = -0.5 * (Id + I * Hm);
        const Eigen::MatrixXcd& PA = conj ? Pp : Pm;
        const Eigen::MatrixXcd& PB = conj ? Pm : Pp;
        Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(2 * n, 2 * n);
        Eigen::VectorXcd dm(n), dp(n);
        for (std::size_t i = 0; i < n; ++i) {
            dm(i) = rm[i];
            dp(i) = rp[i];
        }
        A.topRightCorner(n, n) -= PA * dm.asDiagonal();
        A.bottomLeftCorner(n, n) -= PB * dp.asDiagonal();
        Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(2 * n, 2);
        B.col(0).head(n).setOnes();
        B.col(1).tail(n).setOnes();
        Eigen::MatrixXcd X = solve_dense(A, B, &bv.condition);
        for (int r = 0; r < 2; ++r) {
            first[r].resize(n);
            second[r].resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                first[r][i] = X(i, r);
                second[r][i] = X(n + i, r);
            }
        }
    } else {
        const cvec ones(n, 1.0);
        // row 1: first - Pa(rho- Pb(rho+ first)) = 1
        LinearMap op1 = [&](const cvec& v, cvec& out) {
            cvec t = Pa(mul(rm, Pb(mul(rp, v))));
            out.resize(n);
            for (std::size_t i = 0; i < n; ++i) out[i] = v[i] - t[i];
        };
        // row 2: second - Pb(rho+ Pa(rho- second)) = 1
        LinearMap op2 = [&](const cvec& v, cvec& out) {
            cvec t = Pb(mul(rp, Pa(mul(rm, v))));
            out.resize(n);
            for (std::size_t i = 0; i < n; ++i) out[i] = v[i] - t[i];
        };
        GmresResult g1 = gmres(op1, ones, opt_.gmres_tol, opt_.restart, opt_.max_iter);
        GmresResult g2 = gmres(op2, ones, opt_.gmres_tol, opt_.restart, opt_.max_iter);
        if (g1.residual > 1e-9 || g2.residual > 1e-9)
            throw ConvergenceError("RHP system did not converge at x = " + std::to_string(x));
        bv.iterations = std::max(g1.iterations, g2.iterations);
        first[0] = g1.x;
        second[0] = Pb(mul(first[0], rp));
        second[1] = g2.x;
        first[1] = Pa(mul(second[1], rm));
    }

    for (int e = 0; e < 4; ++e) {
        bv.m_plus[e].resize(n);
        bv.m_minus[e].resize(n);
        bv.density[e].resize(n);
    }
    for (int r = 0; r < 2; ++r) {
        const cvec& a = first[r];
        const cvec& b = second[r];
        cvec& p1 = bv.m_plus[2 * r];
        cvec& p2 = bv.m_plus[2 * r + 1];
        cvec& q1 = bv.m_minus[2 * r];
        cvec& q2 = bv.m_minus[2 * r + 1];
        for (std::size_t i = 0; i < n; ++i) {
            if (!conj) {
                p1[i] = a[i] + b[i] * rm[i];
                p2[i] = b[i];
                q1[i] = a[i];
                q2[i] = b[i] - a[i] * rp[i];
            } else {
                p1[i] = a[i];
                p2[i] = b[i] + a[i] * rp[i];
                q1[i] = a[i] - b[i] * rm[i];
                q2[i] = b[i];
            }
        }
    }
    const double dz = S_.grid.h();
    for (int e = 0; e < 4; ++e) {
        cplx s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            bv.density[e][i] = bv.m_plus[e][i] - bv.m_minus[e][i];
            s += bv.density[e][i];
        }
        bv.moment(e / 2, e % 2) = -s * dz / (2.0 * pi * I);
    }

    // jump relation and Plemelj consistency of every entry
    double res = 0.0, det = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        Mat2 V;
        if (conj)
            V << 1.0, rp[i], rm[i], 1.0 + rp[i] * rm[i];
        else
            V = J.jump(i);
        const Mat2 mp = bv.plus_at(i), mm = bv.minus_at(i);
        res = std::max(res, (mp - mm * V).cwiseAbs().maxCoeff());
        det = std::max(det, std::abs(mp.determinant() - 1.0));
        det = std::max(det, std::abs(mm.determinant() - 1.0));
    }
    for (int e = 0; e < 4; ++e) {
        const cvec hp = H.plus(bv.density[e]);
        const cvec hm = H.minus(bv.density[e]);
        const double diag = (e == 0 || e == 3) ? 1.0 : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            res = std::max(res, std::abs(bv.m_plus[e][i] - diag - hp[i]));
            res = std::max(res, std::abs(bv.m_minus[e][i] - diag - hm[i]));
        }
    }
    bv.jump_residual = res;
    bv.det_error = det;
    return bv;
}

BoundaryValues solve_regular(const ScatteringData& S, double x, RhpOptions opt) {
    return RhpSolver(S, opt).solve_regular(x);
}

BoundaryValues solve_conjugated(const ScatteringData& S, double x, RhpOptions opt) {
    return RhpSolver(S, opt).solve_conjugated(x);
}

Potential phase_from_w(const RealGrid& xgrid, const cvec& w) {
    rvec d(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) d[i] = std::norm(w[i]);
    const rvec phi = cumulative_from_right(d, xgrid.h());
    cvec u(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) u[i] = w[i] * std::exp(I * phi[i]);
    return Potential(xgrid, std::move(u));
}

double rec2_residual(const Potential& pot, const cvec& mom21) {
    const cvec ux = pot.u_x();
    const rvec phi = pot.mass_from_right();
    double m = 0.0;
    for (std::size_t i = 0; i < pot.u.size(); ++i) {
        const cplx ub = std::conj(pot.u[i]);
        const cplx q = std::conj(ux[i]) - 0.5 * I * std::norm(pot.u[i]) * ub;
        m = std::max(m, std::abs(2.0 * I * mom21[i] - std::exp(I * phi[i]) * q));
    }
    return m;
}

ReconstructionResult reconstruct(const ScatteringData& S, const RealGrid& xgrid, RhpOptions opt) {
    if (!S.poles.empty()) throw ValidationError("reconstruct handles pole-free data; use dress_all");
    const Diagnostics d = validate(S);
    if (!d.ok()) throw ValidationError("invalid scattering data: " + d.summary());
    check_grid(xgrid, false);
    if (opt.check_resolution) {
        require_resolution(S.grid, xgrid.z_min);
        require_resolution(S.grid, xgrid.z_max);
    }
    RhpSolver solver(S, opt);
    const std::size_t n = xgrid.n;
    ReconstructionResult R;
    R.w.assign(n, 0.0);
    R.mom21.assign(n, 0.0);
    std::vector<double> jr(n), de(n), bm(n, 0.0);
    std::vector<int> it(n);
    parallel_for(n, opt.threads, [&](std::size_t i) {
        const double x = xgrid.at(i);
        const BoundaryValues bv = solver.solve(x);
        R.w[i] = -4.0 * bv.mom12();
        R.mom21[i] = bv.mom21();
        jr[i] = bv.jump_residual;
        de[i] = bv.det_error;
        it[i] = bv.iterations;
        if (std::abs(x) <= opt.band) {
            const BoundaryValues other = x >= 0 ? solver.solve_conjugated(x) : solver.solve_regular(x);
            bm[i] = std::max(std::abs(other.mom12() - bv.mom12()), std::abs(other.mom21() - bv.mom21()));
            jr[i] = std::max(jr[i], other.jump_residual);
            de[i] = std::max(de[i], other.det_error);
        }
    });
    for (std::size_t i = 0; i < n; ++i) {
        R.max_jump_residual = std::max(R.max_jump_residual, jr[i]);
        R.max_det_error = std::max(R.max_det_error, de[i]);
        R.band_mismatch = std::max(R.band_mismatch, bm[i]);
        R.max_iterations = std::max(R.max_iterations, it[i]);
    }
    R.potential = phase_from_w(xgrid, R.w);
    R.rec2_residual = rec2_residual(R.potential, R.mom21);
    return R;
}

}  // namespace dnls
