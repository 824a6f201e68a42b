#include "dnls/backlund.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dnls {

cplx blaschke(cplx z, cplx zk) { return (z - zk) / (z - std::conj(zk)); }

std::pair<ScatteringData, PoleData> strip_pole(const ScatteringData& S) {
    if (S.poles.empty()) throw ValidationError("no pole to strip");
    ScatteringData S0 = S;
    const PoleData last = S.poles.back();
    S0.poles.pop_back();
    for (std::size_t i = 0; i < S.grid.n; ++i) {
        const cplx b = blaschke(S.grid.at(i), last.z);
        S0.r_plus.values[i] *= b;
        S0.r_minus.values[i] *= b;
    }
    for (auto& p : S0.poles) p.c *= blaschke(p.z, last.z);
    return {S0, last};
}

ScatteringData add_pole(const ScatteringData& S0, const PoleData& pole) {
    if (!(pole.z.imag() > 0)) throw ValidationError("added pole must have Im z > 0");
    for (const auto& p : S0.poles)
        if (std::abs(p.z - pole.z) < 1e-12) throw ValidationError("added pole coincides with an existing pole");
    ScatteringData S = S0;
    for (std::size_t i = 0; i < S.grid.n; ++i) {
        const cplx b = blaschke(S.grid.at(i), pole.z);
        S.r_plus.values[i] /= b;
        S.r_minus.values[i] /= b;
    }
    for (auto& p : S.poles) p.c /= blaschke(p.z, pole.z);
    S.poles.push_back(pole);
    return S;
}

cplx residue_C(const PoleData& p, double x) { return 2.0 * I * p.lambda * p.c * std::exp(2.0 * I * x * p.z); }

cplx residue_D(const PoleData& p, double x) {
    const cplx zb = std::conj(p.z);
    return -std::conj(p.c) * std::exp(-2.0 * I * x * zb) / (2.0 * I * std::conj(p.lambda));
}

Mat2 BacklundMatrix::mu(cplx z) const {
    Mat2 m = Mat2::Zero();
    m(0, 0) = z - p1;
    m(1, 1) = z - p2;
    return m;
}

namespace {

BacklundMatrix assemble(const Mat2& m_at_p1, const Mat2& m_at_p2, cplx p1, cplx p2, cplx k1, cplx k2, double x,
                        Variant v) {
    BacklundMatrix B;
    B.x = x;
    B.variant = v;
    B.p1 = p1;
    B.p2 = p2;
    B.k1 = k1;
    B.k2 = k2;
    Vec2 e1(1.0, -k1 / (p1 - p2));
    Vec2 e2(-k2 / (p2 - p1), 1.0);
    B.A.col(0) = m_at_p1 * e1;
    B.A.col(1) = m_at_p2 * e2;
    B.detA = B.A.determinant();
    return B;
}

}  // namespace

BacklundMatrix build_A(const Mat2& m_at_z1, const Mat2& m_at_zbar1, const PoleData& pole, double x) {
    return assemble(m_at_z1, m_at_zbar1, pole.z, std::conj(pole.z), residue_C(pole, x), residue_D(pole, x), x,
                    Variant::Plain);
}

BacklundMatrix build_A_delta(const Mat2& m_at_zbar1, const Mat2& m_at_z1, const PoleData& pole, double x,
                             cplx delta_at_z1, cplx prior_at_z1, cplx prior_at_zbar1) {
    const cplx z = pole.z, zb = std::conj(z);
    const cplx C = residue_C(pole, x), D = residue_D(pole, x);
    const cplx delta_at_zbar1 = 1.0 / std::conj(delta_at_z1);
    const cplx Dd = (zb - z) * (zb - z) * prior_at_zbar1 * prior_at_zbar1 / (delta_at_zbar1 * delta_at_zbar1 * D);
    const cplx Cd = (z - zb) * (z - zb) * delta_at_z1 * delta_at_z1 / (C * prior_at_z1 * prior_at_z1);
    return assemble(m_at_zbar1, m_at_z1, zb, z, Dd, Cd, x, Variant::Delta);
}

MomentCorrection dressed_moment(const BacklundMatrix& B) {
    if (std::abs(B.detA) < 1e-10) throw SingularMatrixError("Backlund matrix is singular", 1.0 / std::abs(B.detA));
    Mat2 P = Mat2::Zero();
    P(0, 0) = -B.p1;
    P(1, 1) = -B.p2;
    const Mat2 G0 = B.A * P * B.A.inverse();
    return {-4.0 * G0(0, 1), 2.0 * I * G0(1, 0)};
}

DressedSolution::DressedSolution(BoundaryValues base, Variant variant)
    : base_(std::move(base)), variant_(variant), mom12_(base_.mom12()), mom21_(base_.mom21()) {}

void DressedSolution::push(const BacklundMatrix& B) {
    if (B.variant != variant_) throw ValidationError("Backlund stage variant does not match the solution");
    const MomentCorrection mc = dressed_moment(B);
    stages_.push_back(B);
    ainv_.push_back(B.A.inverse());
    mom12_ += -mc.B1 / 4.0;
    mom21_ += mc.B2 / (2.0 * I);
}

Mat2 DressedSolution::apply_stages(Mat2 m, cplx z, std::size_t upto) const {
    for (std::size_t j = 0; j < upto; ++j) {
        const BacklundMatrix& B = stages_[j];
        Mat2 mu_inv = Mat2::Zero();
        mu_inv(0, 0) = 1.0 / (z - B.p1);
        mu_inv(1, 1) = 1.0 / (z - B.p2);
        m = B.A * B.mu(z) * ainv_[j] * m * mu_inv;
    }
    return m;
}

Mat2 DressedSolution::stage_offline(cplx z, std::size_t upto) const { return apply_stages(base_.offline(z), z, upto); }
Mat2 DressedSolution::offline(cplx z) const { return stage_offline(z, stages_.size()); }
Mat2 DressedSolution::plus_at(std::size_t i) const {
    return apply_stages(base_.plus_at(i), base_.grid.at(i), stages_.size());
}
Mat2 DressedSolution::minus_at(std::size_t i) const {
    return apply_stages(base_.minus_at(i), base_.grid.at(i), stages_.size());
}

namespace {

constexpr int kCircleNodes = 16;

// Residues of both columns at p1 (column 1) and p2 (column 2) of a matrix function f,
// and the values of the regular columns there, from the mean over a circle.
struct CircleData {
    Vec2 res1, res2, reg1, reg2;
    double scale1 = 0.0, scale2 = 0.0;  // largest |residue column| r seen on each circle
    double size1 = 0.0, size2 = 0.0;    // largest |regular column| seen on each circle
};

template <class F>
CircleData circle(const F& f, cplx p1, cplx p2, double r1, double r2) {
    CircleData d{Vec2::Zero(), Vec2::Zero(), Vec2::Zero(), Vec2::Zero(), 0.0, 0.0, 0.0, 0.0};
    for (int k = 0; k < kCircleNodes; ++k) {
        const cplx e = std::polar(1.0, 2.0 * pi * (k + 0.5) / kCircleNodes);
        const Mat2 a = f(p1 + r1 * e);
        const Mat2 b = f(p2 + r2 * e);
        d.res1 += a.col(0) * (r1 * e);
        d.reg2 += a.col(1);
        d.res2 += b.col(1) * (r2 * e);
        d.reg1 += b.col(0);
        d.scale1 = std::max(d.scale1, a.col(0).cwiseAbs().maxCoeff() * r1);
        d.scale2 = std::max(d.scale2, b.col(1).cwiseAbs().maxCoeff() * r2);
        d.size2 = std::max(d.size2, a.col(1).cwiseAbs().maxCoeff());
        d.size1 = std::max(d.size1, b.col(0).cwiseAbs().maxCoeff());
    }
    d.res1 /= double(kCircleNodes);
    d.res2 /= double(kCircleNodes);
    d.reg1 /= double(kCircleNodes);
    d.reg2 /= double(kCircleNodes);
    return d;
}

double radius_for(cplx p, const std::vector<cplx>& others) {
    double dist = std::abs(p.imag());
    for (cplx q : others)
        if (std::abs(q - p) > 1e-14) dist = std::min(dist, std::abs(q - p));
    return std::min(0.1, dist / 4.0);
}

double residue_mismatch(const CircleData& d, cplx k1, cplx k2) {
    const double s1 = std::max({1.0, std::abs(k1) * d.size2, d.scale1});
    const double s2 = std::max({1.0, std::abs(k2) * d.size1, d.scale2});
    return std::max((d.res1 - k1 * d.reg2).cwiseAbs().maxCoeff() / s1,
                    (d.res2 - k2 * d.reg1).cwiseAbs().maxCoeff() / s2);
}

}  // namespace

double DressedSolution::residue_error(std::size_t j) const {
    const BacklundMatrix& B = stages_.at(j);
    std::vector<cplx> others;
    for (std::size_t l = 0; l <= j; ++l) {
        others.push_back(stages_[l].p1);
        others.push_back(stages_[l].p2);
    }
    const double r1 = radius_for(B.p1, others), r2 = radius_for(B.p2, others);
    const CircleData d = circle([&](cplx z) { return stage_offline(z, j + 1); }, B.p1, B.p2, r1, r2);
    return residue_mismatch(d, B.k1, B.k2);
}

DressedSolution dress(const DressedSolution& m0, const BacklundMatrix& B) {
    DressedSolution out = m0;
    out.push(B);
    const double e = out.residue_error(out.stages() - 1);
    if (!(e <= 1e-6)) throw ConvergenceError("residue mismatch " + std::to_string(e) + " after dressing");
    return out;
}

std::pair<ScatteringData, std::vector<PoleData>> strip_all(const ScatteringData& S) {
    ScatteringData cur = S;
    std::vector<PoleData> added;
    while (!cur.poles.empty()) {
        auto [next, p] = strip_pole(cur);
        added.push_back(p);
        cur = std::move(next);
    }
    std::reverse(added.begin(), added.end());
    return {cur, added};
}

DressedSolution dress_at(const RhpSolver& solver0, const std::vector<PoleData>& added, double x, Variant v) {
    if (!solver0.data().poles.empty()) throw ValidationError("dressing needs pole-free base data");
    DressedSolution d(v == Variant::Plain ? solver0.solve_regular(x) : solver0.solve_conjugated(x), v);
    for (std::size_t j = 0; j < added.size(); ++j) {
        const PoleData& p = added[j];
        const cplx z = p.z, zb = std::conj(z);
        try {
            if (v == Variant::Plain) {
                d.push(build_A(d.offline(z), d.offline(zb), p, x));
            } else {
                cplx pz = 1.0, pzb = 1.0;
                for (std::size_t l = 0; l < j; ++l) {
                    pz *= blaschke(z, added[l].z);
                    pzb *= blaschke(zb, added[l].z);
                }
                d.push(build_A_delta(d.offline(zb), d.offline(z), p, x, solver0.delta()(z), pz, pzb));
            }
        } catch (const SingularMatrixError& e) {
            throw SingularMatrixError(std::string(e.what()) + " (pole " + std::to_string(j) + ", x = " +
                                          std::to_string(x) + ")",
                                      e.condition);
        }
    }
    return d;
}

namespace {

cplx beta(const std::vector<PoleData>& added, cplx z) {
    cplx b = 1.0;
    for (const auto& p : added) b *= blaschke(z, p.z);
    return b;
}

Mat2 to_plain(const Mat2& m, cplx delta, cplx b) {
    Mat2 out = m;
    out.col(0) *= delta / b;
    out.col(1) *= b / delta;
    return out;
}

}  // namespace

Mat2 plain_offline(const DressedSolution& d, const RhpSolver& solver0, const std::vector<PoleData>& added, cplx z) {
    const Mat2 m = d.offline(z);
    if (d.variant() == Variant::Plain) return m;
    return to_plain(m, solver0.delta()(z), beta(added, z));
}

std::pair<Mat2, Mat2> plain_boundary(const DressedSolution& d, const RhpSolver& solver0,
                                     const std::vector<PoleData>& added, std::size_t i) {
    const Mat2 mp = d.plus_at(i), mm = d.minus_at(i);
    if (d.variant() == Variant::Plain) return {mp, mm};
    const cplx b = beta(added, solver0.data().grid.at(i));
    return {to_plain(mp, solver0.delta().delta_plus[i], b), to_plain(mm, solver0.delta().delta_minus[i], b)};
}

double plain_residue_error(const DressedSolution& d, const RhpSolver& solver0, const std::vector<PoleData>& added,
                           const std::vector<PoleData>& original) {
    const double x = d.base().x;
    std::vector<cplx> all;
    for (const auto& p : original) {
        all.push_back(p.z);
        all.push_back(std::conj(p.z));
    }
    double worst = 0.0;
    for (const auto& p : original) {
        const cplx z = p.z, zb = std::conj(z);
        const CircleData c = circle([&](cplx s) { return plain_offline(d, solver0, added, s); }, z, zb,
                                    radius_for(z, all), radius_for(zb, all));
        worst = std::max(worst, residue_mismatch(c, residue_C(p, x), residue_D(p, x)));
    }
    return worst;
}

double plain_jump_error(const DressedSolution& d, const RhpSolver& solver0, const std::vector<PoleData>& added,
                        const ScatteringData& original) {
    const double x = d.base().x;
    const JumpData J = JumpData::build(original.grid, original.r_plus.values, original.r_minus.values, x);
    double worst = 0.0;
    for (std::size_t i = 0; i < original.grid.n; ++i) {
        const auto [mp, mm] = plain_boundary(d, solver0, added, i);
        worst = std::max(worst, (mp - mm * J.jump(i)).cwiseAbs().maxCoeff());
    }
    return worst;
}

DressAllResult dress_all(const ScatteringData& S, const RealGrid& xgrid, DressOptions opt) {
    const Diagnostics diag = validate(S);
    if (!diag.ok()) throw ValidationError("invalid scattering data: " + diag.summary());
    check_grid(xgrid, false);
    if (opt.rhp.check_resolution) {
        require_resolution(S.grid, xgrid.z_min);
        require_resolution(S.grid, xgrid.z_max);
    }
    auto [S0, added] = strip_all(S);
    const RhpSolver solver(S0, opt.rhp);
    const std::size_t n = xgrid.n;
    DressAllResult R;
    R.rec.w.assign(n, 0.0);
    R.rec.mom21.assign(n, 0.0);
    std::vector<double> jr(n, 0.0), de(n, 0.0), bm(n, 0.0), re(n, 0.0), dj(n, 0.0);
    std::vector<double> md(n, std::numeric_limits<double>::infinity());
    std::vector<int> it(n, 0);
    parallel_for(n, opt.rhp.threads, [&](std::size_t i) {
        const double x = xgrid.at(i);
        const Variant v = x >= 0 ? Variant::Plain : Variant::Delta;
        const DressedSolution d = dress_at(solver, added, x, v);
        R.rec.w[i] = -4.0 * d.mom12();
        R.rec.mom21[i] = d.mom21();
        jr[i] = d.base().jump_residual;
        de[i] = d.base().det_error;
        it[i] = d.base().iterations;
        for (std::size_t j = 0; j < d.stages(); ++j) md[i] = std::min(md[i], std::abs(d.stage(j).detA));
        if (opt.verify && !added.empty()) {
            re[i] = plain_residue_error(d, solver, added, S.poles);
            dj[i] = plain_jump_error(d, solver, added, S);
        }
        if (std::abs(x) <= opt.rhp.band) {
            const DressedSolution o = dress_at(solver, added, x, v == Variant::Plain ? Variant::Delta : Variant::Plain);
            bm[i] = std::max(std::abs(o.mom12() - d.mom12()), std::abs(o.mom21() - d.mom21()));
            jr[i] = std::max(jr[i], o.base().jump_residual);
            de[i] = std::max(de[i], o.base().det_error);
        }
    });
    R.min_abs_detA = added.empty() ? 0.0 : std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        R.rec.max_jump_residual = std::max(R.rec.max_jump_residual, jr[i]);
        R.rec.max_det_error = std::max(R.rec.max_det_error, de[i]);
        R.rec.band_mismatch = std::max(R.rec.band_mismatch, bm[i]);
        R.rec.max_iterations = std::max(R.rec.max_iterations, it[i]);
        R.max_residue_error = std::max(R.max_residue_error, re[i]);
        R.max_dressed_jump = std::max(R.max_dressed_jump, dj[i]);
        if (!added.empty()) R.min_abs_detA = std::min(R.min_abs_detA, md[i]);
    }
    if (opt.verify && !(R.max_residue_error <= 1e-6 && R.max_dressed_jump <= 1e-6))
        throw ConvergenceError("dressed solution fails its checks: residue " + std::to_string(R.max_residue_error) +
                               ", jump " + std::to_string(R.max_dressed_jump));
    R.rec.potential = phase_from_w(xgrid, R.rec.w);
    R.rec.rec2_residual = rec2_residual(R.rec.potential, R.rec.mom21);
    return R;
}

}  // namespace dnls
