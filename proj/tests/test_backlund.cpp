#include <doctest.h>

#include <map>
#include <random>

#include "dnls/backlund.hpp"
#include "dnls/solitons.hpp"

using namespace dnls;

namespace {

ScatteringData stripped_test_data(std::mt19937_64& rng, std::size_t npoles) {
    const RealGrid g = RealGrid::symmetric(30, 512);
    std::uniform_real_distribution<double> U(-1, 1);
    const cplx a(0.3 * U(rng), 0.3 * U(rng));
    const double s = 1.0 + 0.5 * U(rng);
    cvec rp(g.n);
    for (std::size_t i = 0; i < g.n; ++i) rp[i] = a * std::exp(-s * g.at(i) * g.at(i)) * std::exp(I * U(rng) * 0.01);
    std::vector<PoleData> poles;
    for (std::size_t k = 0; k < npoles; ++k)
        poles.push_back(PoleData::make({U(rng), 0.2 + 0.5 * (U(rng) + 1)}, {U(rng) + 1.5, U(rng)}));
    return ScatteringData::from_r_plus(g, rp, poles, 0.5);
}

double data_gap(const ScatteringData& a, const ScatteringData& b) {
    double m = std::max(sup_diff(a.r_plus.values, b.r_plus.values), sup_diff(a.r_minus.values, b.r_minus.values));
    if (a.poles.size() != b.poles.size()) return INFINITY;
    for (std::size_t k = 0; k < a.poles.size(); ++k)
        m = std::max({m, std::abs(a.poles[k].z - b.poles[k].z), std::abs(a.poles[k].c - b.poles[k].c)});
    return m;
}

// One-pole RHP with zero reflection, solved from its residue conditions:
// col1 = e1 + C col2(z1)/(z - z1), col2 = e2 + D col1(conj z1)/(z - conj z1).
Mat2 one_pole_m(const PoleData& p, double x, cplx z) {
    const cplx z1 = p.z, zb = std::conj(z1);
    const cplx C = residue_C(p, x), D = residue_D(p, x);
    // unknowns: col2(z1) = (s1, s2), col1(zb) = (t1, t2)
    Eigen::Matrix4cd M = Eigen::Matrix4cd::Identity();
    Eigen::Vector4cd b(0, 1, 1, 0);
    M(0, 2) = -D / (z1 - zb);
    M(1, 3) = -D / (z1 - zb);
    M(2, 0) = -C / (zb - z1);
    M(3, 1) = -C / (zb - z1);
    const Eigen::Vector4cd s = M.partialPivLu().solve(b);
    Mat2 m;
    m(0, 0) = 1.0 + C * s(0) / (z - z1);
    m(1, 0) = C * s(1) / (z - z1);
    m(0, 1) = D * s(2) / (z - zb);
    m(1, 1) = 1.0 + D * s(3) / (z - zb);
    return m;
}

const ScatteringData& gaussian_data(std::size_t nz) {
    static std::map<std::size_t, ScatteringData> cache;
    auto it = cache.find(nz);
    if (it == cache.end()) {
        const RealGrid g = RealGrid::symmetric(20, 2048);
        const Potential u = Potential::sample(g, [](double x) { return cplx(0.3 * std::exp(-x * x)); });
        it = cache.emplace(nz, forward(u, RealGrid::symmetric(30, nz)).data).first;
    }
    return it->second;
}

}  // namespace

TEST_CASE("strip and add") {
    const RealGrid g = RealGrid::symmetric(30, 256);
    SUBCASE("pure one-pole data") {
        ScatteringData S = ScatteringData::empty(g);
        S.poles.push_back(PoleData::make({0, 0.25}, 1.0));
        const auto [S0, p] = strip_pole(S);
        CHECK(S0.poles.empty());
        CHECK(sup_norm(S0.r_plus.values) == 0.0);
        CHECK(p.z == cplx(0, 0.25));
        const ScatteringData back = add_pole(ScatteringData::empty(g), PoleData::make({0, 0.25}, 1.0));
        CHECK(back.poles.size() == 1);
        CHECK(sup_norm(back.r_minus.values) == 0.0);
    }
    SUBCASE("moduli and constraints are preserved") {
        std::mt19937_64 rng(4);
        const ScatteringData S = stripped_test_data(rng, 2);
        const auto [S0, p] = strip_pole(S);
        for (std::size_t i = 0; i < g.n; ++i)
            CHECK(std::abs(std::abs(S0.r_plus.values[i]) - std::abs(S.r_plus.values[i])) < 1e-15);
        CHECK(validate(S).ok());
        CHECK(validate(S0).ok());
    }
    SUBCASE("involution") {
        std::mt19937_64 rng(8);
        std::uniform_real_distribution<double> U(-1, 1);
        for (int k = 0; k < 20; ++k) {
            const ScatteringData S = stripped_test_data(rng, k % 3);
            const PoleData p = PoleData::make({2 + U(rng), 0.3 + 0.2 * (U(rng) + 1)}, {U(rng), 1.0});
            const ScatteringData A = add_pole(S, p);
            CHECK(data_gap(strip_pole(A).first, S) < 1e-12);
            if (!S.poles.empty()) {
                const auto [S0, q] = strip_pole(S);
                CHECK(data_gap(add_pole(S0, q), S) < 1e-12);
            }
        }
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(strip_pole(ScatteringData::empty(g)), ValidationError);
        ScatteringData S = ScatteringData::empty(g);
        S.poles.push_back(PoleData::make({0, 0.25}, 1.0));
        CHECK_THROWS_AS(add_pole(S, PoleData::make({0, 0.25}, 2.0)), ValidationError);
        CHECK_THROWS_AS(add_pole(S, PoleData::make({0, -0.25}, 2.0)), ValidationError);
    }
}

TEST_CASE("Backlund matrix") {
    const PoleData p = PoleData::make({0, 0.25}, 1.0);
    SUBCASE("columns for zero reflection at x = 0") {
        const BacklundMatrix B = build_A(Mat2::Identity(), Mat2::Identity(), p, 0.0);
        const cplx z = p.z, zb = std::conj(z), lam = p.lambda;
        CHECK(std::abs(B.A(0, 0) - 1.0) == 0.0);
        CHECK(std::abs(B.A(1, 0) + 2.0 * I * lam * 1.0 / (z - zb)) < 1e-15);
        CHECK(std::abs(B.A(0, 1) - 1.0 / (2.0 * I * std::conj(lam) * (zb - z))) < 1e-15);
        CHECK(std::abs(B.A(1, 1) - 1.0) == 0.0);
        CHECK(std::abs(B.detA - B.A.determinant()) == 0.0);
        CHECK(std::abs(B.detA) > 0.1);
    }
    SUBCASE("decay of A - 1") {
        const Mat2 far = build_A(Mat2::Identity(), Mat2::Identity(), p, 40.0).A - Mat2::Identity();
        CHECK(far.cwiseAbs().maxCoeff() < 1e-8);
        const Mat2 farl = build_A_delta(Mat2::Identity(), Mat2::Identity(), p, -40.0, 1.0).A - Mat2::Identity();
        CHECK(farl.cwiseAbs().maxCoeff() < 1e-7);
    }
    SUBCASE("moment corrections match the determinant formulas") {
        for (double x : {-2.0, 0.0, 1.3}) {
            const PoleData q = PoleData::make({-0.2, 0.35}, {0.4, 0.3});
            const BacklundMatrix B = build_A(Mat2::Identity(), Mat2::Identity(), q, x);
            const MomentCorrection mc = dressed_moment(B);
            const cplx a11 = B.A(0, 0), a12 = B.A(0, 1), a21 = B.A(1, 0), a22 = B.A(1, 1);
            const double im = q.z.imag();
            CHECK(std::abs(mc.B1 - (-8.0 * I * im * a11 * a12 / B.detA)) < 1e-14);
            CHECK(std::abs(mc.B2 - 4.0 * im * a21 * a22 / B.detA) < 1e-14);
        }
        const MomentCorrection far = dressed_moment(build_A(Mat2::Identity(), Mat2::Identity(), p, 60.0));
        CHECK(std::abs(far.B1) < 1e-11);
        CHECK(std::abs(far.B2) < 1e-11);
    }
    SUBCASE("singular matrix refused") {
        BacklundMatrix B = build_A(Mat2::Identity(), Mat2::Identity(), p, 0.0);
        B.A << 1.0, 2.0, 0.5, 1.0;
        B.detA = 0.0;
        CHECK_THROWS_AS(dressed_moment(B), SingularMatrixError);
    }
    SUBCASE("determinant stays away from zero for gaussian data") {
        const ScatteringData& S0 = gaussian_data(2048);
        const RhpSolver solver(S0);
        const PoleData q = PoleData::make({0.1, 0.3}, 0.8);
        double lo = INFINITY;
        for (double x = -20; x <= 20; x += 2.5) {
            const BoundaryValues b = solver.solve_regular(x);
            lo = std::min(lo, std::abs(build_A(b.offline(q.z), b.offline(std::conj(q.z)), q, x).detA));
        }
        CHECK(lo > 1e-10);
    }
}

TEST_CASE("single-stage dressing") {
    const RealGrid zg = RealGrid::symmetric(30, 1024);
    const PoleData p = PoleData::make({0.05, 0.25}, cplx(0.6, 0.2));
    const ScatteringData empty = ScatteringData::empty(zg);
    const RhpSolver solver(empty);
    for (double x : {-5.0, -0.5, 0.0, 1.5}) {
        for (Variant v : {Variant::Plain, Variant::Delta}) {
            CAPTURE(x);
            const DressedSolution d0(v == Variant::Plain ? solver.solve_regular(x) : solver.solve_conjugated(x), v);
            const BacklundMatrix B = v == Variant::Plain
                                         ? build_A(Mat2::Identity(), Mat2::Identity(), p, x)
                                         : build_A_delta(Mat2::Identity(), Mat2::Identity(), p, x, 1.0);
            const DressedSolution d = dress(d0, B);
            const NSolitonMoments ref = n_soliton_moments({p}, x, 0.0);
            CHECK(std::abs(-4.0 * d.mom12() - ref.w) < 1e-10);
            CHECK(std::abs(d.mom21() - ref.mom21) < 1e-10);
            for (cplx z : {cplx(0.7, 0.4), cplx(-1.0, -0.3), cplx(0.2, 2.0)}) {
                const Mat2 m = plain_offline(d, solver, {p}, z);
                CHECK((m - one_pole_m(p, x, z)).cwiseAbs().maxCoeff() < 1e-10);
                CHECK(std::abs(m.determinant() - 1.0) < 1e-10);
            }
        }
    }
    SUBCASE("a wrong matrix fails the residue check") {
        const DressedSolution d0(solver.solve_regular(0.5), Variant::Plain);
        PoleData wrong = p;
        BacklundMatrix B = build_A(Mat2::Identity(), Mat2::Identity(), p, 0.5);
        wrong.c *= 1.5;
        B.k1 = residue_C(wrong, 0.5);
        CHECK_THROWS_AS(dress(d0, B), ConvergenceError);
    }
}

TEST_CASE("dressing on gaussian radiation") {
    const ScatteringData& S0 = gaussian_data(2048);
    const PoleData p = PoleData::make({0.0, 0.25}, 0.5);
    const ScatteringData S = add_pole(S0, p);
    const auto [base, added] = strip_all(S);
    const RhpSolver solver(base);
    SUBCASE("jump, residues and determinant against the un-stripped data") {
        for (double x : {-6.0, -0.3, 0.0, 0.8, 6.0})
            for (Variant v : {Variant::Plain, Variant::Delta}) {
                if ((v == Variant::Plain && x < -1) || (v == Variant::Delta && x > 1)) continue;
                CAPTURE(x);
                const DressedSolution d = dress_at(solver, added, x, v);
                CHECK(plain_jump_error(d, solver, added, S) < 1e-6);
                CHECK(plain_residue_error(d, solver, added, S.poles) < 1e-6);
                for (std::size_t i = 0; i < S.grid.n; i += 101) {
                    const auto [mp, mm] = plain_boundary(d, solver, added, i);
                    CHECK(std::abs(mp.determinant() - 1.0) < 1e-8);
                }
            }
    }
    SUBCASE("plain and delta moments agree at x = 0") {
        const DressedSolution a = dress_at(solver, added, 0.0, Variant::Plain);
        const DressedSolution b = dress_at(solver, added, 0.0, Variant::Delta);
        CHECK(std::abs(a.mom12() - b.mom12()) < 1e-6);
        CHECK(std::abs(a.mom21() - b.mom21()) < 1e-6);
    }
    SUBCASE("the dressed potential scatters back to the same data") {
        DressOptions opt;
        const RealGrid xg = RealGrid::symmetric(20, 1024);
        const ScatteringData Sc = add_pole(gaussian_data(2048), PoleData::make({0.0, 0.5}, 1.0));
        const DressAllResult R = dress_all(Sc, xg, opt);
        const ForwardResult F = forward(R.rec.potential, Sc.grid);
        REQUIRE(F.data.poles.size() == 1);
        CHECK(std::abs(F.data.poles[0].z - cplx(0, 0.5)) < 1e-6);
        CHECK(std::abs(F.data.poles[0].c - 1.0) < 1e-4);
        CHECK(sup_diff(F.data.r_plus.values, Sc.r_plus.values) < 1e-4);
    }
}

TEST_CASE("dress_all") {
    SUBCASE("no poles reproduces reconstruct") {
        const ScatteringData& S = gaussian_data(2048);
        const RealGrid xg = RealGrid::symmetric(10, 65);
        const DressAllResult D = dress_all(S, xg);
        const ReconstructionResult R = reconstruct(S, xg);
        CHECK(D.rec.w == R.w);
        CHECK(D.rec.potential.u == R.potential.u);
    }
    SUBCASE("one pole, zero reflection") {
        ScatteringData S = ScatteringData::empty(RealGrid::symmetric(30, 4096));
        S.poles.push_back(PoleData::make({0.0, 0.25}, 0.5));
        const DressAllResult D = dress_all(S, RealGrid::symmetric(40, 1025));
        double err = 0.0;
        for (std::size_t i = 0; i < D.rec.w.size(); ++i) {
            const double x = D.rec.potential.x_grid.at(i);
            err = std::max(err, std::abs(D.rec.w[i] - n_soliton_moments(S.poles, x, 0.0).w));
        }
        CHECK(err < 1e-10);
    }
    SUBCASE("two poles, zero reflection, both orders") {
        const RealGrid zg = RealGrid::symmetric(30, 4096);
        const std::vector<PoleData> poles{PoleData::make({0.0, 0.25}, 0.5), PoleData::make(cplx(-1, 2) / 8.0, 1.0)};
        ScatteringData S = ScatteringData::empty(zg), T = ScatteringData::empty(zg);
        S.poles = poles;
        T.poles = {poles[1], poles[0]};
        const RealGrid xg = RealGrid::symmetric(40, 2049);
        const DressAllResult a = dress_all(S, xg), b = dress_all(T, xg);
        const Potential ref = n_soliton(poles, xg, 0.0);
        CHECK(sup_diff(a.rec.potential.u, ref.u) < 1e-6);
        CHECK(sup_diff(a.rec.potential.u, b.rec.potential.u) < 1e-8);
        CHECK(a.max_residue_error < 1e-6);
        CHECK(a.max_dressed_jump < 1e-6);
        CHECK(a.min_abs_detA > 1e-10);
        CHECK(a.rec.band_mismatch < 1e-6);
    }
    SUBCASE("mass shift equals the soliton mass") {
        const ScatteringData& S0 = gaussian_data(4096);
        const cplx z1(0.05, 0.3);
        const ScatteringData S = add_pole(S0, PoleData::make(z1, 0.6));
        const RealGrid xg = RealGrid::symmetric(40, 2049);
        const double m0 = dress_all(S0, xg).rec.potential.mass();
        const double m1 = dress_all(S, xg).rec.potential.mass();
        const SolitonParams sp = params_from_pole(z1, 0.6);
        CHECK(std::abs((m1 - m0) - soliton_mass(sp.omega, sp.v)) < 1e-6);
    }
}
