#pragma once

#include <array>
#include <memory>

#include "dnls/scattering.hpp"

namespace dnls {

struct RhpOptions {
    enum class Method { Automatic, Dense, Iterative };
    Method method = Method::Automatic;
    std::size_t dense_max_n = 512;
    double gmres_tol = 1e-13;
    int restart = 150;
    int max_iter = 3000;
    bool check_resolution = true;
    int threads = 1;
    double band = 1.0;          // |x| <= band: both variants run and are compared
    double det_tolerance = 1e-6;
};

// |x| * h_z <= pi/4
bool resolution_ok(const RealGrid& zgrid, double x);
void require_resolution(const RealGrid& zgrid, double x);

// Jump data R(z; x) of the pole-free problem; 1 + R = [[1 + rho+ rho-, rho+], [rho-, 1]].
struct JumpData {
    double x = 0.0;
    cvec rho_plus;   // conj(r+) e^{-2izx}
    cvec rho_minus;  // r- e^{2izx}
    static JumpData build(const RealGrid& g, const cvec& r_plus, const cvec& r_minus, double x);
    Mat2 jump(std::size_t i) const;
    double max_det_defect() const;
};

struct BoundaryValues {
    double x = 0.0;
    bool conjugated = false;
    RealGrid grid;
    // entries 0..3 = 11, 12, 21, 22
    std::array<cvec, 4> m_plus;
    std::array<cvec, 4> m_minus;
    // m(z) = 1 + C(h)(z) entrywise
    std::array<cvec, 4> density;
    Mat2 moment;  // lim z (m - 1)
    double jump_residual = 0.0;
    double det_error = 0.0;
    int iterations = 0;
    double condition = 0.0;

    cplx mom12() const { return moment(0, 1); }
    cplx mom21() const { return moment(1, 0); }
    Mat2 plus_at(std::size_t i) const;
    Mat2 minus_at(std::size_t i) const;
    Mat2 offline(cplx z) const;
};

struct DeltaFunction {
    RealGrid grid;
    rvec log_density;  // log(1 + conj(r+) r-)
    cvec delta_plus;
    cvec delta_minus;
    double jump_error = 0.0;

    cplx operator()(cplx z) const;
};

DeltaFunction compute_delta(const ScatteringData& S);

// Pole-free solver bound to one set of reflection data. Per-x solves are independent
// and may run concurrently.
class RhpSolver {
public:
    explicit RhpSolver(const ScatteringData& S, RhpOptions opt = {});

    BoundaryValues solve_regular(double x) const;
    BoundaryValues solve_conjugated(double x) const;
    BoundaryValues solve(double x) const { return x >= 0 ? solve_regular(x) : solve_conjugated(x); }

    const DeltaFunction& delta() const { return delta_; }
    const ScatteringData& data() const { return S_; }
    const RhpOptions& options() const { return opt_; }
    // r+- conj(delta+ delta-)
    const cvec& r_plus_delta() const { return rpd_; }
    const cvec& r_minus_delta() const { return rmd_; }

private:
    ScatteringData S_;
    RhpOptions opt_;
    std::shared_ptr<HilbertOperator> hilbert_;
    DeltaFunction delta_;
    cvec rpd_, rmd_;

    BoundaryValues solve_impl(double x, bool conj) const;
};

BoundaryValues solve_regular(const ScatteringData& S, double x, RhpOptions opt = {});
BoundaryValues solve_conjugated(const ScatteringData& S, double x, RhpOptions opt = {});

struct ReconstructionResult {
    Potential potential;
    cvec w;
    cvec mom21;
    double max_jump_residual = 0.0;
    double max_det_error = 0.0;
    double band_mismatch = 0.0;  // plain vs conjugated moments on |x| <= band
    double rec2_residual = 0.0;  // derivative channel vs reconstructed u
    int max_iterations = 0;
};

// u = w e^{i int_x^inf |w|^2} on the grid; the integral is truncated at the right end.
Potential phase_from_w(const RealGrid& xgrid, const cvec& w);

// sup |2i mom21 - e^{i Phi} (conj(u)_x - (i/2)|u|^2 conj(u))|, Phi = int_x^inf |u|^2
double rec2_residual(const Potential& u, const cvec& mom21);

ReconstructionResult reconstruct(const ScatteringData& S, const RealGrid& xgrid, RhpOptions opt = {});

}  // namespace dnls
