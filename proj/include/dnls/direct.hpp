#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "dnls/numerics.hpp"

namespace dnls {

using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;

struct Potential {
    RealGrid x_grid;
    cvec u;

    Potential() = default;
    Potential(RealGrid g, cvec values);
    static Potential sample(const RealGrid& g, const std::function<cplx(double)>& f);

    cvec u_x() const;
    // int_x^{x_max} |u|^2 on the grid
    rvec mass_from_right() const;
    double mass() const;
    // w = u e^{i int_{+inf}^x |u|^2}, v = conj(u) e^{-(1/2i) int_{+inf}^x |u|^2}
    cvec w() const;
    cvec v() const;
    bool tails_decay(double threshold = 1e-8) const;
};

Mat2 assemble_Q1(cplx u, cplx ux);
Mat2 assemble_Q2(cplx u, cplx ux);

// Exact exponential of a 2x2 complex matrix.
Mat2 expm2(const Mat2& B);

enum class JostKind { MMinus, NPlus, MPlus, NMinus };

struct JostSolution {
    cplx z;
    JostKind kind;
    std::vector<Vec2> values;  // on the potential's x-grid
    double boundary_deviation = 0.0;
};

struct JostOptions {
    int upsample_log2 = 2;
};

// Fourth-order commutator-free Magnus integrator for the Jost ODEs of one potential.
// Potential-dependent work is done once; each spectral point costs O(n_x).
class JostPropagator {
public:
    explicit JostPropagator(const Potential& pot, JostOptions opt = {});

    const Potential& potential() const { return pot_; }
    JostSolution solve(cplx z, JostKind kind) const;
    // M_-(z; x_max), the only quantity needed for a(z) and r(z).
    Vec2 m_minus_at_end(cplx z) const;
    cplx a(cplx z) const { return m_minus_at_end(z)(0); }

private:
    Potential pot_;
    int k_;
    std::size_t steps_;
    double H_;
    // Per step z-independent Magnus pieces for Q1 (M system) and Q2 (N system).
    std::vector<Mat2> b0q1_, b1q1_, b0q2_, b1q2_;

    void step(Vec2& y, std::size_t s, cplx z, bool msys, bool backward) const;
};

JostSolution solve_jost(const Potential& pot, cplx z, JostKind which, JostOptions opt = {});

struct TransferData {
    GridFunction a;
    GridFunction r_plus;
    GridFunction r_minus;
    double c0 = 1.0;
    double conservation_error = 0.0;
    double min_abs_a = 0.0;
    std::function<cplx(cplx)> a_offline;
};

struct TransferOptions {
    JostOptions jost;
    int threads = 1;
    double resonance_threshold = 1e-3;
    bool check_resonance = true;
};

TransferData compute_transfer(const Potential& pot, const RealGrid& zgrid, TransferOptions opt = {});
TransferData compute_transfer(const JostPropagator& prop, const RealGrid& zgrid, TransferOptions opt = {});

struct Rect {
    double re_min, re_max, im_min, im_max;
};

struct EigenOptions {
    double newton_tol = 1e-10;
    double simplicity_threshold = 1e-6;
    int max_depth = 12;
};

std::vector<cplx> find_eigenvalues(const JostPropagator& prop, const Rect& region, EigenOptions opt = {});
std::vector<cplx> find_eigenvalues(const Potential& pot, const Rect& region, EigenOptions opt = {});

// Winding number of a along the rectangle boundary.
int winding_number(const JostPropagator& prop, const Rect& region);

// a'(z) from the mean of a on a circle of radius r (n nodes).
cplx a_derivative(const JostPropagator& prop, cplx z, double r = 0.01, int nodes = 32);

struct NormingConstant {
    cplx lambda;
    cplx gamma;
    cplx c;
    cplx a_prime;
    double spread = 0.0;  // relative std of gamma(x) over the central half
};

NormingConstant compute_norming_constants(const JostPropagator& prop, cplx zk);
NormingConstant compute_norming_constants(const Potential& pot, cplx zk);

// Principal square root mapped to the first quadrant for Im z > 0.
cplx first_quadrant_sqrt(cplx z);

}  // namespace dnls
