#pragma once

#include <utility>
#include <vector>

#include "dnls/rhp.hpp"

namespace dnls {

// (z - zk) / (z - conj zk): unit modulus on the real line, zero at zk, pole at conj zk.
cplx blaschke(cplx z, cplx zk);

// Removes the last-listed pole. r -> r (z - z1)/(z - conj z1); the remaining norming
// constants pick up the factor (zk - z1)/(zk - conj z1).
std::pair<ScatteringData, PoleData> strip_pole(const ScatteringData& S);
// Exact inverse of strip_pole.
ScatteringData add_pole(const ScatteringData& S0, const PoleData& pole);

enum class Variant { Plain, Delta };

// Residue constants of the plain problem: Res_{z1} col1 = C col2(z1),
// Res_{conj z1} col2 = D col1(conj z1).
cplx residue_C(const PoleData& p, double x);
cplx residue_D(const PoleData& p, double x);

struct BacklundMatrix {
    double x = 0.0;
    Mat2 A;
    cplx detA;
    Variant variant = Variant::Plain;
    cplx p1, p2;  // pole of column 1 / column 2
    cplx k1, k2;  // Res_{p1} col1 = k1 col2(p1), Res_{p2} col2 = k2 col1(p2)

    Mat2 mu(cplx z) const;  // diag(z - p1, z - p2)
};

// Plain variant from the previous stage m(z1; x) and m(conj z1; x).
BacklundMatrix build_A(const Mat2& m_at_z1, const Mat2& m_at_zbar1, const PoleData& pole, double x);

// Delta variant from the previous stage m(conj z1; x), m(z1; x), delta(z1) and the product
// of Blaschke factors of poles already added, evaluated at z1 and conj z1.
BacklundMatrix build_A_delta(const Mat2& m_at_zbar1, const Mat2& m_at_z1, const PoleData& pole, double x,
                             cplx delta_at_z1, cplx prior_at_z1 = 1.0, cplx prior_at_zbar1 = 1.0);

struct MomentCorrection {
    cplx B1;  // added to w = -4 lim z m12
    cplx B2;  // added to 2i lim z m21
};

MomentCorrection dressed_moment(const BacklundMatrix& A);

// m^(j)(z) = A mu A^{-1} m^(j-1)(z) mu^{-1}, applied stage by stage on top of a pole-free
// solution.
class DressedSolution {
public:
    DressedSolution(BoundaryValues base, Variant variant);

    Variant variant() const { return variant_; }
    const BoundaryValues& base() const { return base_; }
    std::size_t stages() const { return stages_.size(); }
    const BacklundMatrix& stage(std::size_t j) const { return stages_[j]; }

    void push(const BacklundMatrix& A);
    Mat2 offline(cplx z) const;
    Mat2 plus_at(std::size_t i) const;
    Mat2 minus_at(std::size_t i) const;
    cplx mom12() const { return mom12_; }
    cplx mom21() const { return mom21_; }

    // m after stages [0, upto) applied at an off-line point
    Mat2 stage_offline(cplx z, std::size_t upto) const;
    // Largest residue mismatch of stage j's own conditions, checked on a circle.
    double residue_error(std::size_t j) const;

private:
    BoundaryValues base_;
    Variant variant_;
    std::vector<BacklundMatrix> stages_;
    std::vector<Mat2> ainv_;
    cplx mom12_, mom21_;

    Mat2 apply_stages(Mat2 m, cplx z, std::size_t upto) const;
};

// Appends one stage after checking invertibility and the residue conditions.
DressedSolution dress(const DressedSolution& m0, const BacklundMatrix& A);

struct DressOptions {
    RhpOptions rhp;
    bool verify = true;  // jump and residue checks against the un-stripped data at every x
};

struct DressAllResult {
    ReconstructionResult rec;
    double max_residue_error = 0.0;  // against the original norming constants
    double max_dressed_jump = 0.0;   // against the original reflection data
    double min_abs_detA = 0.0;
};

// Dressing at one x with the given variant; `added` lists poles in the order they are added
// with their stage norming constants.
DressedSolution dress_at(const RhpSolver& solver0, const std::vector<PoleData>& added, double x, Variant v);

// Poles in add order with stage constants, and the fully stripped data.
std::pair<ScatteringData, std::vector<PoleData>> strip_all(const ScatteringData& S);

// Plain-form m at an off-line point and on the line; the delta form is converted by
// m = m_delta diag(delta / beta, beta / delta), beta the product of all Blaschke factors.
Mat2 plain_offline(const DressedSolution& d, const RhpSolver& solver0, const std::vector<PoleData>& added, cplx z);
std::pair<Mat2, Mat2> plain_boundary(const DressedSolution& d, const RhpSolver& solver0,
                                     const std::vector<PoleData>& added, std::size_t i);

// Worst residue mismatch of the plain-form m at every pole, using the original constants.
double plain_residue_error(const DressedSolution& d, const RhpSolver& solver0, const std::vector<PoleData>& added,
                           const std::vector<PoleData>& original);
// Worst |m+ - m- V| on the line for the original reflection data.
double plain_jump_error(const DressedSolution& d, const RhpSolver& solver0, const std::vector<PoleData>& added,
                        const ScatteringData& original);

DressAllResult dress_all(const ScatteringData& S, const RealGrid& xgrid, DressOptions opt = {});

}  // namespace dnls
