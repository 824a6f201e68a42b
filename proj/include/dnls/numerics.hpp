#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "dnls/errors.hpp"

namespace dnls {

using cplx = std::complex<double>;
using cvec = std::vector<cplx>;
using rvec = std::vector<double>;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr cplx I{0.0, 1.0};

// Uniform sampling of [z_min, z_max] with both end points included.
struct RealGrid {
    double z_min = -1.0;
    double z_max = 1.0;
    std::size_t n = 8;

    double h() const { return (z_max - z_min) / static_cast<double>(n - 1); }
    double at(std::size_t i) const { return z_min + h() * static_cast<double>(i); }
    rvec points() const;

    static RealGrid symmetric(double half_width, std::size_t n);
};

// Throws ValidationError when the grid breaks its invariants. The zero-straddling
// requirement only applies to spectral grids.
void check_grid(const RealGrid& g, bool require_straddle = true);

bool operator==(const RealGrid& a, const RealGrid& b);

struct GridFunction {
    RealGrid grid;
    cvec values;

    GridFunction() = default;
    GridFunction(RealGrid g, cvec v);
    static GridFunction sample(const RealGrid& g, const std::function<cplx(double)>& f);

    double tail_left() const { return std::abs(values.front()); }
    double tail_right() const { return std::abs(values.back()); }
    bool tails_decay(double threshold = 1e-8) const;
};

// FFT of a fixed length. Plans are created under a global lock; execution is
// thread-safe and works on caller-owned buffers.
class Fft {
public:
    explicit Fft(std::size_t n);
    ~Fft();
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    std::size_t size() const { return n_; }
    void forward(cplx* data) const;
    void backward(cplx* data) const;  // unnormalized

private:
    std::size_t n_;
    void* fwd_;
    void* bwd_;
};

// Discrete Hilbert transform on a uniform grid,
//   (H h)_j = sum_{k-j odd} h_k * 2 / (pi (k-j)),
// the sinc-interpolant version of (1/pi) pv int h(s)/(s-z) ds. Applied as a
// zero-padded linear convolution, so no periodization enters.
class HilbertOperator {
public:
    explicit HilbertOperator(std::size_t n);

    std::size_t size() const { return n_; }
    cvec apply(const cvec& h) const;
    cvec plus(const cvec& h) const;   // (h - iHh)/2
    cvec minus(const cvec& h) const;  // -(h + iHh)/2

    // Dense n x n matrix of H (tests and small dense solves).
    Eigen::MatrixXcd matrix() const;

private:
    std::size_t n_;
    std::size_t m_;
    cvec kernel_hat_;
    std::shared_ptr<Fft> fft_;
};

GridFunction hilbert_transform(const GridFunction& h);
GridFunction project_plus(const GridFunction& h);
GridFunction project_minus(const GridFunction& h);

// (1/2 pi i) int h(s)/(s-z) ds by the trapezoid rule on the grid.
cplx cauchy_offline(const GridFunction& h, cplx z);
cplx cauchy_offline(const RealGrid& g, const cvec& h, cplx z);

struct DenseComplexSystem {
    Eigen::MatrixXcd matrix;
    Eigen::VectorXcd rhs;
};

struct DenseSolution {
    Eigen::VectorXcd x;
    double condition = 0.0;
    double residual = 0.0;
};

DenseSolution solve_dense(const DenseComplexSystem& sys);

// Same checks as above for several right-hand sides sharing one factorization.
Eigen::MatrixXcd solve_dense(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B, double* condition = nullptr);

struct GmresResult {
    cvec x;
    int iterations = 0;
    double residual = 0.0;  // relative, true residual at exit
    bool converged = false;
};

using LinearMap = std::function<void(const cvec& in, cvec& out)>;

GmresResult gmres(const LinearMap& apply, const cvec& rhs, double tol, int restart = 100,
                  int max_iter = 2000);

// Spectral derivative of periodic samples with spacing dx (Nyquist mode dropped).
cvec spectral_derivative(const cvec& u, double dx);

// Band-limited interpolation onto a grid 2^k times finer; returns (n-1)*2^k+1 samples
// covering the same interval.
cvec upsample(const cvec& u, int log2_factor);

// Trigonometric interpolation of samples u on grid g evaluated at arbitrary points
// inside the grid interval. Points outside map to zero.
cvec fourier_resample(const RealGrid& g, const cvec& u, const rvec& x);

// C[i] = int_{x_i}^{x_{n-1}} f, sixth-order local polynomial rule.
rvec cumulative_from_right(const rvec& f, double dx);

double sup_norm(const cvec& a);
double sup_diff(const cvec& a, const cvec& b);

// Runs f(i) for i in [0, n) on up to `threads` workers. Each index is touched by
// exactly one worker; results must be written to per-index storage.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& f);

}  // namespace dnls
