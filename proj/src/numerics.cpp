#include "dnls/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include <fftw3.h>

namespace dnls {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::size_t next_pow2(std::size_t v) {
    std::size_t m = 1;
    while (m < v) m <<= 1;
    return m;
}

}  // namespace

rvec RealGrid::points() const {
    rvec p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = at(i);
    return p;
}

RealGrid RealGrid::symmetric(double half_width, std::size_t n) {
    return RealGrid{-half_width, half_width, n};
}

void check_grid(const RealGrid& g, bool require_straddle) {
    if (g.n < 8) throw ValidationError("grid needs at least 8 samples");
    if (!(g.z_min < g.z_max)) throw ValidationError("grid bounds out of order");
    if (require_straddle && !(g.z_min < 0.0 && g.z_max > 0.0))
        throw ValidationError("grid must straddle zero");
}

bool operator==(const RealGrid& a, const RealGrid& b) {
    return a.z_min == b.z_min && a.z_max == b.z_max && a.n == b.n;
}

GridFunction::GridFunction(RealGrid g, cvec v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.n) throw ValidationError("grid function length mismatch");
}

GridFunction GridFunction::sample(const RealGrid& g, const std::function<cplx(double)>& f) {
    cvec v(g.n);
    for (std::size_t i = 0; i < g.n; ++i) v[i] = f(g.at(i));
    return GridFunction(g, std::move(v));
}

bool GridFunction::tails_decay(double threshold) const {
    return tail_left() <= threshold && tail_right() <= threshold;
}

// ---------------------------------------------------------------------------

Fft::Fft(std::size_t n) : n_(n) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    auto* buf = fftw_alloc_complex(n);
    fwd_ = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD,
                            FFTW_ESTIMATE | FFTW_UNALIGNED);
    bwd_ = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_BACKWARD,
                            FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
}

Fft::~Fft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

void Fft::forward(cplx* data) const {
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(static_cast<fftw_plan>(fwd_), p, p);
}

void Fft::backward(cplx* data) const {
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(static_cast<fftw_plan>(bwd_), p, p);
}

// ---------------------------------------------------------------------------

HilbertOperator::HilbertOperator(std::size_t n) : n_(n), m_(next_pow2(2 * n)) {
    fft_ = std::make_shared<Fft>(m_);
    // out_j = sum_k K[j-k] h_k with K[d] = -2/(pi d) for odd d.
    kernel_hat_.assign(m_, 0.0);
    for (std::size_t d = 1; d < n_; d += 2) {
        double c = 2.0 / (pi * static_cast<double>(d));
        kernel_hat_[d] = -c;
        kernel_hat_[m_ - d] = c;
    }
    fft_->forward(kernel_hat_.data());
    for (auto& k : kernel_hat_) k /= static_cast<double>(m_);
}

cvec HilbertOperator::apply(const cvec& h) const {
    if (h.size() != n_) throw ValidationError("Hilbert operator size mismatch");
    cvec buf(m_, 0.0);
    std::copy(h.begin(), h.end(), buf.begin());
    fft_->forward(buf.data());
    for (std::size_t i = 0; i < m_; ++i) buf[i] *= kernel_hat_[i];
    fft_->backward(buf.data());
    buf.resize(n_);
    return buf;
}

cvec HilbertOperator::plus(const cvec& h) const {
    cvec out = apply(h);
    for (std::size_t i = 0; i < n_; ++i) out[i] = 0.5 * (h[i] - I * out[i]);
    return out;
}

cvec HilbertOperator::minus(const cvec& h) const {
    cvec out = apply(h);
    for (std::size_t i = 0; i < n_; ++i) out[i] = -0.5 * (h[i] + I * out[i]);
    return out;
}

Eigen::MatrixXcd HilbertOperator::matrix() const {
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(n_, n_);
    for (std::size_t j = 0; j < n_; ++j)
        for (std::size_t k = 0; k < n_; ++k) {
            long d = static_cast<long>(k) - static_cast<long>(j);
            if (d % 2 != 0) H(j, k) = 2.0 / (pi * static_cast<double>(d));
        }
    return H;
}

GridFunction hilbert_transform(const GridFunction& h) {
    return GridFunction(h.grid, HilbertOperator(h.grid.n).apply(h.values));
}

GridFunction project_plus(const GridFunction& h) {
    return GridFunction(h.grid, HilbertOperator(h.grid.n).plus(h.values));
}

GridFunction project_minus(const GridFunction& h) {
    return GridFunction(h.grid, HilbertOperator(h.grid.n).minus(h.values));
}

cplx cauchy_offline(const RealGrid& g, const cvec& h, cplx z) {
    const double eps = std::numeric_limits<double>::epsilon();
    if (std::abs(z.imag()) <= 10.0 * eps * std::max(1.0, std::abs(z)))
        throw ValidationError("Cauchy integral evaluated on the real axis");
    cplx s = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) s += h[j] / (g.at(j) - z);
    return s * g.h() / (2.0 * pi * I);
}

cplx cauchy_offline(const GridFunction& h, cplx z) { return cauchy_offline(h.grid, h.values, z); }

// ---------------------------------------------------------------------------

DenseSolution solve_dense(const DenseComplexSystem& sys) {
    const auto& A = sys.matrix;
    if (A.rows() != A.cols() || A.rows() != sys.rhs.size())
        throw ValidationError("dense system is not square");
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
    double rc = lu.rcond();
    DenseSolution out;
    out.condition = rc > 0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
    if (!(rc > 1e-13)) throw SingularMatrixError("singular dense system", out.condition);
    out.x = lu.solve(sys.rhs);
    double bn = sys.rhs.cwiseAbs().maxCoeff();
    double rn = (A * out.x - sys.rhs).cwiseAbs().maxCoeff();
    out.residual = bn > 0 ? rn / bn : rn;
    if (out.residual > 1e-10) throw SingularMatrixError("dense solve residual too large", out.condition);
    return out;
}

Eigen::MatrixXcd solve_dense(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B, double* condition) {
    if (A.rows() != A.cols() || A.rows() != B.rows()) throw ValidationError("dense system is not square");
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
    const double rc = lu.rcond();
    const double cond = rc > 0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
    if (condition) *condition = cond;
    if (!(rc > 1e-13)) throw SingularMatrixError("singular dense system", cond);
    Eigen::MatrixXcd X = lu.solve(B);
    const double bn = std::max(B.cwiseAbs().maxCoeff(), 1e-300);
    if ((A * X - B).cwiseAbs().maxCoeff() / bn > 1e-10)
        throw SingularMatrixError("dense solve residual too large", cond);
    return X;
}

GmresResult gmres(const LinearMap& apply, const cvec& rhs, double tol, int restart, int max_iter) {
    const std::size_t n = rhs.size();
    GmresResult res;
    res.x.assign(n, 0.0);
    auto norm = [](const cvec& v) {
        double s = 0;
        for (auto& c : v) s += std::norm(c);
        return std::sqrt(s);
    };
    const double bnorm = norm(rhs);
    if (bnorm == 0.0) {
        res.converged = true;
        return res;
    }
    cvec r(n), w(n);
    std::vector<cvec> V;
    Eigen::MatrixXcd Hm;
    int total = 0;
    while (total < max_iter) {
        apply(res.x, w);
        for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - w[i];
        double beta = norm(r);
        res.residual = beta / bnorm;
        if (res.residual <= tol) {
            res.converged = true;
            break;
        }
        const int m = restart;
        V.assign(1, cvec(n));
        for (std::size_t i = 0; i < n; ++i) V[0][i] = r[i] / beta;
        Hm = Eigen::MatrixXcd::Zero(m + 1, m);
        std::vector<cplx> cs(m), sn(m);
        Eigen::VectorXcd g = Eigen::VectorXcd::Zero(m + 1);
        g(0) = beta;
        int k = 0;
        for (; k < m && total < max_iter; ++k, ++total) {
            apply(V[k], w);
            for (int j = 0; j <= k; ++j) {
                cplx hij = 0;
                for (std::size_t i = 0; i < n; ++i) hij += std::conj(V[j][i]) * w[i];
                Hm(j, k) = hij;
                for (std::size_t i = 0; i < n; ++i) w[i] -= hij * V[j][i];
            }
            double hn = norm(w);
            Hm(k + 1, k) = hn;
            for (int j = 0; j < k; ++j) {
                cplx t = std::conj(cs[j]) * Hm(j, k) + std::conj(sn[j]) * Hm(j + 1, k);
                Hm(j + 1, k) = -sn[j] * Hm(j, k) + cs[j] * Hm(j + 1, k);
                Hm(j, k) = t;
            }
            cplx a = Hm(k, k), b = Hm(k + 1, k);
            double den = std::sqrt(std::norm(a) + std::norm(b));
            cs[k] = a / den;
            sn[k] = b / den;
            Hm(k, k) = den;
            Hm(k + 1, k) = 0;
            g(k + 1) = -sn[k] * g(k);
            g(k) = std::conj(cs[k]) * g(k);
            if (std::abs(g(k + 1)) / bnorm <= tol * 0.5 || hn == 0.0) {
                ++k;
                ++total;
                break;
            }
            V.emplace_back(n);
            for (std::size_t i = 0; i < n; ++i) V[k + 1][i] = w[i] / hn;
        }
        Eigen::VectorXcd y = Hm.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
        for (int j = 0; j < k; ++j)
            for (std::size_t i = 0; i < n; ++i) res.x[i] += y(j) * V[j][i];
    }
    res.iterations = total;
    if (!res.converged) {
        apply(res.x, w);
        for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - w[i];
        res.residual = norm(r) / bnorm;
        res.converged = res.residual <= tol;
    }
    return res;
}

// ---------------------------------------------------------------------------

cvec spectral_derivative(const cvec& u, double dx) {
    const std::size_t n = u.size();
    Fft fft(n);
    cvec buf(u);
    fft.forward(buf.data());
    const double L = dx * static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
        long k = j <= n / 2 ? static_cast<long>(j) : static_cast<long>(j) - static_cast<long>(n);
        if (n % 2 == 0 && j == n / 2) k = 0;
        buf[j] *= I * (2.0 * pi * static_cast<double>(k) / L) / static_cast<double>(n);
    }
    fft.backward(buf.data());
    return buf;
}

cvec upsample(const cvec& u, int log2_factor) {
    const std::size_t n = u.size();
    if (log2_factor == 0) return u;
    const std::size_t f = std::size_t(1) << log2_factor;
    const std::size_t m = n * f;
    Fft fn(n), fm(m);
    cvec U(u);
    fn.forward(U.data());
    cvec V(m, 0.0);
    const std::size_t h = n / 2;
    for (std::size_t j = 0; j < h; ++j) V[j] = U[j];
    for (std::size_t j = n - h; j < n; ++j) V[m - n + j] = U[j];
    if (n % 2 == 0) {
        V[h] = 0.5 * U[h];
        V[m - h] = 0.5 * U[h];
    } else {
        V[h] = U[h];
    }
    fm.backward(V.data());
    cvec out((n - 1) * f + 1);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = V[i] / static_cast<double>(n);
    return out;
}

cvec fourier_resample(const RealGrid& g, const cvec& u, const rvec& x) {
    const std::size_t n = g.n;
    Fft fft(n);
    cvec U(u);
    fft.forward(U.data());
    const double L = g.h() * static_cast<double>(n);
    cvec out(x.size(), 0.0);
    const double tol = 1e-12 * (g.z_max - g.z_min);
    for (std::size_t p = 0; p < x.size(); ++p) {
        if (x[p] < g.z_min - tol || x[p] > g.z_max + tol) continue;
        const double s = x[p] - g.z_min;
        cplx acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            long k = j <= n / 2 ? static_cast<long>(j) : static_cast<long>(j) - static_cast<long>(n);
            if (n % 2 == 0 && j == n / 2) {
                acc += U[j] * std::cos(2.0 * pi * static_cast<double>(k) * s / L);
                continue;
            }
            acc += U[j] * std::exp(I * (2.0 * pi * static_cast<double>(k) * s / L));
        }
        out[p] = acc / static_cast<double>(n);
    }
    return out;
}

rvec cumulative_from_right(const rvec& f, double dx) {
    const std::size_t n = f.size();
    rvec out(n, 0.0);
    if (n < 2) return out;
    if (n < 6) {
        for (std::size_t i = n - 1; i-- > 0;) out[i] = out[i + 1] + 0.5 * dx * (f[i] + f[i + 1]);
        return out;
    }
    // Interval [x_i, x_{i+1}] integrated with the quintic through 6 neighbours.
    static const double gx[3] = {0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)};
    static const double gw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    double weights[6][6];
    for (int shift = 0; shift < 6; ++shift) {
            for (int j = 0; j < 6; ++j) {
            double wj = 0;
            for (int q = 0; q < 3; ++q) {
                double l = 1.0;
                for (int m = 0; m < 6; ++m) {
                    if (m == j) continue;
                    l *= (gx[q] - (m - shift)) / double(j - m);
                }
                wj += gw[q] * l;
            }
            weights[shift][j] = wj;
        }
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        long s = static_cast<long>(i) - 2;
        s = std::clamp<long>(s, 0, static_cast<long>(n) - 6);
        int shift = static_cast<int>(static_cast<long>(i) - s);
        double seg = 0;
        for (int j = 0; j < 6; ++j) seg += weights[shift][j] * f[static_cast<std::size_t>(s + j)];
        out[i] = out[i + 1] + dx * seg;
    }
    return out;
}

double sup_norm(const cvec& a) {
    double m = 0;
    for (auto& c : a) m = std::max(m, std::abs(c));
    return m;
}

double sup_diff(const cvec& a, const cvec& b) {
    double m = 0;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& f) {
    int t = std::max(1, threads);
    if (t == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    t = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(t), n));
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(t));
    for (int w = 0; w < t; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = static_cast<std::size_t>(w); i < n; i += static_cast<std::size_t>(t)) f(i);
            } catch (...) {
                errs[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

}  // namespace dnls
