#pragma once

// Small dense linear-algebra kernel used throughout the library: row-major
// matrices, Gaussian elimination, Jacobi and Francis-QR eigensolvers, the
// vectorized Lyapunov solve, spectral norms and Hurwitz tests. Dimensions in
// this project stay below ~30, so everything here favors exactness and
// testability over asymptotics.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <utility>
#include <vector>

#include "hybris/errors.hpp"

namespace hybris {

using Vec = std::vector<double>;

class Mat {
public:
    Mat() = default;

    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    Mat(std::initializer_list<std::initializer_list<double>> init) {
        rows_ = init.size();
        cols_ = rows_ ? init.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& row : init) {
            if (row.size() != cols_) throw DimensionError("ragged initializer for Mat");
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Mat zeros(std::size_t rows, std::size_t cols) { return Mat(rows, cols); }

    static Mat diag(const Vec& d) {
        Mat m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    static Mat column(const Vec& v) {
        Mat m(v.size(), 1);
        m.data_ = v;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool finite() const {
        return std::all_of(data_.begin(), data_.end(),
                           [](double v) { return std::isfinite(v); });
    }

    Mat transpose() const {
        Mat t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Mat operator+(const Mat& o) const {
        check_same_shape(o);
        Mat r = *this;
        for (std::size_t k = 0; k < data_.size(); ++k) r.data_[k] += o.data_[k];
        return r;
    }

    Mat operator-(const Mat& o) const {
        check_same_shape(o);
        Mat r = *this;
        for (std::size_t k = 0; k < data_.size(); ++k) r.data_[k] -= o.data_[k];
        return r;
    }

    Mat operator*(const Mat& o) const {
        if (cols_ != o.rows_) throw DimensionError("Mat multiply: inner dimensions differ");
        Mat r(rows_, o.cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = 0; k < cols_; ++k) {
                const double a = (*this)(i, k);
                if (a == 0.0) continue;
                for (std::size_t j = 0; j < o.cols_; ++j) r(i, j) += a * o(k, j);
            }
        return r;
    }

    Mat operator*(double s) const {
        Mat r = *this;
        for (double& v : r.data_) v *= s;
        return r;
    }

    friend Mat operator*(double s, const Mat& m) { return m * s; }

    Vec apply(const Vec& x) const {
        if (cols_ != x.size()) throw DimensionError("Mat apply: size mismatch");
        Vec y(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < cols_; ++j) acc += (*this)(i, j) * x[j];
            y[i] = acc;
        }
        return y;
    }

    /// Largest absolute entry.
    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    void check_same_shape(const Mat& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw DimensionError("Mat shape mismatch");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Vector helpers
// ---------------------------------------------------------------------------

inline double norm2(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline Vec vec_add(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw DimensionError("vec_add: size mismatch");
    Vec r = a;
    for (std::size_t i = 0; i < b.size(); ++i) r[i] += b[i];
    return r;
}

inline Vec vec_sub(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw DimensionError("vec_sub: size mismatch");
    Vec r = a;
    for (std::size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
    return r;
}

inline Vec vec_scale(const Vec& a, double s) {
    Vec r = a;
    for (double& x : r) x *= s;
    return r;
}

inline double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw DimensionError("dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline Vec concat(const Vec& a, const Vec& b) {
    Vec r = a;
    r.insert(r.end(), b.begin(), b.end());
    return r;
}

// ---------------------------------------------------------------------------
// Linear solves
// ---------------------------------------------------------------------------

/// Solves a X = b for multiple right-hand sides with partially pivoted
/// Gaussian elimination. Throws SingularMatrixError on (numerical) rank loss.
inline Mat solve_linear(Mat a, Mat b) {
    if (!a.square()) throw DimensionError("solve_linear: matrix not square");
    if (a.rows() != b.rows()) throw DimensionError("solve_linear: rhs rows mismatch");
    const std::size_t n = a.rows();
    const std::size_t m = b.cols();
    double scale = a.max_abs();
    if (scale == 0.0) throw SingularMatrixError("solve_linear: zero matrix");

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        double best = std::abs(a(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            const double v = std::abs(a(r, col));
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best <= 1e-13 * scale)
            throw SingularMatrixError("solve_linear: matrix is singular to working precision");
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
            for (std::size_t j = 0; j < m; ++j) std::swap(b(col, j), b(piv, j));
        }
        const double inv_p = 1.0 / a(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a(r, col) * inv_p;
            if (f == 0.0) continue;
            a(r, col) = 0.0;
            for (std::size_t j = col + 1; j < n; ++j) a(r, j) -= f * a(col, j);
            for (std::size_t j = 0; j < m; ++j) b(r, j) -= f * b(col, j);
        }
    }
    Mat x(n, m);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = n; i-- > 0;) {
            double acc = b(i, j);
            for (std::size_t k = i + 1; k < n; ++k) acc -= a(i, k) * x(k, j);
            x(i, j) = acc / a(i, i);
        }
    }
    return x;
}

inline Vec solve_linear(const Mat& a, const Vec& b) {
    Mat x = solve_linear(a, Mat::column(b));
    return x.data();
}

inline Mat inverse(const Mat& a) {
    return solve_linear(a, Mat::identity(a.rows()));
}

inline Mat kron(const Mat& a, const Mat& b) {
    Mat r(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double s = a(i, j);
            if (s == 0.0) continue;
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l)
                    r(i * b.rows() + k, j * b.cols() + l) = s * b(k, l);
        }
    return r;
}

// ---------------------------------------------------------------------------
// Symmetric eigenproblem (cyclic Jacobi)
// ---------------------------------------------------------------------------

struct SymEig {
    Vec values;   ///< ascending
    Mat vectors;  ///< columns are orthonormal eigenvectors, matching `values`
};

/// Cyclic Jacobi on a (symmetrized) matrix. Tolerance per the fixed 1e-12
/// relative off-diagonal criterion.
inline SymEig sym_eig(const Mat& s_in) {
    if (!s_in.square()) throw DimensionError("sym_eig: matrix not square");
    if (!s_in.finite()) throw NonFiniteError("sym_eig: non-finite entries");
    const std::size_t n = s_in.rows();
    Mat a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (s_in(i, j) + s_in(j, i));
    Mat v = Mat::identity(n);
    const double scale = std::max(a.max_abs(), 1e-300);

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off = std::max(off, std::abs(a(i, j)));
        if (off <= 1e-14 * scale) break;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
    SymEig out;
    out.values.resize(n);
    out.vectors = Mat(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

struct EigBounds {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
};

/// Extreme eigenvalues of a symmetric matrix (symmetrized before solving).
inline EigBounds sym_eig_bounds(const Mat& s) {
    SymEig e = sym_eig(s);
    return {e.values.front(), e.values.back()};
}

// ---------------------------------------------------------------------------
// General (real) eigenvalues: Hessenberg reduction + Francis double-shift QR
// ---------------------------------------------------------------------------

namespace detail {

inline void hessenberg_reduce(Mat& a) {
    const std::size_t n = a.rows();
    if (n < 3) return;
    for (std::size_t k = 0; k + 2 < n; ++k) {
        double alpha = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) alpha += a(i, k) * a(i, k);
        alpha = std::sqrt(alpha);
        if (alpha <= 1e-300) continue;
        if (a(k + 1, k) > 0.0) alpha = -alpha;
        Vec v(n, 0.0);
        v[k + 1] = a(k + 1, k) - alpha;
        for (std::size_t i = k + 2; i < n; ++i) v[i] = a(i, k);
        double vnorm2 = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) vnorm2 += v[i] * v[i];
        if (vnorm2 <= 1e-300) continue;
        const double beta = 2.0 / vnorm2;
        // A <- (I - beta v v^T) A
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = k + 1; i < n; ++i) s += v[i] * a(i, j);
            s *= beta;
            for (std::size_t i = k + 1; i < n; ++i) a(i, j) -= s * v[i];
        }
        // A <- A (I - beta v v^T)
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) s += a(i, j) * v[j];
            s *= beta;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= s * v[j];
        }
    }
}

inline std::pair<std::complex<double>, std::complex<double>> eig2x2(double a, double b,
                                                                    double c, double d) {
    const double tr = a + d;
    const double det = a * d - b * c;
    const double disc = tr * tr / 4.0 - det;
    if (disc >= 0.0) {
        const double root = std::sqrt(disc);
        // stable pairing: larger-magnitude root first, mate via product
        double l1 = tr / 2.0 + (tr >= 0.0 ? root : -root);
        double l2 = (std::abs(l1) > 1e-300) ? det / l1 : tr / 2.0 - (tr >= 0.0 ? root : -root);
        return {std::complex<double>(l1, 0.0), std::complex<double>(l2, 0.0)};
    }
    const double im = std::sqrt(-disc);
    return {std::complex<double>(tr / 2.0, im), std::complex<double>(tr / 2.0, -im)};
}

inline void householder3(double x, double y, double z, double v[3], double& beta) {
    const double nrm = std::sqrt(x * x + y * y + z * z);
    beta = 0.0;
    if (nrm <= 1e-300) return;
    double alpha = (x >= 0.0) ? -nrm : nrm;
    v[0] = x - alpha;
    v[1] = y;
    v[2] = z;
    const double vn2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    if (vn2 <= 1e-300) return;
    beta = 2.0 / vn2;
}

}  // namespace detail

/// Eigenvalues of a general real square matrix. Francis implicit double-shift
/// QR on the Hessenberg form; 2x2 trailing blocks resolved by the quadratic
/// formula so conjugate pairs come out exact to rounding.
inline std::vector<std::complex<double>> eigenvalues(const Mat& a_in) {
    if (!a_in.square()) throw DimensionError("eigenvalues: matrix not square");
    if (!a_in.finite()) throw NonFiniteError("eigenvalues: non-finite entries");
    const std::size_t n = a_in.rows();
    std::vector<std::complex<double>> out;
    out.reserve(n);
    if (n == 0) return out;
    if (n == 1) {
        out.emplace_back(a_in(0, 0), 0.0);
        return out;
    }

    Mat h = a_in;
    detail::hessenberg_reduce(h);
    const double scale = std::max(h.max_abs(), 1e-300);
    const double eps = std::numeric_limits<double>::epsilon();

    long hi = static_cast<long>(n) - 1;
    int iter_since_deflate = 0;
    int total_iters = 0;
    const int max_total = 60 * static_cast<int>(n);

    auto subdiag_small = [&](long k) {
        const double bound = eps * (std::abs(h(k - 1, k - 1)) + std::abs(h(k, k)));
        return std::abs(h(k, k - 1)) <= std::max(bound, eps * scale);
    };

    while (hi >= 0) {
        // deflate converged trailing 1x1 / 2x2 blocks
        if (hi == 0) {
            out.emplace_back(h(0, 0), 0.0);
            --hi;
            continue;
        }
        if (subdiag_small(hi)) {
            out.emplace_back(h(hi, hi), 0.0);
            --hi;
            iter_since_deflate = 0;
            continue;
        }
        if (hi == 1 || subdiag_small(hi - 1)) {
            auto [l1, l2] = detail::eig2x2(h(hi - 1, hi - 1), h(hi - 1, hi),
                                           h(hi, hi - 1), h(hi, hi));
            out.push_back(l1);
            out.push_back(l2);
            hi -= 2;
            iter_since_deflate = 0;
            continue;
        }

        // active block [lo..hi]
        long lo = hi - 1;
        while (lo > 0 && !subdiag_small(lo)) --lo;

        if (++total_iters > max_total)
            throw ConvergenceError("eigenvalues: QR iteration failed to converge");

        // Francis double shift from trailing 2x2 (exceptional shift on stall)
        double s, t;
        if (++iter_since_deflate % 16 == 0) {
            const double w = std::abs(h(hi, hi - 1)) + std::abs(h(hi - 1, hi - 2));
            s = 1.5 * w;
            t = w * w;
        } else {
            s = h(hi - 1, hi - 1) + h(hi, hi);
            t = h(hi - 1, hi - 1) * h(hi, hi) - h(hi - 1, hi) * h(hi, hi - 1);
        }

        double x = h(lo, lo) * h(lo, lo) + h(lo, lo + 1) * h(lo + 1, lo) - s * h(lo, lo) + t;
        double y = h(lo + 1, lo) * (h(lo, lo) + h(lo + 1, lo + 1) - s);
        double z = (lo + 2 <= hi) ? h(lo + 1, lo) * h(lo + 2, lo + 1) : 0.0;

        for (long k = lo; k <= hi - 2; ++k) {
            double v[3], beta;
            detail::householder3(x, y, z, v, beta);
            if (beta != 0.0) {
                const long jlo = std::max(lo, k - 1);
                for (long j = jlo; j < static_cast<long>(n); ++j) {
                    const double sum = v[0] * h(k, j) + v[1] * h(k + 1, j) +
                                       ((k + 2 <= hi) ? v[2] * h(k + 2, j) : 0.0);
                    const double f = beta * sum;
                    h(k, j) -= f * v[0];
                    h(k + 1, j) -= f * v[1];
                    if (k + 2 <= hi) h(k + 2, j) -= f * v[2];
                }
                const long iend = std::min(hi, k + 3);
                for (long i = 0; i <= iend; ++i) {
                    const double sum = v[0] * h(i, k) + v[1] * h(i, k + 1) +
                                       ((k + 2 <= hi) ? v[2] * h(i, k + 2) : 0.0);
                    const double f = beta * sum;
                    h(i, k) -= f * v[0];
                    h(i, k + 1) -= f * v[1];
                    if (k + 2 <= hi) h(i, k + 2) -= f * v[2];
                }
            }
            x = h(k + 1, k);
            y = h(k + 2, k);
            z = (k + 3 <= hi) ? h(k + 3, k) : 0.0;
        }

        // final 2-element rotation
        {
            const long k = hi - 1;
            const double nrm = std::hypot(x, y);
            if (nrm > 1e-300) {
                const double c = x / nrm, sgiv = y / nrm;
                for (long j = k - 1 >= lo ? k - 1 : lo; j < static_cast<long>(n); ++j) {
                    const double h1 = h(k, j), h2 = h(k + 1, j);
                    h(k, j) = c * h1 + sgiv * h2;
                    h(k + 1, j) = -sgiv * h1 + c * h2;
                }
                for (long i = 0; i <= hi; ++i) {
                    const double h1 = h(i, k), h2 = h(i, k + 1);
                    h(i, k) = c * h1 + sgiv * h2;
                    h(i, k + 1) = -sgiv * h1 + c * h2;
                }
            }
        }

        // clean tiny subdiagonals inside the active block
        for (long k = lo + 1; k <= hi; ++k)
            if (subdiag_small(k)) h(k, k - 1) = 0.0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Derived operations
// ---------------------------------------------------------------------------

/// Largest singular value, via the symmetric eigenproblem of A^T A.
inline double spectral_norm(const Mat& a) {
    if (!a.finite()) throw NonFiniteError("spectral_norm: non-finite entries");
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    const Mat& small = a;
    Mat gram = (a.rows() >= a.cols()) ? small.transpose() * small : small * small.transpose();
    EigBounds b = sym_eig_bounds(gram);
    return std::sqrt(std::max(b.lambda_max, 0.0));
}

struct HurwitzResult {
    bool hurwitz = false;
    double max_real_part = 0.0;
};

/// True iff every eigenvalue has real part < -tol.
inline HurwitzResult is_hurwitz(const Mat& a, double tol = 1e-9) {
    auto eigs = eigenvalues(a);
    double mx = -std::numeric_limits<double>::infinity();
    for (const auto& l : eigs) mx = std::max(mx, l.real());
    if (eigs.empty()) mx = 0.0;
    return {mx < -tol, mx};
}

/// Solves A^T P + P A = -R for symmetric positive definite R and Hurwitz A,
/// by eliminating the n^2-dimensional vectorized system. Verifies the
/// residual and definiteness of the result.
inline Mat solve_lyapunov(const Mat& a, const Mat& r) {
    if (!a.square() || !r.square() || a.rows() != r.rows())
        throw DimensionError("solve_lyapunov: dimension mismatch");
    const std::size_t n = a.rows();
    HurwitzResult hz = is_hurwitz(a);
    if (!hz.hurwitz)
        throw NotHurwitzError("solve_lyapunov: matrix has an eigenvalue with real part >= 0 (max Re = " +
                              std::to_string(hz.max_real_part) + ")");

    // Row idx(i,j) encodes entry (i,j) of A^T P + P A:
    //   sum_k A(k,i) P(k,j) + sum_k A(k,j) P(i,k) = -R(i,j)
    Mat sys(n * n, n * n);
    Vec rhs(n * n);
    auto idx = [n](std::size_t i, std::size_t j) { return i * n + j; };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t row = idx(i, j);
            for (std::size_t k = 0; k < n; ++k) {
                sys(row, idx(k, j)) += a(k, i);
                sys(row, idx(i, k)) += a(k, j);
            }
            rhs[row] = -r(i, j);
        }
    Vec p = solve_linear(sys, rhs);

    Mat pm(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) pm(i, j) = p[idx(i, j)];
    // exact symmetrization (the solution of the symmetric equation is symmetric)
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 0.5 * (pm(i, j) + pm(j, i));
            pm(i, j) = v;
            pm(j, i) = v;
        }

    Mat resid = a.transpose() * pm + pm * a + r;
    const double pnorm = pm.max_abs();
    if (resid.max_abs() > 1e-10 * (1.0 + pnorm))
        throw SingularMatrixError("solve_lyapunov: residual exceeds tolerance");
    if (sym_eig_bounds(pm).lambda_min <= 0.0)
        throw SingularMatrixError("solve_lyapunov: solution not positive definite");
    return pm;
}

}  // namespace hybris
