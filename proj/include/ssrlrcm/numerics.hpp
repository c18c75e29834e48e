#pragma once

// Dense linear algebra and iterative-solver primitives shared by the rest of
// the library. Everything is double precision; matrices are row-major.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ssrlrcm {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

class SingularMatrix : public Error {
public:
    using Error::Error;
};

class NotConverged : public Error {
public:
    NotConverged(double residual, std::size_t iterations)
        : Error("no convergence after " + std::to_string(iterations) +
                " iterations, residual " + std::to_string(residual)),
          residual_(residual),
          iterations_(iterations) {}

    double residual() const { return residual_; }
    std::size_t iterations() const { return iterations_; }

private:
    double residual_;
    std::size_t iterations_;
};

/// Row-major dense matrix.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> entries;

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c, double value = 0.0)
        : rows(r), cols(c), entries(r * c, value) {}

    double& operator()(std::size_t i, std::size_t j) { return entries[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return entries[i * cols + j]; }

    std::span<const double> row(std::size_t i) const {
        return {entries.data() + i * cols, cols};
    }
    std::span<double> row(std::size_t i) {
        return {entries.data() + i * cols, cols};
    }

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

inline double norm_inf(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double max_abs(const DenseMatrix& a) {
    double m = 0.0;
    for (double x : a.entries) m = std::max(m, std::abs(x));
    return m;
}

/// Induced infinity norm (maximum absolute row sum).
inline double inf_norm(const DenseMatrix& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i) {
        double s = 0.0;
        for (double x : a.row(i)) s += std::abs(x);
        m = std::max(m, s);
    }
    return m;
}

inline double frobenius_norm(const DenseMatrix& a) {
    double s = 0.0;
    for (double x : a.entries) s += x * x;
    return std::sqrt(s);
}

inline std::vector<double> matvec(const DenseMatrix& a, std::span<const double> x) {
    if (x.size() != a.cols) throw DimensionMismatch("matvec: operand length mismatch");
    std::vector<double> y(a.rows, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) y[i] = dot(a.row(i), x);
    return y;
}

inline DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix t(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    return t;
}

inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols != b.rows) throw DimensionMismatch("matmul: inner dimensions differ");
    DenseMatrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* brow = b.entries.data() + k * b.cols;
            double* crow = c.entries.data() + i * b.cols;
            for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

/// Rank-k factor pair: the represented matrix is left * right.
struct LowRankFactor {
    DenseMatrix left;   // n x k
    DenseMatrix right;  // k x n_cols
    std::size_t rank = 0;
};

/// Type-erased matvec contract y = A*x. Lets the iterative solvers run on
/// dense, factored, or hierarchical operands uniformly.
struct LinearOperator {
    std::size_t dimension = 0;
    std::function<void(std::span<const double>, std::span<double>)> apply_to;

    std::vector<double> apply(std::span<const double> x) const {
        if (x.size() != dimension) throw DimensionMismatch("operator: operand length mismatch");
        std::vector<double> y(dimension, 0.0);
        apply_to(x, y);
        return y;
    }

    static LinearOperator from_dense(DenseMatrix a) {
        if (a.rows != a.cols) throw DimensionMismatch("operator: matrix must be square");
        auto m = std::make_shared<DenseMatrix>(std::move(a));
        return {m->rows, [m](std::span<const double> x, std::span<double> y) {
                    for (std::size_t i = 0; i < m->rows; ++i) y[i] = dot(m->row(i), x);
                }};
    }

    static LinearOperator from_diagonal(std::vector<double> d) {
        auto v = std::make_shared<std::vector<double>>(std::move(d));
        return {v->size(), [v](std::span<const double> x, std::span<double> y) {
                    for (std::size_t i = 0; i < v->size(); ++i) y[i] = (*v)[i] * x[i];
                }};
    }
};

namespace detail {

inline void require_square_system(const DenseMatrix& a, std::span<const double> b) {
    if (a.rows != a.cols) throw DimensionMismatch("solve: matrix must be square");
    if (b.size() != a.rows) throw DimensionMismatch("solve: right-hand side length mismatch");
}

inline void require_symmetric(const DenseMatrix& a, double rel_tol) {
    const double scale = std::max(1.0, max_abs(a));
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = i + 1; j < a.cols; ++j)
            if (std::abs(a(i, j) - a(j, i)) > rel_tol * scale)
                throw std::invalid_argument("matrix is not symmetric within tolerance");
}

}  // namespace detail

/// Solves A x = b for symmetric positive definite A by Cholesky factorization.
/// Throws NotPositiveDefinite when a pivot is not strictly positive.
inline std::vector<double> cholesky_solve(const DenseMatrix& a, std::span<const double> b) {
    detail::require_square_system(a, b);
    detail::require_symmetric(a, 1e-10);
    const std::size_t n = a.rows;

    // Lower factor, row-major so the inner dots are contiguous.
    DenseMatrix l(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* li = l.entries.data() + i * n;
        for (std::size_t j = 0; j <= i; ++j) {
            const double* lj = l.entries.data() + j * n;
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
            if (i == j) {
                if (!(s > 0.0))  // also rejects NaN
                    throw NotPositiveDefinite("pivot " + std::to_string(s) + " at index " +
                                              std::to_string(i));
                l(i, j) = std::sqrt(s);
            } else {
                l(i, j) = s / lj[j];
            }
        }
    }

    // L z = b, then L^T x = z.
    std::vector<double> x(b.begin(), b.end());
    for (std::size_t i = 0; i < n; ++i) {
        const double* li = l.entries.data() + i * n;
        double s = x[i];
        for (std::size_t k = 0; k < i; ++k) s -= li[k] * x[k];
        x[i] = s / li[i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = x[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
        x[ii] = s / l(ii, ii);
    }
    return x;
}

/// Solves A x = b by LU factorization with partial pivoting. A need not be
/// symmetric. Throws SingularMatrix when a pivot falls below 1e-14 * ||A||_inf.
inline std::vector<double> lu_solve(const DenseMatrix& a, std::span<const double> b) {
    detail::require_square_system(a, b);
    const std::size_t n = a.rows;
    const double pivot_floor = 1e-14 * inf_norm(a);

    DenseMatrix lu = a;
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(lu(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(lu(i, k));
            if (v > best) {
                best = v;
                p = i;
            }
        }
        if (!(best > pivot_floor) || best == 0.0)
            throw SingularMatrix("pivot magnitude " + std::to_string(best) + " at column " +
                                 std::to_string(k));
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(p, j));
            std::swap(perm[k], perm[p]);
        }
        const double inv_pivot = 1.0 / lu(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = lu(i, k) * inv_pivot;
            lu(i, k) = f;
            if (f == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= f * lu(k, j);
        }
    }

    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[perm[i]];
    for (std::size_t i = 1; i < n; ++i) {
        double s = x[i];
        for (std::size_t k = 0; k < i; ++k) s -= lu(i, k) * x[k];
        x[i] = s;
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = x[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= lu(ii, k) * x[k];
        x[ii] = s / lu(ii, ii);
    }
    return x;
}

/// Conjugate gradients for a symmetric positive definite operator. The
/// returned x satisfies ||A x - b||_2 <= tol * ||b||_2: convergence of the
/// recurrence residual is confirmed against the true residual, and the
/// iteration restarts from the true residual if the two have drifted apart.
/// An optional diagonal enables Jacobi preconditioning; CG is
/// unpreconditioned by default.
inline std::vector<double> conjugate_gradient(const LinearOperator& op, std::span<const double> b,
                                              double tol, std::size_t max_iter,
                                              std::span<const double> jacobi_diagonal = {}) {
    if (b.size() != op.dimension) throw DimensionMismatch("cg: right-hand side length mismatch");
    const bool precond = !jacobi_diagonal.empty();
    if (precond && jacobi_diagonal.size() != op.dimension)
        throw DimensionMismatch("cg: preconditioner length mismatch");

    const std::size_t n = op.dimension;
    const double b_norm = norm2(b);
    std::vector<double> x(n, 0.0);
    if (b_norm == 0.0) return x;
    const double target = tol * b_norm;

    std::vector<double> r(b.begin(), b.end());
    std::vector<double> z(n), p(n), q(n);
    auto apply_precond = [&](const std::vector<double>& in, std::vector<double>& out) {
        if (precond)
            for (std::size_t i = 0; i < n; ++i) out[i] = in[i] / jacobi_diagonal[i];
        else
            out = in;
    };
    // Recomputes r = b - A x; returns the true residual norm.
    auto refresh_residual = [&]() {
        op.apply_to(x, q);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
        return norm2(r);
    };

    apply_precond(r, z);
    p = z;
    double rz = dot(r, z);
    double residual = norm2(r);
    bool restarted_clean = true;  // r currently equals the true residual

    for (std::size_t it = 0; it < max_iter; ++it) {
        if (residual <= target) {
            if (!restarted_clean) {
                residual = refresh_residual();
                restarted_clean = true;
                if (residual > target) {  // recurrence drifted; restart from here
                    apply_precond(r, z);
                    p = z;
                    rz = dot(r, z);
                    continue;
                }
            }
            return x;
        }
        op.apply_to(p, q);
        const double pq = dot(p, q);
        if (!(pq > 0.0))
            throw NotPositiveDefinite("cg: operator is not positive definite (p'Ap = " +
                                      std::to_string(pq) + ")");
        const double step = rz / pq;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += step * p[i];
            r[i] -= step * q[i];
        }
        restarted_clean = false;
        residual = norm2(r);
        if (residual <= target) {
            residual = refresh_residual();
            restarted_clean = true;
            if (residual <= target) return x;
            apply_precond(r, z);
            p = z;
            rz = dot(r, z);
            continue;
        }
        apply_precond(r, z);
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    if (restarted_clean ? residual <= target : refresh_residual() <= target) return x;
    throw NotConverged(norm2(r), max_iter);
}

/// Power iteration estimate of the spectral norm, from below. The estimate is
/// the running maximum of ||A x_k|| / ||x_k||, so it is nondecreasing in the
/// iteration count for a fixed start vector.
inline double power_iteration_norm(const LinearOperator& op, std::size_t iters,
                                   std::uint64_t seed) {
    if (iters < 1) throw std::invalid_argument("power iteration needs at least one step");
    const std::size_t n = op.dimension;
    if (n == 0) return 0.0;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> x(n), y(n);
    for (double& v : x) v = gauss(rng);
    const double x0 = norm2(x);
    if (x0 == 0.0) x[0] = 1.0;
    for (double& v : x) v /= std::max(x0, 1e-300);

    double estimate = 0.0;
    for (std::size_t it = 0; it < iters; ++it) {
        op.apply_to(x, y);
        const double ny = norm2(y);
        estimate = std::max(estimate, ny);
        if (ny == 0.0) return estimate;
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / ny;
    }
    return estimate;
}

/// Seed derivation for independent substreams (splitmix64 over a combined key).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace ssrlrcm
