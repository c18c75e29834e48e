#pragma once

// Independent reference implementations used only by the test suite. These
// deliberately avoid the library's solver code paths so they can arbitrate.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "ssrlrcm/ensemble.hpp"
#include "ssrlrcm/numerics.hpp"

namespace oracles {

using ssrlrcm::DenseMatrix;

/// Plain Gauss elimination with partial pivoting on an augmented matrix.
inline std::vector<double> gauss_solve(DenseMatrix a, std::vector<double> b) {
    const std::size_t n = a.rows;
    if (a.cols != n || b.size() != n) throw std::invalid_argument("gauss_solve: bad dimensions");
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
        if (a(p, k) == 0.0) throw std::invalid_argument("gauss_solve: singular");
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
            std::swap(b[k], b[p]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a(i, k) / a(k, k);
            if (f == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= a(ii, j) * x[j];
        x[ii] = s / a(ii, ii);
    }
    return x;
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
inline std::vector<double> jacobi_eigenvalues(DenseMatrix a, std::size_t max_sweeps = 100) {
    const std::size_t n = a.rows;
    double total2 = 0.0;
    for (double v : a.entries) total2 += v * v;
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off <= 1e-28 * total2) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
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
            }
        }
    }
    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
    return eig;
}

inline double spectral_norm_symmetric(const DenseMatrix& a) {
    double m = 0.0;
    for (double ev : jacobi_eigenvalues(a)) m = std::max(m, std::abs(ev));
    return m;
}

/// Singular values of a general matrix via Jacobi on M^T M.
inline std::vector<double> singular_values(const DenseMatrix& m) {
    const DenseMatrix gram = ssrlrcm::matmul(ssrlrcm::transpose(m), m);
    std::vector<double> eig = jacobi_eigenvalues(gram);
    for (double& v : eig) v = std::sqrt(std::max(v, 0.0));
    std::sort(eig.begin(), eig.end(), std::greater<double>());
    return eig;
}

namespace detail {

inline double simpson(double (*f)(double, double, double), double nu, double z, double a,
                      double b) {
    const double c = 0.5 * (a + b);
    return (b - a) / 6.0 * (f(a, nu, z) + 4.0 * f(c, nu, z) + f(b, nu, z));
}

inline double bessel_integrand(double t, double nu, double z) {
    // exp(-z cosh t) cosh(nu t), evaluated in log space to dodge overflow
    const double log_val = -z * std::cosh(t);
    if (log_val < -700.0) return 0.0;
    return std::exp(log_val) * std::cosh(nu * t);
}

inline double adaptive(double (*f)(double, double, double), double nu, double z, double a,
                       double b, double whole, double tol, int depth) {
    const double c = 0.5 * (a + b);
    const double left = simpson(f, nu, z, a, c);
    const double right = simpson(f, nu, z, c, b);
    if (depth > 40 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive(f, nu, z, a, c, left, tol / 2.0, depth + 1) +
           adaptive(f, nu, z, c, b, right, tol / 2.0, depth + 1);
}

}  // namespace detail

/// Modified Bessel function of the second kind through adaptive quadrature of
/// K_nu(z) = int_0^inf exp(-z cosh t) cosh(nu t) dt (z > 0), accurate to about
/// 1e-13 relative.
inline double bessel_k_quadrature(double nu, double z) {
    if (!(z > 0.0)) throw std::invalid_argument("bessel_k_quadrature: z must be positive");
    double t_max = 10.0;
    while (z * std::cosh(t_max) - std::abs(nu) * t_max < 740.0 && t_max < 60.0) t_max += 5.0;
    // A coarse composite pass sizes the relative tolerance.
    double coarse = 0.0;
    const std::size_t pieces = 64;
    for (std::size_t p = 0; p < pieces; ++p) {
        const double a = t_max * double(p) / double(pieces);
        const double b = t_max * double(p + 1) / double(pieces);
        coarse += detail::simpson(detail::bessel_integrand, nu, z, a, b);
    }
    const double tol = 1e-13 * std::max(1.0, std::abs(coarse));
    const double whole = detail::simpson(detail::bessel_integrand, nu, z, 0.0, t_max);
    return detail::adaptive(detail::bessel_integrand, nu, z, 0.0, t_max, whole, tol, 0);
}

/// Matern similarity at distance h under the normalization
/// sigma^2 / (2^(nu-1) Gamma(nu)) (h/l)^nu K_nu(h/l), evaluated numerically.
inline double matern_reference(double h, double lengthscale, double variance, double nu) {
    if (h == 0.0) return variance;
    const double z = h / lengthscale;
    const double front = variance / (std::pow(2.0, nu - 1.0) * std::tgamma(nu));
    return front * std::pow(z, nu) * bessel_k_quadrature(nu, z);
}

inline DenseMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                                 double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    DenseMatrix m(rows, cols);
    for (double& v : m.entries) v = dist(rng);
    return m;
}

/// Random SPD matrix M^T M + I.
inline DenseMatrix random_spd(std::size_t n, std::uint64_t seed) {
    const DenseMatrix m = random_matrix(n, n, seed);
    DenseMatrix a = ssrlrcm::matmul(ssrlrcm::transpose(m), m);
    for (std::size_t i = 0; i < n; ++i) a(i, i) += 1.0;
    return a;
}

inline DenseMatrix random_symmetric(std::size_t n, std::uint64_t seed) {
    DenseMatrix m = random_matrix(n, n, seed);
    DenseMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (m(i, j) + m(j, i));
    return a;
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo = -1.0,
                                         double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = dist(rng);
    return v;
}

/// Random ensemble of partitions with every cluster nonempty.
inline std::vector<ssrlrcm::Partition> random_partitions(std::size_t n, std::size_t r, int k_max,
                                                         std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<ssrlrcm::Partition> parts;
    for (std::size_t l = 0; l < r; ++l) {
        std::uniform_int_distribution<int> pick_k(1, std::min<int>(k_max, int(n)));
        const int k = pick_k(rng);
        ssrlrcm::Partition p;
        p.cluster_count = k;
        p.labels.resize(n);
        for (int c = 0; c < k; ++c) p.labels[static_cast<std::size_t>(c)] = c;
        std::uniform_int_distribution<int> pick(0, k - 1);
        for (std::size_t i = static_cast<std::size_t>(k); i < n; ++i) p.labels[i] = pick(rng);
        std::shuffle(p.labels.begin(), p.labels.end(), rng);
        p.inertia = double(l + 1);
        parts.push_back(std::move(p));
    }
    return parts;
}

}  // namespace oracles
