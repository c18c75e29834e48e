#pragma once

// Transductive semi-supervised regression solvers.
//
// All solvers minimize, over predictions f for every point,
//     Q(f) = 1/2 ( sum_labeled (f_i - y_i)^2
//                  + alpha * sum_ij w_ij (f_i - f_j)^2
//                  + beta * ||f||^2 )
// whose stationarity condition is (G + alpha*L) f = y_padded with
// L = D - W the graph Laplacian and G the diagonal with beta+1 on labeled
// entries and beta elsewhere. Labeled points occupy the leading indices by
// contract; loaders permute accordingly.
//
// solve_dense works on any symmetric similarity matrix. solve_woodbury takes
// the factored co-association matrix and solves the same system through the
// Woodbury identity with S = G + alpha*D:
//     f = (S^-1 + alpha S^-1 B (I - alpha B^T S^-1 B)^-1 B^T S^-1) y_padded
// at O(n*m + m^3) cost, never materializing an n x n matrix.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssrlrcm/ensemble.hpp"
#include "ssrlrcm/numerics.hpp"

namespace ssrlrcm {

class AsymmetricInput : public Error {
public:
    using Error::Error;
};

class SingularCore : public Error {
public:
    using Error::Error;
};

enum class SolverPath { DenseRbf, DenseEnsemble, Woodbury, HMatrixCg };

inline const char* to_string(SolverPath p) {
    switch (p) {
        case SolverPath::DenseRbf: return "dense_rbf";
        case SolverPath::DenseEnsemble: return "dense_ensemble";
        case SolverPath::Woodbury: return "woodbury";
        case SolverPath::HMatrixCg: return "hmatrix_cg";
    }
    return "unknown";
}

struct SolverConfig {
    double alpha = 1.0;
    double beta = 0.001;
    SolverPath path = SolverPath::Woodbury;

    // alpha = 0 is admitted: it decouples the system into the diagonal solve
    // f_i = y_i / (beta + 1), a useful degenerate case for validation.
    void validate() const {
        if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be nonnegative");
        if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
    }
};

struct LabeledProblem {
    std::size_t n = 0;
    std::size_t n_labeled = 0;
    std::vector<double> y_padded;  // labels first, zeros on the unlabeled tail

    void validate() const {
        if (n_labeled < 1 || n_labeled > n)
            throw std::invalid_argument("labeled count must lie in [1, n]");
        if (y_padded.size() != n) throw DimensionMismatch("y_padded length must equal n");
        for (std::size_t i = n_labeled; i < n; ++i)
            if (y_padded[i] != 0.0)
                throw std::invalid_argument("y_padded must be zero past the labeled prefix");
    }
};

struct Prediction {
    std::vector<double> values;
    SolverPath path_used = SolverPath::Woodbury;
    double solve_seconds = 0.0;
};

/// Diagonal of G: beta + 1 on the labeled prefix, beta on the rest.
inline std::vector<double> build_g_diagonal(std::size_t n, std::size_t n_labeled, double beta) {
    if (n_labeled < 1 || n_labeled > n)
        throw std::invalid_argument("labeled count must lie in [1, n]");
    std::vector<double> g(n, beta);
    for (std::size_t i = 0; i < n_labeled; ++i) g[i] = beta + 1.0;
    return g;
}

/// Graph Laplacian L = D - W with D_ii the row sums of W. Rows of L sum to
/// zero; W must be symmetric within 1e-10.
inline DenseMatrix graph_laplacian(const DenseMatrix& w) {
    if (w.rows != w.cols) throw DimensionMismatch("graph_laplacian: matrix must be square");
    const double scale = std::max(1.0, max_abs(w));
    for (std::size_t i = 0; i < w.rows; ++i)
        for (std::size_t j = i + 1; j < w.cols; ++j)
            if (std::abs(w(i, j) - w(j, i)) > 1e-10 * scale)
                throw AsymmetricInput("graph_laplacian: asymmetry at (" + std::to_string(i) + "," +
                                      std::to_string(j) + ")");

    DenseMatrix l(w.rows, w.cols);
    for (std::size_t i = 0; i < w.rows; ++i) {
        double degree = 0.0;
        for (std::size_t j = 0; j < w.cols; ++j) {
            degree += w(i, j);
            l(i, j) = -w(i, j);
        }
        l(i, i) += degree;
    }
    return l;
}

/// The smoothness penalty sum_ij w_ij (f_i - f_j)^2, which equals 2 f'Lf.
inline double laplacian_quadform(const DenseMatrix& w, std::span<const double> f) {
    if (w.rows != w.cols) throw DimensionMismatch("laplacian_quadform: matrix must be square");
    if (f.size() != w.rows) throw DimensionMismatch("laplacian_quadform: vector length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < w.rows; ++i)
        for (std::size_t j = 0; j < w.cols; ++j) {
            const double d = f[i] - f[j];
            s += w(i, j) * d * d;
        }
    return s;
}

/// Objective value given a precomputed smoothness penalty.
inline double objective_value(const LabeledProblem& prob, const SolverConfig& cfg,
                              std::span<const double> f, double quadform) {
    prob.validate();
    cfg.validate();
    if (f.size() != prob.n) throw DimensionMismatch("objective_value: vector length mismatch");
    double fit = 0.0;
    for (std::size_t i = 0; i < prob.n_labeled; ++i) {
        const double d = f[i] - prob.y_padded[i];
        fit += d * d;
    }
    double reg = 0.0;
    for (double v : f) reg += v * v;
    return 0.5 * (fit + cfg.alpha * quadform + cfg.beta * reg);
}

inline double objective_value(const DenseMatrix& w, const LabeledProblem& prob,
                              const SolverConfig& cfg, std::span<const double> f) {
    return objective_value(prob, cfg, f, laplacian_quadform(w, f));
}

/// Solves (G + alpha*L) f = y_padded by Cholesky on the dense system. W may be
/// any symmetric similarity matrix (an RBF kernel matrix, or a dense
/// co-association matrix when cross-checking the factored path).
inline Prediction solve_dense(const DenseMatrix& w, const LabeledProblem& prob,
                              const SolverConfig& cfg) {
    prob.validate();
    cfg.validate();
    if (w.rows != prob.n) throw DimensionMismatch("solve_dense: matrix size must equal n");
    const auto start = std::chrono::steady_clock::now();

    // Assemble G + alpha*(D - W) in place; the symmetry check rides along.
    const std::size_t n = prob.n;
    const double scale = std::max(1.0, max_abs(w));
    std::vector<double> g = build_g_diagonal(n, prob.n_labeled, cfg.beta);
    DenseMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        double degree = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j > i && std::abs(w(i, j) - w(j, i)) > 1e-10 * scale)
                throw AsymmetricInput("solve_dense: similarity matrix is not symmetric");
            degree += w(i, j);
            a(i, j) = -cfg.alpha * w(i, j);
        }
        a(i, i) = g[i] + cfg.alpha * (degree - w(i, i));
    }

    Prediction out;
    try {
        out.values = cholesky_solve(a, prob.y_padded);
    } catch (const NotPositiveDefinite& e) {
        // G + alpha*L is positive definite for beta > 0 and L PSD, so a failed
        // pivot signals a corrupted similarity matrix.
        throw NotPositiveDefinite(std::string("solve_dense: ") + e.what());
    }
    out.path_used = cfg.path == SolverPath::DenseRbf ? SolverPath::DenseRbf
                                                     : SolverPath::DenseEnsemble;
    out.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

/// Iterative path for any similarity operator y = W x (a factored
/// co-association matrix, a hierarchical approximation, or a dense wrapper):
/// solves (G + alpha*(D - W)) f = y_padded by conjugate gradients with
/// degrees D = W 1 obtained through one operator application.
inline Prediction solve_ssr_operator(const LinearOperator& similarity, const LabeledProblem& prob,
                                     const SolverConfig& cfg, double cg_tol,
                                     std::size_t max_iter = 10000,
                                     std::span<const double> jacobi_diagonal = {}) {
    prob.validate();
    cfg.validate();
    const std::size_t n = prob.n;
    if (similarity.dimension != n) throw DimensionMismatch("solve_ssr_operator: size mismatch");
    const auto start = std::chrono::steady_clock::now();

    const std::vector<double> degrees = similarity.apply(std::vector<double>(n, 1.0));
    const std::vector<double> g = build_g_diagonal(n, prob.n_labeled, cfg.beta);

    LinearOperator op{n, [&](std::span<const double> x, std::span<double> y) {
                          similarity.apply_to(x, y);
                          for (std::size_t i = 0; i < n; ++i)
                              y[i] = g[i] * x[i] + cfg.alpha * (degrees[i] * x[i] - y[i]);
                      }};

    Prediction out;
    out.values = conjugate_gradient(op, prob.y_padded, cg_tol, max_iter, jacobi_diagonal);
    out.path_used = SolverPath::HMatrixCg;
    out.solve_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

/// Fast path on the factored co-association matrix. Inverts only the m x m
/// core (I - alpha B^T S^-1 B) by LU; everything else is diagonal or O(n*m).
inline Prediction solve_woodbury(const EnsembleFactor& factor, const LabeledProblem& prob,
                                 const SolverConfig& cfg) {
    prob.validate();
    cfg.validate();
    const std::size_t n = prob.n;
    if (factor.size() != n) throw DimensionMismatch("solve_woodbury: factor size must equal n");
    const auto start = std::chrono::steady_clock::now();

    const std::vector<double> g = build_g_diagonal(n, prob.n_labeled, cfg.beta);
    std::vector<double> s_inv(n);
    for (std::size_t i = 0; i < n; ++i) s_inv[i] = 1.0 / (g[i] + cfg.alpha * factor.degrees[i]);

    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = s_inv[i] * prob.y_padded[i];

    Prediction out;
    out.path_used = SolverPath::Woodbury;
    if (cfg.alpha == 0.0) {
        out.values = std::move(f);
        out.solve_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return out;
    }

    const std::size_t m = factor.total_columns;
    const std::size_t r = factor.blocks.size();
    std::vector<std::size_t> offset(r, 0);
    for (std::size_t l = 1; l < r; ++l)
        offset[l] = offset[l - 1] + static_cast<std::size_t>(factor.blocks[l - 1].cluster_count);

    // u = B^T S^-1 y
    std::vector<double> u(m, 0.0);
    for (std::size_t l = 0; l < r; ++l) {
        const EnsembleFactor::Block& b = factor.blocks[l];
        for (std::size_t i = 0; i < n; ++i)
            u[offset[l] + static_cast<std::size_t>(b.labels[i])] += b.scale * f[i];
    }

    // Core = I - alpha B^T S^-1 B, assembled in O(n r^2): the (l, l') block
    // gets -alpha * scale_l * scale_l' * s_inv[i] at the clusters of point i.
    DenseMatrix core = DenseMatrix::identity(m);
    for (std::size_t lb = 0; lb < r; ++lb) {
        const EnsembleFactor::Block& bb = factor.blocks[lb];
        for (std::size_t lc = 0; lc < r; ++lc) {
            const EnsembleFactor::Block& bc = factor.blocks[lc];
            const double coeff = cfg.alpha * bb.scale * bc.scale;
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t row = offset[lb] + static_cast<std::size_t>(bb.labels[i]);
                const std::size_t col = offset[lc] + static_cast<std::size_t>(bc.labels[i]);
                core(row, col) -= coeff * s_inv[i];
            }
        }
    }

    std::vector<double> z;
    try {
        z = lu_solve(core, u);
    } catch (const SingularMatrix& e) {
        throw SingularCore("solve_woodbury: core matrix is numerically singular (suspect alpha = " +
                           std::to_string(cfg.alpha) + "); " + e.what());
    }

    // f += alpha S^-1 (B z)
    for (std::size_t i = 0; i < n; ++i) {
        double bz = 0.0;
        for (std::size_t l = 0; l < r; ++l) {
            const EnsembleFactor::Block& b = factor.blocks[l];
            bz += b.scale * z[offset[l] + static_cast<std::size_t>(b.labels[i])];
        }
        f[i] += cfg.alpha * s_inv[i] * bz;
    }

    out.values = std::move(f);
    out.solve_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace ssrlrcm
