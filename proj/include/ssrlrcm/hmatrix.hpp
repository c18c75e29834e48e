#pragma once

// Hierarchical-matrix approximation of dense kernel similarity matrices:
// geometric cluster tree, admissibility-driven block partition, partially
// pivoted ACA for admissible blocks, fast matvec, and a CG-based regression
// solve on the approximate graph Laplacian.
//
// The format targets dense kernels such as the Matern or RBF similarity
// matrix. The co-association matrix of a cluster ensemble already has an exact
// low-rank factorization (see ensemble.hpp), so it is not routed through this
// format.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ssrlrcm/kernels.hpp"
#include "ssrlrcm/numerics.hpp"
#include "ssrlrcm/ssr.hpp"

namespace ssrlrcm {

class RankCapReached : public Error {
public:
    explicit RankCapReached(std::size_t cap)
        : Error("ACA rank cap " + std::to_string(cap) + " reached before the accuracy target"),
          cap_(cap) {}
    std::size_t cap() const { return cap_; }

private:
    std::size_t cap_;
};

struct BoundingBox {
    std::vector<double> lo;
    std::vector<double> hi;

    double diameter() const {
        double s = 0.0;
        for (std::size_t d = 0; d < lo.size(); ++d) {
            const double e = hi[d] - lo[d];
            s += e * e;
        }
        return std::sqrt(s);
    }
};

/// Distance between two axis-aligned boxes (zero when they touch or overlap).
inline double box_distance(const BoundingBox& a, const BoundingBox& b) {
    double s = 0.0;
    for (std::size_t d = 0; d < a.lo.size(); ++d) {
        const double gap = std::max({0.0, a.lo[d] - b.hi[d], b.lo[d] - a.hi[d]});
        s += gap * gap;
    }
    return std::sqrt(s);
}

/// Strong admissibility: min(diam(a), diam(b)) <= eta * dist(a, b). Touching
/// or overlapping boxes are never admissible.
inline bool is_admissible(const BoundingBox& a, const BoundingBox& b, double eta) {
    const double dist = box_distance(a, b);
    if (dist <= 0.0) return false;
    return std::min(a.diameter(), b.diameter()) <= eta * dist;
}

/// Binary geometric cluster tree over a point set. Each node owns a contiguous
/// range of the point permutation; splits are at the median of the longest
/// bounding-box axis, so the depth is O(log n).
struct ClusterTree {
    struct Node {
        std::size_t begin = 0;
        std::size_t end = 0;  // half-open range into perm
        BoundingBox box;
        int left = -1;
        int right = -1;

        bool is_leaf() const { return left < 0; }
        std::size_t size() const { return end - begin; }
    };

    std::vector<Node> nodes;        // nodes[0] is the root
    std::vector<std::size_t> perm;  // tree position -> original point index
    std::size_t leaf_size = 0;
};

namespace detail {

inline BoundingBox bounding_box(const DenseMatrix& points, const std::vector<std::size_t>& perm,
                                std::size_t begin, std::size_t end) {
    const std::size_t dim = points.cols;
    BoundingBox box;
    box.lo.assign(dim, 0.0);
    box.hi.assign(dim, 0.0);
    for (std::size_t d = 0; d < dim; ++d) {
        double lo = points(perm[begin], d), hi = lo;
        for (std::size_t t = begin + 1; t < end; ++t) {
            const double v = points(perm[t], d);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        box.lo[d] = lo;
        box.hi[d] = hi;
    }
    return box;
}

inline int build_tree_node(ClusterTree& tree, const DenseMatrix& points, std::size_t begin,
                           std::size_t end) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({begin, end, bounding_box(points, tree.perm, begin, end), -1, -1});
    if (end - begin <= tree.leaf_size) return id;

    const BoundingBox& box = tree.nodes[static_cast<std::size_t>(id)].box;
    std::size_t axis = 0;
    double extent = box.hi[0] - box.lo[0];
    for (std::size_t d = 1; d < box.lo.size(); ++d) {
        const double e = box.hi[d] - box.lo[d];
        if (e > extent) {
            extent = e;
            axis = d;
        }
    }

    // Median split, with the point index as a deterministic tie-break.
    std::sort(tree.perm.begin() + static_cast<std::ptrdiff_t>(begin),
              tree.perm.begin() + static_cast<std::ptrdiff_t>(end),
              [&](std::size_t a, std::size_t b) {
                  const double va = points(a, axis), vb = points(b, axis);
                  return va < vb || (va == vb && a < b);
              });
    const std::size_t mid = begin + (end - begin) / 2;

    const int left = build_tree_node(tree, points, begin, mid);
    const int right = build_tree_node(tree, points, mid, end);
    tree.nodes[static_cast<std::size_t>(id)].left = left;
    tree.nodes[static_cast<std::size_t>(id)].right = right;
    return id;
}

}  // namespace detail

inline ClusterTree build_cluster_tree(const DenseMatrix& points, std::size_t n_min) {
    if (points.rows < 1) throw DimensionMismatch("build_cluster_tree: empty point set");
    if (n_min < 1) throw std::invalid_argument("build_cluster_tree: n_min must be at least 1");
    ClusterTree tree;
    tree.leaf_size = n_min;
    tree.perm.resize(points.rows);
    for (std::size_t i = 0; i < points.rows; ++i) tree.perm[i] = i;
    detail::build_tree_node(tree, points, 0, points.rows);
    return tree;
}

struct AcaResult {
    LowRankFactor factor;
    bool converged = false;
};

/// Partially pivoted adaptive cross approximation of a block given by an entry
/// evaluator over local indices. Appends rank-1 crosses until
/// ||u_k|| * ||v_k|| <= eps * ||approximant||_F (running estimate) or the rank
/// cap is hit; the caller decides what to do with an unconverged result.
/// Pivoting: next row maximizes |u| of the previous cross (first row to
/// start); the column pivot maximizes |v| over unused columns.
inline AcaResult aca_approximate(const std::function<double(std::size_t, std::size_t)>& entry,
                                 std::size_t rows, std::size_t cols, double eps,
                                 std::size_t k_max) {
    if (!(eps > 0.0)) throw std::invalid_argument("aca: eps must be positive");
    if (k_max < 1) throw std::invalid_argument("aca: k_max must be at least 1");

    std::vector<std::vector<double>> us, vs;
    std::vector<bool> row_used(rows, false), col_used(cols, false);
    double frob2 = 0.0;  // squared Frobenius norm of the running approximant
    std::size_t next_row = 0;
    bool converged = false;
    const std::size_t rank_cap = std::min(k_max, std::min(rows, cols));

    auto residual_row = [&](std::size_t i, std::vector<double>& v) {
        v.resize(cols);
        for (std::size_t j = 0; j < cols; ++j) v[j] = entry(i, j);
        for (std::size_t l = 0; l < us.size(); ++l) {
            const double ui = us[l][i];
            if (ui == 0.0) continue;
            for (std::size_t j = 0; j < cols; ++j) v[j] -= ui * vs[l][j];
        }
    };

    std::vector<double> v, u;
    while (us.size() < rank_cap) {
        // Row pivot: largest |u| entry of the last cross among unused rows.
        std::size_t i_pivot = rows;
        if (!us.empty()) {
            double best = -1.0;
            for (std::size_t i = 0; i < rows; ++i) {
                if (row_used[i]) continue;
                const double m = std::abs(us.back()[i]);
                if (m > best) {
                    best = m;
                    i_pivot = i;
                }
            }
        } else {
            i_pivot = next_row;
        }

        // Scan for a usable (nonzero) residual row.
        std::size_t j_pivot = cols;
        double pivot = 0.0;
        while (i_pivot < rows) {
            residual_row(i_pivot, v);
            double best = -1.0;
            for (std::size_t j = 0; j < cols; ++j) {
                if (col_used[j]) continue;
                const double m = std::abs(v[j]);
                if (m > best) {
                    best = m;
                    j_pivot = j;
                }
            }
            pivot = (j_pivot < cols) ? v[j_pivot] : 0.0;
            if (pivot != 0.0) break;
            row_used[i_pivot] = true;
            while (next_row < rows && row_used[next_row]) ++next_row;
            i_pivot = next_row < rows ? next_row : rows;
        }
        if (i_pivot >= rows || pivot == 0.0) {
            converged = true;  // residual exhausted: the block is reproduced exactly
            break;
        }

        row_used[i_pivot] = true;
        col_used[j_pivot] = true;
        while (next_row < rows && row_used[next_row]) ++next_row;

        u.resize(rows);
        for (std::size_t i = 0; i < rows; ++i) u[i] = entry(i, j_pivot);
        for (std::size_t l = 0; l < us.size(); ++l) {
            const double vj = vs[l][j_pivot];
            if (vj == 0.0) continue;
            for (std::size_t i = 0; i < rows; ++i) u[i] -= vj * us[l][i];
        }
        for (std::size_t i = 0; i < rows; ++i) u[i] /= pivot;

        const double nu = norm2(u), nv = norm2(v);
        // A candidate cross already below the target contributes nothing worth
        // storing; stop without appending it.
        if (!us.empty() && nu * nv <= eps * std::sqrt(std::max(frob2, 0.0))) {
            converged = true;
            break;
        }

        double cross = 0.0;
        for (std::size_t l = 0; l < us.size(); ++l) cross += dot(us[l], u) * dot(vs[l], v);
        frob2 += 2.0 * cross + nu * nu * nv * nv;
        us.push_back(u);
        vs.push_back(v);

        if (us.size() == std::min(rows, cols)) {
            converged = true;  // full rank reached, representation is exact
            break;
        }
    }

    AcaResult result;
    result.converged = converged;
    result.factor.rank = us.size();
    result.factor.left = DenseMatrix(rows, us.size());
    result.factor.right = DenseMatrix(us.size(), cols);
    for (std::size_t l = 0; l < us.size(); ++l) {
        for (std::size_t i = 0; i < rows; ++i) result.factor.left(i, l) = us[l][i];
        for (std::size_t j = 0; j < cols; ++j) result.factor.right(l, j) = vs[l][j];
    }
    return result;
}

/// What to do with a block whose ACA hits the rank cap before the accuracy
/// target: fall back to dense storage, keep the truncated factor, or fail.
enum class RankCapPolicy { Densify, Accept, Error };

struct HMatrixOptions {
    std::size_t n_min = 64;
    double eta = 2.0;
    double eps = 1e-7;
    std::size_t k_max = 256;
    RankCapPolicy on_rank_cap = RankCapPolicy::Densify;
};

/// Hierarchical block partition of a kernel matrix. Admissible blocks hold ACA
/// factors, small blocks are dense, and the structure is exactly symmetric:
/// the factor of a mirrored block pair is computed once and transposed.
struct HMatrix {
    enum class BlockKind { Dense, LowRank, Subdivided };

    struct Block {
        int row_node = -1;
        int col_node = -1;
        BlockKind kind = BlockKind::Dense;
        DenseMatrix dense;
        LowRankFactor factor;
        std::array<int, 4> children = {-1, -1, -1, -1};
    };

    ClusterTree tree;
    std::vector<Block> blocks;  // blocks[0] is the root
    HMatrixOptions options;

    std::size_t size() const { return tree.perm.size(); }

    const ClusterTree::Node& row_cluster(const Block& b) const {
        return tree.nodes[static_cast<std::size_t>(b.row_node)];
    }
    const ClusterTree::Node& col_cluster(const Block& b) const {
        return tree.nodes[static_cast<std::size_t>(b.col_node)];
    }
};

namespace detail {

inline int build_block_structure(HMatrix& h, int row_node, int col_node) {
    const int id = static_cast<int>(h.blocks.size());
    h.blocks.push_back({});
    h.blocks.back().row_node = row_node;
    h.blocks.back().col_node = col_node;

    const ClusterTree::Node& a = h.tree.nodes[static_cast<std::size_t>(row_node)];
    const ClusterTree::Node& b = h.tree.nodes[static_cast<std::size_t>(col_node)];

    if (is_admissible(a.box, b.box, h.options.eta)) {
        h.blocks[static_cast<std::size_t>(id)].kind = HMatrix::BlockKind::LowRank;
    } else if (!a.is_leaf() && !b.is_leaf()) {
        h.blocks[static_cast<std::size_t>(id)].kind = HMatrix::BlockKind::Subdivided;
        std::array<int, 4> children{};
        children[0] = build_block_structure(h, a.left, b.left);
        children[1] = build_block_structure(h, a.left, b.right);
        children[2] = build_block_structure(h, a.right, b.left);
        children[3] = build_block_structure(h, a.right, b.right);
        h.blocks[static_cast<std::size_t>(id)].children = children;
    } else {
        h.blocks[static_cast<std::size_t>(id)].kind = HMatrix::BlockKind::Dense;
    }
    return id;
}

}  // namespace detail

/// Builds the H-matrix approximation of the similarity matrix of a point set.
/// Blocks whose ACA hits the rank cap are handled per options.on_rank_cap;
/// the default falls back to dense storage.
inline HMatrix build_hmatrix(const DenseMatrix& points, const KernelParams& params,
                             const HMatrixOptions& options = {}) {
    params.validate();
    if (!(options.eta > 0.0)) throw std::invalid_argument("build_hmatrix: eta must be positive");

    HMatrix h;
    h.options = options;
    h.tree = build_cluster_tree(points, options.n_min);

    detail::build_block_structure(h, 0, 0);

    auto block_entry = [&](const ClusterTree::Node& a, const ClusterTree::Node& b) {
        return [&points, &params, &a, &b, &h](std::size_t i, std::size_t j) {
            const std::size_t pi = h.tree.perm[a.begin + i];
            const std::size_t pj = h.tree.perm[b.begin + j];
            return kernel_value(point_distance(points, pi, pj), params);
        };
    };

    auto fill_dense = [&](HMatrix::Block& blk) {
        const ClusterTree::Node& a = h.row_cluster(blk);
        const ClusterTree::Node& b = h.col_cluster(blk);
        auto entry = block_entry(a, b);
        blk.dense = DenseMatrix(a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j) blk.dense(i, j) = entry(i, j);
    };

    // Fill leaves. Low-rank factors are computed once per mirror pair (the
    // kernel is symmetric), keeping the assembled matrix exactly symmetric.
    std::map<std::pair<int, int>, std::size_t> lowrank_index;
    for (std::size_t idx = 0; idx < h.blocks.size(); ++idx) {
        HMatrix::Block& blk = h.blocks[idx];
        if (blk.kind == HMatrix::BlockKind::LowRank)
            lowrank_index[{blk.row_node, blk.col_node}] = idx;
        else if (blk.kind == HMatrix::BlockKind::Dense)
            fill_dense(blk);
    }

    for (auto& [key, idx] : lowrank_index) {
        if (key.first > key.second) continue;  // filled from the mirror
        HMatrix::Block& blk = h.blocks[idx];
        const ClusterTree::Node& a = h.row_cluster(blk);
        const ClusterTree::Node& b = h.col_cluster(blk);

        AcaResult aca =
            aca_approximate(block_entry(a, b), a.size(), b.size(), options.eps, options.k_max);
        const auto mirror = lowrank_index.find({key.second, key.first});

        if (!aca.converged && options.on_rank_cap != RankCapPolicy::Accept) {
            if (options.on_rank_cap == RankCapPolicy::Error) throw RankCapReached(options.k_max);
            blk.kind = HMatrix::BlockKind::Dense;
            fill_dense(blk);
            if (mirror != lowrank_index.end() && mirror->second != idx) {
                HMatrix::Block& mb = h.blocks[mirror->second];
                mb.kind = HMatrix::BlockKind::Dense;
                fill_dense(mb);
            }
            continue;
        }

        if (mirror != lowrank_index.end() && mirror->second != idx) {
            HMatrix::Block& mb = h.blocks[mirror->second];
            mb.factor.rank = aca.factor.rank;
            mb.factor.left = transpose(aca.factor.right);
            mb.factor.right = transpose(aca.factor.left);
        }
        blk.factor = std::move(aca.factor);
    }
    return h;
}

/// y = W~ x with x and y in the original point ordering; the tree permutation
/// is applied internally. Exact with respect to the stored blocks.
inline std::vector<double> h_matvec(const HMatrix& h, std::span<const double> x) {
    const std::size_t n = h.size();
    if (x.size() != n) throw DimensionMismatch("h_matvec: operand length mismatch");

    std::vector<double> xt(n), yt(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) xt[t] = x[h.tree.perm[t]];

    std::vector<double> tmp;
    for (const HMatrix::Block& blk : h.blocks) {
        if (blk.kind == HMatrix::BlockKind::Subdivided) continue;
        const ClusterTree::Node& a = h.row_cluster(blk);
        const ClusterTree::Node& b = h.col_cluster(blk);
        const double* xs = xt.data() + b.begin;
        double* ys = yt.data() + a.begin;

        if (blk.kind == HMatrix::BlockKind::Dense) {
            for (std::size_t i = 0; i < a.size(); ++i) {
                const double* row = blk.dense.entries.data() + i * b.size();
                double s = 0.0;
                for (std::size_t j = 0; j < b.size(); ++j) s += row[j] * xs[j];
                ys[i] += s;
            }
        } else {
            const std::size_t k = blk.factor.rank;
            if (k == 0) continue;
            tmp.assign(k, 0.0);
            for (std::size_t l = 0; l < k; ++l) {
                const double* row = blk.factor.right.entries.data() + l * b.size();
                double s = 0.0;
                for (std::size_t j = 0; j < b.size(); ++j) s += row[j] * xs[j];
                tmp[l] = s;
            }
            for (std::size_t i = 0; i < a.size(); ++i) {
                const double* row = blk.factor.left.entries.data() + i * k;
                double s = 0.0;
                for (std::size_t l = 0; l < k; ++l) s += row[l] * tmp[l];
                ys[i] += s;
            }
        }
    }

    std::vector<double> y(n);
    for (std::size_t t = 0; t < n; ++t) y[h.tree.perm[t]] = yt[t];
    return y;
}

/// Power-iteration estimate of ||W - W~||_2 where W is given by an exact entry
/// evaluator in the original index ordering.
inline double approx_error_norm(const std::function<double(std::size_t, std::size_t)>& exact_entry,
                                const HMatrix& h, std::size_t iters, std::uint64_t seed = 0x5eed) {
    const std::size_t n = h.size();
    LinearOperator diff{
        n, [&exact_entry, &h, n](std::span<const double> x, std::span<double> y) {
            std::vector<double> hx = h_matvec(h, x);
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < n; ++j) s += exact_entry(i, j) * x[j];
                y[i] = s - hx[i];
            }
        }};
    return power_iteration_norm(diff, iters, seed);
}

/// Solves (G + alpha*L~) f = y_padded by conjugate gradients, where
/// L~ = D~ - W~ and D~ = diag(W~ 1) is obtained with one matvec. Jacobi
/// preconditioning uses the exact diagonal of the operator (diagonal blocks of
/// the tree are always dense).
inline Prediction solve_ssr_hmatrix(const HMatrix& h, const LabeledProblem& prob,
                                    const SolverConfig& cfg, double cg_tol,
                                    std::size_t max_iter = 10000, bool jacobi = true) {
    prob.validate();
    cfg.validate();
    const std::size_t n = h.size();
    if (n != prob.n) throw DimensionMismatch("solve_ssr_hmatrix: size mismatch");
    const auto start = std::chrono::steady_clock::now();

    const std::vector<double> ones(n, 1.0);
    const std::vector<double> degrees = h_matvec(h, ones);
    const std::vector<double> g = build_g_diagonal(n, prob.n_labeled, cfg.beta);

    LinearOperator op{n, [&](std::span<const double> x, std::span<double> y) {
                          std::vector<double> hx = h_matvec(h, x);
                          for (std::size_t i = 0; i < n; ++i)
                              y[i] = g[i] * x[i] + cfg.alpha * (degrees[i] * x[i] - hx[i]);
                      }};

    std::vector<double> diag;
    if (jacobi) {
        diag.assign(n, 0.0);
        for (const HMatrix::Block& blk : h.blocks) {
            if (blk.kind != HMatrix::BlockKind::Dense || blk.row_node != blk.col_node) continue;
            const ClusterTree::Node& a = h.row_cluster(blk);
            for (std::size_t i = 0; i < a.size(); ++i)
                diag[h.tree.perm[a.begin + i]] = blk.dense(i, i);
        }
        for (std::size_t i = 0; i < n; ++i) {
            diag[i] = g[i] + cfg.alpha * (degrees[i] - diag[i]);
            if (!(diag[i] > 0.0)) diag[i] = 1.0;  // coarse approximations can dent the diagonal
        }
    }

    Prediction out;
    out.values = conjugate_gradient(op, prob.y_padded, cg_tol, max_iter, diag);
    out.path_used = SolverPath::HMatrixCg;
    out.solve_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

/// JSON listing of the leaf blocks (ranges in tree ordering) for inspecting
/// the partition structure and per-block ranks.
inline std::string dump_blocks(const HMatrix& h) {
    std::ostringstream os;
    os << "{\"n\":" << h.size() << ",\"eta\":" << h.options.eta
       << ",\"leaf_size\":" << h.options.n_min << ",\"blocks\":[";
    bool first = true;
    for (const HMatrix::Block& blk : h.blocks) {
        if (blk.kind == HMatrix::BlockKind::Subdivided) continue;
        const ClusterTree::Node& a = h.row_cluster(blk);
        const ClusterTree::Node& b = h.col_cluster(blk);
        if (!first) os << ",";
        first = false;
        os << "{\"row_begin\":" << a.begin << ",\"row_end\":" << a.end
           << ",\"col_begin\":" << b.begin << ",\"col_end\":" << b.end << ",\"kind\":\""
           << (blk.kind == HMatrix::BlockKind::Dense ? "dense" : "low_rank") << "\",\"rank\":";
        if (blk.kind == HMatrix::BlockKind::Dense)
            os << "null";
        else
            os << blk.factor.rank;
        os << "}";
    }
    os << "]}";
    return os.str();
}

}  // namespace ssrlrcm
