#pragma once

// Cluster ensemble machinery: seeded K-means, ensemble generation, and the
// factored co-association matrix.
//
// An ensemble of r partitions defines the weighted co-association matrix
//     H(i,j) = sum_l w_l * [c_l(i) == c_l(j)],   w_l >= 0, sum w_l = 1,
// which factors exactly as H = B B^T with B = [B_1 ... B_r] and
// B_l = sqrt(w_l) * A_l, where A_l is the one-hot assignment matrix of
// partition l. The factor is kept in O(n*m) storage (m = total cluster count)
// together with the degree vector D_i = sum_l w_l * N_l(i), N_l(i) being the
// size of point i's cluster in partition l.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "ssrlrcm/numerics.hpp"

namespace ssrlrcm {

class KTooLarge : public Error {
public:
    using Error::Error;
};

class TooLarge : public Error {
public:
    using Error::Error;
};

struct Partition {
    std::vector<int> labels;
    int cluster_count = 0;
    double inertia = 0.0;  // within-cluster sum of squared distances
};

enum class Weighting { Uniform, ValidityIndex };

struct EnsembleConfig {
    std::size_t size = 10;
    std::vector<int> k_range = {2};
    std::size_t max_iter = 100;
    std::uint64_t seed = 0;
    Weighting weighting = Weighting::Uniform;

    void validate() const {
        if (size < 1) throw std::invalid_argument("ensemble size must be at least 1");
        if (k_range.empty()) throw std::invalid_argument("k_range must not be empty");
        for (int k : k_range)
            if (k < 1) throw std::invalid_argument("cluster counts must be at least 1");
        if (max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
    }
};

namespace detail {

inline double sq_distance(const DenseMatrix& points, std::size_t i, const std::vector<double>& c,
                          std::size_t k, std::size_t dim) {
    const double* x = points.entries.data() + i * dim;
    const double* m = c.data() + k * dim;
    double s = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
        const double diff = x[d] - m[d];
        s += diff * diff;
    }
    return s;
}

inline std::vector<int> assign_nearest(const DenseMatrix& points, const std::vector<double>& centroids,
                                       std::size_t k) {
    const std::size_t n = points.rows;
    const std::size_t dim = points.cols;
    std::vector<int> labels(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        double best = sq_distance(points, i, centroids, 0, dim);
        int arg = 0;
        for (std::size_t c = 1; c < k; ++c) {
            const double d = sq_distance(points, i, centroids, c, dim);
            if (d < best) {
                best = d;
                arg = static_cast<int>(c);
            }
        }
        labels[i] = arg;
    }
    return labels;
}

}  // namespace detail

/// Lloyd's algorithm with seeded initialization: the initial centroids are K
/// distinct points sampled uniformly without replacement. Stops on an
/// assignment fixed point or after max_iter update rounds. Empty clusters are
/// repaired by turning the point farthest from its centroid into a new
/// singleton centroid, so the cluster count never shrinks.
inline Partition kmeans(const DenseMatrix& points, int k, std::uint64_t seed,
                        std::size_t max_iter = 100) {
    const std::size_t n = points.rows;
    const std::size_t dim = points.cols;
    if (k < 1) throw std::invalid_argument("kmeans: k must be at least 1");
    if (static_cast<std::size_t>(k) > n)
        throw KTooLarge("kmeans: k = " + std::to_string(k) + " exceeds n = " + std::to_string(n));
    if (max_iter < 1) throw std::invalid_argument("kmeans: max_iter must be at least 1");
    const std::size_t kk = static_cast<std::size_t>(k);

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < kk; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }

    std::vector<double> centroids(kk * dim);
    for (std::size_t c = 0; c < kk; ++c) {
        const double* src = points.entries.data() + pool[c] * dim;
        std::copy(src, src + dim, centroids.data() + c * dim);
    }

    std::vector<int> labels = detail::assign_nearest(points, centroids, kk);
    std::vector<std::size_t> counts(kk);

    for (std::size_t it = 0; it < max_iter; ++it) {
        // Centroid update.
        std::fill(centroids.begin(), centroids.end(), 0.0);
        std::fill(counts.begin(), counts.end(), std::size_t{0});
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t c = static_cast<std::size_t>(labels[i]);
            counts[c]++;
            const double* x = points.entries.data() + i * dim;
            double* m = centroids.data() + c * dim;
            for (std::size_t d = 0; d < dim; ++d) m[d] += x[d];
        }
        for (std::size_t c = 0; c < kk; ++c)
            if (counts[c] > 0)
                for (std::size_t d = 0; d < dim; ++d) centroids[c * dim + d] /= double(counts[c]);

        // Empty-cluster repair: steal the globally farthest point (from its own
        // centroid) as a new singleton, never emptying another cluster.
        for (std::size_t c = 0; c < kk; ++c) {
            if (counts[c] > 0) continue;
            double worst = -1.0;
            std::size_t far = n;
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t ci = static_cast<std::size_t>(labels[i]);
                if (counts[ci] < 2) continue;
                const double d = detail::sq_distance(points, i, centroids, ci, dim);
                if (d > worst) {
                    worst = d;
                    far = i;
                }
            }
            if (far == n) continue;  // all clusters singletons already
            counts[static_cast<std::size_t>(labels[far])]--;
            labels[far] = static_cast<int>(c);
            counts[c] = 1;
            const double* x = points.entries.data() + far * dim;
            std::copy(x, x + dim, centroids.data() + c * dim);
        }

        std::vector<int> next = detail::assign_nearest(points, centroids, kk);
        if (next == labels) break;
        labels = std::move(next);
    }

    Partition part;
    part.cluster_count = k;
    part.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        part.inertia += detail::sq_distance(points, i, centroids, static_cast<std::size_t>(labels[i]), dim);
    part.labels = std::move(labels);
    return part;
}

/// Generates r independently seeded K-means partitions. Cluster counts are
/// drawn uniformly from k_range by a dedicated generator, so the draw sequence
/// does not perturb the per-member centroid seeding (seed_l = mix(seed, l)).
inline std::vector<Partition> generate_ensemble(const DenseMatrix& points,
                                                const EnsembleConfig& cfg) {
    cfg.validate();
    std::mt19937_64 k_rng(mix_seed(cfg.seed, 0x6b72616e67ull));
    std::vector<int> ks(cfg.size, cfg.k_range.front());
    if (cfg.k_range.size() > 1) {
        std::uniform_int_distribution<std::size_t> pick(0, cfg.k_range.size() - 1);
        for (std::size_t l = 0; l < cfg.size; ++l) ks[l] = cfg.k_range[pick(k_rng)];
    }

    std::vector<Partition> parts;
    parts.reserve(cfg.size);
    for (std::size_t l = 0; l < cfg.size; ++l)
        parts.push_back(kmeans(points, ks[l], mix_seed(cfg.seed, l), cfg.max_iter));
    return parts;
}

/// Ensemble member weights: Uniform gives 1/r; ValidityIndex scores each
/// partition by gamma_l = 1/(1 + inertia_l) and normalizes to sum one.
inline std::vector<double> compute_weights(const std::vector<Partition>& partitions,
                                           Weighting weighting) {
    if (partitions.empty()) throw std::invalid_argument("compute_weights: empty ensemble");
    const std::size_t r = partitions.size();
    std::vector<double> w(r);
    if (weighting == Weighting::Uniform) {
        std::fill(w.begin(), w.end(), 1.0 / double(r));
        return w;
    }
    double total = 0.0;
    for (std::size_t l = 0; l < r; ++l) {
        w[l] = 1.0 / (1.0 + partitions[l].inertia);
        total += w[l];
    }
    for (double& v : w) v /= total;
    return w;
}

/// The co-association matrix in factored form: per-partition scaled one-hot
/// blocks plus the degree vector, O(n*m) storage all told.
struct EnsembleFactor {
    struct Block {
        std::vector<int> labels;  // exactly one nonzero per row, value = scale
        int cluster_count = 0;
        double scale = 0.0;  // sqrt(w_l)
    };

    std::vector<Block> blocks;
    std::vector<double> weights;
    std::size_t total_columns = 0;  // m = sum of cluster counts
    std::vector<double> degrees;    // D_i = sum_l w_l * N_l(i)

    std::size_t size() const { return degrees.size(); }
};

/// Builds the factor and its degrees directly from cluster sizes, without ever
/// forming the dense co-association matrix.
inline EnsembleFactor build_factor(const std::vector<Partition>& partitions,
                                   const std::vector<double>& weights) {
    if (partitions.empty()) throw std::invalid_argument("build_factor: empty ensemble");
    if (weights.size() != partitions.size())
        throw DimensionMismatch("build_factor: one weight per partition required");
    const std::size_t n = partitions.front().labels.size();

    EnsembleFactor f;
    f.weights = weights;
    f.degrees.assign(n, 0.0);
    f.blocks.reserve(partitions.size());

    for (std::size_t l = 0; l < partitions.size(); ++l) {
        const Partition& p = partitions[l];
        if (p.labels.size() != n)
            throw DimensionMismatch("build_factor: partitions disagree on point count");
        std::vector<std::size_t> sizes(static_cast<std::size_t>(p.cluster_count), 0);
        for (int c : p.labels) sizes[static_cast<std::size_t>(c)]++;
        for (std::size_t i = 0; i < n; ++i)
            f.degrees[i] += weights[l] * double(sizes[static_cast<std::size_t>(p.labels[i])]);

        EnsembleFactor::Block b;
        b.labels = p.labels;
        b.cluster_count = p.cluster_count;
        b.scale = std::sqrt(weights[l]);
        f.total_columns += static_cast<std::size_t>(p.cluster_count);
        f.blocks.push_back(std::move(b));
    }
    return f;
}

/// Dense co-association matrix by direct indicator evaluation. Test oracle
/// only; refuses point counts above 2000.
inline DenseMatrix dense_coassociation(const std::vector<Partition>& partitions,
                                       const std::vector<double>& weights) {
    if (partitions.empty()) throw std::invalid_argument("dense_coassociation: empty ensemble");
    if (weights.size() != partitions.size())
        throw DimensionMismatch("dense_coassociation: one weight per partition required");
    const std::size_t n = partitions.front().labels.size();
    if (n > 2000)
        throw TooLarge("dense_coassociation: n = " + std::to_string(n) + " exceeds the oracle cap");

    DenseMatrix h(n, n);
    for (std::size_t l = 0; l < partitions.size(); ++l) {
        const std::vector<int>& lab = partitions[l].labels;
        const double w = weights[l];
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (lab[i] == lab[j]) h(i, j) += w;
    }
    return h;
}

/// y = H x through the factor, computed as B (B^T x) in O(n*m).
inline std::vector<double> factor_gram_apply(const EnsembleFactor& f, std::span<const double> x) {
    const std::size_t n = f.size();
    if (x.size() != n) throw DimensionMismatch("factor_gram_apply: operand length mismatch");
    std::vector<double> y(n, 0.0);
    std::vector<double> cluster_sum;
    for (const EnsembleFactor::Block& b : f.blocks) {
        cluster_sum.assign(static_cast<std::size_t>(b.cluster_count), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            cluster_sum[static_cast<std::size_t>(b.labels[i])] += b.scale * x[i];
        for (std::size_t i = 0; i < n; ++i)
            y[i] += b.scale * cluster_sum[static_cast<std::size_t>(b.labels[i])];
    }
    return y;
}

/// Wraps the factored co-association matrix as a matvec operator.
inline LinearOperator factor_operator(EnsembleFactor f) {
    auto shared = std::make_shared<EnsembleFactor>(std::move(f));
    return {shared->size(), [shared](std::span<const double> x, std::span<double> y) {
                const std::vector<double> hx = factor_gram_apply(*shared, x);
                std::copy(hx.begin(), hx.end(), y.begin());
            }};
}

}  // namespace ssrlrcm
