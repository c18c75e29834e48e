#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "ssrlrcm/ensemble.hpp"
#include "ssrlrcm/ssr.hpp"

using namespace ssrlrcm;

namespace {

// Symmetric similarity matrix with entries in [0, 1].
DenseMatrix random_similarity(std::size_t n, std::uint64_t seed) {
    const DenseMatrix m = oracles::random_matrix(n, n, seed, 0.0, 1.0);
    DenseMatrix w(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) w(i, j) = 0.5 * (m(i, j) + m(j, i));
    return w;
}

LabeledProblem make_problem(std::size_t n, std::size_t n1, std::uint64_t seed) {
    LabeledProblem p;
    p.n = n;
    p.n_labeled = n1;
    p.y_padded.assign(n, 0.0);
    const auto labels = oracles::random_vector(n1, seed, -2.0, 2.0);
    for (std::size_t i = 0; i < n1; ++i) p.y_padded[i] = labels[i];
    return p;
}

}  // namespace

TEST_CASE("build_g_diagonal") {
    const auto g = build_g_diagonal(3, 1, 0.001);
    CHECK(g == std::vector<double>{1.001, 0.001, 0.001});

    const auto all_labeled = build_g_diagonal(4, 4, 0.5);
    for (double v : all_labeled) CHECK(v == 1.5);

    const auto beta_zero = build_g_diagonal(4, 2, 0.0);
    CHECK(beta_zero == std::vector<double>{1.0, 1.0, 0.0, 0.0});
}

TEST_CASE("graph_laplacian") {
    SECTION("all-ones 2x2") {
        const DenseMatrix w(2, 2, 1.0);
        const DenseMatrix l = graph_laplacian(w);
        CHECK(l(0, 0) == 1.0);
        CHECK(l(0, 1) == -1.0);
        CHECK(l(1, 0) == -1.0);
        CHECK(l(1, 1) == 1.0);
    }
    SECTION("identity has a vanishing Laplacian") {
        const DenseMatrix l = graph_laplacian(DenseMatrix::identity(4));
        for (double v : l.entries) CHECK(v == 0.0);
    }
    SECTION("rows sum to zero and the quadratic form is nonnegative") {
        const DenseMatrix w = random_similarity(25, 5);
        const DenseMatrix l = graph_laplacian(w);
        for (std::size_t i = 0; i < 25; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < 25; ++j) s += l(i, j);
            CHECK(std::abs(s) <= 1e-12);
        }
        const auto f = oracles::random_vector(25, 6);
        const auto lf = matvec(l, f);
        CHECK(dot(f, lf) >= -1e-12);
    }
    SECTION("asymmetric input is rejected") {
        DenseMatrix w(2, 2, 0.5);
        w(0, 1) = 0.7;
        CHECK_THROWS_AS(graph_laplacian(w), AsymmetricInput);
    }
}

TEST_CASE("laplacian_quadform equals twice the Laplacian quadratic form") {
    SECTION("constant vectors are in the null space") {
        const DenseMatrix w = random_similarity(10, 8);
        CHECK(laplacian_quadform(w, std::vector<double>(10, 3.7)) == Catch::Approx(0.0).margin(1e-10));
    }
    SECTION("hand-checkable two-point case") {
        DenseMatrix w(2, 2);
        w(0, 1) = w(1, 0) = 1.0;
        CHECK(laplacian_quadform(w, std::vector<double>{0.0, 1.0}) == Catch::Approx(2.0));
    }
    SECTION("identity with 2 f'Lf on random instances") {
        const DenseMatrix w = random_similarity(20, 21);
        const DenseMatrix l = graph_laplacian(w);
        const auto f = oracles::random_vector(20, 22);
        const double direct = laplacian_quadform(w, f);
        const double via_l = 2.0 * dot(f, matvec(l, f));
        CHECK(std::abs(direct - via_l) <= 1e-10 * std::max(1.0, std::abs(direct)));
    }
}

TEST_CASE("solve_dense decouples when alpha is zero") {
    const std::size_t n = 12, n1 = 4;
    const LabeledProblem prob = make_problem(n, n1, 3);
    const SolverConfig cfg{0.0, 0.001, SolverPath::DenseRbf};

    SECTION("alpha = 0") {
        const Prediction pred = solve_dense(random_similarity(n, 4), prob, cfg);
        for (std::size_t i = 0; i < n; ++i) {
            const double expected = i < n1 ? prob.y_padded[i] / 1.001 : 0.0;
            CHECK(pred.values[i] == Catch::Approx(expected).margin(1e-14));
        }
    }
    SECTION("zero similarity matrix behaves identically") {
        const SolverConfig live{1.0, 0.001, SolverPath::DenseRbf};
        const Prediction pred = solve_dense(DenseMatrix(n, n), prob, live);
        for (std::size_t i = 0; i < n; ++i) {
            const double expected = i < n1 ? prob.y_padded[i] / 1.001 : 0.0;
            CHECK(pred.values[i] == Catch::Approx(expected).margin(1e-14));
        }
    }
}

TEST_CASE("solve_dense matches a two-point hand solve") {
    // W01 = 1, one label y = 1, alpha = 1, beta = 0.001:
    //   [2.001 -1; -1 1.001] f = (1, 0)
    DenseMatrix w(2, 2);
    w(0, 1) = w(1, 0) = 1.0;
    LabeledProblem prob;
    prob.n = 2;
    prob.n_labeled = 1;
    prob.y_padded = {1.0, 0.0};
    const Prediction pred = solve_dense(w, prob, SolverConfig{1.0, 0.001, SolverPath::DenseRbf});

    const double det = 2.001 * 1.001 - 1.0;
    CHECK(pred.values[0] == Catch::Approx(1.001 / det).epsilon(1e-12));
    CHECK(pred.values[1] == Catch::Approx(1.0 / det).epsilon(1e-12));
}

TEST_CASE("the regularized system is positive definite for positive parameters") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const std::size_t n = 5 + seed % 30;
        const DenseMatrix w = random_similarity(n, 7000 + seed);
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> pick_alpha(0.01, 10.0);
        std::uniform_real_distribution<double> pick_beta(1e-5, 1.0);
        LabeledProblem prob = make_problem(n, 1 + seed % n, 7100 + seed);
        const SolverConfig cfg{pick_alpha(rng), pick_beta(rng), SolverPath::DenseRbf};
        CHECK_NOTHROW(solve_dense(w, prob, cfg));
    }
}

TEST_CASE("solve_woodbury single-cluster ensemble equals the dense all-ones solve") {
    const std::size_t n = 15;
    Partition p;
    p.cluster_count = 1;
    p.labels.assign(n, 0);
    const EnsembleFactor factor = build_factor({p}, {1.0});
    const LabeledProblem prob = make_problem(n, 5, 40);
    const SolverConfig cfg{1.0, 0.001, SolverPath::Woodbury};

    const Prediction fast = solve_woodbury(factor, prob, cfg);
    const Prediction dense = solve_dense(DenseMatrix(n, n, 1.0), prob, cfg);
    for (std::size_t i = 0; i < n; ++i)
        CHECK(fast.values[i] == Catch::Approx(dense.values[i]).margin(1e-10));
}

TEST_CASE("solve_woodbury reduces to the diagonal solve at alpha = 0") {
    const std::size_t n = 30;
    const auto parts = oracles::random_partitions(n, 4, 5, 50);
    const auto weights = compute_weights(parts, Weighting::Uniform);
    const EnsembleFactor factor = build_factor(parts, weights);
    const LabeledProblem prob = make_problem(n, 10, 51);

    const Prediction pred = solve_woodbury(factor, prob, SolverConfig{0.0, 0.001, SolverPath::Woodbury});
    for (std::size_t i = 0; i < n; ++i) {
        const double expected = i < 10 ? prob.y_padded[i] / 1.001 : 0.0;
        CHECK(pred.values[i] == Catch::Approx(expected).margin(1e-14));
    }
}

TEST_CASE("solve_woodbury agrees with the dense ensemble solve") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const std::size_t n = 60;
        const auto parts = oracles::random_partitions(n, 5, 6, 600 + seed);
        const auto weights = compute_weights(
            parts, seed % 2 == 0 ? Weighting::Uniform : Weighting::ValidityIndex);
        const EnsembleFactor factor = build_factor(parts, weights);
        const DenseMatrix h = dense_coassociation(parts, weights);
        const LabeledProblem prob = make_problem(n, 6 + seed % 20, 700 + seed);
        const SolverConfig cfg{1.0, 0.001, SolverPath::Woodbury};

        const Prediction fast = solve_woodbury(factor, prob, cfg);
        const Prediction dense = solve_dense(h, prob, cfg);
        double err = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            err = std::max(err, std::abs(fast.values[i] - dense.values[i]));
            scale = std::max(scale, std::abs(dense.values[i]));
        }
        CHECK(err <= 1e-8 * (1.0 + scale));
    }
}

TEST_CASE("the operator-backed CG solve agrees with the Woodbury path") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const std::size_t n = 80;
        const auto parts = oracles::random_partitions(n, 4, 5, 800 + seed);
        const auto weights = compute_weights(parts, Weighting::Uniform);
        const EnsembleFactor factor = build_factor(parts, weights);
        const LabeledProblem prob = make_problem(n, 12, 900 + seed);
        const SolverConfig cfg{1.0, 0.001, SolverPath::Woodbury};

        const Prediction direct = solve_woodbury(factor, prob, cfg);
        const Prediction iterative =
            solve_ssr_operator(factor_operator(factor), prob, cfg, 1e-12, 20000);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(std::abs(direct.values[i] - iterative.values[i]) <=
                  1e-8 * (1.0 + std::abs(direct.values[i])));
    }
}

TEST_CASE("predictions scale linearly with the labels") {
    const std::size_t n = 25;
    const DenseMatrix w = random_similarity(n, 60);
    LabeledProblem prob = make_problem(n, 8, 61);
    const SolverConfig cfg{1.0, 0.001, SolverPath::DenseRbf};

    const Prediction base = solve_dense(w, prob, cfg);

    SECTION("doubling is exact") {
        LabeledProblem scaled = prob;
        for (double& y : scaled.y_padded) y *= 2.0;
        const Prediction pred = solve_dense(w, scaled, cfg);
        for (std::size_t i = 0; i < n; ++i) CHECK(pred.values[i] == 2.0 * base.values[i]);
    }
    SECTION("general scaling holds to rounding") {
        LabeledProblem scaled = prob;
        for (double& y : scaled.y_padded) y *= -3.0;
        const Prediction pred = solve_dense(w, scaled, cfg);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(pred.values[i] == Catch::Approx(-3.0 * base.values[i]).margin(1e-12));
    }
}

TEST_CASE("objective_value is minimized at the solver output") {
    const std::size_t n = 18;
    const DenseMatrix w = random_similarity(n, 70);
    const LabeledProblem prob = make_problem(n, 5, 71);
    const SolverConfig cfg{0.8, 0.01, SolverPath::DenseRbf};

    const Prediction pred = solve_dense(w, prob, cfg);
    const double at_min = objective_value(w, prob, cfg, pred.values);

    std::mt19937_64 rng(72);
    std::normal_distribution<double> gauss(0.0, 0.05);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> perturbed = pred.values;
        for (double& v : perturbed) v += gauss(rng);
        CHECK(objective_value(w, prob, cfg, perturbed) >= at_min);
    }
}

TEST_CASE("labeled problems are validated") {
    LabeledProblem p;
    p.n = 4;
    p.n_labeled = 2;
    p.y_padded = {1.0, 2.0, 0.5, 0.0};  // nonzero past the labeled prefix
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("dimension mismatches are rejected across the solvers") {
    const auto parts = oracles::random_partitions(10, 2, 3, 1);
    const auto weights = compute_weights(parts, Weighting::Uniform);
    const EnsembleFactor factor = build_factor(parts, weights);

    CHECK_THROWS_AS(factor_gram_apply(factor, std::vector<double>(9, 1.0)), DimensionMismatch);

    LabeledProblem prob = make_problem(12, 3, 2);  // 12 != factor size 10
    CHECK_THROWS_AS(solve_woodbury(factor, prob, SolverConfig{}), DimensionMismatch);
    CHECK_THROWS_AS(solve_dense(DenseMatrix(10, 10), prob, SolverConfig{}), DimensionMismatch);

    const LinearOperator op = LinearOperator::from_dense(DenseMatrix::identity(4));
    CHECK_THROWS_AS(conjugate_gradient(op, std::vector<double>(5, 1.0), 1e-10, 10),
                    DimensionMismatch);
}
