#pragma once

// Experiment harness: Monte Carlo repetitions, RMSE scoring, paired t-tests,
// timing, grid search over the regularization pair, and report emission.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ssrlrcm/data.hpp"
#include "ssrlrcm/ensemble.hpp"
#include "ssrlrcm/kernels.hpp"
#include "ssrlrcm/numerics.hpp"
#include "ssrlrcm/ssr.hpp"

#if defined(__unix__) || defined(__APPLE__)
#include <sys/resource.h>
#endif

namespace ssrlrcm {

class DegenerateDifferences : public Error {
public:
    using Error::Error;
};

enum class Scenario { SyntheticMixture, ForestFires };
enum class ReportFormat { Table, Json, Csv };
enum class BaselineStatus { Ok, DenseInfeasible, Failed };

inline const char* to_string(Scenario s) {
    return s == Scenario::SyntheticMixture ? "synthetic" : "forestfires";
}

inline const char* to_string(BaselineStatus s) {
    switch (s) {
        case BaselineStatus::Ok: return "ok";
        case BaselineStatus::DenseInfeasible: return "dense_infeasible";
        case BaselineStatus::Failed: return "failed";
    }
    return "unknown";
}

struct MixtureSettings {
    std::size_t dims = 8;      // Gaussian feature count; two noise features are appended
    double sigma_x = 5.0;      // per-coordinate standard deviation
    double center1 = 0.0;      // componentwise mean of the first component
    double center2 = 20.0;     // componentwise mean of the second component
};

struct ExperimentConfig {
    Scenario scenario = Scenario::SyntheticMixture;
    std::size_t n = 1000;
    double sigma_eps = 0.01;
    std::size_t repetitions = 40;
    double labeled_fraction = 0.1;
    std::uint64_t master_seed = 42;
    std::size_t dense_cap = 20000;  // SSR-RBF is skipped above this point count
    std::string data_path;          // forest-fires CSV
    MixtureSettings mixture;
    EnsembleConfig ensemble;
    SolverConfig solver;
    KernelParams baseline = {KernelFamily::Rbf, 4.47, 1.0};
    std::vector<double> grid_alphas;
    std::vector<double> grid_betas;

    void validate() const {
        if (repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
        if (!(labeled_fraction > 0.0 && labeled_fraction < 1.0))
            throw std::invalid_argument("labeled fraction must lie in (0, 1)");
        if (dense_cap < 1) throw std::invalid_argument("dense cap must be at least 1");
        if (scenario == Scenario::SyntheticMixture) {
            if (n < 2) throw std::invalid_argument("n must be at least 2");
            if (sigma_eps < 0.0) throw std::invalid_argument("sigma_eps must be nonnegative");
            if (mixture.dims < 1) throw std::invalid_argument("mixture dims must be at least 1");
            if (!(mixture.sigma_x > 0.0)) throw std::invalid_argument("sigma_x must be positive");
        } else if (data_path.empty()) {
            throw std::invalid_argument("forestfires scenario needs a data path");
        }
        ensemble.validate();
        solver.validate();
        baseline.validate();
        for (double b : grid_betas)
            if (!(b > 0.0)) throw std::invalid_argument("grid betas must be positive");
        for (double a : grid_alphas)
            if (a < 0.0) throw std::invalid_argument("grid alphas must be nonnegative");
    }
};

struct RepetitionResult {
    std::size_t index = 0;
    bool lrcm_ok = false;
    double rmse_lrcm = std::numeric_limits<double>::quiet_NaN();
    double t_ens = 0.0;   // ensemble generation + factor build, seconds
    double t_matr = 0.0;  // Woodbury solve, seconds
    BaselineStatus baseline_status = BaselineStatus::Ok;
    double rmse_rbf = std::numeric_limits<double>::quiet_NaN();
    double time_rbf = 0.0;  // similarity assembly + dense solve, seconds
    std::string note;
};

struct ExperimentReport {
    Scenario scenario = Scenario::SyntheticMixture;
    std::size_t n = 0;
    double sigma_eps = 0.0;
    std::vector<RepetitionResult> repetitions;
    double mean_rmse_lrcm = std::numeric_limits<double>::quiet_NaN();
    double mean_rmse_rbf = std::numeric_limits<double>::quiet_NaN();
    double mean_t_ens = 0.0;
    double mean_t_matr = 0.0;
    double mean_time_rbf = 0.0;
    std::optional<double> t_statistic;
    std::optional<double> p_value;
    double peak_rss_mb = 0.0;
};

/// Root mean squared error over all points, labeled and unlabeled alike.
inline double rmse(std::span<const double> predicted, std::span<const double> truth) {
    if (predicted.size() != truth.size() || predicted.empty())
        throw DimensionMismatch("rmse: length mismatch or empty input");
    double s = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double d = truth[i] - predicted[i];
        s += d * d;
    }
    return std::sqrt(s / double(predicted.size()));
}

namespace detail {

// Continued fraction for the regularized incomplete beta (modified Lentz).
inline double betacf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-14) break;
    }
    return h;
}

inline double regularized_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

inline double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / double(v.size());
}

}  // namespace detail

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
};

/// Paired two-sample Student's t-test; returns the statistic and the
/// two-sided p-value via the regularized incomplete beta. Differences with
/// zero variance are degenerate unless their mean is also nonzero, in which
/// case the difference is certain and p = 0.
inline TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2)
        throw DimensionMismatch("paired_t_test: need two equal-length samples of size >= 2");
    const std::size_t n = a.size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];

    const double mean = detail::mean_of(d);
    double var = 0.0;
    for (double x : d) var += (x - mean) * (x - mean);
    var /= double(n - 1);

    if (var == 0.0) {
        if (mean == 0.0) throw DegenerateDifferences("paired_t_test: all differences are zero");
        return {mean > 0.0 ? std::numeric_limits<double>::infinity()
                           : -std::numeric_limits<double>::infinity(),
                0.0};
    }

    const double t = mean / std::sqrt(var / double(n));
    const double df = double(n - 1);
    const double p = detail::regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
    return {t, p};
}

inline double peak_rss_mb() {
#if defined(__unix__) || defined(__APPLE__)
    rusage usage{};
    getrusage(RUSAGE_SELF, &usage);
#if defined(__APPLE__)
    return double(usage.ru_maxrss) / (1024.0 * 1024.0);
#else
    return double(usage.ru_maxrss) / 1024.0;
#endif
#else
    return 0.0;
#endif
}

namespace detail {

struct PreparedData {
    Dataset dataset;
};

inline Dataset prepare_forest_fires(const std::string& path) {
    Dataset ds = load_forest_fires(path);
    if (ds.size() == 0) throw EmptyLabeledSet("forest-fires file has no data rows");
    ds.y_true = quartile_transform(ds.y_true);
    ds = minmax_scale(ds);
    return ds;
}

inline RepetitionResult run_repetition(const ExperimentConfig& cfg, const Dataset* fixed,
                                       std::size_t rep) {
    using clock = std::chrono::steady_clock;
    RepetitionResult res;
    res.index = rep;
    const std::uint64_t rep_seed = mix_seed(cfg.master_seed, rep);

    Dataset generated;
    const Dataset* ds = fixed;
    if (cfg.scenario == Scenario::SyntheticMixture) {
        generated = generate_mixture(cfg.n, cfg.mixture.dims, cfg.mixture.sigma_x, cfg.sigma_eps,
                                     mix_seed(rep_seed, 1), cfg.mixture.center1,
                                     cfg.mixture.center2);
        ds = &generated;
    }

    const SplitProblem split = split_labeled(*ds, cfg.labeled_fraction, mix_seed(rep_seed, 2));
    const LabeledProblem prob = split.problem();

    try {
        const auto t0 = clock::now();
        EnsembleConfig ec = cfg.ensemble;
        ec.seed = mix_seed(rep_seed, 3);
        const std::vector<Partition> parts = generate_ensemble(split.data.x, ec);
        const std::vector<double> weights = compute_weights(parts, ec.weighting);
        const EnsembleFactor factor = build_factor(parts, weights);
        res.t_ens = std::chrono::duration<double>(clock::now() - t0).count();

        SolverConfig solver = cfg.solver;
        solver.path = SolverPath::Woodbury;
        const Prediction pred = solve_woodbury(factor, prob, solver);
        res.t_matr = pred.solve_seconds;
        res.rmse_lrcm = rmse(pred.values, split.data.y_true);
        res.lrcm_ok = true;
    } catch (const Error& e) {
        res.lrcm_ok = false;
        res.note = e.what();
    }

    if (ds->size() > cfg.dense_cap) {
        res.baseline_status = BaselineStatus::DenseInfeasible;
        return res;
    }
    try {
        const auto t0 = clock::now();
        const DenseMatrix w = similarity_matrix(split.data.x, cfg.baseline);
        SolverConfig solver = cfg.solver;
        solver.path = SolverPath::DenseRbf;
        const Prediction pred = solve_dense(w, prob, solver);
        res.time_rbf = std::chrono::duration<double>(clock::now() - t0).count();
        res.rmse_rbf = rmse(pred.values, split.data.y_true);
        res.baseline_status = BaselineStatus::Ok;
    } catch (const Error& e) {
        res.baseline_status = BaselineStatus::Failed;
        if (!res.note.empty()) res.note += "; ";
        res.note += e.what();
    }
    return res;
}

}  // namespace detail

/// Runs the full Monte Carlo experiment: per repetition a fresh split (and a
/// fresh synthetic sample), SSR-LRCM and the dense SSR-RBF baseline on the
/// identical split, scores, timings, and the paired t-test over repetitions.
/// Repetition failures are recorded without aborting the batch.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();

    Dataset fixed;
    const Dataset* fixed_ptr = nullptr;
    if (cfg.scenario == Scenario::ForestFires) {
        fixed = detail::prepare_forest_fires(cfg.data_path);
        fixed_ptr = &fixed;
    }

    ExperimentReport report;
    report.scenario = cfg.scenario;
    report.n = cfg.scenario == Scenario::ForestFires ? fixed.size() : cfg.n;
    report.sigma_eps = cfg.scenario == Scenario::ForestFires ? 0.0 : cfg.sigma_eps;

    for (std::size_t rep = 0; rep < cfg.repetitions; ++rep)
        report.repetitions.push_back(detail::run_repetition(cfg, fixed_ptr, rep));

    std::vector<double> lrcm, rbf, paired_lrcm, paired_rbf;
    double t_ens = 0.0, t_matr = 0.0, time_rbf = 0.0;
    for (const RepetitionResult& r : report.repetitions) {
        if (r.lrcm_ok) {
            lrcm.push_back(r.rmse_lrcm);
            t_ens += r.t_ens;
            t_matr += r.t_matr;
        }
        if (r.baseline_status == BaselineStatus::Ok) {
            rbf.push_back(r.rmse_rbf);
            time_rbf += r.time_rbf;
        }
        if (r.lrcm_ok && r.baseline_status == BaselineStatus::Ok) {
            paired_lrcm.push_back(r.rmse_lrcm);
            paired_rbf.push_back(r.rmse_rbf);
        }
    }
    if (!lrcm.empty()) {
        report.mean_rmse_lrcm = detail::mean_of(lrcm);
        report.mean_t_ens = t_ens / double(lrcm.size());
        report.mean_t_matr = t_matr / double(lrcm.size());
    }
    if (!rbf.empty()) {
        report.mean_rmse_rbf = detail::mean_of(rbf);
        report.mean_time_rbf = time_rbf / double(rbf.size());
    }
    if (paired_lrcm.size() >= 2) {
        try {
            const TTestResult tt = paired_t_test(paired_lrcm, paired_rbf);
            report.t_statistic = tt.t;
            report.p_value = tt.p;
        } catch (const DegenerateDifferences&) {
            // leave the test fields unset
        }
    }
    report.peak_rss_mb = peak_rss_mb();
    return report;
}

namespace detail {

// Reorders partition labels to a new point order (new position -> old index).
inline std::vector<Partition> permute_partitions(const std::vector<Partition>& parts,
                                                 const std::vector<std::size_t>& order) {
    std::vector<Partition> out = parts;
    for (std::size_t l = 0; l < parts.size(); ++l)
        for (std::size_t i = 0; i < order.size(); ++i)
            out[l].labels[i] = parts[l].labels[order[i]];
    return out;
}

}  // namespace detail

/// Grid search over the regularization pair by 5-fold cross-validation on the
/// labeled set: each fold's labeled points are hidden, the system re-solved,
/// and the fold RMSE computed on the hidden labels. Ties break toward more
/// regularization (larger beta).
inline std::pair<double, double> grid_search(const ExperimentConfig& cfg,
                                             std::span<const double> alphas,
                                             std::span<const double> betas) {
    cfg.validate();
    if (alphas.empty() || betas.empty())
        throw std::invalid_argument("grid_search: candidate lists must not be empty");

    Dataset ds;
    if (cfg.scenario == Scenario::ForestFires)
        ds = detail::prepare_forest_fires(cfg.data_path);
    else
        ds = generate_mixture(cfg.n, cfg.mixture.dims, cfg.mixture.sigma_x, cfg.sigma_eps,
                              mix_seed(cfg.master_seed, 1), cfg.mixture.center1,
                              cfg.mixture.center2);

    const SplitProblem split = split_labeled(ds, cfg.labeled_fraction, mix_seed(cfg.master_seed, 2));
    const std::size_t n = split.data.size();
    const std::size_t n1 = split.n_labeled;

    EnsembleConfig ec = cfg.ensemble;
    ec.seed = mix_seed(cfg.master_seed, 3);
    const std::vector<Partition> parts = generate_ensemble(split.data.x, ec);
    const std::vector<double> weights = compute_weights(parts, ec.weighting);

    // Fold assignment over the labeled prefix.
    const std::size_t n_folds = std::min<std::size_t>(5, n1);
    std::vector<std::size_t> shuffled(n1);
    for (std::size_t i = 0; i < n1; ++i) shuffled[i] = i;
    std::mt19937_64 rng(mix_seed(cfg.master_seed, 4));
    std::shuffle(shuffled.begin(), shuffled.end(), rng);

    double best_score = std::numeric_limits<double>::infinity();
    double best_alpha = alphas[0], best_beta = betas[0];
    bool have_best = false;

    for (double alpha : alphas) {
        for (double beta : betas) {
            double score_sum = 0.0;
            std::size_t folds_used = 0;
            for (std::size_t f = 0; f < n_folds; ++f) {
                std::vector<std::size_t> keep, held;
                for (std::size_t i = 0; i < n1; ++i)
                    (i % n_folds == f ? held : keep).push_back(shuffled[i]);
                if (held.empty() || keep.empty()) continue;

                // Reorder: kept labeled, held-out, then the unlabeled tail.
                std::vector<std::size_t> order = keep;
                order.insert(order.end(), held.begin(), held.end());
                for (std::size_t i = n1; i < n; ++i) order.push_back(i);

                // Cross-validation sees only the observed labels.
                const std::vector<double>& labels = split.data.labels();
                LabeledProblem prob;
                prob.n = n;
                prob.n_labeled = keep.size();
                prob.y_padded.assign(n, 0.0);
                for (std::size_t i = 0; i < keep.size(); ++i)
                    prob.y_padded[i] = labels[keep[i]];

                const EnsembleFactor factor =
                    build_factor(detail::permute_partitions(parts, order), weights);
                SolverConfig solver{alpha, beta, SolverPath::Woodbury};
                const Prediction pred = solve_woodbury(factor, prob, solver);

                double err = 0.0;
                for (std::size_t i = 0; i < held.size(); ++i) {
                    const double d = pred.values[keep.size() + i] - labels[held[i]];
                    err += d * d;
                }
                score_sum += std::sqrt(err / double(held.size()));
                ++folds_used;
            }
            if (folds_used == 0) continue;
            const double score = score_sum / double(folds_used);
            const bool better =
                !have_best || score < best_score ||
                (score == best_score &&
                 (beta > best_beta || (beta == best_beta && alpha > best_alpha)));
            if (better) {
                best_score = score;
                best_alpha = alpha;
                best_beta = beta;
                have_best = true;
            }
        }
    }
    return {best_alpha, best_beta};
}

namespace detail {

inline std::string format_double(double v, const char* fmt = "%.6g") {
    if (std::isnan(v)) return "-";
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

}  // namespace detail

/// Renders a report. The table layout has one aggregated row; csv has one row
/// per repetition; json carries the full structure and round-trips through any
/// generic JSON parser.
inline std::string emit_report(const ExperimentReport& report, ReportFormat format) {
    using detail::format_double;
    if (format == ReportFormat::Table) {
        std::ostringstream os;
        os << "n        sigma_eps  RMSE_LRCM  t_ens(s)  t_matr(s)  RMSE_RBF   time_RBF(s)  p-value\n";
        os << report.n << "  " << format_double(report.sigma_eps) << "  "
           << format_double(report.mean_rmse_lrcm, "%.4f") << "  "
           << format_double(report.mean_t_ens, "%.3f") << "  "
           << format_double(report.mean_t_matr, "%.3f") << "  "
           << format_double(report.mean_rmse_rbf, "%.4f") << "  "
           << format_double(report.mean_time_rbf, "%.3f") << "  "
           << (report.p_value ? format_double(*report.p_value, "%.3g") : "-") << "\n";
        bool infeasible = false;
        for (const RepetitionResult& r : report.repetitions)
            infeasible = infeasible || r.baseline_status == BaselineStatus::DenseInfeasible;
        if (infeasible) os << "note: SSR-RBF marked dense-infeasible above the dense cap\n";
        return os.str();
    }
    if (format == ReportFormat::Csv) {
        std::ostringstream os;
        os << "rep,n,sigma_eps,rmse_lrcm,t_ens,t_matr,rmse_rbf,time_rbf\n";
        for (const RepetitionResult& r : report.repetitions) {
            os << r.index << "," << report.n << "," << format_double(report.sigma_eps) << ","
               << format_double(r.rmse_lrcm) << "," << format_double(r.t_ens) << ","
               << format_double(r.t_matr) << ","
               << (r.baseline_status == BaselineStatus::Ok ? format_double(r.rmse_rbf) : "nan")
               << ","
               << (r.baseline_status == BaselineStatus::Ok ? format_double(r.time_rbf) : "nan")
               << "\n";
        }
        return os.str();
    }

    nlohmann::json j;
    j["scenario"] = to_string(report.scenario);
    j["n"] = report.n;
    j["sigma_eps"] = report.sigma_eps;
    j["repetitions"] = nlohmann::json::array();
    for (const RepetitionResult& r : report.repetitions) {
        nlohmann::json jr;
        jr["rep"] = r.index;
        jr["lrcm_ok"] = r.lrcm_ok;
        if (r.lrcm_ok) {
            jr["rmse_lrcm"] = r.rmse_lrcm;
            jr["t_ens"] = r.t_ens;
            jr["t_matr"] = r.t_matr;
        }
        jr["baseline_status"] = to_string(r.baseline_status);
        if (r.baseline_status == BaselineStatus::Ok) {
            jr["rmse_rbf"] = r.rmse_rbf;
            jr["time_rbf"] = r.time_rbf;
        }
        if (!r.note.empty()) jr["note"] = r.note;
        j["repetitions"].push_back(jr);
    }
    nlohmann::json summary;
    summary["rmse_lrcm_mean"] =
        std::isnan(report.mean_rmse_lrcm) ? nlohmann::json() : nlohmann::json(report.mean_rmse_lrcm);
    summary["rmse_rbf_mean"] =
        std::isnan(report.mean_rmse_rbf) ? nlohmann::json() : nlohmann::json(report.mean_rmse_rbf);
    summary["t_ens_mean"] = report.mean_t_ens;
    summary["t_matr_mean"] = report.mean_t_matr;
    summary["time_rbf_mean"] = report.mean_time_rbf;
    summary["t_statistic"] =
        report.t_statistic ? nlohmann::json(*report.t_statistic) : nlohmann::json();
    summary["p_value"] = report.p_value ? nlohmann::json(*report.p_value) : nlohmann::json();
    summary["peak_rss_mb"] = report.peak_rss_mb;
    j["summary"] = summary;
    return j.dump(2);
}

/// Applies the fields present in a JSON object onto a config; missing fields
/// keep their current values, so CLI flags can be layered on afterwards.
inline void apply_config_json(ExperimentConfig& cfg, const nlohmann::json& j) {
    if (j.contains("scenario")) {
        const std::string s = j["scenario"].get<std::string>();
        if (s == "synthetic")
            cfg.scenario = Scenario::SyntheticMixture;
        else if (s == "forestfires")
            cfg.scenario = Scenario::ForestFires;
        else
            throw std::invalid_argument("unknown scenario '" + s + "'");
    }
    if (j.contains("n")) cfg.n = j["n"].get<std::size_t>();
    if (j.contains("sigma_eps")) cfg.sigma_eps = j["sigma_eps"].get<double>();
    if (j.contains("repetitions")) cfg.repetitions = j["repetitions"].get<std::size_t>();
    if (j.contains("labeled_fraction")) cfg.labeled_fraction = j["labeled_fraction"].get<double>();
    if (j.contains("master_seed")) cfg.master_seed = j["master_seed"].get<std::uint64_t>();
    if (j.contains("dense_cap")) cfg.dense_cap = j["dense_cap"].get<std::size_t>();
    if (j.contains("data_path")) cfg.data_path = j["data_path"].get<std::string>();
    if (j.contains("mixture")) {
        const auto& m = j["mixture"];
        if (m.contains("dims")) cfg.mixture.dims = m["dims"].get<std::size_t>();
        if (m.contains("sigma_x")) cfg.mixture.sigma_x = m["sigma_x"].get<double>();
        if (m.contains("center1")) cfg.mixture.center1 = m["center1"].get<double>();
        if (m.contains("center2")) cfg.mixture.center2 = m["center2"].get<double>();
    }
    if (j.contains("ensemble")) {
        const auto& e = j["ensemble"];
        if (e.contains("size")) cfg.ensemble.size = e["size"].get<std::size_t>();
        if (e.contains("k_range")) cfg.ensemble.k_range = e["k_range"].get<std::vector<int>>();
        if (e.contains("max_iter")) cfg.ensemble.max_iter = e["max_iter"].get<std::size_t>();
        if (e.contains("weighting")) {
            const std::string w = e["weighting"].get<std::string>();
            if (w == "uniform")
                cfg.ensemble.weighting = Weighting::Uniform;
            else if (w == "validity")
                cfg.ensemble.weighting = Weighting::ValidityIndex;
            else
                throw std::invalid_argument("unknown weighting '" + w + "'");
        }
    }
    if (j.contains("solver")) {
        const auto& s = j["solver"];
        if (s.contains("alpha")) cfg.solver.alpha = s["alpha"].get<double>();
        if (s.contains("beta")) cfg.solver.beta = s["beta"].get<double>();
    }
    if (j.contains("baseline")) {
        const auto& b = j["baseline"];
        if (b.contains("lengthscale")) cfg.baseline.lengthscale = b["lengthscale"].get<double>();
        if (b.contains("family")) {
            const std::string f = b["family"].get<std::string>();
            if (f == "rbf")
                cfg.baseline.family = KernelFamily::Rbf;
            else if (f == "gaussian")
                cfg.baseline.family = KernelFamily::Gaussian;
            else if (f == "exponential")
                cfg.baseline.family = KernelFamily::Exponential;
            else if (f == "matern32")
                cfg.baseline.family = KernelFamily::Matern32;
            else if (f == "matern52")
                cfg.baseline.family = KernelFamily::Matern52;
            else
                throw std::invalid_argument("unknown kernel family '" + f + "'");
        }
    }
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        if (g.contains("alphas")) cfg.grid_alphas = g["alphas"].get<std::vector<double>>();
        if (g.contains("betas")) cfg.grid_betas = g["betas"].get<std::vector<double>>();
    }
}

}  // namespace ssrlrcm
