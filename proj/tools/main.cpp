// Benchmark harness CLI. Subcommands: synthetic, forestfires, hmatrix-bench,
// gridsearch. A JSON config file can seed any run; explicit flags override it.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ssrlrcm/ssrlrcm.hpp"

namespace {

using namespace ssrlrcm;

struct CommonFlags {
    std::optional<std::size_t> n;
    std::optional<double> sigma_eps;
    std::optional<std::size_t> reps;
    std::optional<double> alpha;
    std::optional<double> beta;
    std::optional<std::size_t> ensemble_size;
    std::optional<int> k;
    std::optional<double> ell;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> dense_cap;
    std::optional<double> labeled_fraction;
    std::string format = "table";
    std::string out_path;
    std::string config_path;
    std::string data_path;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags, bool with_data) {
    cmd->add_option("--n", flags.n, "number of points");
    cmd->add_option("--sigma-eps", flags.sigma_eps, "response noise standard deviation");
    cmd->add_option("--reps", flags.reps, "Monte Carlo repetitions");
    cmd->add_option("--alpha", flags.alpha, "graph regularization weight");
    cmd->add_option("--beta", flags.beta, "ridge regularization weight");
    cmd->add_option("--ensemble-size", flags.ensemble_size, "number of base clusterings");
    cmd->add_option("--k", flags.k, "clusters per base clustering");
    cmd->add_option("--ell", flags.ell, "RBF baseline lengthscale");
    cmd->add_option("--seed", flags.seed, "master seed");
    cmd->add_option("--dense-cap", flags.dense_cap,
                    "skip the dense baseline above this point count");
    cmd->add_option("--labeled-fraction", flags.labeled_fraction, "labeled share in (0,1)");
    cmd->add_option("--format", flags.format, "output format")
        ->check(CLI::IsMember({"table", "json", "csv"}));
    cmd->add_option("--out", flags.out_path, "write the report to a file instead of stdout");
    cmd->add_option("--config", flags.config_path, "JSON config file (flags override it)");
    if (with_data) cmd->add_option("--data", flags.data_path, "CSV dataset path");
}

ExperimentConfig make_config(const CommonFlags& flags, Scenario scenario) {
    ExperimentConfig cfg;
    cfg.scenario = scenario;
    if (scenario == Scenario::ForestFires) {
        cfg.ensemble.k_range = {10};
        cfg.baseline.lengthscale = 0.1;
    }
    if (!flags.config_path.empty()) {
        std::ifstream in(flags.config_path);
        if (!in) throw std::invalid_argument("cannot open config '" + flags.config_path + "'");
        nlohmann::json j;
        in >> j;
        apply_config_json(cfg, j);
        cfg.scenario = scenario;  // the subcommand wins
    }
    if (flags.n) cfg.n = *flags.n;
    if (flags.sigma_eps) cfg.sigma_eps = *flags.sigma_eps;
    if (flags.reps) cfg.repetitions = *flags.reps;
    if (flags.alpha) cfg.solver.alpha = *flags.alpha;
    if (flags.beta) cfg.solver.beta = *flags.beta;
    if (flags.ensemble_size) cfg.ensemble.size = *flags.ensemble_size;
    if (flags.k) cfg.ensemble.k_range = {*flags.k};
    if (flags.ell) cfg.baseline.lengthscale = *flags.ell;
    if (flags.seed) cfg.master_seed = *flags.seed;
    if (flags.dense_cap) cfg.dense_cap = *flags.dense_cap;
    if (flags.labeled_fraction) cfg.labeled_fraction = *flags.labeled_fraction;
    if (!flags.data_path.empty()) cfg.data_path = flags.data_path;
    return cfg;
}

ReportFormat parse_format(const std::string& name) {
    if (name == "json") return ReportFormat::Json;
    if (name == "csv") return ReportFormat::Csv;
    return ReportFormat::Table;
}

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
    out << text;
}

int run_scenario(const CommonFlags& flags, Scenario scenario) {
    const ExperimentConfig cfg = make_config(flags, scenario);
    if (scenario == Scenario::ForestFires)
        std::cerr << dataset_summary(load_forest_fires(cfg.data_path));
    const ExperimentReport report = run_experiment(cfg);
    write_output(emit_report(report, parse_format(flags.format)), flags.out_path);
    for (const RepetitionResult& rep : report.repetitions)
        if (!rep.lrcm_ok || rep.baseline_status == BaselineStatus::Failed) {
            std::cerr << "warning: repetition " << rep.index << " failed: " << rep.note << "\n";
            return 2;
        }
    return 0;
}

struct HmatrixFlags {
    std::size_t n = 1024;
    double ell = 0.25;
    double sigma2 = 1.0;
    double eps = 1e-7;
    double eta = 2.0;
    std::size_t n_min = 64;
    std::size_t iters = 50;
    std::uint64_t seed = 42;
    std::vector<std::size_t> k_caps;
    std::string dump_path;
    std::string format = "table";
    std::string out_path;
    bool solve = false;
};

int run_hmatrix_bench(const HmatrixFlags& flags) {
    const std::size_t side = static_cast<std::size_t>(std::round(std::sqrt(double(flags.n))));
    const std::size_t n = side * side;
    DenseMatrix pts(n, 2);
    for (std::size_t i = 0; i < side; ++i)
        for (std::size_t j = 0; j < side; ++j) {
            pts(i * side + j, 0) = double(i) / double(side - 1);
            pts(i * side + j, 1) = double(j) / double(side - 1);
        }

    const KernelParams kernel{KernelFamily::Matern32, flags.ell, flags.sigma2};
    const DenseMatrix w = similarity_matrix(pts, kernel);
    const auto exact = [&](std::size_t i, std::size_t j) { return w(i, j); };
    const double w_norm =
        power_iteration_norm(LinearOperator::from_dense(w), flags.iters, flags.seed);

    nlohmann::json j;
    j["n"] = n;
    j["ell"] = flags.ell;
    j["w_norm_estimate"] = w_norm;
    j["runs"] = nlohmann::json::array();

    std::ostringstream table;
    table << "n = " << n << ", Matern 3/2, ell = " << flags.ell << ", ||W||_2 ~ " << w_norm
          << "\n";
    table << "config          build(s)  error_est    error/||W||\n";

    auto run_one = [&](const std::string& name, const HMatrixOptions& opt) {
        const auto t0 = std::chrono::steady_clock::now();
        const HMatrix h = build_hmatrix(pts, kernel, opt);
        const double build_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const double err = approx_error_norm(exact, h, flags.iters, flags.seed);
        nlohmann::json run;
        run["config"] = name;
        run["build_seconds"] = build_s;
        run["error_estimate"] = err;
        run["relative_error"] = err / w_norm;
        j["runs"].push_back(run);
        char line[160];
        std::snprintf(line, sizeof line, "%-14s  %8.3f  %11.4e  %11.4e\n", name.c_str(), build_s,
                      err, err / w_norm);
        table << line;
        return h;
    };

    for (std::size_t cap : flags.k_caps) {
        HMatrixOptions opt;
        opt.n_min = flags.n_min;
        opt.eta = flags.eta;
        opt.eps = 1e-30;  // let the rank cap bind
        opt.k_max = cap;
        opt.on_rank_cap = RankCapPolicy::Accept;
        run_one("k_max=" + std::to_string(cap), opt);
    }

    HMatrixOptions opt;
    opt.n_min = flags.n_min;
    opt.eta = flags.eta;
    opt.eps = flags.eps;
    char eps_name[48];
    std::snprintf(eps_name, sizeof eps_name, "eps=%g", flags.eps);
    const HMatrix h = run_one(eps_name, opt);

    if (!flags.dump_path.empty()) {
        std::ofstream dump(flags.dump_path);
        if (!dump) throw std::runtime_error("cannot write '" + flags.dump_path + "'");
        dump << dump_blocks(h);
    }

    if (flags.solve) {
        LabeledProblem prob;
        prob.n = n;
        prob.n_labeled = std::max<std::size_t>(1, n / 10);
        prob.y_padded.assign(n, 0.0);
        std::mt19937_64 rng(flags.seed);
        std::uniform_real_distribution<double> label(1.0, 2.0);
        for (std::size_t i = 0; i < prob.n_labeled; ++i) prob.y_padded[i] = label(rng);
        const SolverConfig cfg{1.0, 0.001, SolverPath::HMatrixCg};

        const Prediction fast = solve_ssr_hmatrix(h, prob, cfg, 1e-10, 50000);
        const Prediction dense = solve_dense(w, prob, cfg);
        double err = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            err += (fast.values[i] - dense.values[i]) * (fast.values[i] - dense.values[i]);
            scale += dense.values[i] * dense.values[i];
        }
        const double rel = std::sqrt(err / scale);
        j["solve_relative_error"] = rel;
        table << "solve: ||f_h - f_dense|| / ||f_dense|| = " << rel << "\n";
    }

    write_output(flags.format == "json" ? j.dump(2) : table.str(), flags.out_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"semi-supervised regression benchmarks (cluster-ensemble low-rank solver, "
                 "dense RBF baseline, hierarchical-matrix path)"};
    app.require_subcommand(1);

    CommonFlags synth_flags;
    CLI::App* synth = app.add_subcommand("synthetic", "two-Gaussian mixture Monte Carlo benchmark");
    add_common_flags(synth, synth_flags, false);

    CommonFlags ff_flags;
    CLI::App* ff = app.add_subcommand("forestfires", "forest-fires benchmark on a UCI-format CSV");
    add_common_flags(ff, ff_flags, true);

    HmatrixFlags hm_flags;
    CLI::App* hm = app.add_subcommand("hmatrix-bench",
                                      "hierarchical-matrix approximation accuracy benchmark");
    hm->add_option("--n", hm_flags.n, "grid size (rounded to a square)");
    hm->add_option("--ell", hm_flags.ell, "Matern lengthscale");
    hm->add_option("--sigma2", hm_flags.sigma2, "Matern variance");
    hm->add_option("--eps", hm_flags.eps, "per-block ACA tolerance");
    hm->add_option("--eta", hm_flags.eta, "admissibility parameter");
    hm->add_option("--nmin", hm_flags.n_min, "cluster-tree leaf size");
    hm->add_option("--iters", hm_flags.iters, "power-iteration steps");
    hm->add_option("--seed", hm_flags.seed, "power-iteration seed");
    hm->add_option("--k-caps", hm_flags.k_caps, "rank caps to sweep")->delimiter(',');
    hm->add_option("--dump-blocks", hm_flags.dump_path, "write the leaf-block JSON here");
    hm->add_option("--format", hm_flags.format, "output format")
        ->check(CLI::IsMember({"table", "json"}));
    hm->add_option("--out", hm_flags.out_path, "write the report to a file");
    hm->add_flag("--solve", hm_flags.solve, "also compare the CG solve against the dense solve");

    CommonFlags grid_flags;
    std::vector<double> grid_alphas, grid_betas;
    std::string grid_scenario = "synthetic";
    CLI::App* grid = app.add_subcommand("gridsearch", "alpha/beta grid search by cross-validation");
    add_common_flags(grid, grid_flags, true);
    grid->add_option("--alphas", grid_alphas, "alpha candidates")->delimiter(',');
    grid->add_option("--betas", grid_betas, "beta candidates")->delimiter(',');
    grid->add_option("--scenario", grid_scenario, "dataset scenario")
        ->check(CLI::IsMember({"synthetic", "forestfires"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // 1 for any usage error, 0 for --help
    }

    try {
        if (synth->parsed()) return run_scenario(synth_flags, Scenario::SyntheticMixture);
        if (ff->parsed()) return run_scenario(ff_flags, Scenario::ForestFires);
        if (hm->parsed()) return run_hmatrix_bench(hm_flags);
        if (grid->parsed()) {
            const Scenario scenario = grid_scenario == "forestfires" ? Scenario::ForestFires
                                                                     : Scenario::SyntheticMixture;
            ExperimentConfig cfg = make_config(grid_flags, scenario);
            if (!grid_alphas.empty()) cfg.grid_alphas = grid_alphas;
            if (!grid_betas.empty()) cfg.grid_betas = grid_betas;
            if (cfg.grid_alphas.empty()) cfg.grid_alphas = {cfg.solver.alpha};
            if (cfg.grid_betas.empty()) cfg.grid_betas = {cfg.solver.beta};
            const auto [alpha, beta] = grid_search(cfg, cfg.grid_alphas, cfg.grid_betas);
            if (grid_flags.format == "json") {
                nlohmann::json j;
                j["alpha"] = alpha;
                j["beta"] = beta;
                write_output(j.dump(2), grid_flags.out_path);
            } else {
                std::ostringstream os;
                os << "alpha = " << alpha << ", beta = " << beta << "\n";
                write_output(os.str(), grid_flags.out_path);
            }
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
