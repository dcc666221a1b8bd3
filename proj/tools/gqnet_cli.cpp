#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "gqnet/io.hpp"
#include "gqnet/model.hpp"
#include "gqnet/pilot.hpp"
#include "gqnet/sim.hpp"

namespace {

constexpr const char* kVersion = "gqnet 1.0.0";

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void log_config(const std::string& cmd, const std::vector<std::pair<std::string, std::string>>& kv) {
    std::cerr << "# " << kVersion << " " << cmd;
    for (const auto& [k, v] : kv) std::cerr << " " << k << "=" << v;
    std::cerr << "\n";
}

double resolve_tau(const std::string& tau_arg, const Eigen::VectorXd& y) {
    if (tau_arg == "auto") return gqnet::estimate_tau(y);
    return gqnet::parse_finite_double(tau_arg, "--tau");
}

gqnet::SweepMode parse_sweep(const std::string& s) {
    if (s == "jacobi") return gqnet::SweepMode::jacobi;
    if (s == "gauss-seidel") return gqnet::SweepMode::gauss_seidel;
    throw gqnet::ParseError("--sweep must be 'jacobi' or 'gauss-seidel'");
}

void write_fit_report(std::ostream& os, const gqnet::FitResult& fit, double tau,
                      const gqnet::PenaltyConfig& cfg, bool kkt_pass) {
    os << "# " << kVersion << "\n";
    os << "# tau " << fmt17(tau) << " lambda1 " << fmt17(cfg.lambda1) << " lambda2 "
       << fmt17(cfg.lambda2) << " gamma " << fmt17(cfg.gamma) << "\n";
    os << "# converged " << (fit.converged ? 1 : 0) << " iterations " << fit.iterations << "\n";
    os << "# objective_quantile " << fmt17(fit.objective_quantile) << "\n";
    os << "# objective_penalized " << fmt17(fit.objective_penalized) << "\n";
    os << "# active_set";
    for (int j : fit.active_set) os << " " << j;
    os << "\n";
    os << "# kkt_pass " << (kkt_pass ? 1 : 0) << "\n";
    gqnet::write_coefficients(os, fit.coefficients);
}

gqnet::TuningGrid read_grid_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw gqnet::ParseError("cannot open grid file '" + path + "'");
    gqnet::TuningGrid grid;
    grid.lambda1_values.clear();
    grid.lambda2_values.clear();
    std::string line;
    int lineno = 0;
    bool warned = false;
    auto parse_list = [&](const std::string& value, const std::string& ctx) {
        std::vector<double> out;
        std::istringstream vs(value);
        std::string tok;
        while (std::getline(vs, tok, ',')) out.push_back(gqnet::parse_finite_double(tok, ctx));
        std::sort(out.begin(), out.end());
        auto last = std::unique(out.begin(), out.end());
        if (last != out.end() && !warned) {
            std::cerr << "warning: duplicate grid values deduplicated\n";
            warned = true;
        }
        out.erase(last, out.end());
        return out;
    };
    while (std::getline(in, line)) {
        ++lineno;
        const std::string ctx = path + ":" + std::to_string(lineno);
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw gqnet::ParseError(ctx + ": expected 'key = value'");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        auto strip = [](std::string& s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            s = (a == std::string::npos) ? std::string() : s.substr(a, b - a + 1);
        };
        strip(key);
        strip(value);
        if (key == "lambda1")
            grid.lambda1_values = parse_list(value, ctx);
        else if (key == "lambda2")
            grid.lambda2_values = parse_list(value, ctx);
        else if (key == "gamma")
            grid.gamma = gqnet::parse_finite_double(value, ctx);
        else if (key == "sn")
            grid.Sn = gqnet::parse_finite_double(value, ctx);
        else
            throw gqnet::ParseError(ctx + ": unknown grid key '" + key + "'");
    }
    if (grid.lambda1_values.empty() || grid.lambda2_values.empty())
        throw gqnet::ParseError(path + ": grid file must set lambda1 and lambda2");
    return grid;
}

int cmd_fit(const std::string& dataset_path, const std::string& tau_arg, double lambda1,
            double lambda2, double gamma, double epsilon, int max_iters,
            const std::string& sweep, int groups, const std::string& out_path) {
    const gqnet::Dataset data = gqnet::read_dataset(dataset_path, groups);
    const double tau = resolve_tau(tau_arg, data.y);
    log_config("fit", {{"dataset", dataset_path},
                       {"tau", fmt17(tau)},
                       {"lambda1", fmt17(lambda1)},
                       {"lambda2", fmt17(lambda2)},
                       {"gamma", fmt17(gamma)},
                       {"epsilon", fmt17(epsilon)},
                       {"sweep", sweep}});

    gqnet::PilotOptions popt;
    popt.warn = [](const std::string& msg) { std::cerr << "warning: " << msg << "\n"; };
    const auto pilot = gqnet::fit_pilot(data.design, data.y, tau, popt);

    gqnet::PenaltyConfig cfg;
    cfg.tau = tau;
    cfg.lambda1 = lambda1;
    cfg.lambda2 = lambda2;
    cfg.gamma = gamma;
    cfg.weights = gqnet::adaptive_weights(pilot, gamma);

    gqnet::SolverOptions sopt;
    sopt.epsilon = epsilon;
    sopt.max_iters = max_iters;
    sopt.sweep_mode = parse_sweep(sweep);

    const auto fit = gqnet::fit_enet(data.design, data.y, cfg, pilot, sopt);
    const auto kkt = gqnet::kkt_check(data.design, data.y, fit, cfg, 1e-2);

    if (out_path.empty()) {
        write_fit_report(std::cout, fit, tau, cfg, kkt.pass);
    } else {
        std::ofstream os(out_path);
        if (!os) throw gqnet::ParseError("cannot open output file '" + out_path + "'");
        write_fit_report(os, fit, tau, cfg, kkt.pass);
    }
    return fit.converged ? 0 : 2;
}

int cmd_tune(const std::string& dataset_path, const std::string& tau_arg,
             const std::string& grid_arg, const std::string& sn_arg, int groups,
             const std::string& out_path) {
    const gqnet::Dataset data = gqnet::read_dataset(dataset_path, groups);
    const double tau = resolve_tau(tau_arg, data.y);

    gqnet::TuningGrid grid;
    if (grid_arg == "auto") {
        grid = gqnet::default_grid(data.design.n, data.design.g, data.design.p,
                                   gqnet::robust_sigma(data.y));
    } else {
        grid = read_grid_file(grid_arg);
    }
    if (sn_arg != "auto") grid.Sn = gqnet::parse_finite_double(sn_arg, "--sn");
    log_config("tune", {{"dataset", dataset_path},
                        {"tau", fmt17(tau)},
                        {"grid", grid_arg},
                        {"sn", fmt17(grid.Sn)},
                        {"gamma", fmt17(grid.gamma)}});

    gqnet::PilotOptions popt;
    popt.warn = [](const std::string& msg) { std::cerr << "warning: " << msg << "\n"; };
    const auto pilot = gqnet::fit_pilot(data.design, data.y, tau, popt);
    const auto result = gqnet::grid_search(data.design, data.y, tau, grid, pilot);
    const auto& best = result.best;
    const auto& records = result.records;

    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw gqnet::ParseError("cannot open output file '" + out_path + "'");
        os = &file;
    }
    *os << "# " << kVersion << " tune tau " << fmt17(tau) << " Sn " << fmt17(grid.Sn) << "\n";
    *os << "lambda1 lambda2 bic active converged\n";
    for (const auto& r : records)
        *os << fmt17(r.lambda1) << " " << fmt17(r.lambda2) << " " << fmt17(r.bic_value) << " "
            << r.active_count << " " << (r.converged ? 1 : 0) << "\n";
    *os << "# best\n";
    gqnet::PenaltyConfig cfg;  // for the report header only
    cfg.tau = tau;
    cfg.gamma = grid.gamma;
    cfg.weights = gqnet::adaptive_weights(pilot, grid.gamma);
    cfg.lambda1 = result.best_record.lambda1;
    cfg.lambda2 = result.best_record.lambda2;
    const auto kkt = gqnet::kkt_check(data.design, data.y, best, cfg, 1e-2);
    write_fit_report(*os, best, tau, cfg, kkt.pass);
    return best.converged ? 0 : 2;
}

int cmd_simulate(const std::string& scenario_path, int reps_override, int jobs,
                 const std::string& out_dir) {
    gqnet::SimulationScenario sc = gqnet::read_scenario(scenario_path);
    if (reps_override > 0) sc.replications = reps_override;
    if (const char* env = std::getenv("GQNET_SEED"))
        sc.base_seed = static_cast<std::uint64_t>(std::stoull(env));
    log_config("simulate", {{"scenario", scenario_path},
                            {"n", std::to_string(sc.n)},
                            {"g", std::to_string(sc.g)},
                            {"p", std::to_string(sc.p)},
                            {"reps", std::to_string(sc.replications)},
                            {"seed", std::to_string(sc.base_seed)},
                            {"jobs", std::to_string(jobs)}});

    const auto metrics = (jobs == 1) ? gqnet::run_campaign_serial(sc)
                                     : gqnet::run_campaign_parallel(sc, jobs);
    const auto summary = gqnet::aggregate(sc, metrics);

    std::filesystem::create_directories(out_dir);
    {
        std::ofstream os(out_dir + "/replications.txt");
        os << "# " << kVersion << " seed " << sc.base_seed << "\n";
        os << "rep correct_nonzero correct_zero l2_error mean_abs_pred_error exact_recovery "
              "runtime_seconds failed\n";
        for (std::size_t i = 0; i < metrics.size(); ++i) {
            const auto& m = metrics[i];
            os << i << " " << m.correct_nonzero << " " << m.correct_zero << " "
               << fmt17(m.l2_error) << " " << fmt17(m.mean_abs_prediction_error) << " "
               << (m.exact_recovery ? 1 : 0) << " " << fmt17(m.runtime_seconds) << " "
               << (m.solver_failed ? 1 : 0) << "\n";
        }
    }
    {
        std::ofstream os(out_dir + "/summary.txt");
        os << "# " << kVersion << " seed " << sc.base_seed << " reps " << sc.replications << "\n";
        os << "median_correct_nonzero " << fmt17(summary.median_correct_nonzero) << "\n";
        os << "mean_correct_nonzero " << fmt17(summary.mean_correct_nonzero) << "\n";
        os << "median_correct_zero " << fmt17(summary.median_correct_zero) << "\n";
        os << "mean_correct_zero " << fmt17(summary.mean_correct_zero) << "\n";
        os << "sd_errors " << fmt17(summary.pooled_sd_errors) << "\n";
        os << "mean_abs_prediction_error " << fmt17(summary.mean_abs_prediction_error) << "\n";
        os << "exact_recovery_fraction " << fmt17(summary.exact_recovery_fraction) << "\n";
        os << "median_l2_error " << fmt17(summary.median_l2_error) << "\n";
        os << "mean_runtime_seconds " << fmt17(summary.mean_runtime_seconds) << "\n";
        os << "median_beta_active";
        for (double v : summary.median_beta_active) os << " " << fmt17(v);
        os << "\n";
    }
    return 0;
}

int cmd_kkt(const std::string& dataset_path, const std::string& coef_path,
            const std::string& tau_arg, double lambda1, double lambda2, double gamma, double tol,
            int groups) {
    const gqnet::Dataset data = gqnet::read_dataset(dataset_path, groups);
    const double tau = resolve_tau(tau_arg, data.y);
    const auto beta = gqnet::read_coefficients(coef_path);
    if (beta.g != data.design.g || beta.p != data.design.p)
        throw gqnet::ParseError("coefficient file shape (" + std::to_string(beta.g) + "," +
                                std::to_string(beta.p) + ") does not match dataset (" +
                                std::to_string(data.design.g) + "," +
                                std::to_string(data.design.p) + ")");
    log_config("kkt", {{"dataset", dataset_path},
                       {"coefficients", coef_path},
                       {"tau", fmt17(tau)},
                       {"lambda1", fmt17(lambda1)},
                       {"lambda2", fmt17(lambda2)},
                       {"tol", fmt17(tol)}});

    const auto pilot = gqnet::fit_pilot(data.design, data.y, tau);
    gqnet::PenaltyConfig cfg;
    cfg.tau = tau;
    cfg.lambda1 = lambda1;
    cfg.lambda2 = lambda2;
    cfg.gamma = gamma;
    cfg.weights = gqnet::adaptive_weights(pilot, gamma);

    gqnet::FitResult fit;
    fit.coefficients = beta;
    fit.active_set = gqnet::active_set(beta, gqnet::kZeroTol);
    const auto report = gqnet::kkt_check(data.design, data.y, fit, cfg, tol);

    for (const auto& a : report.active)
        std::cout << "active group " << a.group << " max_abs_residual " << fmt17(a.max_abs) << "\n";
    for (const auto& s : report.inactive)
        std::cout << "inactive group " << s.group << " min_slack " << fmt17(s.min_slack) << "\n";
    std::cout << (report.pass ? "PASS" : "FAIL") << " tol " << fmt17(tol) << "\n";
    return report.pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive elastic-net group quantile regression"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    // fit
    std::string f_dataset, f_tau = "0.5", f_sweep = "jacobi", f_out;
    double f_l1 = 1.0, f_l2 = 1.0, f_gamma = 1.225, f_eps = 1e-6;
    int f_maxit = 10000, f_groups = 0;
    auto* fit = app.add_subcommand("fit", "Fit one (lambda1, lambda2) configuration");
    fit->add_option("dataset", f_dataset, "delimited dataset, first column = response")->required();
    fit->add_option("--tau", f_tau, "quantile index in (0,1), or 'auto'");
    fit->add_option("--lambda1", f_l1, "adaptive group-norm penalty weight");
    fit->add_option("--lambda2", f_l2, "squared-norm penalty weight (> 0)");
    fit->add_option("--gamma", f_gamma, "adaptive weight exponent");
    fit->add_option("--epsilon", f_eps, "convergence threshold");
    fit->add_option("--max-iters", f_maxit, "sweep limit");
    fit->add_option("--sweep", f_sweep, "jacobi | gauss-seidel");
    fit->add_option("--groups", f_groups, "group count override for headerless datasets");
    fit->add_option("--out", f_out, "coefficient file (stdout when omitted)");

    // tune
    std::string t_dataset, t_tau = "0.5", t_grid = "auto", t_sn = "auto", t_out;
    int t_groups = 0;
    auto* tune = app.add_subcommand("tune", "BIC grid search over (lambda1, lambda2)");
    tune->add_option("dataset", t_dataset)->required();
    tune->add_option("--tau", t_tau, "quantile index in (0,1), or 'auto'");
    tune->add_option("--grid", t_grid, "'auto' or a grid file");
    tune->add_option("--sn", t_sn, "'auto' or a numeric S_n override");
    tune->add_option("--groups", t_groups, "group count override");
    tune->add_option("--out", t_out, "BIC table + best fit output file");

    // simulate
    std::string s_scenario, s_out = "sim_out";
    int s_reps = 0, s_jobs = 1;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo campaign from a scenario file");
    sim->add_option("scenario", s_scenario)->required();
    sim->add_option("--reps", s_reps, "replication count override");
    sim->add_option("--jobs", s_jobs, "worker threads (0 = all)");
    sim->add_option("--out", s_out, "output directory");

    // kkt
    std::string k_dataset, k_coef, k_tau = "0.5";
    double k_l1 = 1.0, k_l2 = 1.0, k_gamma = 1.225, k_tol = 1e-2;
    int k_groups = 0;
    auto* kkt = app.add_subcommand("kkt", "Check first-order optimality of a coefficient file");
    kkt->add_option("dataset", k_dataset)->required();
    kkt->add_option("coefficients", k_coef)->required();
    kkt->add_option("--tau", k_tau);
    kkt->add_option("--lambda1", k_l1);
    kkt->add_option("--lambda2", k_l2);
    kkt->add_option("--gamma", k_gamma);
    kkt->add_option("--tol", k_tol, "scaled KKT tolerance");
    kkt->add_option("--groups", k_groups);

    CLI11_PARSE(app, argc, argv);

    try {
        if (fit->parsed())
            return cmd_fit(f_dataset, f_tau, f_l1, f_l2, f_gamma, f_eps, f_maxit, f_sweep,
                           f_groups, f_out);
        if (tune->parsed()) return cmd_tune(t_dataset, t_tau, t_grid, t_sn, t_groups, t_out);
        if (sim->parsed()) return cmd_simulate(s_scenario, s_reps, s_jobs, s_out);
        if (kkt->parsed())
            return cmd_kkt(k_dataset, k_coef, k_tau, k_l1, k_l2, k_gamma, k_tol, k_groups);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
