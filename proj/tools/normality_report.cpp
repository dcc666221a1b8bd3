// Diagnostic for the limiting law of the rescaled active-set estimation error.
// Not part of the test suite: the replication count needed for a sharp check
// is beyond desk scale, so this only prints the empirical mean and the ratio
// of the empirical variance to the theoretical tau(1-tau)/f(0)^2 limit.
#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <vector>

#include "gqnet/pilot.hpp"
#include "gqnet/sim.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Asymptotic-normality diagnostic (non-gated)"};
    int n = 1000, g = 5, reps = 500, jobs = 0;
    std::uint64_t seed = 20240901;
    app.add_option("--n", n);
    app.add_option("--g", g);
    app.add_option("--reps", reps);
    app.add_option("--jobs", jobs);
    app.add_option("--seed", seed);
    CLI11_PARSE(app, argc, argv);

    gqnet::SimulationScenario sc;
    sc.n = n;
    sc.g = g;
    sc.p = 2;
    sc.true_beta = gqnet::beta_preset("p2", g);
    sc.error_law = {gqnet::ErrorLaw::Kind::normal, 1.0};
    sc.tau = 0.5;
    sc.replications = reps;
    sc.base_seed = seed;

    // Signal-group indexes and a fixed unit direction in that subspace.
    std::vector<int> signal;
    for (int j = 0; j < g; ++j)
        if (sc.true_beta.group_norm(j) > 0.0) signal.push_back(j);
    const int dim = static_cast<int>(signal.size()) * sc.p;
    Eigen::VectorXd u = Eigen::VectorXd::Ones(dim).normalized();

    std::vector<double> stats;
    stats.reserve(reps);
#pragma omp parallel for schedule(dynamic)
    for (int rep = 0; rep < reps; ++rep) {
        gqnet::SplitMix64 rng(gqnet::derive_seed(sc.base_seed, rep));
        const auto design = gqnet::gen_design(sc.n, sc.g, sc.p, 0.6, rng);
        const auto eps = gqnet::gen_errors(sc.error_law, sc.n, sc.tau, rng);
        const Eigen::VectorXd y = design.values * sc.true_beta.flat + eps;
        const auto pilot = gqnet::fit_pilot(design, y, sc.tau);
        const double sd_y = std::sqrt((y.array() - y.mean()).square().sum() / (sc.n - 1));
        const auto grid = gqnet::default_grid(sc.n, sc.g, sc.p, sd_y);
        const auto fit = gqnet::grid_search(design, y, sc.tau, grid, pilot).best;

        Eigen::MatrixXd Xa(sc.n, dim);
        Eigen::VectorXd diff(dim);
        for (std::size_t a = 0; a < signal.size(); ++a) {
            Xa.middleCols(a * sc.p, sc.p) = design.group_block(signal[a]);
            diff.segment(a * sc.p, sc.p) =
                fit.coefficients.group(signal[a]) - sc.true_beta.group(signal[a]);
        }
        const Eigen::MatrixXd U = Xa.transpose() * Xa / sc.n;
        const double denom = std::sqrt(u.dot(U.inverse() * u));
        const double stat = std::sqrt(static_cast<double>(sc.n)) / denom * u.dot(diff);
#pragma omp critical
        stats.push_back(stat);
    }

    double mean = 0.0;
    for (double s : stats) mean += s;
    mean /= stats.size();
    double var = 0.0;
    for (double s : stats) var += (s - mean) * (s - mean);
    var /= (stats.size() - 1);
    const double f0 = 1.0 / std::sqrt(2.0 * std::numbers::pi);  // N(0,1) density at 0
    const double limit_var = sc.tau * (1.0 - sc.tau) / (f0 * f0);

    std::printf("reps %d n %d g %d\n", reps, n, g);
    std::printf("empirical_mean %.6f (limit 0)\n", mean);
    std::printf("empirical_variance %.6f theoretical %.6f ratio %.4f\n", var, limit_var,
                var / limit_var);
    std::printf("ratio_in_[0.7,1.3] %s\n", (var / limit_var >= 0.7 && var / limit_var <= 1.3)
                                               ? "yes"
                                               : "no");
    return 0;
}
