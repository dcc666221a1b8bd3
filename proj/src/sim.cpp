#include "gqnet/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>

#include "gqnet/model.hpp"
#include "gqnet/pilot.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace gqnet {

void SimulationScenario::validate() const {
    if (n < 2 || g < 1 || p < 1) throw std::invalid_argument("scenario: bad dimensions");
    if (replications < 1) throw std::invalid_argument("scenario: replications must be >= 1");
    if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("scenario: tau must lie in (0,1)");
    if (true_beta.g != g || true_beta.p != p)
        throw std::invalid_argument("scenario: true_beta shape != (g, p)");
    if (error_law.kind == ErrorLaw::Kind::normal && !(error_law.sigma > 0.0))
        throw std::invalid_argument("scenario: normal law needs sigma > 0");
    if (grid) grid->validate();
}

GroupedDesign gen_design(int n, int g, int p, double rho, SplitMix64& rng) {
    if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("gen_design: rho must lie in (0,1)");
    Eigen::MatrixXd cov(g, g);
    for (int a = 0; a < g; ++a)
        for (int b = 0; b < g; ++b) cov(a, b) = std::pow(rho, std::abs(a - b));
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("gen_design: covariance factorization failed");
    const Eigen::MatrixXd L = llt.matrixL();

    const int r = g * p;
    Eigen::MatrixXd X(n, r);
    Eigen::VectorXd zraw(g);
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < g; ++j) zraw[j] = rng.next_normal();
        const Eigen::VectorXd z = L * zraw;
        for (int j = 0; j < g; ++j)
            for (int k = 0; k < p; ++k)
                X(i, j * p + k) = (z[j] + rng.next_normal()) * inv_sqrt2;
    }
    return GroupedDesign::create(n, g, p, std::move(X));
}

Eigen::VectorXd gen_errors(const ErrorLaw& law, int n, double tau, SplitMix64& rng) {
    Eigen::VectorXd e(n);
    if (law.kind == ErrorLaw::Kind::normal) {
        const double shift = law.sigma * inverse_normal_cdf(tau);
        for (int i = 0; i < n; ++i) e[i] = law.sigma * rng.next_normal() - shift;
    } else {
        const double shift = std::tan(std::numbers::pi * (tau - 0.5));
        for (int i = 0; i < n; ++i) e[i] = rng.next_cauchy() - shift;
    }
    return e;
}

ReplicationMetrics run_replication(const SimulationScenario& scenario, int replication_index) {
    scenario.validate();
    const auto t0 = std::chrono::steady_clock::now();
    SplitMix64 rng(derive_seed(scenario.base_seed, static_cast<std::uint64_t>(replication_index)));

    ReplicationMetrics m;
    m.errors_flat = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(scenario.g) * scenario.p);
    try {
        const GroupedDesign design = gen_design(scenario.n, scenario.g, scenario.p, 0.6, rng);
        const Eigen::VectorXd eps = gen_errors(scenario.error_law, scenario.n, scenario.tau, rng);
        const Eigen::VectorXd y = design.values * scenario.true_beta.flat + eps;

        const GroupedCoefficients pilot = fit_pilot(design, y, scenario.tau);
        TuningGrid grid;
        if (scenario.grid) {
            grid = *scenario.grid;
        } else {
            grid = default_grid(scenario.n, scenario.g, scenario.p, robust_sigma(y));
        }
        if (scenario.sn_override) grid.Sn = *scenario.sn_override;
        const FitResult fit = grid_search(design, y, scenario.tau, grid, pilot).best;

        std::vector<bool> hat_active(scenario.g, false);
        for (int j : fit.active_set) hat_active[j] = true;
        bool exact = true;
        for (int j = 0; j < scenario.g; ++j) {
            const bool truly = scenario.true_beta.group_norm(j) > 0.0;
            if (truly && hat_active[j]) ++m.correct_nonzero;
            if (!truly && !hat_active[j]) ++m.correct_zero;
            if (truly != hat_active[j]) exact = false;
        }
        m.exact_recovery = exact;
        m.errors_flat = scenario.true_beta.flat - fit.coefficients.flat;
        m.l2_error = m.errors_flat.norm();
        m.mean_abs_prediction_error =
            (y - design.values * fit.coefficients.flat).cwiseAbs().mean();
    } catch (const std::exception&) {
        m.solver_failed = true;
    }
    m.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return m;
}

namespace {
double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}
}  // namespace

SimulationSummary aggregate(const SimulationScenario& scenario,
                            const std::vector<ReplicationMetrics>& metrics) {
    if (metrics.empty()) throw std::invalid_argument("aggregate: empty metrics list");
    SimulationSummary s;
    std::vector<double> cnz, cz, l2s;
    std::vector<double> pooled;
    double mape_sum = 0.0, rt_sum = 0.0;
    int exact = 0;
    for (const auto& m : metrics) {
        cnz.push_back(m.correct_nonzero);
        cz.push_back(m.correct_zero);
        l2s.push_back(m.l2_error);
        for (Eigen::Index k = 0; k < m.errors_flat.size(); ++k) pooled.push_back(m.errors_flat[k]);
        mape_sum += m.mean_abs_prediction_error;
        rt_sum += m.runtime_seconds;
        if (m.exact_recovery) ++exact;
    }
    s.median_correct_nonzero = median_of(cnz);
    s.mean_correct_nonzero =
        std::accumulate(cnz.begin(), cnz.end(), 0.0) / static_cast<double>(cnz.size());
    s.median_correct_zero = median_of(cz);
    s.mean_correct_zero =
        std::accumulate(cz.begin(), cz.end(), 0.0) / static_cast<double>(cz.size());
    double pm = std::accumulate(pooled.begin(), pooled.end(), 0.0) / pooled.size();
    double ss = 0.0;
    for (double v : pooled) ss += (v - pm) * (v - pm);
    s.pooled_sd_errors = pooled.size() > 1 ? std::sqrt(ss / (pooled.size() - 1)) : 0.0;
    s.mean_abs_prediction_error = mape_sum / metrics.size();
    s.mean_runtime_seconds = rt_sum / metrics.size();
    s.exact_recovery_fraction = static_cast<double>(exact) / metrics.size();
    s.median_l2_error = median_of(l2s);

    // Per-component medians of the fitted values over the true signal groups.
    for (int j = 0; j < scenario.g; ++j) {
        if (!(scenario.true_beta.group_norm(j) > 0.0)) continue;
        for (int k = 0; k < scenario.p; ++k) {
            std::vector<double> vals;
            vals.reserve(metrics.size());
            const Eigen::Index idx = static_cast<Eigen::Index>(j) * scenario.p + k;
            for (const auto& m : metrics)
                vals.push_back(scenario.true_beta.flat[idx] - m.errors_flat[idx]);
            s.median_beta_active.push_back(median_of(vals));
        }
    }
    return s;
}

std::vector<ReplicationMetrics> run_campaign_serial(const SimulationScenario& scenario) {
    scenario.validate();
    std::vector<ReplicationMetrics> out(scenario.replications);
    for (int i = 0; i < scenario.replications; ++i) out[i] = run_replication(scenario, i);
    return out;
}

std::vector<ReplicationMetrics> run_campaign_parallel(const SimulationScenario& scenario,
                                                      int jobs) {
    scenario.validate();
    std::vector<ReplicationMetrics> out(scenario.replications);
#if defined(_OPENMP)
    if (jobs <= 0) jobs = omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
    for (int i = 0; i < scenario.replications; ++i) out[i] = run_replication(scenario, i);
#else
    (void)jobs;
    for (int i = 0; i < scenario.replications; ++i) out[i] = run_replication(scenario, i);
#endif
    return out;
}

GroupedCoefficients beta_preset(const std::string& name, int g) {
    int p = 0;
    std::vector<std::vector<double>> signal;
    if (name == "p1") {
        p = 1;
        signal = {{0.5}, {1.0}, {-1.0}, {-1.5}};
    } else if (name == "p2") {
        p = 2;
        signal = {{0.5, 1.0}, {1.0, 1.0}, {-1.0, 0.0}, {-1.5, 1.0}};
    } else if (name == "p5") {
        p = 5;
        signal = {{0.5, 1.0, 1.5, 1.0, 0.5},
                  {1.0, 1.0, 1.0, 1.0, 1.0},
                  {-1.0, 0.0, 1.0, 2.0, 1.5},
                  {-1.5, 1.0, 0.5, 0.5, 0.5}};
    } else {
        throw std::invalid_argument("beta_preset: unknown preset '" + name + "'");
    }
    if (g < static_cast<int>(signal.size()))
        throw std::invalid_argument("beta_preset: need g >= 4");
    GroupedCoefficients beta(g, p);
    for (std::size_t j = 0; j < signal.size(); ++j)
        for (int k = 0; k < p; ++k) beta.flat[static_cast<Eigen::Index>(j) * p + k] = signal[j][k];
    return beta;
}

}  // namespace gqnet
