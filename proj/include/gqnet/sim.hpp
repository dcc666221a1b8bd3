#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gqnet/rng.hpp"
#include "gqnet/tuning.hpp"
#include "gqnet/types.hpp"

namespace gqnet {

struct ErrorLaw {
    enum class Kind { normal, cauchy };
    Kind kind = Kind::normal;
    double sigma = 1.0;  // used by the normal law only
};

struct SimulationScenario {
    int n = 50;
    int g = 5;
    int p = 2;
    GroupedCoefficients true_beta;
    ErrorLaw error_law;
    double tau = 0.5;
    int replications = 1;
    std::uint64_t base_seed = 1;
    std::optional<TuningGrid> grid;     // nullopt = auto from default_grid
    std::optional<double> sn_override;  // replaces the auto grid's Sn when set

    void validate() const;
};

struct ReplicationMetrics {
    int correct_nonzero = 0;  // true-signal groups kept active
    int correct_zero = 0;     // true-noise groups shrunk to zero
    Eigen::VectorXd errors_flat;  // beta_true - beta_hat, length g*p
    double mean_abs_prediction_error = 0.0;
    double runtime_seconds = 0.0;
    bool exact_recovery = false;  // fitted active set equals the true one
    double l2_error = 0.0;        // ||beta_hat - beta_true||_2
    bool solver_failed = false;
};

struct SimulationSummary {
    double median_correct_nonzero = 0.0;
    double mean_correct_nonzero = 0.0;
    double median_correct_zero = 0.0;
    double mean_correct_zero = 0.0;
    double pooled_sd_errors = 0.0;  // one sd over all flattened error components
    double mean_abs_prediction_error = 0.0;
    double mean_runtime_seconds = 0.0;
    double exact_recovery_fraction = 0.0;
    double median_l2_error = 0.0;
    std::vector<double> median_beta_active;  // per-component medians over true signal groups
};

/// Correlated grouped design: X_{p(j-1)+k} = (Z_j + R_{p(j-1)+k}) / sqrt(2),
/// Z row-wise g-variate normal with covariance rho^{|j1-j2|}, R iid standard normal.
GroupedDesign gen_design(int n, int g, int p, double rho, SplitMix64& rng);

/// i.i.d. errors shifted by the law's tau-quantile so that P[eps < 0] = tau.
Eigen::VectorXd gen_errors(const ErrorLaw& law, int n, double tau, SplitMix64& rng);

/// One full pipeline run (design, errors, pilot, grid search), seeded from
/// (base_seed, replication_index). Pure function of its arguments.
ReplicationMetrics run_replication(const SimulationScenario& scenario, int replication_index);

SimulationSummary aggregate(const SimulationScenario& scenario,
                            const std::vector<ReplicationMetrics>& metrics);

/// Serial reference runner, kept alongside the parallel one for testing.
std::vector<ReplicationMetrics> run_campaign_serial(const SimulationScenario& scenario);

/// OpenMP runner over replications; jobs <= 0 means all available threads.
/// Produces bit-identical metrics to the serial runner for any jobs value.
std::vector<ReplicationMetrics> run_campaign_parallel(const SimulationScenario& scenario,
                                                      int jobs);

/// Shipped true-coefficient presets: "p1", "p2", "p5" (four signal groups,
/// remaining groups zero). Throws on unknown name or g < 4.
GroupedCoefficients beta_preset(const std::string& name, int g);

}  // namespace gqnet
