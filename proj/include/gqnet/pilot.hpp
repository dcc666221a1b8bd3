#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gqnet/types.hpp"

namespace gqnet {

struct PilotOptions {
    /// Strictly decreasing smoothing radii, ending below 1e-8.
    std::vector<double> smoothing_schedule = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
    double objective_tol = 1e-8;
    int max_iters = 5000;  // per smoothing stage
    /// Receives diagnostic warnings (r_n >= n, ill conditioning). Null = silent.
    std::function<void(const std::string&)> warn = nullptr;
};

/// Thrown when the pilot fails to converge; carries the best iterate reached.
class PilotError : public std::runtime_error {
  public:
    PilotError(std::string what, GroupedCoefficients best, double objective)
        : std::runtime_error(std::move(what)), best_iterate(std::move(best)), achieved_objective(objective) {}
    GroupedCoefficients best_iterate;
    double achieved_objective;
};

/// Unpenalized group quantile estimator: argmin of the check-loss sum.
/// Smoothed-objective Newton descent over the schedule, then an exact
/// coordinate-wise polish on the piecewise-linear objective.
GroupedCoefficients fit_pilot(const GroupedDesign& design, const Eigen::VectorXd& y, double tau,
                              const PilotOptions& options = {});

/// omega_j = ||beta_j||_2^{-gamma}, or +inf when the pilot group norm is <= eta.
Eigen::VectorXd adaptive_weights(const GroupedCoefficients& beta_pilot, double gamma,
                                 double eta = kZeroTol);

/// Exact minimizer over t of sum_i rho_tau(a_i - b_i * t); used by the pilot
/// polish and exposed for the breakpoint oracle tests.
double quantile_line_minimizer(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double tau);

}  // namespace gqnet
