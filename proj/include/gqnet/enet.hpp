#pragma once

#include <vector>

#include "gqnet/types.hpp"

namespace gqnet {

enum class SweepMode { jacobi, gauss_seidel };

struct SolverOptions {
    double epsilon = 1e-6;  // threshold on the full coefficient change per sweep
    int max_iters = 10000;
    SweepMode sweep_mode = SweepMode::jacobi;

    void validate() const {
        if (!(epsilon > 0.0)) throw std::invalid_argument("SolverOptions: epsilon must be > 0");
        if (max_iters < 1) throw std::invalid_argument("SolverOptions: max_iters must be >= 1");
    }
};

struct KktReport {
    struct ActiveEntry {
        int group;
        Eigen::VectorXd residual;  // stationarity defect, scaled by n*max|X|
        double max_abs;
    };
    struct InactiveEntry {
        int group;
        Eigen::VectorXd slack;  // lambda1*omega_j - |score component|, scaled
        double min_slack;
    };
    std::vector<ActiveEntry> active;
    std::vector<InactiveEntry> inactive;
    double tolerance = 0.0;
    bool pass = false;
};

/// Score of group j with group j removed from the linear predictor:
///   S_j = sum_i X_{i,j} (tau - 1{Y_i < X_{i,-j}^t beta_{-j}}).
Eigen::VectorXd group_score(const GroupedDesign& design, const Eigen::VectorXd& y,
                            const GroupedCoefficients& beta, int j, double tau);

/// Closed-form block update from the stationarity system. Zero when every
/// score component is below lambda1*weight (or the weight is infinite),
/// otherwise score / (2*lambda2 + 2*lambda1*lambda2*weight / (||score|| - lambda1*weight)).
Eigen::VectorXd group_update(const Eigen::VectorXd& score, double lambda1, double lambda2,
                             double weight_j);

/// Block-iterated solver: repeats group_score/group_update sweeps until the
/// coefficient change drops below epsilon. Non-convergence is reported in the
/// result, not thrown.
FitResult fit_enet(const GroupedDesign& design, const Eigen::VectorXd& y,
                   const PenaltyConfig& config, const GroupedCoefficients& beta_init,
                   const SolverOptions& options = {});

/// First-order certificate on a fit: stationarity residuals for active groups
/// and subgradient slacks for inactive ones, scaled by n*max|X|.
KktReport kkt_check(const GroupedDesign& design, const Eigen::VectorXd& y, const FitResult& fit,
                    const PenaltyConfig& config, double tol);

}  // namespace gqnet
