#pragma once

#include <utility>
#include <vector>

#include "gqnet/enet.hpp"
#include "gqnet/types.hpp"

namespace gqnet {

struct TuningGrid {
    std::vector<double> lambda1_values;  // strictly positive, sorted ascending
    std::vector<double> lambda2_values;
    double gamma = 1.225;
    double Sn = 1.0;

    void validate() const;
};

struct BicRecord {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double bic_value = 0.0;
    int active_count = 0;
    bool converged = false;
    bool zero_loss_guarded = false;  // G_n was 0 and the log was guarded
};

/// BIC-type criterion: log(G_n / n) + (log n / n) * S_n * |active set|.
double bic_score(const FitResult& fit, const GroupedDesign& design, const Eigen::VectorXd& y,
                 double tau, double Sn);

/// Complexity inflation sequence: max(1, g / log n).
double compute_Sn(int n, int g);

/// Default lambda families over log-spaced constant grids, with the gamma
/// rule max(1.225, 2c/(1-c) + 2/n) for grouped designs (c = log g / log n)
/// and the ungrouped families when p = 1.
TuningGrid default_grid(int n, int g, int p, double sigma_hint);

struct GridSearchResult {
    FitResult best;
    BicRecord best_record;
    std::vector<BicRecord> records;
};

/// Fits every (lambda1, lambda2) cell with weights from the shared pilot and
/// returns the BIC argmin plus the full record table. Ties break toward
/// larger lambda1 then larger lambda2; non-converged fits lose all ties.
GridSearchResult grid_search(const GroupedDesign& design, const Eigen::VectorXd& y, double tau,
                             const TuningGrid& grid, const GroupedCoefficients& pilot,
                             const SolverOptions& options = {});

/// Empirical quantile index: fraction of standardized responses below zero,
/// clamped to [1/n, 1 - 1/n].
double estimate_tau(const Eigen::VectorXd& y);

/// Robust response scale for the sigma hint: 1.4826 * median(|y - median(y)|)
/// (consistent for the normal sd, finite-variance-free for heavy tails).
/// Falls back to the sample sd when the MAD degenerates to zero.
double robust_sigma(const Eigen::VectorXd& y);

}  // namespace gqnet
