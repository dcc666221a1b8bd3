#pragma once

#include <vector>

#include "gqnet/types.hpp"

namespace gqnet {

/// Quantile check loss rho_tau(u) = u * (tau - 1{u<0}).
inline double check_loss(double u, double tau) {
    return u * (tau - (u < 0.0 ? 1.0 : 0.0));
}

/// Sum of check losses of the residuals y - X beta.
double objective_quantile(const GroupedDesign& design, const Eigen::VectorXd& y,
                          const GroupedCoefficients& beta, double tau);

/// Quantile objective plus the weighted group-norm and squared-norm penalties.
/// Returns +inf when a group with infinite weight is nonzero.
double objective_penalized(const GroupedDesign& design, const Eigen::VectorXd& y,
                           const GroupedCoefficients& beta, const PenaltyConfig& config);

/// Indexes j with ||beta_j||_2 > eta, sorted ascending.
std::vector<int> active_set(const GroupedCoefficients& beta, double eta);

/// Absolute defect of the check-loss decomposition identity
///   rho(x-y) - rho(x) = y(1{x<0} - tau) + int_0^y (1{x<=v} - 1{x<=0}) dv,
/// with the integral evaluated in closed form. Zero up to rounding for all inputs.
double knight_identity_residual(double x, double y, double tau);

}  // namespace gqnet
