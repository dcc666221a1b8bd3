#include "gqnet/model.hpp"

#include <algorithm>
#include <cmath>

namespace gqnet {

static void check_shapes(const GroupedDesign& design, const Eigen::VectorXd& y,
                         const GroupedCoefficients& beta) {
    if (y.size() != design.n)
        throw std::invalid_argument("objective: y length != design.n");
    if (beta.flat.size() != design.cols() || beta.g != design.g || beta.p != design.p)
        throw std::invalid_argument("objective: coefficient shape != design shape");
}

double objective_quantile(const GroupedDesign& design, const Eigen::VectorXd& y,
                          const GroupedCoefficients& beta, double tau) {
    check_shapes(design, y, beta);
    const Eigen::VectorXd r = y - design.values * beta.flat;
    double s = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) s += check_loss(r[i], tau);
    return s;
}

double objective_penalized(const GroupedDesign& design, const Eigen::VectorXd& y,
                           const GroupedCoefficients& beta, const PenaltyConfig& config) {
    config.validate(design.g);
    double obj = objective_quantile(design, y, beta, config.tau);
    for (int j = 0; j < design.g; ++j) {
        const double nj = beta.group_norm(j);
        if (std::isinf(config.weights[j])) {
            if (nj > kZeroTol) return kInf;
            continue;  // 0 * inf treated as 0 for an exactly-zero group
        }
        obj += config.lambda1 * config.weights[j] * nj + config.lambda2 * nj * nj;
    }
    return obj;
}

std::vector<int> active_set(const GroupedCoefficients& beta, double eta) {
    if (eta < 0.0) throw std::invalid_argument("active_set: eta must be >= 0");
    std::vector<int> out;
    for (int j = 0; j < beta.g; ++j)
        if (beta.group_norm(j) > eta) out.push_back(j);
    return out;
}

double knight_identity_residual(double x, double y, double tau) {
    // Closed form of int_0^y (1{x<=v} - 1{x<0}) dv:
    //   x >= 0: max(0, y - x)
    //   x < 0:  max(0, x - y)   (nonzero only for y < x < 0)
    // The baseline indicator matches the 1{x<0} of the linear term so the
    // identity holds exactly at x = 0 as well.
    const double integral = (x >= 0.0) ? std::max(0.0, y - x) : std::max(0.0, x - y);
    const double lhs = check_loss(x - y, tau) - check_loss(x, tau);
    const double rhs = y * ((x < 0.0 ? 1.0 : 0.0) - tau) + integral;
    return std::abs(lhs - rhs);
}

}  // namespace gqnet
