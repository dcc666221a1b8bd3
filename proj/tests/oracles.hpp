// Test-only oracles, independent of the library solver paths:
//  - exhaustive vertex (breakpoint) minimization of the unpenalized quantile
//    objective, for r <= 3-ish column counts;
//  - refining-grid minimization of the penalized objective (valid because the
//    objective is convex).
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "gqnet/model.hpp"
#include "gqnet/types.hpp"

namespace oracles {

inline double quantile_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& beta, double tau) {
    const Eigen::VectorXd r = y - X * beta;
    double s = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) s += gqnet::check_loss(r[i], tau);
    return s;
}

// Minimal quantile objective over all vertex solutions defined by r
// zero-residual observation subsets. Returns the best objective value found.
inline double breakpoint_pilot_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                         double tau, Eigen::VectorXd* argmin = nullptr) {
    const int n = static_cast<int>(X.rows());
    const int r = static_cast<int>(X.cols());
    double best = quantile_objective(X, y, Eigen::VectorXd::Zero(r), tau);
    if (argmin) *argmin = Eigen::VectorXd::Zero(r);

    std::vector<int> comb(r);
    for (int i = 0; i < r; ++i) comb[i] = i;
    auto next_comb = [&]() {
        int i = r - 1;
        while (i >= 0 && comb[i] == n - r + i) --i;
        if (i < 0) return false;
        ++comb[i];
        for (int j = i + 1; j < r; ++j) comb[j] = comb[j - 1] + 1;
        return true;
    };
    do {
        Eigen::MatrixXd Xs(r, r);
        Eigen::VectorXd ys(r);
        for (int i = 0; i < r; ++i) {
            Xs.row(i) = X.row(comb[i]);
            ys[i] = y[comb[i]];
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(Xs);
        if (!lu.isInvertible()) continue;
        const Eigen::VectorXd cand = lu.solve(ys);
        const double f = quantile_objective(X, y, cand, tau);
        if (f < best) {
            best = f;
            if (argmin) *argmin = cand;
        }
    } while (next_comb());
    return best;
}

inline double penalized_objective(const gqnet::GroupedDesign& design, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& beta_flat,
                                  const gqnet::PenaltyConfig& cfg) {
    return gqnet::objective_penalized(
        design, y, gqnet::GroupedCoefficients::from_flat(design.g, design.p, beta_flat), cfg);
}

// Coarse-to-fine grid minimization of the (convex) penalized objective down
// to the given final step. Box starts around the supplied candidates.
inline double grid_min_penalized(const gqnet::GroupedDesign& design, const Eigen::VectorXd& y,
                                 const gqnet::PenaltyConfig& cfg,
                                 const std::vector<Eigen::VectorXd>& candidates,
                                 double final_step, Eigen::VectorXd* argmin = nullptr) {
    const int r = design.cols();
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(r, -1.0);
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(r, 1.0);
    for (const auto& c : candidates) {
        lo = lo.cwiseMin(c.array().min(0.0).matrix() - Eigen::VectorXd::Constant(r, 1.0));
        hi = hi.cwiseMax(c.array().max(0.0).matrix() + Eigen::VectorXd::Constant(r, 1.0));
    }

    const int pts = 13;
    Eigen::VectorXd center = 0.5 * (lo + hi);
    Eigen::VectorXd half = 0.5 * (hi - lo);
    Eigen::VectorXd best_pt = center;
    double best_val = std::numeric_limits<double>::infinity();

    while (true) {
        const Eigen::VectorXd step = 2.0 * half / (pts - 1);
        std::vector<int> idx(r, 0);
        Eigen::VectorXd pt(r);
        bool done = false;
        while (!done) {
            for (int d = 0; d < r; ++d) pt[d] = center[d] - half[d] + idx[d] * step[d];
            const double v = penalized_objective(design, y, pt, cfg);
            if (v < best_val) {
                best_val = v;
                best_pt = pt;
            }
            int d = 0;
            while (d < r && ++idx[d] == pts) {
                idx[d] = 0;
                ++d;
            }
            done = (d == r);
        }
        if (step.maxCoeff() <= final_step) break;
        center = best_pt;
        half = 2.0 * step;  // keep the refined box safely around the current argmin
    }
    if (argmin) *argmin = best_pt;
    return best_val;
}

}  // namespace oracles
