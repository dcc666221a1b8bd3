#include "gqnet/enet.hpp"

#include <algorithm>
#include <cmath>

#include "gqnet/model.hpp"

namespace gqnet {

namespace {

Eigen::VectorXd indicator_below(const Eigen::VectorXd& y, const Eigen::VectorXd& pred) {
    Eigen::VectorXd ind(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) ind[i] = (y[i] < pred[i]) ? 1.0 : 0.0;
    return ind;
}

}  // namespace

Eigen::VectorXd group_score(const GroupedDesign& design, const Eigen::VectorXd& y,
                            const GroupedCoefficients& beta, int j, double tau) {
    if (y.size() != design.n) throw std::invalid_argument("group_score: y length != design.n");
    if (beta.g != design.g || beta.p != design.p)
        throw std::invalid_argument("group_score: coefficient shape != design shape");
    if (j < 0 || j >= design.g) throw std::invalid_argument("group_score: group index out of range");
    const Eigen::VectorXd pred =
        design.values * beta.flat - design.group_block(j) * beta.group(j);
    const Eigen::VectorXd ind = indicator_below(y, pred);
    return design.group_block(j).transpose() *
           (Eigen::VectorXd::Constant(design.n, tau) - ind);
}

Eigen::VectorXd group_update(const Eigen::VectorXd& score, double lambda1, double lambda2,
                             double weight_j) {
    const Eigen::Index p = score.size();
    if (std::isinf(weight_j)) return Eigen::VectorXd::Zero(p);
    const double thr = lambda1 * weight_j;
    if ((score.cwiseAbs().array() < thr).all()) return Eigen::VectorXd::Zero(p);
    const double snorm = score.norm();
    if (snorm <= thr) return Eigen::VectorXd::Zero(p);  // exact-equality boundary
    if (lambda2 <= 0.0)
        throw std::invalid_argument(
            "group_update: lambda2 = 0 is outside the closed-form update's domain; "
            "use a small positive lambda2 instead");
    return score * ((snorm - thr) / (2.0 * lambda2 * snorm));
}

FitResult fit_enet(const GroupedDesign& design, const Eigen::VectorXd& y,
                   const PenaltyConfig& config, const GroupedCoefficients& beta_init,
                   const SolverOptions& options) {
    options.validate();
    config.validate(design.g);
    if (!(config.lambda2 > 0.0))
        throw std::invalid_argument(
            "fit_enet: lambda2 must be > 0 (the block update divides by 2*lambda2)");
    if (beta_init.g != design.g || beta_init.p != design.p)
        throw std::invalid_argument("fit_enet: beta_init shape != design shape");
    if (y.size() != design.n) throw std::invalid_argument("fit_enet: y length != design.n");

    const int g = design.g;
    const int p = design.p;
    const Eigen::VectorXd tau_vec = Eigen::VectorXd::Constant(design.n, config.tau);

    Eigen::VectorXd beta = beta_init.flat;
    Eigen::VectorXd beta_prev2;  // iterate from two sweeps back, for the cycle guard
    int cycle_hits = 0;
    bool converged = false;
    int iterations = 0;

    auto make_result = [&](const Eigen::VectorXd& b, bool conv, int iters) {
        FitResult fr;
        fr.coefficients = GroupedCoefficients::from_flat(g, p, b);
        fr.active_set = active_set(fr.coefficients, kZeroTol);
        fr.iterations = iters;
        fr.converged = conv;
        fr.objective_quantile = objective_quantile(design, y, fr.coefficients, config.tau);
        fr.objective_penalized = objective_penalized(design, y, fr.coefficients, config);
        return fr;
    };

    for (int k = 1; k <= options.max_iters; ++k) {
        const Eigen::VectorXd beta_old = beta;
        if (options.sweep_mode == SweepMode::jacobi) {
            const Eigen::VectorXd full_pred = design.values * beta_old;
            Eigen::VectorXd beta_new(g * p);
#pragma omp parallel for if (g >= 32) schedule(static)
            for (int j = 0; j < g; ++j) {
                const Eigen::VectorXd pred =
                    full_pred - design.group_block(j) * beta_old.segment(j * p, p);
                const Eigen::VectorXd score =
                    design.group_block(j).transpose() * (tau_vec - indicator_below(y, pred));
                beta_new.segment(j * p, p) =
                    group_update(score, config.lambda1, config.lambda2, config.weights[j]);
            }
            beta = beta_new;
        } else {
            Eigen::VectorXd full_pred = design.values * beta;
            for (int j = 0; j < g; ++j) {
                const Eigen::VectorXd pred =
                    full_pred - design.group_block(j) * beta.segment(j * p, p);
                const Eigen::VectorXd score =
                    design.group_block(j).transpose() * (tau_vec - indicator_below(y, pred));
                const Eigen::VectorXd upd =
                    group_update(score, config.lambda1, config.lambda2, config.weights[j]);
                full_pred += design.group_block(j) * (upd - beta.segment(j * p, p));
                beta.segment(j * p, p) = upd;
            }
        }
        iterations = k;
        const double diff = (beta - beta_old).norm();
        if (diff < options.epsilon) {
            converged = true;
            break;
        }
        // 2-cycle guard: beta oscillating between two points sweep over sweep.
        if (beta_prev2.size() == beta.size() && (beta - beta_prev2).norm() < options.epsilon) {
            if (++cycle_hits >= 10) {
                const auto fit_a = make_result(beta, false, k);
                const auto fit_b = make_result(beta_old, false, k);
                return (fit_a.objective_penalized <= fit_b.objective_penalized) ? fit_a : fit_b;
            }
        } else {
            cycle_hits = 0;
        }
        beta_prev2 = beta_old;
    }

    return make_result(beta, converged, iterations);
}

KktReport kkt_check(const GroupedDesign& design, const Eigen::VectorXd& y, const FitResult& fit,
                    const PenaltyConfig& config, double tol) {
    config.validate(design.g);
    const GroupedCoefficients& beta = fit.coefficients;
    if (beta.g != design.g || beta.p != design.p)
        throw std::invalid_argument("kkt_check: fit shape != design shape");

    const double scale = design.n * std::max(design.values.cwiseAbs().maxCoeff(), 1e-300);
    const Eigen::VectorXd pred = design.values * beta.flat;
    const Eigen::VectorXd ind = indicator_below(y, pred);
    const Eigen::VectorXd tau_vec = Eigen::VectorXd::Constant(design.n, config.tau);

    const std::vector<int> act = active_set(beta, kZeroTol);
    std::vector<bool> is_active(design.g, false);
    for (int j : act) is_active[j] = true;

    KktReport report;
    report.tolerance = tol;
    bool pass = true;
    for (int j = 0; j < design.g; ++j) {
        const Eigen::VectorXd v = design.group_block(j).transpose() * (tau_vec - ind) -
                                  2.0 * config.lambda2 * beta.group(j);
        if (is_active[j]) {
            Eigen::VectorXd resid;
            if (std::isinf(config.weights[j])) {
                resid = Eigen::VectorXd::Constant(design.p, kInf);  // inf-weight group must be zero
            } else {
                resid = (v - config.lambda1 * config.weights[j] * beta.group(j) /
                                 beta.group_norm(j)) /
                        scale;
            }
            const double ma = resid.cwiseAbs().maxCoeff();
            pass = pass && (ma <= tol);
            report.active.push_back({j, std::move(resid), ma});
        } else {
            Eigen::VectorXd slack(design.p);
            if (std::isinf(config.weights[j])) {
                slack.setConstant(kInf);  // a forced-zero group is unconditionally feasible
            } else {
                for (int k = 0; k < design.p; ++k)
                    slack[k] = (config.lambda1 * config.weights[j] - std::abs(v[k])) / scale;
            }
            const double ms = slack.minCoeff();
            pass = pass && (ms >= -tol);
            report.inactive.push_back({j, std::move(slack), ms});
        }
    }
    report.pass = pass;
    return report;
}

}  // namespace gqnet
