#include "gqnet/pilot.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gqnet/model.hpp"

namespace gqnet {

namespace {

// Smoothed check loss: (tau - 1/2) u + sqrt(u^2 + delta^2) / 2, which tends
// to rho_tau(u) (plus the constant delta/2) as delta -> 0.
double smooth_value(const Eigen::VectorXd& r, double tau, double delta) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i)
        s += (tau - 0.5) * r[i] + 0.5 * std::sqrt(r[i] * r[i] + delta * delta);
    return s;
}

}  // namespace

double quantile_line_minimizer(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double tau) {
    struct Bp {
        double t;
        double jump;
    };
    std::vector<Bp> bps;
    bps.reserve(a.size());
    double deriv = 0.0;  // right derivative for t below every breakpoint
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (b[i] == 0.0) continue;
        bps.push_back({a[i] / b[i], std::abs(b[i])});
        deriv += -tau * b[i] + (b[i] < 0.0 ? b[i] : 0.0);
    }
    if (bps.empty()) return 0.0;
    std::sort(bps.begin(), bps.end(), [](const Bp& l, const Bp& r) { return l.t < r.t; });
    for (const Bp& bp : bps) {
        deriv += bp.jump;
        if (deriv >= 0.0) return bp.t;
    }
    return bps.back().t;  // unreachable for tau in (0,1); guard against rounding
}

GroupedCoefficients fit_pilot(const GroupedDesign& design, const Eigen::VectorXd& y, double tau,
                              const PilotOptions& options) {
    if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("fit_pilot: tau must lie in (0,1)");
    if (y.size() != design.n) throw std::invalid_argument("fit_pilot: y length != design.n");
    const int r = design.cols();
    const Eigen::MatrixXd& X = design.values;

    if (options.warn) {
        if (r >= design.n)
            options.warn("fit_pilot: r_n >= n, the unpenalized quantile fit may be degenerate");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X.transpose() * X / design.n);
        const double lo = es.eigenvalues().minCoeff();
        const double hi = es.eigenvalues().maxCoeff();
        if (!(lo > 0.0) || hi / lo > 1e8)
            options.warn("fit_pilot: design Gram matrix appears ill conditioned");
    }

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(r);
    bool stages_ok = true;

    // Smoothed Newton descent along the shrinking schedule.
    for (const double delta : options.smoothing_schedule) {
        bool stage_done = false;
        for (int it = 0; it < options.max_iters; ++it) {
            const Eigen::VectorXd res = y - X * beta;
            Eigen::VectorXd psi(design.n), w(design.n);
            for (int i = 0; i < design.n; ++i) {
                const double s = std::sqrt(res[i] * res[i] + delta * delta);
                psi[i] = (tau - 0.5) + 0.5 * res[i] / s;
                w[i] = 0.5 * delta * delta / (s * s * s);
            }
            const Eigen::VectorXd grad = -X.transpose() * psi;
            Eigen::MatrixXd H = X.transpose() * w.asDiagonal() * X;
            const double mu = 1e-10 * (1.0 + H.trace());
            H.diagonal().array() += mu;
            const Eigen::VectorXd step = H.ldlt().solve(-grad);

            const double f0 = smooth_value(res, tau, delta);
            double t = 1.0;
            const double slope = grad.dot(step);
            Eigen::VectorXd cand = beta + step;
            double f1 = smooth_value(y - X * cand, tau, delta);
            int backtracks = 0;
            while (f1 > f0 + 1e-4 * t * slope && backtracks < 60) {
                t *= 0.5;
                ++backtracks;
                cand = beta + t * step;
                f1 = smooth_value(y - X * cand, tau, delta);
            }
            if (f1 >= f0 && backtracks >= 60) {
                stage_done = true;  // no descent direction left at this radius
                break;
            }
            const double move = (cand - beta).norm();
            beta = cand;
            if (move <= 1e-12 * (1.0 + beta.norm()) ||
                f0 - f1 <= options.objective_tol * (1.0 + std::abs(f1))) {
                stage_done = true;
                break;
            }
        }
        if (!stage_done) stages_ok = false;
    }

    // Exact coordinate-wise polish on the true piecewise-linear objective.
    auto gn = [&](const Eigen::VectorXd& bvec) {
        const Eigen::VectorXd res = y - X * bvec;
        double s = 0.0;
        for (int i = 0; i < design.n; ++i) s += check_loss(res[i], tau);
        return s;
    };
    Eigen::VectorXd res = y - X * beta;
    double best = gn(beta);
    bool polished = false;
    for (int pass = 0; pass < 200 && !polished; ++pass) {
        polished = true;
        for (int k = 0; k < r; ++k) {
            const Eigen::VectorXd col = X.col(k);
            const Eigen::VectorXd a = res + col * beta[k];
            const double t = quantile_line_minimizer(a, col, tau);
            if (t != beta[k]) {
                res += col * (beta[k] - t);
                beta[k] = t;
                polished = false;
            }
        }
        const double cur = gn(beta);
        if (best - cur <= options.objective_tol * (1.0 + std::abs(cur)) && pass > 0) {
            best = std::min(best, cur);
            break;
        }
        best = std::min(best, cur);
    }

    // Vertex polish: for tiny r, try interpolating the r smallest residuals.
    if (r <= 6 && design.n > r) {
        res = y - X * beta;
        std::vector<int> order(design.n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](int i, int j) { return std::abs(res[i]) < std::abs(res[j]); });
        const int m = std::min<int>(design.n, 2 * r + 4);
        std::vector<int> pick(r);
        std::vector<int> comb(r);
        std::iota(comb.begin(), comb.end(), 0);
        auto next_comb = [&]() {
            int i = r - 1;
            while (i >= 0 && comb[i] == m - r + i) --i;
            if (i < 0) return false;
            ++comb[i];
            for (int j = i + 1; j < r; ++j) comb[j] = comb[j - 1] + 1;
            return true;
        };
        do {
            Eigen::MatrixXd Xs(r, r);
            Eigen::VectorXd ys(r);
            for (int i = 0; i < r; ++i) {
                Xs.row(i) = X.row(order[comb[i]]);
                ys[i] = y[order[comb[i]]];
            }
            Eigen::FullPivLU<Eigen::MatrixXd> lu(Xs);
            if (!lu.isInvertible()) continue;
            const Eigen::VectorXd cand = lu.solve(ys);
            const double f = gn(cand);
            if (f < best) {
                best = f;
                beta = cand;
            }
        } while (next_comb());
    }

    GroupedCoefficients out = GroupedCoefficients::from_flat(design.g, design.p, beta);
    if (!stages_ok && !polished)
        throw PilotError("fit_pilot: smoothing stages did not converge within max_iters",
                         out, best);
    return out;
}

Eigen::VectorXd adaptive_weights(const GroupedCoefficients& beta_pilot, double gamma, double eta) {
    if (!(gamma > 0.0)) throw std::invalid_argument("adaptive_weights: gamma must be > 0");
    Eigen::VectorXd w(beta_pilot.g);
    for (int j = 0; j < beta_pilot.g; ++j) {
        const double nj = beta_pilot.group_norm(j);
        w[j] = (nj > eta) ? std::pow(nj, -gamma) : kInf;
    }
    return w;
}

}  // namespace gqnet
