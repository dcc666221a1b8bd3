#include "gqnet/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gqnet/model.hpp"
#include "gqnet/pilot.hpp"

namespace gqnet {

namespace {
const std::vector<double> kConstantGrid = {0.01, 0.05, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0};
}

void TuningGrid::validate() const {
    auto check = [](const std::vector<double>& v, const char* name) {
        if (v.empty()) throw std::invalid_argument(std::string("TuningGrid: empty ") + name);
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!(v[i] > 0.0))
                throw std::invalid_argument(std::string("TuningGrid: nonpositive ") + name);
            if (i > 0 && v[i] <= v[i - 1])
                throw std::invalid_argument(std::string("TuningGrid: ") + name +
                                            " not strictly ascending");
        }
    };
    check(lambda1_values, "lambda1_values");
    check(lambda2_values, "lambda2_values");
    if (!(gamma > 0.0)) throw std::invalid_argument("TuningGrid: gamma must be > 0");
    if (!(Sn > 0.0)) throw std::invalid_argument("TuningGrid: Sn must be > 0");
}

double bic_score(const FitResult& fit, const GroupedDesign& design, const Eigen::VectorXd& y,
                 double tau, double Sn) {
    if (design.n < 2) throw std::invalid_argument("bic_score: n must be >= 2");
    double gn = objective_quantile(design, y, fit.coefficients, tau);
    if (gn <= 0.0) gn = std::numeric_limits<double>::epsilon() * design.n;  // guarded log
    return std::log(gn / design.n) +
           (std::log(static_cast<double>(design.n)) / design.n) * Sn *
               static_cast<double>(fit.active_set.size());
}

double compute_Sn(int n, int g) {
    if (n < 2 || g < 1) throw std::invalid_argument("compute_Sn: need n >= 2, g >= 1");
    return std::max(1.0, static_cast<double>(g) / std::log(static_cast<double>(n)));
}

TuningGrid default_grid(int n, int g, int p, double sigma_hint) {
    if (g >= n) throw std::invalid_argument("default_grid: requires g < n (c = log g / log n < 1)");
    if (n < 2 || g < 1 || p < 1) throw std::invalid_argument("default_grid: bad dimensions");

    TuningGrid grid;
    grid.Sn = compute_Sn(n, g);
    const double nd = static_cast<double>(n);
    const double c = std::log(static_cast<double>(g)) / std::log(nd);

    if (p == 1) {
        // Ungrouped families: gamma fixed, a single lambda1 value and a
        // constant grid on lambda2.
        grid.gamma = 1.225;
        grid.lambda1_values = {std::pow(nd, 1.0 - grid.gamma / 2.0 + 1.0 / nd)};
        for (double c1 : kConstantGrid) grid.lambda2_values.push_back(c1 * std::pow(nd, 0.4));
        return grid;
    }

    grid.gamma = std::max(1.225, 2.0 * c / (1.0 - c) + 2.0 / nd);
    if (g == 1) {
        // c = 0 zeroes the grouped lambda families; fall back to the
        // ungrouped-style families scaled by the constant grids.
        for (double c2 : kConstantGrid)
            grid.lambda1_values.push_back(c2 * std::pow(nd, 1.0 - grid.gamma / 2.0 + 1.0 / nd));
        for (double c3 : kConstantGrid) grid.lambda2_values.push_back(c3 * std::pow(nd, 0.4));
        return grid;
    }

    const double base = c * (sigma_hint + c);
    const double expo1 = ((1.0 - c) / 2.0 + 1.0 - (1.0 - c) * (1.0 + grid.gamma) / 2.0) / 2.0;
    const double l1_family = base * g * std::pow(nd, expo1);
    const double l2_family = base * std::pow(nd, 0.5 - c / 2.0 - 1.0 / nd);
    for (double c2 : kConstantGrid) grid.lambda1_values.push_back(c2 * l1_family);
    for (double c3 : kConstantGrid) grid.lambda2_values.push_back(c3 * l2_family);
    return grid;
}

GridSearchResult grid_search(const GroupedDesign& design, const Eigen::VectorXd& y, double tau,
                             const TuningGrid& grid, const GroupedCoefficients& pilot,
                             const SolverOptions& options) {
    grid.validate();
    const Eigen::VectorXd weights = adaptive_weights(pilot, grid.gamma);
    const std::size_t n1 = grid.lambda1_values.size();
    const std::size_t n2 = grid.lambda2_values.size();
    const std::size_t cells = n1 * n2;

    std::vector<BicRecord> records(cells);
    std::vector<FitResult> fits(cells);

#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t idx = 0; idx < static_cast<std::ptrdiff_t>(cells); ++idx) {
        const double l1 = grid.lambda1_values[idx / n2];
        const double l2 = grid.lambda2_values[idx % n2];
        BicRecord rec;
        rec.lambda1 = l1;
        rec.lambda2 = l2;
        try {
            PenaltyConfig cfg;
            cfg.tau = tau;
            cfg.lambda1 = l1;
            cfg.lambda2 = l2;
            cfg.gamma = grid.gamma;
            cfg.weights = weights;
            fits[idx] = fit_enet(design, y, cfg, pilot, options);
            rec.converged = fits[idx].converged;
            rec.active_count = static_cast<int>(fits[idx].active_set.size());
            rec.zero_loss_guarded = fits[idx].objective_quantile <= 0.0;
            rec.bic_value = bic_score(fits[idx], design, y, tau, grid.Sn);
        } catch (const std::exception&) {
            rec.converged = false;
            rec.bic_value = kInf;
        }
        records[idx] = rec;
    }

    // Value-based winner selection: smallest BIC; among ties, converged fits
    // first, then larger lambda1, then larger lambda2.
    std::size_t best = cells;
    for (std::size_t idx = 0; idx < cells; ++idx) {
        if (std::isinf(records[idx].bic_value) && !records[idx].converged &&
            fits[idx].coefficients.flat.size() == 0)
            continue;  // errored cell
        if (best == cells) {
            best = idx;
            continue;
        }
        const BicRecord& a = records[idx];
        const BicRecord& b = records[best];
        bool better = false;
        if (a.bic_value < b.bic_value) {
            better = true;
        } else if (a.bic_value == b.bic_value) {
            if (a.converged != b.converged) {
                better = a.converged;
            } else if (a.lambda1 != b.lambda1) {
                better = a.lambda1 > b.lambda1;
            } else {
                better = a.lambda2 > b.lambda2;
            }
        }
        if (better) best = idx;
    }
    if (best == cells) throw std::runtime_error("grid_search: every grid cell failed");
    return {fits[best], records[best], records};
}

double robust_sigma(const Eigen::VectorXd& y) {
    const Eigen::Index n = y.size();
    if (n < 2) throw std::invalid_argument("robust_sigma: need n >= 2");
    std::vector<double> v(y.data(), y.data() + n);
    std::nth_element(v.begin(), v.begin() + n / 2, v.end());
    const double med = v[n / 2];
    for (double& x : v) x = std::abs(x - med);
    std::nth_element(v.begin(), v.begin() + n / 2, v.end());
    const double mad = v[n / 2];
    if (mad > 0.0) return 1.4826 * mad;
    return std::sqrt((y.array() - y.mean()).square().sum() / (n - 1));
}

double estimate_tau(const Eigen::VectorXd& y) {
    const Eigen::Index n = y.size();
    if (n < 2) throw std::invalid_argument("estimate_tau: need n >= 2");
    const double mean = y.mean();
    const double sd = std::sqrt((y.array() - mean).square().sum() / (n - 1));
    if (!(sd > 0.0)) throw std::invalid_argument("estimate_tau: response has zero variance");
    int below = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        if ((y[i] - mean) / sd < 0.0) ++below;
    const double tau = static_cast<double>(below) / n;
    return std::clamp(tau, 1.0 / n, 1.0 - 1.0 / n);
}

}  // namespace gqnet
