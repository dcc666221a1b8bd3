#pragma once

#include <Eigen/Dense>
#include <limits>
#include <stdexcept>
#include <vector>

namespace gqnet {

/// Group norms at or below this cutoff count as exactly zero.
inline constexpr double kZeroTol = 1e-10;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// n x (g*p) design with g groups of p columns each, stored dense.
/// Columns [j*p, (j+1)*p) belong to group j.
struct GroupedDesign {
    int n = 0;
    int g = 0;
    int p = 0;
    Eigen::MatrixXd values;  // n x g*p

    int cols() const { return g * p; }
    int group_of(int column) const { return column / p; }

    /// Columns of group j as a block view.
    auto group_block(int j) const { return values.middleCols(j * p, p); }

    static GroupedDesign create(int n, int g, int p, Eigen::MatrixXd values) {
        if (n < 1 || g < 1 || p < 1)
            throw std::invalid_argument("GroupedDesign: n, g, p must all be >= 1");
        if (values.rows() != n || values.cols() != static_cast<Eigen::Index>(g) * p)
            throw std::invalid_argument("GroupedDesign: matrix shape does not match (n, g*p)");
        if (!values.allFinite())
            throw std::invalid_argument("GroupedDesign: non-finite entry");
        GroupedDesign d;
        d.n = n;
        d.g = g;
        d.p = p;
        d.values = std::move(values);
        return d;
    }
};

/// Length g*p coefficient vector partitioned into g groups of p.
struct GroupedCoefficients {
    int g = 0;
    int p = 0;
    Eigen::VectorXd flat;  // length g*p

    GroupedCoefficients() = default;
    GroupedCoefficients(int g_, int p_) : g(g_), p(p_), flat(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g_) * p_)) {}

    static GroupedCoefficients from_flat(int g, int p, Eigen::VectorXd v) {
        if (g < 1 || p < 1)
            throw std::invalid_argument("GroupedCoefficients: g, p must be >= 1");
        if (v.size() != static_cast<Eigen::Index>(g) * p)
            throw std::invalid_argument("GroupedCoefficients: flat length != g*p");
        if (!v.allFinite())
            throw std::invalid_argument("GroupedCoefficients: non-finite entry");
        GroupedCoefficients b;
        b.g = g;
        b.p = p;
        b.flat = std::move(v);
        return b;
    }

    auto group(int j) { return flat.segment(static_cast<Eigen::Index>(j) * p, p); }
    auto group(int j) const { return flat.segment(static_cast<Eigen::Index>(j) * p, p); }
    double group_norm(int j) const { return group(j).norm(); }
};

/// Quantile index, tuning parameters and adaptive group weights.
/// weights[j] may be +inf, which forces group j to zero downstream.
struct PenaltyConfig {
    double tau = 0.5;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double gamma = 1.225;
    Eigen::VectorXd weights;  // length g, entries in [0, +inf]

    void validate(int g) const {
        if (!(tau > 0.0 && tau < 1.0))
            throw std::invalid_argument("PenaltyConfig: tau must lie in (0,1)");
        if (lambda1 < 0.0 || lambda2 < 0.0)
            throw std::invalid_argument("PenaltyConfig: lambda1, lambda2 must be >= 0");
        if (!(gamma > 0.0))
            throw std::invalid_argument("PenaltyConfig: gamma must be > 0");
        if (weights.size() != g)
            throw std::invalid_argument("PenaltyConfig: weights length != g");
        for (Eigen::Index j = 0; j < weights.size(); ++j)
            if (std::isnan(weights[j]) || weights[j] < 0.0)
                throw std::invalid_argument("PenaltyConfig: weights must be nonnegative");
    }
};

struct FitResult {
    GroupedCoefficients coefficients;
    std::vector<int> active_set;  // sorted group indexes with nonzero fitted vectors
    int iterations = 0;
    bool converged = false;
    double objective_penalized = 0.0;  // E_n at the returned coefficients
    double objective_quantile = 0.0;   // G_n at the returned coefficients
};

}  // namespace gqnet
