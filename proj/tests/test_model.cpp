#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "gqnet/model.hpp"

using namespace gqnet;

namespace {

GroupedDesign ones_design(int n, int g, int p) {
    return GroupedDesign::create(n, g, p, Eigen::MatrixXd::Ones(n, g * p));
}

GroupedCoefficients coeffs(int g, int p, std::initializer_list<double> vals) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(g) * p);
    int i = 0;
    for (double x : vals) v[i++] = x;
    return GroupedCoefficients::from_flat(g, p, v);
}

}  // namespace

TEST_CASE("check_loss formula") {
    CHECK(check_loss(1.0, 0.5) == doctest::Approx(0.5));
    CHECK(check_loss(0.0, 0.3) == 0.0);
    CHECK(check_loss(-2.0, 0.25) == doctest::Approx(1.5));
    CHECK(check_loss(3.0, 0.9) == doctest::Approx(2.7));
}

TEST_CASE("check_loss convexity on random triples") {
    std::mt19937 gen(42);
    std::uniform_real_distribution<double> u(-10.0, 10.0), t01(0.0, 1.0);
    for (int it = 0; it < 2000; ++it) {
        const double a = u(gen), b = u(gen), t = t01(gen);
        const double tau = 0.05 + 0.9 * t01(gen);
        CHECK(check_loss(t * a + (1 - t) * b, tau) <=
              t * check_loss(a, tau) + (1 - t) * check_loss(b, tau) + 1e-12);
    }
}

TEST_CASE("objective_quantile small cases") {
    auto d = ones_design(2, 1, 1);
    Eigen::VectorXd y(2);
    y << 1.0, -1.0;
    CHECK(objective_quantile(d, y, coeffs(1, 1, {0.0}), 0.5) == doctest::Approx(1.0));

    // exact fit -> zero
    auto d3 = ones_design(3, 1, 1);
    Eigen::VectorXd y3(3);
    y3 << 2.0, 2.0, 2.0;
    CHECK(objective_quantile(d3, y3, coeffs(1, 1, {2.0}), 0.3) == doctest::Approx(0.0));

    // hand sum rho(-1)+rho(0)+rho(1) at tau=0.5
    Eigen::VectorXd yh(3);
    yh << 0.0, 1.0, 2.0;
    CHECK(objective_quantile(d3, yh, coeffs(1, 1, {1.0}), 0.5) == doctest::Approx(1.0));
}

TEST_CASE("objective_quantile rejects shape mismatch") {
    auto d = ones_design(3, 1, 1);
    Eigen::VectorXd y(2);
    y << 1.0, 2.0;
    CHECK_THROWS_AS(objective_quantile(d, y, coeffs(1, 1, {0.0}), 0.5), std::invalid_argument);
}

TEST_CASE("objective_quantile invariant under joint row permutation") {
    std::mt19937 gen(7);
    std::normal_distribution<double> norm;
    const int n = 11, g = 2, p = 2;
    Eigen::MatrixXd X(n, g * p);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        y[i] = norm(gen);
        for (int k = 0; k < g * p; ++k) X(i, k) = norm(gen);
    }
    Eigen::VectorXd b(g * p);
    for (int k = 0; k < g * p; ++k) b[k] = norm(gen);
    auto beta = GroupedCoefficients::from_flat(g, p, b);

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen);
    Eigen::MatrixXd Xp(n, g * p);
    Eigen::VectorXd yp(n);
    for (int i = 0; i < n; ++i) {
        Xp.row(i) = X.row(perm[i]);
        yp[i] = y[perm[i]];
    }
    const auto d1 = GroupedDesign::create(n, g, p, X);
    const auto d2 = GroupedDesign::create(n, g, p, Xp);
    CHECK(objective_quantile(d1, y, beta, 0.3) ==
          doctest::Approx(objective_quantile(d2, yp, beta, 0.3)).epsilon(1e-14));
}

TEST_CASE("objective_penalized") {
    // g=1, p=1, beta=2, omega=1, l1=l2=1, G_n(beta)=3: X=(1,1,1), y=(5,3,1) at beta=2
    // residuals (3,1,-1), tau=0.5 -> 1.5+0.5+0.5 = 2.5.  Use y giving G_n=3:
    // y=(6,3,1) -> residuals (4,1,-1) -> 2+0.5+0.5=3.
    auto d = ones_design(3, 1, 1);
    Eigen::VectorXd y(3);
    y << 6.0, 3.0, 1.0;
    PenaltyConfig cfg;
    cfg.tau = 0.5;
    cfg.lambda1 = 1.0;
    cfg.lambda2 = 1.0;
    cfg.weights = Eigen::VectorXd::Ones(1);
    auto beta = coeffs(1, 1, {2.0});
    CHECK(objective_quantile(d, y, beta, 0.5) == doctest::Approx(3.0));
    CHECK(objective_penalized(d, y, beta, cfg) == doctest::Approx(9.0));

    SUBCASE("reduces to quantile objective when lambdas vanish") {
        cfg.lambda1 = 0.0;
        cfg.lambda2 = 0.0;
        CHECK(objective_penalized(d, y, beta, cfg) ==
              doctest::Approx(objective_quantile(d, y, beta, 0.5)));
    }
    SUBCASE("zero beta: penalty vanishes") {
        auto z = coeffs(1, 1, {0.0});
        CHECK(objective_penalized(d, y, z, cfg) == doctest::Approx(objective_quantile(d, y, z, 0.5)));
    }
    SUBCASE("infinite weight with nonzero group -> +inf sentinel") {
        cfg.weights[0] = kInf;
        CHECK(std::isinf(objective_penalized(d, y, beta, cfg)));
        CHECK(objective_penalized(d, y, coeffs(1, 1, {0.0}), cfg) ==
              doctest::Approx(objective_quantile(d, y, coeffs(1, 1, {0.0}), 0.5)));
    }
}

TEST_CASE("objective_penalized monotone in lambda1 and lambda2") {
    std::mt19937 gen(11);
    std::normal_distribution<double> norm;
    const int n = 8, g = 3, p = 2;
    Eigen::MatrixXd X(n, g * p);
    Eigen::VectorXd y(n), b(g * p);
    for (int i = 0; i < n; ++i) {
        y[i] = norm(gen);
        for (int k = 0; k < g * p; ++k) X(i, k) = norm(gen);
    }
    for (int k = 0; k < g * p; ++k) b[k] = norm(gen);
    auto d = GroupedDesign::create(n, g, p, X);
    auto beta = GroupedCoefficients::from_flat(g, p, b);
    PenaltyConfig cfg;
    cfg.tau = 0.4;
    cfg.weights = Eigen::VectorXd::Constant(g, 0.7);
    double prev = -1.0;
    for (double l : {0.0, 0.5, 1.0, 3.0, 10.0}) {
        cfg.lambda1 = l;
        cfg.lambda2 = l;
        const double v = objective_penalized(d, y, beta, cfg);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("active_set") {
    CHECK(active_set(coeffs(2, 2, {0, 0, 0, 0}), 0.0).empty());
    CHECK(active_set(coeffs(2, 2, {0, 0, 1, 0}), 0.0) == std::vector<int>{1});
    CHECK(active_set(coeffs(2, 2, {1e-12, 0, 1, 0}), 1e-10) == std::vector<int>{1});

    SUBCASE("partition of group indexes") {
        auto beta = coeffs(3, 1, {0.0, 2.0, 0.0});
        auto act = active_set(beta, 0.0);
        std::vector<bool> seen(3, false);
        for (int j : act) seen[j] = true;
        int total = static_cast<int>(act.size());
        for (int j = 0; j < 3; ++j)
            if (!seen[j]) ++total;
        CHECK(total == 3);
    }
}

TEST_CASE("knight identity holds") {
    CHECK(knight_identity_residual(1.0, 0.5, 0.5) == doctest::Approx(0.0));
    CHECK(knight_identity_residual(-1.0, 2.0, 0.3) == doctest::Approx(0.0));
    CHECK(knight_identity_residual(0.0, -1.0, 0.3) == doctest::Approx(0.0));

    std::mt19937 gen(123);
    std::uniform_real_distribution<double> u(-50.0, 50.0), t01(0.0, 1.0);
    double worst = 0.0;
    for (int it = 0; it < 1000; ++it) {
        const double tau = 0.01 + 0.98 * t01(gen);
        worst = std::max(worst, knight_identity_residual(u(gen), u(gen), tau));
    }
    CHECK(worst <= 1e-12);
}
