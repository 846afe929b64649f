#include "doctest.h"

#include <cmath>

#include "wfsim/duals.hpp"
#include "wfsim/engine.hpp"
#include "wfsim/kernel.hpp"

using namespace wfsim;

namespace
{
FtwDualParams dual(double delta, double t0, double t1, std::vector<double> sigma)
{
    FtwDualParams p;
    p.delta = delta;
    p.theta0 = t0;
    p.theta1 = t1;
    p.sigma = std::move(sigma);
    return p;
}
}  // namespace

TEST_CASE("lambda coefficients")
{
    CHECK(lambda_coeff(1, 1, 1.0) == doctest::Approx(0.5).epsilon(1e-14));
    for (double d : {0.1, 0.5, 1.0})
        for (int n : {0, 1, 7, 30})
            CHECK(lambda_coeff(n, 0, d) == doctest::Approx((1 - std::pow(1 - d, n + 1)) / (d * (n + 1))).epsilon(1e-13));
    for (double d : {0.1, 0.5, 1.0})
        for (int n = 0; n <= 50; ++n)
        {
            double sum = 0;
            for (int k = 0; k <= n; ++k)
                sum += binomial_coeff(n, k) * lambda_coeff(n, k, d);
            REQUIRE(std::abs(sum - 1) < 1e-12);
            auto w = merger_weights(n, d);
            double ws = 0;
            for (double x : w)
                ws += x;
            REQUIRE(std::abs(ws - 1) < 1e-12);
        }
    CHECK_THROWS_AS(lambda_coeff(2, 3, 0.5), ArgumentError);
    LambdaTable t(10, 0.3);
    CHECK(t(6, 2) == doctest::Approx(lambda_coeff(6, 2, 0.3)).epsilon(1e-12));
}

TEST_CASE("neutral dual matrix")
{
    auto rows = neutral_dual_matrix(50, 1.0);
    CHECK(rows[1].probability(1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(rows[2].probability(1) == doctest::Approx(1.0 / 3).epsilon(1e-14));
    for (int m = 1; m <= 50; ++m)
    {
        REQUIRE(std::abs(rows[m].sum() - 1) < 1e-12);
        for (auto [d, p] : rows[m].entries)
        {
            REQUIRE(d <= m);
            REQUIRE(p >= 0);
        }
    }
}

TEST_CASE("neutral dual expectation")
{
    CHECK(neutral_dual_expectation(0.3, 4, 0, 0.5) == doctest::Approx(std::pow(0.3, 4)).epsilon(1e-15));
    for (int m = 1; m <= 6; ++m)
    {
        double z = 0.37, d = 0.6;
        double closed = std::pow(z, m) * (lambda_coeff(m, 0, d) + m * lambda_coeff(m, 1, d));
        for (int j = 2; j <= m; ++j)
            closed += std::pow(z, m - j + 1) * binomial_coeff(m, j) * lambda_coeff(m, j, d);
        CHECK(neutral_dual_expectation(z, m, 1, d) == doctest::Approx(closed).epsilon(1e-13));
    }
    auto r0 = duality_check_neutral(0.5, 3, 0, 0.7, 100, 1);
    CHECK(r0.lhs == r0.rhs);
}

TEST_CASE("neutral duality by simulation")
{
    auto r = duality_check_neutral(0.5, 3, 10, 0.7, 1000000, 42);
    CHECK(std::abs(r.lhs - r.rhs) <= 3 * r.stderr_lhs);
    CHECK(r.pass);
}

TEST_CASE("FTW dual row")
{
    auto neutral = dual(0.5, 0, 0, {});
    for (int m = 1; m <= 10; ++m)
    {
        auto a = ftw_dual_row(m, neutral), b = neutral_dual_row(m, 0.5);
        for (int d = 0; d <= m; ++d)
            REQUIRE(a.probability(d) == doctest::Approx(b.probability(d)).epsilon(1e-13));
    }

    auto p = dual(0.5, 0.3, 0.2, {0.4, 0.2});
    for (int m = 1; m <= 20; ++m)
    {
        auto row = ftw_dual_row(m, p);
        REQUIRE(std::abs(row.sum() - 1) < 1e-12);
        double kill = p.delta0() * p.theta1 * (1 - lambda_coeff(m, 0, p.delta));
        REQUIRE(row.probability(cemetery) == doctest::Approx(kill).epsilon(1e-13));
        for (auto [d, q] : row.entries)
            REQUIRE(q >= 0);
    }
    CHECK_THROWS_AS((ftw_dual_row(3, dual(0.5, 0.3, 0.2, {0.2, 0.4}))), ArgumentError);
}

TEST_CASE("FTW dual row matches the forward one-step expectation")
{
    auto p = dual(0.4, 0.3, 0.2, {0.3, 0.15});
    auto fwd = p.forward();
    for (int m = 1; m <= 5; ++m)
        for (double z : {0.2, 0.5, 0.9})
        {
            // E_z[Z_1^m] by quadrature over U of the two branches
            double q = fwd.drift(z), acc = 0;
            int nodes = 4000;
            for (int i = 0; i < nodes; ++i)
            {
                double u = (i + 0.5) / nodes;
                acc += q * std::pow(z + p.delta * u * (1 - z), m) + (1 - q) * std::pow(z * (1 - p.delta * u), m);
            }
            acc /= nodes;
            CHECK(ftw_dual_row(m, p).expectation(z) == doctest::Approx(acc).epsilon(1e-7));
        }
}

TEST_CASE("FTW dual simulation")
{
    auto p = dual(0.5, 0.5, 0.5, {0.3});
    FtwDualTable table(p, ftw_dual_reach(4, 10, p));
    ReplicateStream s(1, 0);
    auto path = ftw_dual_simulate(cemetery, table, 10, s);
    for (int m : path)
        CHECK(m == cemetery);

    auto f = ftw_dual_absorption_fraction(3, p, 500, 20000, 2);
    CHECK(f.absorbed >= 1 - 1e-3);
}

TEST_CASE("FTW duality")
{
    auto p = dual(0.4, 0.3, 0.2, {0.3, 0.15});
    auto r0 = duality_check_ftw(0.4, 2, 0, p, 100, 1);
    CHECK(r0.lhs == doctest::Approx(0.16));
    CHECK(r0.rhs == doctest::Approx(0.16));

    auto r1 = duality_check_ftw(0.4, 2, 1, p, 200000, 3);
    CHECK(std::abs(r1.lhs - ftw_dual_row(2, p).expectation(0.4)) <= 3 * r1.stderr_lhs);

    auto r = duality_check_ftw(0.4, 2, 8, p, 200000, 4);
    CHECK(r.pass);
}

TEST_CASE("comparison couplings")
{
    auto mutated = dual(0.5, 0.4, 0.3, {0.3});
    auto free = dual(0.5, 0, 0, {0.3});
    auto c = ftw_dual_comparison(3, mutated, free, 100, 10000, 5);
    CHECK(c.violations == 0);
    CHECK(c.killed > 0);

    auto weak = dual(0.5, 0.2, 0.1, {0.2, 0.1});
    auto strong = dual(0.5, 0.2, 0.1, {0.4, 0.3});
    CHECK(ftw_dual_comparison(2, weak, strong, 50, 10000, 6).violations == 0);
    CHECK_THROWS_AS(check_comparable(strong, weak), ArgumentError);
}

TEST_CASE("absorption probabilities")
{
    CHECK(absorption_prob_exact(0, 0.1, 0.8, 0.6) == 1.0);
    CHECK(std::abs(absorption_prob_exact(1, 0.05, 0.8, 0.6) - 0.5714) < 1e-2);
    for (double d : {0.1, 0.05, 0.025})
        CHECK(absorption_prob_exact(1, d, 0.8, 0.6) == doctest::Approx(0.8 / 1.4).epsilon(1e-12));
    auto h = absorption_table(4, 0.025, 0.8, 0.6);
    for (int m = 2; m <= 4; ++m)
        CHECK(std::abs(h[m] / h[m - 1] - (m - 1 + 1.6) / (m - 1 + 2.8)) < 1e-2);
}
