#include "doctest.h"

#include <cmath>

#include "wfsim/engine.hpp"
#include "wfsim/kernel.hpp"
#include "wfsim/law.hpp"
#include "wfsim/stats.hpp"

using namespace wfsim;

TEST_CASE("kernel_step special cases")
{
    ReplicateStream s(1, 0);
    CHECK(kernel_step({0.0, 0.7}, 0.3, s) == 0.3);
    for (double d : {0.1, 0.5, 1.0})
        CHECK(kernel_step({d, 1.0}, 1.0, s) == 1.0);
    CHECK_THROWS_AS((KernelParams{0.0, 0.5}.validate()), ArgumentError);
    CHECK_THROWS_AS((KernelParams{0.5, 1.5}.validate()), ArgumentError);
}

TEST_CASE("kernel_step one-step mean")
{
    auto x = map_replicates<double>(1000000, 3, [](std::uint64_t, ReplicateStream& s) {
        return kernel_step({0.6, 0.4}, 0.5, s);
    });
    CHECK(std::abs(mean(x) - 0.47) <= 3 * mc_stderr(x));
}

TEST_CASE("update formulas")
{
    CHECK(update_sup(0.5, 0.5, 0.8, 0.5, 0.3) == doctest::Approx(0.6));
    CHECK(update_inf(0.2, 0.5, 0.5, 0.8, 0.5, 0.6, 0.3) == doctest::Approx(0.85));
    CHECK_THROWS_AS(update_inf(0.6, 0.5, 0.5, 0.8, 0.5, 0.6, 0.3), ArgumentError);
    // q = 0 makes the marked branch unreachable
    CHECK(update_inf(0.0, 0.0, 0.5, 0.8, 0.5, 0.99, 0.0) == doctest::Approx(0.6));
}

TEST_CASE("update_inf never exceeds update_sup")
{
    ReplicateStream s(2, 0);
    for (int i = 0; i < 100000; ++i)
    {
        double q = s.uniform(), p = q * s.uniform(), d = s.uniform();
        double y = s.uniform(), x = y * s.uniform();
        double u = s.uniform(), v = s.uniform(), w = s.uniform();
        REQUIRE(update_inf(p, q, d, x, u, v, w) <= update_sup(q, d, y, u, v));
    }
}

TEST_CASE("coupled_step")
{
    ReplicateStream s(4, 0);
    for (int i = 0; i < 1000; ++i)
    {
        auto [a, b] = coupled_step(0.4, 0.4, 0.3, 0.3, 0.7, s);
        REQUIRE(a == b);
    }

    auto gaps = map_replicates<double>(1000000, 5, [](std::uint64_t, ReplicateStream& st) {
        auto [a, b] = coupled_step(0.2, 0.9, 0.3, 0.3, 1.0, st);
        return std::abs(a - b);
    });
    CHECK(mean(gaps) <= 0.7 * 0.5 + 3 * mc_stderr(gaps));

    auto xs = map_replicates<double>(1000000, 6, [](std::uint64_t, ReplicateStream& st) {
        return coupled_step(0.3, 0.6, 0.2, 0.7, 0.5, st).first;
    });
    auto ref = map_replicates<double>(1000000, 7, [](std::uint64_t, ReplicateStream& st) {
        return kernel_step({0.5, 0.2}, 0.3, st);
    });
    CHECK(ks_two_sample(xs, ref).p_value > 0.01);
}

TEST_CASE("coupled_step contracts from the W1-optimal coupling")
{
    // mu = uniform on {0.1, 0.4}, nu = uniform on {0.3, 0.9}: W1 = 0.35
    double delta = 0.6, p = 0.3, q = 0.55;
    auto gaps = map_replicates<double>(200000, 8, [&](std::uint64_t i, ReplicateStream& st) {
        double x = i % 2 ? 0.1 : 0.4, y = i % 2 ? 0.3 : 0.9;
        auto [a, b] = coupled_step(x, y, p, q, delta, st);
        REQUIRE(a <= b);
        return std::abs(a - b);
    });
    CHECK(mean(gaps) <= (1 - delta / 2) * 0.35 + delta / 2 * (q - p) + 3 * mc_stderr(gaps));
}

TEST_CASE("lambda row")
{
    auto r = lambda_row(1, 1.0);
    CHECK(r[1] == doctest::Approx(0.5).epsilon(1e-14));
    for (double d : {0.1, 0.5, 1.0})
        for (int n : {0, 3, 20, 50})
        {
            auto row = lambda_row(n, d);
            CHECK(row[0] == doctest::Approx((1 - std::pow(1 - d, n + 1)) / (d * (n + 1))).epsilon(1e-13));
        }
}

TEST_CASE("invariant moments")
{
    for (double d : {0.2, 0.7, 1.0})
        for (double p : {0.1, 0.5, 0.9})
        {
            auto m = invariant_moments(d, p, 4).moments;
            CHECK(m[1] == doctest::Approx(p).epsilon(1e-13));
            CHECK(m[2] - p * p == doctest::Approx(invariant_variance(d, p)).epsilon(1e-12));
        }
    auto m = invariant_moments(1.0, 0.5, 2).moments;
    CHECK(m[2] - 0.25 == doctest::Approx(0.125).epsilon(1e-13));
    auto b = invariant_moments(1.0, 0.3, 3).moments;
    CHECK(b[3] == doctest::Approx(beta_moments(0.3, 0.7, 3)[3]).epsilon(1e-12));
    CHECK_THROWS_AS(invariant_moments(0.0, 0.5, 3), ArgumentError);
}

TEST_CASE("invariant density")
{
    auto r = invariant_density(0.5, 0.3, 1024);
    CHECK(std::abs(r.density.mass() - 1) < 1e-10);
    CHECK(std::abs(r.density.mean() - 0.3) < 1e-3);
    CHECK(std::abs(r.density.variance() - invariant_variance(0.5, 0.3)) < 1e-3);

    auto a = invariant_density(0.5, 0.3, 512).density;
    auto b = invariant_density(0.5, 0.7, 512).density;
    double worst = 0;
    for (std::size_t i = 0; i < 512; ++i)
        worst = std::max(worst, std::abs(a[i] - b[511 - i]));
    CHECK(worst < 1e-6);

    auto g = invariant_density(0.999, 0.5, 1024).density;
    auto beta = GridDensity::beta(1024, 0.5, 0.5);
    double l1 = 0;
    for (std::size_t i = 1; i + 1 < 1024; ++i)
        l1 += std::abs(g[i] - beta[i]) * g.cell_width();
    CHECK(l1 < 0.05);

    CHECK_THROWS_AS(invariant_density(0.5, 0.3, 1024, 1e-14, 3), ConvergenceError);
}

TEST_CASE("transfer conserves mass and the one-step mean")
{
    auto mu = GridDensity::beta(512, 2, 3);
    std::vector<double> pc(512);
    for (std::size_t i = 0; i < 512; ++i)
        pc[i] = 0.2 + 0.5 * mu.midpoint(i);
    auto next = apply_transfer(mu, pc, 0.6);
    CHECK(std::abs(next.mass() - 1) < 1e-12);
    double expect = 0;
    for (std::size_t i = 0; i < 512; ++i)
    {
        double x = mu.midpoint(i);
        expect += mu[i] * mu.cell_width() * (x + 0.3 * (pc[i] - x));
    }
    CHECK(std::abs(next.mean() - expect) < 1e-4);
}

TEST_CASE("grid law utilities")
{
    auto u = GridDensity::uniform(100);
    CHECK(u.mean() == doctest::Approx(0.5));
    CHECK(u.quantile(0.25) == doctest::Approx(0.25));
    CHECK(u.cdf(0.3) == doctest::Approx(0.3));
    GridSampler s(u);
    CHECK(s(0.7) == doctest::Approx(0.7));
    CHECK(w1_grid(u, u) == 0.0);
    auto pm = GridDensity::point_mass(100, 0.0);
    CHECK(w1_grid(u, pm) == doctest::Approx(0.5 - 0.005).epsilon(1e-9));
}
