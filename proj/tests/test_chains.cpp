#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "wfsim/chains.hpp"
#include "wfsim/engine.hpp"
#include "wfsim/stats.hpp"

using namespace wfsim;

namespace
{
FtwParams ftw(double delta, double t0, double t1, std::vector<double> sigma)
{
    FtwParams p;
    p.delta = delta;
    p.theta0 = t0;
    p.theta1 = t1;
    p.sigma = std::move(sigma);
    return p;
}
}  // namespace

TEST_CASE("boundaries are absorbing for the neutral drift")
{
    ReplicateStream s(1, 0);
    auto id = DriftSpec::identity();
    auto p0 = simulate_chain(0.8, id, 0.0, 100, s);
    CHECK(std::all_of(p0.begin(), p0.end(), [](double x) { return x == 0.0; }));
    auto p1 = simulate_chain(0.8, id, 1.0, 100, s);
    CHECK(std::all_of(p1.begin(), p1.end(), [](double x) { return x == 1.0; }));
    CHECK(simulate_chain(0.5, id, 0.3, 0, s) == ChainPath{0.3});
}

TEST_CASE("neutral chain is a martingale")
{
    auto x = map_replicates<double>(1000000, 2, [](std::uint64_t, ReplicateStream& s) {
        return chain_step(0.7, DriftSpec::identity(), 0.35, s);
    });
    CHECK(std::abs(mean(x) - 0.35) <= 3 * mc_stderr(x));

    // regression of increments on the state
    auto pairs = map_replicates<std::pair<double, double>>(200000, 3, [](std::uint64_t, ReplicateStream& s) {
        double z = s.uniform();
        return std::make_pair(z, chain_step(0.5, DriftSpec::identity(), z, s) - z);
    });
    std::vector<double> zs, ds;
    for (auto [z, d] : pairs)
    {
        zs.push_back(z);
        ds.push_back(d);
    }
    auto f = linear_fit(zs, ds);
    CHECK(std::abs(f.slope) <= 3 * f.slope_stderr);
}

TEST_CASE("fittest-type-wins drift gives a supermartingale")
{
    auto d = DriftSpec::fittest_type_wins(ftw(0.5, 0, 0, {0.4}));
    auto x = map_replicates<double>(1000000, 4, [&](std::uint64_t, ReplicateStream& s) {
        return chain_step(0.5, d, 0.5, s);
    });
    CHECK(mean(x) <= 0.5);
}

TEST_CASE("drift contract violations name the state")
{
    auto shifted = [](double x) { return x + 0.5; };
    CHECK_THROWS_AS(DriftSpec::custom(shifted, "shifted"), ContractError);
    try
    {
        DriftSpec::custom(shifted, "shifted");
    }
    catch (const ContractError& e)
    {
        CHECK(std::string(e.what()).find("x=") != std::string::npos);
    }
}

TEST_CASE("fixation probabilities")
{
    auto f = fixation_estimate(1.0, DriftSpec::identity(), 0.5, 1000, 1e-6, 10000, 5);
    CHECK(std::abs(f.p_fix1 - 0.5) <= 3 * f.stderr1);
    CHECK(f.p_undecided < 1e-3);

    auto g = fixation_estimate(0.5, DriftSpec::fittest_type_wins(ftw(0.5, 0, 0, {0.4})), 0.3, 2000, 1e-6, 10000, 6);
    CHECK(g.p_fix0 >= 0.7 - 3 * g.stderr0);

    auto h = fixation_estimate(0.5, DriftSpec::identity(), 1.0, 10, 1e-6, 100, 7);
    CHECK(h.p_fix1 == 1.0);
}

TEST_CASE("heterozygosity decays geometrically")
{
    auto h = heterozygosity_series(0.6, 0.5, 10, 100000, 8);
    CHECK(std::abs(h.mean[10] - 0.25 * std::pow(0.88, 10)) <= 3 * h.stderr[10]);
    auto fit = fit_heterozygosity(heterozygosity_series(0.6, 0.5, 30, 100000, 9), 0.6);
    CHECK(fit.relative_error < 0.02);
}

TEST_CASE("coupled chains")
{
    ReplicateStream s(10, 0);
    auto id = DriftSpec::identity();
    auto [a, b] = coupled_chains(0.6, id, id, 0.4, 0.4, 50, s);
    CHECK(a == b);

    auto lo = DriftSpec::custom([](double x) { return 0.8 * x; }, "lo");
    auto hi = DriftSpec::custom([](double x) { return std::min(1.0, 0.1 + x); }, "hi");
    std::size_t violations = 0;
    for (int r = 0; r < 2000; ++r)
    {
        auto [p, q] = coupled_chains(0.7, lo, hi, 0.3, 0.5, 40, s);
        for (std::size_t i = 0; i < p.size(); ++i)
            violations += p[i] > q[i];
    }
    CHECK(violations == 0);
}

TEST_CASE("coupled gap obeys the iterated recursion")
{
    double delta = 0.5;
    long n = 30;
    auto p = DriftSpec::identity();
    auto q = DriftSpec::custom([](double x) { return std::min(1.0, x + 0.1); }, "shift");
    auto gaps = map_replicates<std::vector<double>>(20000, 11, [&](std::uint64_t, ReplicateStream& s) {
        auto [a, b] = coupled_chains(delta, p, q, 0.2, 0.6, n, s);
        std::vector<double> g(a.size());
        for (std::size_t i = 0; i < a.size(); ++i)
            g[i] = std::abs(a[i] - b[i]);
        return g;
    });
    auto bound = coupled_gap_bound(delta, 1.0, 0.1, 0.4, n);
    for (long t = 0; t <= n; ++t)
    {
        std::vector<double> col;
        for (auto const& g : gaps)
            col.push_back(g[t]);
        CHECK(mean(col) <= bound[t] + 3 * mc_stderr(col) + 1e-12);
    }
}

TEST_CASE("geometric sigma truncation")
{
    auto [sigma, tail] = truncate_geometric_sigma(0.4, 0.5, 1e-10);
    CHECK(sigma.front() == 0.4);
    CHECK(tail < 1e-10);
    double sum = tail;
    for (double s : sigma)
        sum += s;
    CHECK(sum == doctest::Approx(0.8).epsilon(1e-9));
}
