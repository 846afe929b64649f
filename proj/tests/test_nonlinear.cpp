#include "doctest.h"

#include <cmath>

#include "wfsim/engine.hpp"
#include "wfsim/kernel.hpp"
#include "wfsim/nonlinear.hpp"
#include "wfsim/stats.hpp"

using namespace wfsim;

TEST_CASE("affine drift construction")
{
    auto d = NonLinearDrift::affine(0.2, 0.1, 0.3);
    CHECK(d(0.5, 0.4) == doctest::Approx(0.2 + 0.05 + 0.12));
    CHECK(d.L1() == doctest::Approx(0.1));
    CHECK(d.L2() == doctest::Approx(0.3));
    CHECK(d.mean_only());
    CHECK_THROWS_AS(NonLinearDrift::affine(0.5, 0.4, 0.3), ArgumentError);
    auto ext = NonLinearDrift::affine(0.5, 0.4, 0.3, true);
    CHECK(ext.range_extended());
    CHECK_THROWS_AS(ext(1.0, 1.0), ContractError);
}

TEST_CASE("declared Lipschitz constants hold on probes")
{
    auto d = NonLinearDrift::affine(0.1, 0.2, 0.3);
    auto r = lipschitz_spot_check(d, 5000, 1);
    CHECK(r.violations == 0);
    CHECK(r.samples == 5000);
}

TEST_CASE("propagate_law conserves mass and the one-step mean")
{
    auto d = NonLinearDrift::affine(0.2, 0.1, 0.3);
    auto mu = GridDensity::beta(1024, 2, 5);
    auto next = propagate_law(mu, 0.5, d);
    CHECK(std::abs(next.mass() - 1) < 1e-10);
    double m = mu.mean();
    double expect = 0;
    for (std::size_t i = 0; i < mu.size(); ++i)
    {
        double x = mu.midpoint(i);
        expect += mu[i] * mu.cell_width() * (x + 0.25 * (d(x, m) - x));
    }
    CHECK(std::abs(next.mean() - expect) < 1e-4);

    auto zero = GridDensity::point_mass(256, 0.0);
    auto down = NonLinearDrift::affine(0, 0, 0);
    CHECK(l1_distance(propagate_law(zero, 0.5, down), zero) < 1e-12);
}

TEST_CASE("constant drift reaches the linear invariant density")
{
    auto d = NonLinearDrift::affine(0.3, 0, 0);
    auto st = stationary_law(GridDensity::uniform(1024), 0.5, d, 1e-11);
    auto ref = invariant_density(0.5, 0.3, 1024, 1e-11).density;
    CHECK(l1_distance(st.law, ref) < 1e-4);
    CHECK(l1_distance(propagate_law(st.law, 0.5, d), st.law) < 1e-6);
}

TEST_CASE("affine stationary mean")
{
    auto d = NonLinearDrift::affine(0.2, 0.1, 0.3);
    auto st = stationary_law(GridDensity::uniform(1024), 0.5, d);
    CHECK(std::abs(st.law.mean() - 1.0 / 3) < 1e-4);
}

TEST_CASE("law flow matches sample paths")
{
    auto d = NonLinearDrift::affine(0.1, 0.2, 0.3);
    auto flow = law_flow(GridDensity::beta(1024, 2, 2), 0.6, d, 20);
    CHECK(flow.steps() == 20);
    auto x = nonlinear_endpoints(flow, 0.6, d, 20, 100000, 3);
    CHECK(w1_sample_vs_grid(x, flow.at(20)) < 5.0 / std::sqrt(1e5) + 2e-3);

    ReplicateStream s(4, 0);
    auto [path, f2] = nonlinear_chain_simulate(GridDensity::uniform(128), 0.5, d, 10, s);
    CHECK(path.size() == 11);
    CHECK(f2.laws.size() == 11);
}

TEST_CASE("law-independent drift reproduces the linear chain")
{
    auto p = DriftSpec::custom([](double x) { return 0.2 + 0.5 * x; }, "lin");
    auto d = NonLinearDrift::linear(p);
    auto flow = law_flow(GridDensity::point_mass(1024, 0.3), 0.5, d, 15);
    GridSampler init(flow.at(0));
    auto b = map_replicates<double>(10000, 6, [&](std::uint64_t, ReplicateStream& s) {
        double z = init(s.uniform());
        return run_chain(0.5, p, z, 15, s);
    });
    auto a = nonlinear_endpoints(flow, 0.5, d, 15, 10000, 5);
    CHECK(ks_two_sample(a, b).p_value > 0.01);
}

TEST_CASE("fixed point of a mean-only drift")
{
    auto d = NonLinearDrift::affine(0.2, 0, 0.5);
    auto fp = invariant_fixed_point_mean_only(d, 0.5);
    CHECK(std::abs(fp.s - 0.4) < 1e-10);
    CHECK(std::abs(fp.law.mean() - 0.4) < 1e-3);

    auto x = nonlinear_endpoints(law_flow(GridDensity::uniform(512), 0.5, d, 200), 0.5, d, 200, 50000, 7);
    CHECK(std::abs(mean(x) - 0.4) <= 3 * mc_stderr(x));

    auto flow = law_flow(fp.law, 0.5, d, 30);
    for (long n = 0; n <= 30; ++n)
        CHECK(std::abs(flow.means[n] - fp.law.mean()) < 1e-6);
}

TEST_CASE("perturbation example")
{
    auto p0 = perturbation_stats(0.3, 0.4, 0, 0.5);
    CHECK(p0.mean == doctest::Approx(0.5));
    CHECK(p0.variance == doctest::Approx(invariant_variance(0.5, 0.5)).epsilon(1e-13));
    auto p = perturbation_stats(0.3, 0.4, 0.5, 0.5);
    double base = 0.5 * 0.25 / 2.5;
    CHECK(p.variance == doctest::Approx(base / (1 - 0.5 * 0.4 * 2 / 2.5)).epsilon(1e-13));
    CHECK_THROWS_AS(perturbation_stats(0.3, 0.6, 0.5, 0.5), ArgumentError);

    auto d0 = NonLinearDrift::epsilon_interpolated(0.3, 0.4, 0);
    auto d1 = NonLinearDrift::epsilon_interpolated(0.3, 0.4, 0.5);
    auto s0 = stationary_law(GridDensity::uniform(1024), 0.5, d0);
    auto s1 = stationary_law(GridDensity::uniform(1024), 0.5, d1);
    CHECK(std::abs(s1.law.variance() - p.variance) < 1e-4);
    for (int k = 1; k <= 4; ++k)
        CHECK(std::abs(s1.law.moment(k) - s0.law.moment(k)) <= perturbation_moment_bound(k, 0.4, 0.5));
}

TEST_CASE("nonlinear coupling")
{
    auto d = NonLinearDrift::affine(0.1, 0.2, 0.3);
    auto mu = GridDensity::uniform(256);
    auto g = nonlinear_coupling(d, d, 0.5, mu, mu, 20, 1000, 8);
    for (double x : g.mean)
        CHECK(x == 0.0);

    auto e = nonlinear_ergodicity(d, 0.5, GridDensity::point_mass(1024, 0.95), 40, 20000, 9);
    CHECK(e.factor == doctest::Approx(1 - 0.5 * 0.5 / 2));
    CHECK(e.bound_violations == 0);
    CHECK(e.fitted_factor <= e.factor + 3 * e.fitted_factor_stderr);

    // invariant continuity: drifts differ by 0.05 in sup norm
    auto q = NonLinearDrift::affine(0.15, 0.2, 0.3);
    auto far = nonlinear_coupling(d, q, 0.5, mu, mu, 200, 5000, 10);
    double L = 0.5;
    CHECK(far.mean.back() <= 0.05 / (1 - L) + 3 * far.stderr.back());
}

TEST_CASE("the law map is a contraction")
{
    // T nu is the invariant law of the linear chain with the law argument frozen at nu
    auto d = NonLinearDrift::affine(0.1, 0.2, 0.3);
    auto laws = probe_laws(512);
    std::vector<GridDensity> images;
    for (auto const& nu : laws)
        images.push_back(stationary_law(GridDensity::uniform(512), 0.5, NonLinearDrift::affine(0.1 + 0.3 * nu.mean(), 0.2, 0)).law);
    double k = d.L2() / (1 - d.L1());
    for (std::size_t i = 0; i < laws.size(); ++i)
        for (std::size_t j = i + 1; j < laws.size(); ++j)
            CHECK(w1_grid(images[i], images[j]) <= k * w1_grid(laws[i], laws[j]) + 1e-6);
}
