#include "doctest.h"

#include <cmath>

#include "wfsim/diffusion.hpp"
#include "wfsim/engine.hpp"
#include "wfsim/stats.hpp"

using namespace wfsim;

TEST_CASE("degenerate diffusion stays at the boundary")
{
    SDEParams p{[](double) { return 0.0; }, 1e-3, 1.0};
    for (double x0 : {0.0, 1.0})
    {
        auto r = em_wf_simulate(p, initial_point(x0), 200, 1);
        for (double x : r.terminal)
            CHECK(x == x0);
    }
}

TEST_CASE("SDE parameter validation")
{
    SDEParams bad{[](double) { return -0.1; }, 1e-3, 1.0};
    CHECK_THROWS_AS(bad.validate(), ArgumentError);
    SDEParams dt0{mutation_drift(0.8, 0.6), 0.0, 1.0};
    CHECK_THROWS_AS(dt0.validate(), ArgumentError);
    CHECK(SDEParams{mutation_drift(0.8, 0.6), 1e-3, 2.0}.steps() == 2000);
}

TEST_CASE("mutation diffusion approaches its Beta invariant")
{
    SDEParams p{mutation_drift(0.8, 0.6), 1e-3, 5.0};
    auto r = em_wf_simulate(p, initial_beta(1.6, 1.2), 20000, 2);
    CHECK(std::abs(mean(r.terminal) - 4.0 / 7) <= 3 * mc_stderr(r.terminal));
    CHECK(w1_empirical_vs_beta(r.terminal, 1.6, 1.2) < 0.02);
    CHECK(r.clamp_rate < 0.01);
}

TEST_CASE("case-study invariant")
{
    CaseStudyParams c;
    auto i0 = case_study_invariant(c);
    CHECK(i0.a == doctest::Approx(1.6));
    CHECK(i0.b == doctest::Approx(1.2));
    CHECK(i0.variance == doctest::Approx(0.06445).epsilon(1e-3));
    CHECK(i0.mean == doctest::Approx(4.0 / 7));

    double prev = i0.variance;
    for (double g : {3.0, 30.0})
    {
        CaseStudyParams cg{0.8, 0.6, g, true};
        auto ig = case_study_invariant(cg);
        CHECK(ig.mean == doctest::Approx(4.0 / 7).epsilon(1e-14));
        CHECK(ig.variance < prev);
        prev = ig.variance;
        // second-moment expression
        double m = cg.m();
        double m2 = m * (2 * (0.8 + g * m) + 1) / (2 * (1.4 + g) + 1);
        CHECK(ig.variance == doctest::Approx(m2 - m * m).epsilon(1e-12));
    }
    CaseStudyParams c3{0.8, 0.6, 3.0, true};
    CHECK(case_study_invariant(c3).a == doctest::Approx(5.0286).epsilon(1e-4));
    CHECK(case_study_invariant(c3).b == doctest::Approx(3.7714).epsilon(1e-4));
    CHECK_THROWS_AS((CaseStudyParams{0.8, 0.6, 3.0, false}.validate()), ArgumentError);
}

TEST_CASE("interaction-free particle system matches independent paths")
{
    CaseStudyParams c;
    auto mv = mv_particle_em_simulate(
        5000, [&](double x, double m) { return c.drift(x, m); }, 1e-3, 1.0, initial_point(0.3), 3);
    SDEParams p{mutation_drift(0.8, 0.6), 1e-3, 1.0};
    auto em = em_wf_simulate(p, initial_point(0.3), 5000, 4);
    CHECK(ks_two_sample(mv.terminal, em.terminal).p_value > 0.01);
}

TEST_CASE("scaling limit degenerate case")
{
    auto r = scaling_limit_check({100, 400}, [](double) { return 0.0; }, initial_point(0.0), 1.0, 500, 5, 1e-3);
    for (auto const& pt : r.points)
        CHECK(pt.w1 == 0.0);
}

TEST_CASE("ergodic rate from stationarity is flat")
{
    CaseStudyParams c{0.8, 0.6, 3.0, true};
    auto inv = case_study_invariant(c);
    auto r = ergodic_rate_check(c, {0.0, 0.5, 1.0}, 20000, 1e-3, initial_beta(inv.a, inv.b), 6);
    for (double w : r.w1)
        CHECK(w < 5 * r.floor);
}

TEST_CASE("Beta overlay integrates to about one")
{
    auto ov = beta_overlay(1.6, 1.2, 400);
    CHECK(ov.size() == 400);
    double area = 0;
    for (std::size_t i = 1; i < ov.size(); ++i)
        area += 0.5 * (ov[i].second + ov[i - 1].second) * (ov[i].first - ov[i - 1].first);
    CHECK(area == doctest::Approx(1.0).epsilon(0.02));
}
