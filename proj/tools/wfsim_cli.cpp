//! wfsim: config-driven experiment runner writing CSV data and a JSON summary.
//!
//!   wfsim run <experiment> [--config file.json] [--seed N] [--reps N]
//!             [--threads N] [--out dir] [--<parameter> value[,value...]]
//!
//! Exit codes: 0 ok, 1 invalid configuration, 2 a check failed.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wfsim/chains.hpp"
#include "wfsim/diffusion.hpp"
#include "wfsim/duals.hpp"
#include "wfsim/engine.hpp"
#include "wfsim/kernel.hpp"
#include "wfsim/meanfield.hpp"
#include "wfsim/nonlinear.hpp"
#include "wfsim/stats.hpp"

#ifndef WFSIM_BUILD_ID
#define WFSIM_BUILD_ID "unknown"
#endif

using namespace wfsim;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace
{
struct Param
{
    std::string key;
    std::vector<double> def;
    std::string help;
    bool list = false;
};

class Config
{
  public:
    std::string experiment;
    std::uint64_t seed = 0;
    std::size_t reps = 0;
    int threads = 1;
    std::string out;
    std::map<std::string, std::vector<double>> values;
    std::vector<std::string> order;

    double num(const std::string& k) const { return values.at(k).front(); }
    long integer(const std::string& k) const { return std::lround(num(k)); }
    const std::vector<double>& list(const std::string& k) const { return values.at(k); }
    template<class T>
    std::vector<T> ints(const std::string& k) const
    {
        std::vector<T> v;
        for (double x : list(k))
            v.push_back(static_cast<T>(std::llround(x)));
        return v;
    }

    json to_json() const
    {
        json j;
        j["experiment"] = experiment;
        j["seed"] = seed;
        if (reps)
            j["reps"] = reps;
        j["threads"] = threads;
        j["out"] = out;
        for (auto const& k : order)
        {
            auto const& v = values.at(k);
            j[k] = v.size() == 1 ? json(v.front()) : json(v);
        }
        return j;
    }
};

struct Check
{
    std::string name;
    bool pass;
    double value;
    double limit;
};

class Csv
{
  public:
    Csv(std::string name, const std::vector<std::string>& header) : name_(std::move(name))
    {
        for (std::size_t i = 0; i < header.size(); ++i)
            text_ += (i ? "," : "") + header[i];
        text_ += "\n";
    }
    template<class... T>
    void row(T const&... cells)
    {
        std::ostringstream os;
        os << std::setprecision(17);
        int i = 0;
        ((os << (i++ ? "," : "") << cells), ...);
        text_ += os.str() + "\n";
    }
    const std::string& name() const { return name_; }
    const std::string& text() const { return text_; }

  private:
    std::string name_;
    std::string text_;
};

struct Outcome
{
    json results = json::object();
    std::vector<Check> checks;
    std::vector<Csv> tables;
    std::vector<std::string> warnings;
};

using Runner = std::function<Outcome(const Config&)>;

struct Experiment
{
    std::string name;
    std::string help;
    std::size_t default_reps;
    std::vector<Param> params;
    Runner run;
};

constexpr double three_sigma = 3.0;

std::vector<double> long_run(double delta, double p, long burn_in, std::size_t n, std::uint64_t seed)
{
    return map_replicates<double>(n, seed, [&](std::uint64_t, ReplicateStream& s) {
        KernelParams k{delta, p};
        double x = s.uniform();
        for (long t = 0; t < burn_in; ++t)
            x = kernel_step(k, x, s);
        return x;
    });
}

Outcome kernel_invariant(const Config& c)
{
    Outcome o;
    double delta = c.num("delta"), p = c.num("p");
    KernelParams{delta, p}.validate();
    auto x = long_run(delta, p, c.integer("burn_in"), c.reps, c.seed);
    int k_max = static_cast<int>(c.integer("k_max"));
    auto exact = invariant_moments(delta, p, k_max).moments;
    auto emp = moments_empirical(x, k_max);
    Csv t("moments.csv", {"k", "exact", "empirical"});
    for (int k = 1; k <= k_max; ++k)
        t.row(k, exact[k], emp[k]);
    auto h = histogram(x, static_cast<std::size_t>(c.integer("bins")));
    Csv hist("histogram.csv", {"lo", "hi", "density"});
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        hist.row(h.edges[i], h.edges[i + 1], static_cast<double>(h.counts[i]) / (x.size() * (h.edges[i + 1] - h.edges[i])));
    double m = mean(x), se = mc_stderr(x), v = variance(x), vt = invariant_variance(delta, p);
    o.results = {{"mean", m}, {"mean_stderr", se}, {"variance", v}, {"variance_exact", vt}};
    o.checks.push_back({"mean within 3 stderr of p", std::abs(m - p) <= three_sigma * se, std::abs(m - p), three_sigma * se});
    o.checks.push_back({"variance within relative tolerance", std::abs(v - vt) <= c.num("var_rel_tol") * vt, std::abs(v - vt) / vt,
                        c.num("var_rel_tol")});
    o.tables = {t, hist};
    return o;
}

Outcome density_solve(const Config& c)
{
    Outcome o;
    double delta = c.num("delta"), p = c.num("p");
    auto r = invariant_density(delta, p, static_cast<std::size_t>(c.integer("grid")), c.num("tol"), c.integer("max_iter"));
    Csv t("density.csv", {"z", "density"});
    for (std::size_t i = 0; i < r.density.size(); ++i)
        t.row(r.density.midpoint(i), r.density[i]);
    o.results = {{"iterations", r.iterations}, {"residual", r.residual}, {"mass", r.density.mass()}, {"mean", r.density.mean()},
                 {"variance", r.density.variance()}, {"variance_exact", invariant_variance(delta, p)}};
    o.checks.push_back({"mass", std::abs(r.density.mass() - 1) < 1e-10, std::abs(r.density.mass() - 1), 1e-10});
    o.checks.push_back({"first moment equals p", std::abs(r.density.mean() - p) < 1e-3, std::abs(r.density.mean() - p), 1e-3});
    o.tables = {t};
    return o;
}

Outcome duality_table(const std::vector<DualityResult>& g)
{
    Outcome o;
    Csv t("duality.csv", {"z", "m", "n", "lhs", "rhs", "stderr_lhs", "stderr_rhs", "z_score", "pass"});
    json cells = json::array();
    double worst = 0;
    for (auto const& r : g)
    {
        t.row(r.z, r.m, r.n, r.lhs, r.rhs, r.stderr_lhs, r.stderr_rhs, r.z_score, r.pass ? 1 : 0);
        cells.push_back({{"z", r.z}, {"m", r.m}, {"n", r.n}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"stderr", std::hypot(r.stderr_lhs, r.stderr_rhs)},
                         {"pass", r.pass}});
        o.checks.push_back({"cell z=" + std::to_string(r.z).substr(0, 4) + " m=" + std::to_string(r.m) + " n=" + std::to_string(r.n),
                            r.pass, r.z_score, three_sigma});
        worst = std::max(worst, r.z_score);
    }
    if (g.size() == 1)
        o.results = {{"lhs", g[0].lhs}, {"rhs", g[0].rhs}, {"stderr", std::hypot(g[0].stderr_lhs, g[0].stderr_rhs)}, {"pass", g[0].pass}};
    o.results["max_z_score"] = worst;
    o.results["bonferroni_p"] = std::min(1.0, normal_two_sided_p(worst) * static_cast<double>(g.size()));
    o.results["cells"] = cells;
    o.tables = {t};
    return o;
}

Outcome duality_neutral(const Config& c)
{
    return duality_table(duality_grid_neutral(c.list("z"), c.ints<int>("m"), c.ints<long>("n"), c.num("delta"), c.reps, c.seed));
}

Outcome duality_ftw(const Config& c)
{
    FtwDualParams p;
    p.delta = c.num("delta");
    p.theta0 = c.num("theta0");
    p.theta1 = c.num("theta1");
    p.sigma = c.list("sigma");
    if (p.sigma.size() == 1 && p.sigma[0] == 0)
        p.sigma.clear();
    p.validate();
    return duality_table(duality_grid_ftw(c.list("z"), c.ints<int>("m"), c.ints<long>("n"), p, c.reps, c.seed));
}

Outcome absorption(const Config& c)
{
    Outcome o;
    double t0 = c.num("theta0"), t1 = c.num("theta1");
    int m_max = static_cast<int>(c.integer("m_max"));
    auto deltas = c.list("delta");
    Csv t("absorption.csv", {"delta", "m", "h", "ratio", "target"});
    double smallest = *std::min_element(deltas.begin(), deltas.end());
    json rows = json::array();
    for (double d : deltas)
    {
        auto h = absorption_table(m_max, d, t0, t1);
        for (int m = 1; m <= m_max; ++m)
        {
            double ratio = h[m] / h[m - 1], target = (m - 1 + 2 * t0) / (m - 1 + 2 * (t0 + t1));
            t.row(d, m, h[m], ratio, target);
            rows.push_back({{"delta", d}, {"m", m}, {"h", h[m]}, {"ratio", ratio}, {"target", target}});
            if (d == smallest)
                o.checks.push_back({"ratio m=" + std::to_string(m) + " at smallest delta", std::abs(ratio - target) <= c.num("tol"),
                                    std::abs(ratio - target), c.num("tol")});
        }
    }
    o.results["rows"] = rows;
    o.tables = {t};
    return o;
}

Outcome heterozygosity(const Config& c)
{
    Outcome o;
    Csv t("heterozygosity.csv", {"delta", "n", "mean", "stderr", "theory"});
    json fits = json::array();
    std::uint64_t k = 0;
    for (double d : c.list("delta"))
    {
        double z0 = c.num("z0");
        auto h = heterozygosity_series(d, z0, c.integer("n"), c.reps, splitmix64(c.seed + k++));
        for (std::size_t n = 0; n < h.mean.size(); ++n)
            t.row(d, n, h.mean[n], h.stderr[n], z0 * (1 - z0) * std::pow(1 - d * d / 3, static_cast<double>(n)));
        auto f = fit_heterozygosity(h, d);
        fits.push_back({{"delta", d}, {"slope", f.slope}, {"slope_stderr", f.slope_stderr}, {"expected", f.expected},
                        {"relative_error", f.relative_error}});
        o.checks.push_back({"log-slope delta=" + std::to_string(d).substr(0, 4), f.relative_error <= c.num("tol"), f.relative_error,
                            c.num("tol")});
    }
    o.results["fits"] = fits;
    o.tables = {t};
    return o;
}

//! Declared Lipschitz constants with a random-probe spot check
json lipschitz_meta(const NonLinearDrift& d, std::uint64_t seed)
{
    auto l = lipschitz_spot_check(d, 2000, seed);
    return {{"certified", false}, {"L1", d.L1()}, {"L2", d.L2()}, {"spot_check_samples", l.samples},
            {"spot_check_violations", l.violations}, {"worst_excess", l.worst_excess}};
}

Outcome nonlinear_ergodicity_run(const Config& c)
{
    Outcome o;
    double a = c.num("a"), b = c.num("b"), cc = c.num("c"), delta = c.num("delta");
    auto d = NonLinearDrift::affine(a, b, cc);
    auto grid = static_cast<std::size_t>(c.integer("grid"));
    auto st = stationary_law(GridDensity::uniform(grid), delta, d);
    double target = a / (1 - (b + cc));
    auto e = nonlinear_ergodicity(d, delta, GridDensity::point_mass(grid, c.num("x0")), c.integer("n"), c.reps, c.seed);
    Csv t("gap.csv", {"n", "gap", "stderr", "bound"});
    for (std::size_t n = 0; n < e.gap.mean.size(); ++n)
        t.row(n, e.gap.mean[n], e.gap.stderr[n], e.bound[n]);
    o.results = {{"stationary_mean", st.law.mean()}, {"target_mean", target}, {"sweeps", st.iterations}, {"factor", e.factor},
                 {"fitted_factor", e.fitted_factor}, {"fitted_factor_stderr", e.fitted_factor_stderr},
                 {"lipschitz", lipschitz_meta(d, splitmix64(c.seed + 1))}};
    o.checks.push_back({"stationary mean", std::abs(st.law.mean() - target) <= 1e-4, std::abs(st.law.mean() - target), 1e-4});
    o.checks.push_back({"gap below contraction bound", e.bound_violations == 0, static_cast<double>(e.bound_violations), 0});
    o.checks.push_back({"fitted factor within band", e.fitted_factor <= e.factor + three_sigma * e.fitted_factor_stderr, e.fitted_factor,
                        e.factor + three_sigma * e.fitted_factor_stderr});
    o.tables = {t};
    return o;
}

Outcome perturbation(const Config& c)
{
    Outcome o;
    double a = c.num("a"), b = c.num("b"), eps = c.num("epsilon"), delta = c.num("delta");
    auto stats = perturbation_stats(a, b, eps, delta);
    auto d = NonLinearDrift::epsilon_interpolated(a, b, eps);
    long gens = c.integer("generations");
    auto flow = law_flow(GridDensity::uniform(static_cast<std::size_t>(c.integer("grid"))), delta, d, gens);
    auto x = nonlinear_endpoints(flow, delta, d, gens, c.reps, c.seed);
    double v = variance(x), se = variance_stderr(x);
    auto base = stationary_law(GridDensity::uniform(flow.at(0).size()), delta, NonLinearDrift::epsilon_interpolated(a, b, 0)).law;
    Csv t("moments.csv", {"k", "empirical", "unperturbed", "bound"});
    auto emp = moments_empirical(x, 4);
    for (int k = 1; k <= 4; ++k)
        t.row(k, emp[k], base.moment(k), perturbation_moment_bound(k, b, eps));
    o.results = {{"mean", mean(x)}, {"mean_formula", stats.mean}, {"variance", v}, {"variance_stderr", se}, {"variance_formula", stats.variance},
                 {"lipschitz", lipschitz_meta(d, splitmix64(c.seed + 1))}};
    o.checks.push_back({"variance within 3 stderr of formula", std::abs(v - stats.variance) <= three_sigma * se, std::abs(v - stats.variance),
                        three_sigma * se});
    o.tables = {t};
    return o;
}

Outcome chaos_rate(const Config& c)
{
    Outcome o;
    auto d = NonLinearDrift::affine(c.num("a"), c.num("b"), c.num("c"));
    auto r = chaos_rate_experiment(c.ints<std::size_t>("M"), c.num("delta"), d, GridDensity::uniform(static_cast<std::size_t>(c.integer("grid"))),
                                   c.integer("n"), c.reps, c.seed);
    Csv t("chaos.csv", {"M", "coupling", "coupling_stderr", "w1_direct", "w1_floor"});
    for (auto const& p : r.points)
        t.row(p.M, p.w1_coupling, p.coupling_stderr, p.w1_direct, p.w1_floor);
    o.results = {{"slope", r.slope_coupling}, {"slope_stderr", r.slope_coupling_stderr}, {"slope_direct", r.slope_direct}};
    double lx = 0, ly = 0;
    for (auto const& p : r.points)
    {
        lx += std::log(static_cast<double>(p.M));
        ly += std::log(p.w1_coupling);
    }
    double icept = (ly - r.slope_coupling * lx) / static_cast<double>(r.points.size());
    json holds_from = nullptr;
    for (auto it = r.points.rbegin(); it != r.points.rend(); ++it)
    {
        double resid = std::log(it->w1_coupling) - icept - r.slope_coupling * std::log(static_cast<double>(it->M));
        if (std::abs(resid) > three_sigma * it->coupling_stderr / it->w1_coupling)
            break;
        holds_from = it->M;
    }
    o.results["fit_holds_from_M"] = holds_from;
    bool ok = r.slope_coupling >= c.num("slope_lo") && r.slope_coupling <= c.num("slope_hi");
    o.checks.push_back({"log-log slope in band", ok, r.slope_coupling, c.num("slope_hi")});
    o.tables = {t};
    return o;
}

Outcome scaling_limit(const Config& c)
{
    Outcome o;
    auto r = scaling_limit_check(c.ints<long>("N"), mutation_drift(c.num("theta0"), c.num("theta1")), initial_point(c.num("x0")), c.num("t"),
                                 c.reps, c.seed, c.num("dt_ref"));
    Csv t("scaling.csv", {"N", "w1", "stderr"});
    for (auto const& p : r.points)
        t.row(p.N, p.w1, p.stderr);
    o.results = {{"decreasing", r.decreasing}, {"reference_clamp_rate", r.reference_clamp_rate}};
    o.checks.push_back({"W1 decreasing in N", r.decreasing, r.decreasing ? 1.0 : 0.0, 1});
    o.checks.push_back({"W1 at largest N", r.points.back().w1 <= c.num("w1_max"), r.points.back().w1, c.num("w1_max")});
    o.tables = {t};
    return o;
}

Outcome case_study(const Config& c)
{
    Outcome o;
    CaseStudyParams cs{c.num("theta0"), c.num("theta1"), c.num("gamma"), false};
    if (cs.gamma >= 1)
    {
        cs.allow_range_extension = true;
        o.warnings.push_back("gamma >= 1 lies outside the stationary theory; running with the range extension");
    }
    auto inv = case_study_invariant(cs);
    auto run = case_study_run(cs, c.integer("N"), c.num("T"), GridDensity::uniform(static_cast<std::size_t>(c.integer("grid"))), c.reps, c.seed);
    ReplicateStream s(c.seed, 0, 0xbe7a);
    double w = w1_empirical(run.samples, beta_samples(inv.a, inv.b, run.samples.size(), s));
    auto h = histogram(run.samples, static_cast<std::size_t>(c.integer("bins")));
    Csv hist("histogram.csv", {"lo", "hi", "density"});
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        hist.row(h.edges[i], h.edges[i + 1], static_cast<double>(h.counts[i]) / (run.samples.size() * (h.edges[i + 1] - h.edges[i])));
    Csv overlay("beta_overlay.csv", {"z", "pdf"});
    for (auto [z, f] : beta_overlay(inv.a, inv.b))
        overlay.row(z, f);
    o.results = {{"range_extended", cs.allow_range_extension}, {"beta_a", inv.a}, {"beta_b", inv.b}, {"systems", run.systems}, {"mean", run.mean},
                 {"mean_stderr", run.mean_stderr}, {"variance", run.variance}, {"variance_stderr", run.variance_stderr},
                 {"variance_exact", inv.variance}, {"w1_beta", w}};
    o.checks.push_back({"W1 against the Beta invariant", w <= c.num("w1_max"), w, c.num("w1_max")});
    o.checks.push_back({"mean within 3 stderr of m", std::abs(run.mean - cs.m()) <= three_sigma * run.mean_stderr, std::abs(run.mean - cs.m()),
                        three_sigma * run.mean_stderr});
    o.tables = {hist, overlay};
    return o;
}

Outcome beta_w1(const Config& c)
{
    Outcome o;
    double a1 = c.num("a1"), a2 = c.num("a2"), b1 = c.num("b1"), b2 = c.num("b2");
    double closed = w1_beta_closed(a1, a2, b1, b2);
    ReplicateStream s(c.seed, 0);
    auto x = beta_samples(a1, a2, c.reps, s);
    auto y = beta_samples(b1, b2, c.reps, s);
    double e = w1_empirical(x, y);
    Csv t("beta_w1.csv", {"a1", "a2", "b1", "b2", "empirical", "closed"});
    t.row(a1, a2, b1, b2, e, closed);
    o.results = {{"empirical", e}, {"closed", closed}};
    o.checks.push_back({"empirical vs closed form", std::abs(e - closed) <= c.num("tol"), std::abs(e - closed), c.num("tol")});
    o.tables = {t};
    return o;
}

std::vector<Experiment> experiments()
{
    return {
        {"kernel-invariant", "long-run kernel chain against the invariant moments", 100000,
         {{"delta", {0.5}, "replacement fraction bound"}, {"p", {0.3}, "type-0 branch weight"}, {"burn_in", {300}, "generations before sampling"},
          {"k_max", {4}, "highest moment"}, {"bins", {50}, "histogram bins"}, {"var_rel_tol", {0.05}, "relative variance tolerance"}},
         kernel_invariant},
        {"density-solve", "fixed-point solve for the invariant density", 0,
         {{"delta", {0.5}, ""}, {"p", {0.3}, ""}, {"grid", {2048}, "grid cells"}, {"tol", {1e-8}, "sup-norm stopping tolerance"},
          {"max_iter", {100000}, "iteration cap"}},
         density_solve},
        {"duality-neutral", "forward moments against the exact neutral dual", 1000000,
         {{"z", {0.5}, "initial frequency", true}, {"m", {3}, "moment order", true}, {"n", {10}, "generations", true}, {"delta", {0.7}, ""}},
         duality_neutral},
        {"duality-ftw", "forward moments against the killed selection dual", 1000000,
         {{"z", {0.4}, "", true}, {"m", {2}, "", true}, {"n", {8}, "", true}, {"delta", {0.4}, ""}, {"theta0", {0.3}, ""}, {"theta1", {0.2}, ""},
          {"sigma", {0.3, 0.15}, "selection coefficients (0 for none)", true}},
         duality_ftw},
        {"absorption", "exact absorption probabilities of the mutation dual", 0,
         {{"delta", {0.1, 0.05, 0.025}, "", true}, {"theta0", {0.8}, ""}, {"theta1", {0.6}, ""}, {"m_max", {4}, ""}, {"tol", {1e-2}, ""}},
         absorption},
        {"heterozygosity", "heterozygosity decay of the neutral chain", 100000,
         {{"delta", {0.3, 0.6, 0.9}, "", true}, {"z0", {0.5}, ""}, {"n", {30}, "generations"}, {"tol", {0.02}, "relative slope tolerance"}},
         heterozygosity},
        {"nonlinear-ergodicity", "coupled gap of the affine non-linear chain", 100000,
         {{"a", {0.2}, ""}, {"b", {0.1}, ""}, {"c", {0.3}, ""}, {"delta", {0.5}, ""}, {"n", {40}, ""}, {"x0", {1.0}, "start of the second copy"},
          {"grid", {2048}, ""}},
         nonlinear_ergodicity_run},
        {"perturbation", "stationary variance of the epsilon-interpolated chain", 100000,
         {{"a", {0.3}, ""}, {"b", {0.4}, ""}, {"epsilon", {0.5}, ""}, {"delta", {0.5}, ""}, {"generations", {200}, ""}, {"grid", {1024}, ""}},
         perturbation},
        {"chaos-rate", "propagation-of-chaos rate in the number of hosts", 10000,
         {{"a", {0.1}, ""}, {"b", {0.2}, ""}, {"c", {0.3}, ""}, {"delta", {0.5}, ""}, {"n", {100}, ""}, {"M", {16, 64, 256, 1024}, "", true},
          {"grid", {1024}, ""}, {"slope_lo", {-0.65}, ""}, {"slope_hi", {-0.35}, ""}},
         chaos_rate},
        {"scaling-limit", "scaled chain against the Euler-Maruyama diffusion", 100000,
         {{"theta0", {0.8}, ""}, {"theta1", {0.6}, ""}, {"x0", {0.5}, ""}, {"t", {1.0}, ""}, {"N", {100, 400, 1600}, "", true},
          {"dt_ref", {1e-4}, ""}, {"w1_max", {0.02}, ""}},
         scaling_limit},
        {"case-study", "self-stabilizing host system against its Beta invariant", 100000,
         {{"theta0", {0.8}, ""}, {"theta1", {0.6}, ""}, {"gamma", {0}, ""}, {"N", {600}, "scale and host count"}, {"T", {10}, ""},
          {"grid", {1024}, ""}, {"bins", {50}, ""}, {"w1_max", {0.015}, ""}},
         case_study},
        {"beta-w1", "empirical against closed-form Beta Wasserstein distance", 1000000,
         {{"a1", {1.6}, ""}, {"a2", {1.2}, ""}, {"b1", {2.0}, ""}, {"b2", {0.8}, ""}, {"tol", {0.003}, ""}},
         beta_w1},
    };
}

struct Overrides
{
    std::map<std::string, std::vector<double>> values;
    std::map<std::string, CLI::Option*> options;
};

std::vector<double> json_numbers(const json& v, const std::string& key)
{
    if (v.is_number())
        return {v.get<double>()};
    if (v.is_array() && !v.empty())
    {
        std::vector<double> out;
        for (auto const& e : v)
        {
            if (!e.is_number())
                throw ArgumentError("config key '" + key + "' must hold numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }
    throw ArgumentError("config key '" + key + "' must be a number or a list of numbers");
}

Config resolve(const Experiment& e,
               const json& file,
               const Overrides& ov,
               CLI::Option* seed_opt,
               std::uint64_t seed,
               CLI::Option* reps_opt,
               std::size_t reps,
               CLI::Option* threads_opt,
               int threads,
               CLI::Option* out_opt,
               const std::string& out)
{
    Config c;
    c.experiment = e.name;
    c.reps = e.default_reps;
    c.threads = thread_count();
    c.out = "results/" + e.name;
    for (auto const& p : e.params)
    {
        c.values[p.key] = p.def;
        c.order.push_back(p.key);
    }
    for (auto const& [key, v] : file.items())
    {
        if (key == "experiment")
        {
            if (!v.is_string() || v.get<std::string>() != e.name)
                throw ArgumentError("config key 'experiment' does not match '" + e.name + "'");
        }
        else if (key == "seed")
            c.seed = v.get<std::uint64_t>();
        else if (key == "reps")
            c.reps = v.get<std::size_t>();
        else if (key == "threads")
            c.threads = v.get<int>();
        else if (key == "out")
            c.out = v.get<std::string>();
        else if (c.values.count(key))
            c.values[key] = json_numbers(v, key);
        else
            throw ArgumentError("unknown config key '" + key + "' for " + e.name);
    }
    if (seed_opt->count())
        c.seed = seed;
    if (reps_opt->count())
        c.reps = reps;
    if (threads_opt->count())
        c.threads = threads;
    if (out_opt->count())
        c.out = out;
    for (auto const& [key, opt] : ov.options)
        if (opt->count())
            c.values[key] = ov.values.at(key);

    if (e.default_reps == 0 && (reps_opt->count() || file.contains("reps")))
        throw ArgumentError("key 'reps' is not used by " + e.name);
    if (e.default_reps != 0 && c.reps < 2)
        throw ArgumentError("key 'reps' must be at least 2");
    if (c.threads < 1)
        throw ArgumentError("key 'threads' must be positive");
    for (auto const& p : e.params)
        if (!p.list && c.values[p.key].size() != 1)
            throw ArgumentError("key '" + p.key + "' takes a single value");
    return c;
}

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write " + path.string());
    f << text;
}
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Wright-Fisher kernel, dual and mean-field experiments"};
    app.set_version_flag("--version", std::string(WFSIM_BUILD_ID));
    app.require_subcommand(1);
    auto* run = app.add_subcommand("run", "run one experiment");
    run->require_subcommand(1);

    std::string config_path, out;
    std::uint64_t seed = 0;
    std::size_t reps = 0;
    int threads = 1;
    run->add_option("--config", config_path, "JSON file of parameter values")->check(CLI::ExistingFile);
    auto* seed_opt = run->add_option("--seed", seed, "master seed (default 0)");
    auto* reps_opt = run->add_option("--reps", reps, "replicates or samples");
    auto* threads_opt = run->add_option("--threads", threads, "OpenMP threads (default: all cores)");
    auto* out_opt = run->add_option("--out", out, "output directory (default results/<experiment>)");

    auto table = experiments();
    std::vector<Overrides> overrides(table.size());
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < table.size(); ++i)
    {
        auto* sub = run->add_subcommand(table[i].name, table[i].help);
        sub->fallthrough();
        for (auto const& p : table[i].params)
        {
            std::ostringstream def;
            for (std::size_t k = 0; k < p.def.size(); ++k)
                def << (k ? "," : "") << p.def[k];
            auto* opt = sub->add_option("--" + p.key, overrides[i].values[p.key], p.help.empty() ? p.key : p.help)
                            ->delimiter(',')
                            ->default_str(def.str());
            overrides[i].options[p.key] = opt;
        }
        subs.push_back(sub);
    }

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForAllHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForVersion& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    std::size_t which = 0;
    while (which < subs.size() && !subs[which]->parsed())
        ++which;
    auto const& exp = table[which];

    Config cfg;
    try
    {
        json file = json::object();
        if (!config_path.empty())
        {
            std::ifstream f(config_path);
            file = json::parse(f);
            if (!file.is_object())
                throw ArgumentError("config file must hold a JSON object");
        }
        cfg = resolve(exp, file, overrides[which], seed_opt, seed, reps_opt, reps, threads_opt, threads, out_opt, out);
    }
    catch (const json::exception& e)
    {
        std::cerr << "error: config: " << e.what() << "\n";
        return 1;
    }
    catch (const ArgumentError& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    set_thread_count(cfg.threads);

    Outcome o;
    json summary;
    summary["experiment"] = exp.name;
    summary["build"] = WFSIM_BUILD_ID;
    summary["config"] = cfg.to_json();
    try
    {
        o = exp.run(cfg);
    }
    catch (const ArgumentError& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    catch (const ContractError& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    catch (const std::exception& e)
    {
        o.checks.push_back({std::string("completed: ") + e.what(), false, 0, 0});
    }
    for (auto const& w : o.warnings)
        std::cerr << "warning: " << w << "\n";

    bool pass = true;
    json checks = json::array();
    for (auto const& ch : o.checks)
    {
        pass = pass && ch.pass;
        checks.push_back({{"name", ch.name}, {"pass", ch.pass}, {"value", ch.value}, {"limit", ch.limit}});
    }
    summary["results"] = o.results;
    summary["checks"] = checks;
    summary["pass"] = pass;

    fs::path dir(cfg.out);
    try
    {
        fs::create_directories(dir);
        for (auto const& t : o.tables)
            write_file(dir / t.name(), t.text());
        write_file(dir / "config.json", cfg.to_json().dump(2) + "\n");
        write_file(dir / "summary.json", summary.dump(2) + "\n");
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    for (auto const& ch : o.checks)
        std::cout << (ch.pass ? "PASS  " : "FAIL  ") << ch.name << "\n";
    std::cout << exp.name << ": " << (pass ? "all checks passed" : "check failure") << " (" << dir.string() << ")\n";
    return pass ? 0 : 2;
}
