#include "wfsim/nonlinear.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

#include "wfsim/engine.hpp"
#include "wfsim/kernel.hpp"
#include "wfsim/stats.hpp"

namespace wfsim
{
namespace
{
constexpr double contract_slack = 1e-12;

ChainPath path_with_sampler(const LawFlow& flow,
                            const GridSampler& sampler,
                            double delta,
                            const NonLinearDrift& drift,
                            long n,
                            ReplicateStream& stream)
{
    ChainPath path;
    path.reserve(static_cast<std::size_t>(n) + 1);
    double z = sampler(stream.uniform());
    path.push_back(z);
    for (long t = 0; t < n; ++t)
    {
        double q = drift(z, flow.summary(t));
        double u = stream.uniform();
        double v = stream.uniform();
        z = update_sup(q, delta, z, u, v);
        path.push_back(z);
    }
    return path;
}
}  // namespace

NonLinearDrift NonLinearDrift::affine(double a, double b, double c, bool allow_range_extension)
{
    NonLinearDrift d;
    d.f_ = [a, b, c](double x, const LawSummary& mu) { return a + b * x + c * mu.mean; };
    d.L1_ = std::abs(b);
    d.L2_ = std::abs(c);
    d.mean_only_ = true;
    d.affine_ = true;
    d.a_ = a;
    d.b_ = b;
    d.c_ = c;
    std::ostringstream os;
    os << "affine(a=" << a << ", b=" << b << ", c=" << c << ")";
    d.name_ = os.str();
    bool corners_ok = true;
    for (double x : {0.0, 1.0})
        for (double m : {0.0, 1.0})
        {
            double p = a + b * x + c * m;
            corners_ok = corners_ok && p >= -contract_slack && p <= 1 + contract_slack;
        }
    if (!corners_ok && !allow_range_extension)
        throw ArgumentError(d.name_ + " leaves [0,1] on [0,1]^2");
    d.extended_ = !corners_ok;
    return d;
}

NonLinearDrift NonLinearDrift::epsilon_interpolated(double a, double b, double eps)
{
    if (!(eps >= 0 && eps <= 1))
        throw ArgumentError("epsilon_interpolated: eps must lie in [0,1]");
    auto d = affine(a, b * eps, b * (1 - eps));
    std::ostringstream os;
    os << "epsilon-interpolated(a=" << a << ", b=" << b << ", eps=" << eps << ")";
    d.name_ = os.str();
    return d;
}

NonLinearDrift NonLinearDrift::diffusion_scaled(Fn bbar, long N, double L1, double L2, bool mean_only)
{
    if (N < 1)
        throw ArgumentError("diffusion_scaled: N must be positive");
    double k = 2.0 / std::sqrt(3.0 * static_cast<double>(N));
    for (auto const& g : probe_laws())
    {
        LawSummary s{g.mean(), &g};
        if (bbar(0.0, s) < 0 || bbar(1.0, s) > 0)
            throw ArgumentError("diffusion_scaled: requires bbar(0,mu) >= 0 and bbar(1,mu) <= 0");
    }
    NonLinearDrift d;
    d.f_ = [bbar = std::move(bbar), k](double x, const LawSummary& mu) { return x + k * bbar(x, mu); };
    d.L1_ = L1;
    d.L2_ = L2;
    d.mean_only_ = mean_only;
    d.name_ = "diffusion-scaled(N=" + std::to_string(N) + ")";
    d.validate_probes();
    return d;
}

NonLinearDrift NonLinearDrift::general(Fn f, double L1, double L2, std::string name, bool mean_only)
{
    if (!(L1 >= 0) || !(L2 >= 0))
        throw ArgumentError("general drift: Lipschitz constants must be nonnegative");
    NonLinearDrift d;
    d.f_ = std::move(f);
    d.L1_ = L1;
    d.L2_ = L2;
    d.mean_only_ = mean_only;
    d.name_ = std::move(name);
    d.validate_probes();
    return d;
}

NonLinearDrift NonLinearDrift::linear(const DriftSpec& p)
{
    NonLinearDrift d;
    d.f_ = [p](double x, const LawSummary&) { return p(x); };
    d.L1_ = 1;
    d.L2_ = 0;
    d.mean_only_ = true;
    d.name_ = p.name();
    return d;
}

double NonLinearDrift::operator()(double x, const LawSummary& mu) const
{
    double p = f_(x, mu);
    if (!(p >= -contract_slack && p <= 1 + contract_slack))
    {
        std::ostringstream os;
        os.precision(17);
        os << "drift '" << name_ << "' evaluates to " << p << " at x=" << x
           << ", mean=" << mu.mean << ", outside [0,1]";
        throw ContractError(os.str());
    }
    return std::clamp(p, 0.0, 1.0);
}

void NonLinearDrift::validate_probes() const
{
    if (extended_)
        return;
    constexpr int points = 1000;
    if (mean_only_)
    {
        for (int j = 0; j <= 100; ++j)
            for (int i = 0; i <= points; ++i)
                (*this)(static_cast<double>(i) / points, LawSummary{j / 100.0});
        return;
    }
    for (auto const& g : probe_laws())
    {
        LawSummary s{g.mean(), &g};
        for (int i = 0; i <= points; ++i)
            (*this)(static_cast<double>(i) / points, s);
    }
}

std::vector<GridDensity> probe_laws(std::size_t grid_size)
{
    return {GridDensity::uniform(grid_size),
            GridDensity::beta(grid_size, 2, 5),
            GridDensity::beta(grid_size, 5, 2),
            GridDensity::beta(grid_size, 0.5, 0.5),
            GridDensity::point_mass(grid_size, 0.0),
            GridDensity::point_mass(grid_size, 0.5),
            GridDensity::point_mass(grid_size, 1.0)};
}

LipschitzCheck lipschitz_spot_check(const NonLinearDrift& drift, std::size_t samples, std::uint64_t seed)
{
    constexpr std::size_t grid = 256;
    auto probes = probe_laws(grid);
    ReplicateStream s(seed, 0);
    LipschitzCheck out{samples, 0, -INFINITY};
    for (std::size_t i = 0; i < samples; ++i)
    {
        GridDensity mu, nu;
        if (i % 2 == 0)
        {
            mu = probes[static_cast<std::size_t>(s.uniform() * probes.size()) % probes.size()];
            nu = probes[static_cast<std::size_t>(s.uniform() * probes.size()) % probes.size()];
        }
        else
        {
            mu = GridDensity::point_mass(grid, s.uniform());
            nu = GridDensity::point_mass(grid, s.uniform());
        }
        double x = s.uniform(), y = s.uniform();
        double lhs = std::abs(drift(x, LawSummary{mu.mean(), &mu}) - drift(y, LawSummary{nu.mean(), &nu}));
        double rhs = drift.L1() * std::abs(x - y) + drift.L2() * w1_grid(mu, nu);
        out.worst_excess = std::max(out.worst_excess, lhs - rhs);
        if (lhs > rhs + 1e-12)
            ++out.violations;
    }
    return out;
}

GridDensity propagate_law(const GridDensity& mu, double delta, const NonLinearDrift& drift)
{
    LawSummary s{mu.mean(), &mu};
    std::vector<double> p_cell(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i)
        p_cell[i] = drift(mu.midpoint(i), s);
    return apply_transfer(mu, p_cell, delta);
}

const GridDensity& LawFlow::at(long n) const
{
    if (laws.empty())
        throw ArgumentError("LawFlow: empty flow");
    auto i = std::min(static_cast<std::size_t>(std::max(n, 0L)), laws.size() - 1);
    return laws[i];
}

LawSummary LawFlow::summary(long n) const
{
    if (laws.empty())
        throw ArgumentError("LawFlow: empty flow");
    auto i = std::min(static_cast<std::size_t>(std::max(n, 0L)), laws.size() - 1);
    return {means[i], &laws[i], nullptr};
}

LawFlow law_flow(const GridDensity& mu0, double delta, const NonLinearDrift& drift, long n)
{
    if (n < 0)
        throw ArgumentError("law_flow: n must be nonnegative");
    LawFlow f;
    GridDensity g = mu0;
    g.normalize();
    f.means.push_back(g.mean());
    f.laws.push_back(std::move(g));
    for (long t = 0; t < n; ++t)
    {
        auto next = propagate_law(f.laws.back(), delta, drift);
        f.means.push_back(next.mean());
        f.laws.push_back(std::move(next));
    }
    return f;
}

StationaryLaw stationary_law(const GridDensity& mu0, double delta, const NonLinearDrift& drift, double tol, long max_iter)
{
    GridDensity g = mu0;
    g.normalize();
    double residual = 0;
    for (long it = 1; it <= max_iter; ++it)
    {
        auto next = propagate_law(g, delta, drift);
        residual = 0;
        for (std::size_t i = 0; i < g.size(); ++i)
            residual = std::max(residual, std::abs(next[i] - g[i]));
        g = std::move(next);
        if (residual < tol)
            return {std::move(g), it, residual};
    }
    throw ConvergenceError("stationary_law: no convergence within " + std::to_string(max_iter)
                               + " steps, last sup-norm change " + std::to_string(residual),
                           residual,
                           max_iter);
}

ChainPath nonlinear_chain_path(const LawFlow& flow, double delta, const NonLinearDrift& drift, long n, ReplicateStream& stream)
{
    GridSampler sampler(flow.at(0));
    return path_with_sampler(flow, sampler, delta, drift, n, stream);
}

std::pair<ChainPath, LawFlow> nonlinear_chain_simulate(
    const GridDensity& mu0, double delta, const NonLinearDrift& drift, long n, ReplicateStream& stream)
{
    auto flow = law_flow(mu0, delta, drift, n);
    auto path = nonlinear_chain_path(flow, delta, drift, n, stream);
    return {std::move(path), std::move(flow)};
}

std::vector<double> nonlinear_endpoints(const LawFlow& flow,
                                        double delta,
                                        const NonLinearDrift& drift,
                                        long n,
                                        std::size_t reps,
                                        std::uint64_t master_seed)
{
    GridSampler sampler(flow.at(0));
    return map_replicates<double>(reps, master_seed, [&](std::uint64_t, ReplicateStream& s) {
        double z = sampler(s.uniform());
        for (long t = 0; t < n; ++t)
        {
            double q = drift(z, flow.summary(t));
            double u = s.uniform();
            double v = s.uniform();
            z = update_sup(q, delta, z, u, v);
        }
        return z;
    });
}

SeriesEstimate nonlinear_coupling(const NonLinearDrift& drift_p,
                                  const NonLinearDrift& drift_q,
                                  double delta,
                                  const GridDensity& mu0_p,
                                  const GridDensity& mu0_q,
                                  long n,
                                  std::size_t reps,
                                  std::uint64_t master_seed)
{
    if (reps < 2)
        throw ArgumentError("nonlinear_coupling: need at least two replicates");
    auto fp = law_flow(mu0_p, delta, drift_p, n);
    auto fq = law_flow(mu0_q, delta, drift_q, n);
    GridSampler sp(fp.at(0)), sq(fq.at(0));
    auto gaps = map_replicates<std::vector<double>>(reps, master_seed, [&](std::uint64_t, ReplicateStream& s) {
        double u0 = s.uniform();
        double x = sp(u0), y = sq(u0);
        std::vector<double> g{std::abs(x - y)};
        g.reserve(static_cast<std::size_t>(n) + 1);
        for (long t = 0; t < n; ++t)
        {
            std::tie(x, y) = coupled_step(x, y, drift_p(x, fp.summary(t)), drift_q(y, fq.summary(t)), delta, s);
            g.push_back(std::abs(x - y));
        }
        return g;
    });
    SeriesEstimate out;
    for (long t = 0; t <= n; ++t)
    {
        MeanAccumulator acc;
        for (auto const& g : gaps)
            acc.add(g[t]);
        out.mean.push_back(acc.mean);
        out.stderr.push_back(acc.stderr_mean());
    }
    return out;
}

FixedPoint invariant_fixed_point_mean_only(const NonLinearDrift& drift, double delta, double tol, std::size_t grid_size)
{
    for (auto const& g : probe_laws())
    {
        LawSummary s{g.mean(), &g};
        double p0 = drift(0.0, s);
        if (std::abs(drift(0.5, s) - p0) > 1e-12 || std::abs(drift(1.0, s) - p0) > 1e-12)
            throw ArgumentError("invariant_fixed_point_mean_only: drift depends on x");
    }
    auto law_at = [&](double s) {
        if (s <= 0)
            return GridDensity::point_mass(grid_size, 0.0);
        if (s >= 1)
            return GridDensity::point_mass(grid_size, 1.0);
        return invariant_density(delta, s, grid_size).density;
    };
    auto g = [&](double s) {
        if (drift.mean_only())
            return drift(0.0, LawSummary{s}) - s;
        auto law = law_at(s);
        return drift(0.0, LawSummary{s, &law}) - s;
    };
    double lo = 0, hi = 1;
    double glo = g(lo), ghi = g(hi);
    if (glo < 0 || ghi > 0)
        throw ConvergenceError("invariant_fixed_point_mean_only: no sign change on [0,1]", std::min(std::abs(glo), std::abs(ghi)), 0);
    long it = 0;
    if (glo == 0)
        hi = 0;
    else if (ghi == 0)
        lo = 1;
    while (hi - lo > tol)
    {
        ++it;
        double mid = 0.5 * (lo + hi);
        if (g(mid) > 0)
            lo = mid;
        else
            hi = mid;
    }
    double s = 0.5 * (lo + hi);
    return {s, law_at(s), it};
}

PerturbationStats perturbation_stats(double a, double b, double epsilon, double delta)
{
    if (!(a > 0 && a < 1) || !(b > 0 && b < 0.5) || !(a + b < 1) || !(epsilon >= 0 && epsilon <= 1))
        throw ArgumentError("perturbation_stats: need a in (0,1), b in (0,1/2), a+b < 1, eps in [0,1]");
    if (!(delta > 0 && delta <= 1))
        throw ArgumentError("perturbation_stats: delta must lie in (0,1]");
    double s = a / (1 - b);
    double v0 = invariant_variance(delta, s);
    return {s, v0 / (1 - epsilon * b * (3 - 2 * delta) / (3 - delta))};
}

double perturbation_moment_bound(int k, double b, double epsilon)
{
    return k * 2 * b * epsilon / (1 - 2 * b);
}

ErgodicityReport nonlinear_ergodicity(const NonLinearDrift& drift,
                                      double delta,
                                      const GridDensity& mu0,
                                      long n,
                                      std::size_t reps,
                                      std::uint64_t master_seed)
{
    ErgodicityReport r;
    r.factor = 1 - delta * (1 - drift.L1() - drift.L2()) / 2;
    auto eta = stationary_law(mu0, delta, drift).law;
    r.gap = nonlinear_coupling(drift, drift, delta, eta, mu0, n, reps, master_seed);
    double e0 = w1_grid(eta, mu0);
    r.bound_violations = 0;
    std::vector<double> x, y, sig;
    for (long t = 0; t <= n; ++t)
    {
        double b = e0 * std::pow(r.factor, static_cast<double>(t));
        r.bound.push_back(b);
        if (r.gap.mean[t] > b + 3 * r.gap.stderr[t])
            ++r.bound_violations;
        if (t > 0 && r.gap.mean[t] > 5 * r.gap.stderr[t])
        {
            x.push_back(static_cast<double>(t));
            y.push_back(std::log(r.gap.mean[t]));
            sig.push_back(r.gap.stderr[t] / r.gap.mean[t]);
        }
    }
    if (x.size() >= 3)
    {
        auto fit = linear_fit(x, y, sig);
        r.fitted_factor = std::exp(fit.slope);
        r.fitted_factor_stderr = r.fitted_factor * fit.slope_stderr;
    }
    else
    {
        r.fitted_factor = NAN;
        r.fitted_factor_stderr = NAN;
    }
    return r;
}

}  // namespace wfsim
