#include "wfsim/chains.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wfsim/engine.hpp"
#include "wfsim/kernel.hpp"
#include "wfsim/stats.hpp"

namespace wfsim
{
namespace
{
constexpr double contract_slack = 1e-12;

double checked(double p, double x, const std::string& name)
{
    if (!(p >= -contract_slack && p <= 1 + contract_slack))
    {
        std::ostringstream os;
        os.precision(17);
        os << "drift '" << name << "' evaluates to " << p << " at x=" << x
           << ", outside [0,1]";
        throw ContractError(os.str());
    }
    return std::clamp(p, 0.0, 1.0);
}
}  // namespace

void FtwParams::validate() const
{
    if (!(delta > 0 && delta <= 1))
        throw ArgumentError("fittest-type-wins: delta must lie in (0,1]");
    if (!(theta0 >= 0) || !(theta1 >= 0))
        throw ArgumentError("fittest-type-wins: mutation rates must be nonnegative");
    for (std::size_t i = 0; i < sigma.size(); ++i)
    {
        if (!(sigma[i] > 0))
            throw ArgumentError("fittest-type-wins: sigma must be positive");
        if (i > 0 && sigma[i] > sigma[i - 1])
            throw ArgumentError("fittest-type-wins: sigma must be non-increasing");
    }
    double s0 = sigma.empty() ? 0.0 : sigma[0];
    if (!(delta0() * (s0 + theta0 + theta1) < 1))
        throw ArgumentError("fittest-type-wins: (2 delta/3)(sigma_0 + theta0 + theta1) must be < 1");
    if (!(sigma_tail >= 0 && sigma_tail < 1e-12))
        throw ArgumentError("fittest-type-wins: sigma truncation tail must be below 1e-12");
}

double FtwParams::drift(double x) const
{
    double series = 0.0;
    for (std::size_t i = sigma.size(); i-- > 0;)
        series = series * x + sigma[i];
    return x + delta0() * (-x * (1 - x) * series + theta0 * (1 - x) - theta1 * x);
}

std::pair<std::vector<double>, double> truncate_geometric_sigma(double s0, double r, double tol)
{
    if (!(s0 > 0) || !(r >= 0 && r < 1))
        throw ArgumentError("truncate_geometric_sigma: need s0 > 0 and 0 <= r < 1");
    std::vector<double> out;
    double term = s0;
    // Tail after J terms is s0 r^J / (1 - r)
    while (term / (1 - r) >= tol)
    {
        out.push_back(term);
        term *= r;
        if (term == 0)
            break;
    }
    return {out, term / (1 - r)};
}

DriftSpec::DriftSpec(Kind kind, std::string name, std::function<double(double)> f)
    : kind_(kind), name_(std::move(name)), f_(std::move(f))
{
}

void DriftSpec::check_contract() const
{
    constexpr int points = 10000;
    for (int i = 0; i <= points; ++i)
    {
        double x = static_cast<double>(i) / points;
        checked(f_(x), x, name_);
    }
}

DriftSpec DriftSpec::identity()
{
    return DriftSpec(Kind::identity, "identity", [](double x) { return x; });
}

DriftSpec DriftSpec::fittest_type_wins(FtwParams params)
{
    params.validate();
    DriftSpec d(Kind::fittest_type_wins, "fittest-type-wins", [params](double x) {
        return params.drift(x);
    });
    d.ftw_ = std::move(params);
    d.check_contract();
    return d;
}

DriftSpec DriftSpec::diffusion_scaled(std::function<double(double)> b, long N)
{
    if (N < 1)
        throw ArgumentError("diffusion-scaled drift: N must be positive");
    if (b(0.0) < 0 || b(1.0) > 0)
        throw ArgumentError("diffusion-scaled drift: requires b(0) >= 0 and b(1) <= 0");
    double k = 2.0 / std::sqrt(3.0 * static_cast<double>(N));
    DriftSpec d(Kind::diffusion_scaled,
                "diffusion-scaled(N=" + std::to_string(N) + ")",
                [b = std::move(b), k](double x) { return x + k * b(x); });
    d.N_ = N;
    d.check_contract();
    return d;
}

DriftSpec DriftSpec::tabulated(std::vector<double> values)
{
    if (values.size() < 2)
        throw ArgumentError("tabulated drift: need at least two grid values");
    DriftSpec d(Kind::tabulated, "tabulated", [v = std::move(values)](double x) {
        double pos = std::clamp(x, 0.0, 1.0) * static_cast<double>(v.size() - 1);
        auto i = std::min(static_cast<std::size_t>(pos), v.size() - 2);
        double t = pos - static_cast<double>(i);
        return v[i] * (1 - t) + v[i + 1] * t;
    });
    d.check_contract();
    return d;
}

DriftSpec DriftSpec::custom(std::function<double(double)> p, std::string name)
{
    DriftSpec d(Kind::custom, std::move(name), std::move(p));
    d.check_contract();
    return d;
}

double DriftSpec::operator()(double x) const
{
    return checked(f_(x), x, name_);
}

double chain_step(double delta, const DriftSpec& drift, double x, ReplicateStream& stream)
{
    double q = drift(x);
    double u = stream.uniform();
    double v = stream.uniform();
    return update_sup(q, delta, x, u, v);
}

ChainPath simulate_chain(double delta, const DriftSpec& drift, double z0, long n, ReplicateStream& stream)
{
    ChainPath path;
    path.reserve(static_cast<std::size_t>(n) + 1);
    path.push_back(z0);
    for (long i = 0; i < n; ++i)
        path.push_back(chain_step(delta, drift, path.back(), stream));
    return path;
}

double run_chain(double delta, const DriftSpec& drift, double z0, long n, ReplicateStream& stream)
{
    double z = z0;
    for (long i = 0; i < n; ++i)
        z = chain_step(delta, drift, z, stream);
    return z;
}

std::pair<ChainPath, ChainPath> coupled_chains(double delta,
                                               const DriftSpec& drift_p,
                                               const DriftSpec& drift_q,
                                               double x0,
                                               double y0,
                                               long n,
                                               ReplicateStream& stream)
{
    ChainPath zp{x0}, zq{y0};
    zp.reserve(static_cast<std::size_t>(n) + 1);
    zq.reserve(static_cast<std::size_t>(n) + 1);
    for (long i = 0; i < n; ++i)
    {
        double x = zp.back(), y = zq.back();
        auto [xn, yn] = coupled_step(x, y, drift_p(x), drift_q(y), delta, stream);
        zp.push_back(xn);
        zq.push_back(yn);
    }
    return {std::move(zp), std::move(zq)};
}

std::vector<double>
coupled_gap_bound(double delta, double lipschitz, double sup_drift_gap, double gap0, long n)
{
    std::vector<double> e(static_cast<std::size_t>(n) + 1);
    e[0] = gap0;
    for (long i = 1; i <= n; ++i)
        e[i] = (1 - delta * (1 - lipschitz) / 2) * e[i - 1] + delta / 2 * sup_drift_gap;
    return e;
}

FixationEstimate fixation_estimate(double delta,
                                   const DriftSpec& drift,
                                   double z0,
                                   long horizon,
                                   double eps,
                                   std::size_t reps,
                                   std::uint64_t master_seed)
{
    if (reps == 0)
        throw ArgumentError("fixation_estimate: reps must be positive");
    auto ends = map_replicates<double>(reps, master_seed, [&](std::uint64_t, ReplicateStream& s) {
        return run_chain(delta, drift, z0, horizon, s);
    });
    std::size_t n0 = 0, n1 = 0;
    for (double z : ends)
    {
        if (z < eps)
            ++n0;
        else if (z > 1 - eps)
            ++n1;
    }
    double r = static_cast<double>(reps);
    FixationEstimate f;
    f.p_fix0 = static_cast<double>(n0) / r;
    f.p_fix1 = static_cast<double>(n1) / r;
    f.p_undecided = 1 - f.p_fix0 - f.p_fix1;
    f.stderr0 = std::sqrt(f.p_fix0 * (1 - f.p_fix0) / r);
    f.stderr1 = std::sqrt(f.p_fix1 * (1 - f.p_fix1) / r);
    return f;
}

SeriesEstimate heterozygosity_series(double delta, double z0, long n_max, std::size_t reps, std::uint64_t master_seed)
{
    auto neutral = DriftSpec::identity();
    auto paths = map_replicates<ChainPath>(reps, master_seed, [&](std::uint64_t, ReplicateStream& s) {
        return simulate_chain(delta, neutral, z0, n_max, s);
    });
    SeriesEstimate out;
    for (long n = 0; n <= n_max; ++n)
    {
        MeanAccumulator acc;
        for (auto const& p : paths)
            acc.add(p[n] * (1 - p[n]));
        out.mean.push_back(acc.mean);
        out.stderr.push_back(acc.stderr_mean());
    }
    return out;
}

HeterozygosityFit fit_heterozygosity(const SeriesEstimate& h, double delta)
{
    std::vector<double> x, y, s;
    for (std::size_t n = 1; n < h.mean.size(); ++n)
    {
        if (!(h.mean[n] > 0) || !(h.stderr[n] > 0))
            continue;
        x.push_back(static_cast<double>(n));
        y.push_back(std::log(h.mean[n]));
        s.push_back(h.stderr[n] / h.mean[n]);
    }
    auto fit = linear_fit(x, y, s);
    HeterozygosityFit r;
    r.slope = fit.slope;
    r.slope_stderr = fit.slope_stderr;
    r.expected = std::log(1 - delta * delta / 3);
    r.relative_error = std::abs(r.slope - r.expected) / std::abs(r.expected);
    return r;
}

}  // namespace wfsim
