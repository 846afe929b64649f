#include "wfsim/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wfsim/engine.hpp"
#include "wfsim/kernel.hpp"
#include "wfsim/stats.hpp"

namespace wfsim
{
double HostSystemState::mean() const
{
    if (z.empty())
        throw ArgumentError("HostSystemState: empty system");
    return std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(z.size());
}

HostSystemState system_init(std::size_t M, const GridSampler& mu0, ReplicateStream& stream)
{
    if (M == 0)
        throw ArgumentError("system_init: M must be positive");
    HostSystemState s;
    s.z.resize(M);
    for (auto& x : s.z)
        x = mu0(stream.uniform());
    return s;
}

void system_step_inplace(HostSystemState& state,
                         double delta,
                         const NonLinearDrift& drift,
                         const ReplicateStream& stream,
                         std::vector<double>& q)
{
    std::size_t const M = state.z.size();
    LawSummary mu{state.mean(), nullptr, &state.z};
    q.resize(M);
    for (std::size_t i = 0; i < M; ++i)
        q[i] = drift(state.z[i], mu);
    std::uint64_t base = static_cast<std::uint64_t>(state.generation) * M;
    for (std::size_t i = 0; i < M; ++i)
    {
        auto uv = stream.block_uniforms(base + i);
        state.z[i] = update_sup(q[i], delta, state.z[i], uv[0], uv[1]);
    }
    ++state.generation;
}

HostSystemState system_step(const HostSystemState& state, double delta, const NonLinearDrift& drift, const ReplicateStream& stream)
{
    HostSystemState next = state;
    std::vector<double> q;
    system_step_inplace(next, delta, drift, stream, q);
    return next;
}

HostSystemState system_run(HostSystemState state, double delta, const NonLinearDrift& drift, long n, const ReplicateStream& stream)
{
    std::vector<double> q;
    for (long t = 0; t < n; ++t)
        system_step_inplace(state, delta, drift, stream, q);
    return state;
}

namespace
{
struct CoupledOutcome
{
    std::vector<double> gap;  // coordinate-averaged, per generation
    double first_system;      // Z^M_{n,1}
};

CoupledOutcome coupled_replicate(std::size_t M,
                                 double delta,
                                 const NonLinearDrift& drift,
                                 const LawFlow& flow,
                                 const GridSampler& sampler,
                                 long n,
                                 ReplicateStream& s)
{
    auto init = s.split(1);
    auto dyn = s.split(2);
    std::vector<double> z(M), zb(M), q(M);
    for (std::size_t i = 0; i < M; ++i)
        z[i] = zb[i] = sampler(init.uniform());
    CoupledOutcome out;
    out.gap.reserve(static_cast<std::size_t>(n) + 1);
    out.gap.push_back(0.0);
    for (long t = 0; t < n; ++t)
    {
        double m = std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(M);
        LawSummary emp{m, nullptr, &z};
        LawSummary law = flow.summary(t);
        for (std::size_t i = 0; i < M; ++i)
            q[i] = drift(z[i], emp);
        double gap = 0;
        std::uint64_t base = 2 * (static_cast<std::uint64_t>(t) * M);
        for (std::size_t i = 0; i < M; ++i)
        {
            auto a = dyn.block_uniforms(base + 2 * i);
            auto b = dyn.block_uniforms(base + 2 * i + 1);
            auto [x, y] = coupled_step_with(z[i], zb[i], q[i], drift(zb[i], law), delta, a[0], a[1], b[0]);
            z[i] = x;
            zb[i] = y;
            gap += std::abs(x - y);
        }
        out.gap.push_back(gap / static_cast<double>(M));
    }
    out.first_system = z[0];
    return out;
}
}  // namespace

SeriesEstimate twolevel_coupled_run(std::size_t M,
                                    double delta,
                                    const NonLinearDrift& drift,
                                    const GridDensity& mu0,
                                    long n,
                                    std::size_t reps,
                                    std::uint64_t master_seed)
{
    if (M == 0 || reps < 2)
        throw ArgumentError("twolevel_coupled_run: need M >= 1 and at least two replicates");
    auto flow = law_flow(mu0, delta, drift, n);
    GridSampler sampler(flow.at(0));
    auto outs = map_replicates<std::vector<double>>(reps, master_seed, [&](std::uint64_t, ReplicateStream& s) {
        return coupled_replicate(M, delta, drift, flow, sampler, n, s).gap;
    });
    SeriesEstimate r;
    for (long t = 0; t <= n; ++t)
    {
        MeanAccumulator acc;
        for (auto const& g : outs)
            acc.add(g[t]);
        r.mean.push_back(acc.mean);
        r.stderr.push_back(acc.stderr_mean());
    }
    return r;
}

ChaosRateResult chaos_rate_experiment(const std::vector<std::size_t>& M_list,
                                      double delta,
                                      const NonLinearDrift& drift,
                                      const GridDensity& mu0,
                                      long n,
                                      std::size_t reps,
                                      std::uint64_t master_seed)
{
    if (M_list.size() < 2 || reps < 2)
        throw ArgumentError("chaos_rate_experiment: need two host counts and two replicates");
    if (!(drift.L1() + drift.L2() < 1))
        throw ArgumentError("chaos_rate_experiment: requires L1 + L2 < 1");
    auto flow = law_flow(mu0, delta, drift, n);
    GridSampler sampler(flow.at(0));
    GridSampler terminal(flow.at(n));
    ChaosRateResult r;
    std::vector<double> lx, ly_c, sig_c, ly_d;
    for (std::size_t k = 0; k < M_list.size(); ++k)
    {
        std::size_t M = M_list[k];
        std::uint64_t seed = splitmix64(master_seed ^ splitmix64(M));
        auto outs = map_replicates<CoupledOutcome>(reps, seed, [&](std::uint64_t, ReplicateStream& s) {
            return coupled_replicate(M, delta, drift, flow, sampler, n, s);
        });
        MeanAccumulator acc;
        std::vector<double> first(reps);
        for (std::size_t i = 0; i < reps; ++i)
        {
            acc.add(outs[i].gap.back());
            first[i] = outs[i].first_system;
        }
        ReplicateStream fs(seed, 0, 3);
        std::vector<double> ref(reps);
        for (auto& x : ref)
            x = terminal(fs.uniform());
        ChaosPoint p{M,
                     n,
                     w1_sample_vs_grid(first, flow.at(n)),
                     w1_sample_vs_grid(ref, flow.at(n)),
                     acc.mean,
                     acc.stderr_mean()};
        r.points.push_back(p);
        lx.push_back(std::log(static_cast<double>(M)));
        ly_c.push_back(std::log(p.w1_coupling));
        sig_c.push_back(p.coupling_stderr / p.w1_coupling);
        ly_d.push_back(std::log(p.w1_direct));
    }
    auto fc = linear_fit(lx, ly_c, sig_c);
    r.slope_coupling = fc.slope;
    r.slope_coupling_stderr = fc.slope_stderr;
    r.slope_direct = linear_fit(lx, ly_d).slope;
    return r;
}

GlivenkoCantelli glivenko_cantelli_check(double a,
                                         double b,
                                         const std::vector<std::size_t>& sizes,
                                         std::size_t reps,
                                         std::uint64_t master_seed)
{
    GlivenkoCantelli g;
    g.sizes = sizes;
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < sizes.size(); ++k)
    {
        std::size_t N = sizes[k];
        auto w = map_replicates<double>(reps, splitmix64(master_seed + k), [&](std::uint64_t, ReplicateStream& s) {
            return w1_empirical_vs_beta(beta_samples(a, b, N, s), a, b);
        });
        double m = mean(w);
        g.mean_w1.push_back(m);
        lx.push_back(std::log(static_cast<double>(N)));
        ly.push_back(std::log(m));
    }
    g.slope = linear_fit(lx, ly).slope;
    return g;
}

double ScalingParams::delta() const
{
    if (N < 1)
        throw ArgumentError("ScalingParams: N must be positive");
    return std::sqrt(3.0 / static_cast<double>(N));
}

long ScalingParams::generations(double t) const
{
    if (!(t >= 0))
        throw ArgumentError("ScalingParams: time must be nonnegative");
    return static_cast<long>(std::floor(static_cast<double>(N) * t + 1e-9));
}

ScaledRun scaled_system_run(const ScalingParams& scaling,
                            const NonLinearDrift& drift,
                            const GridDensity& mu0,
                            double t_end,
                            std::size_t reps,
                            std::uint64_t master_seed)
{
    double delta = scaling.delta();
    long n = scaling.generations(t_end);
    std::size_t M = scaling.M_of_N(scaling.N);
    if (M == 0)
        throw ArgumentError("scaled_system_run: M(N) must be positive");
    GridSampler sampler(mu0);
    ScaledRun r;
    r.system = map_replicates<double>(reps, master_seed, [&](std::uint64_t, ReplicateStream& s) {
        auto init = s.split(1);
        auto state = system_init(M, sampler, init);
        return system_run(std::move(state), delta, drift, n, s.split(2)).z[0];
    });
    auto flow = law_flow(mu0, delta, drift, n);
    r.nonlinear = nonlinear_endpoints(flow, delta, drift, n, reps, splitmix64(master_seed ^ 0x5eedULL));
    return r;
}

std::vector<double> pooled_system_samples(std::size_t M,
                                          double delta,
                                          const NonLinearDrift& drift,
                                          const GridDensity& mu0,
                                          long n,
                                          std::size_t samples,
                                          std::uint64_t master_seed)
{
    if (M == 0 || samples == 0)
        throw ArgumentError("pooled_system_samples: M and samples must be positive");
    std::size_t systems = (samples + M - 1) / M;
    GridSampler sampler(mu0);
    auto outs = map_replicates<std::vector<double>>(systems, master_seed, [&](std::uint64_t, ReplicateStream& s) {
        auto init = s.split(1);
        auto state = system_init(M, sampler, init);
        return system_run(std::move(state), delta, drift, n, s.split(2)).z;
    });
    std::vector<double> pooled;
    pooled.reserve(systems * M);
    for (auto const& o : outs)
        pooled.insert(pooled.end(), o.begin(), o.end());
    pooled.resize(samples);
    return pooled;
}

}  // namespace wfsim
