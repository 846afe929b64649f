#include "wfsim/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>
#include <string>

#include "wfsim/chains.hpp"
#include "wfsim/engine.hpp"
#include "wfsim/stats.hpp"

namespace wfsim
{
namespace
{
struct Clamped
{
    double x;
    bool clamped;
};

Clamped em_step(double x, double drift, double dt, double sqdt, double xi)
{
    double next = x + drift * dt + std::sqrt(std::max(x * (1 - x), 0.0)) * sqdt * xi;
    if (next < 0)
        return {0.0, true};
    if (next > 1)
        return {1.0, true};
    return {next, false};
}

//! W1 of the full samples plus a batch-based standard error
std::pair<double, double> w1_with_stderr(const std::vector<double>& a, const std::vector<double>& b)
{
    constexpr std::size_t batches = 10;
    double w = w1_empirical(a, b);
    std::size_t len = a.size() / batches;
    if (len < 2)
        return {w, NAN};
    std::vector<double> ws;
    for (std::size_t k = 0; k < batches; ++k)
    {
        std::vector<double> x(a.begin() + k * len, a.begin() + (k + 1) * len);
        std::vector<double> y(b.begin() + k * len, b.begin() + (k + 1) * len);
        ws.push_back(w1_empirical(std::move(x), std::move(y)));
    }
    return {w, std::sqrt(variance(ws) / batches)};
}
}  // namespace

InitialLaw initial_point(double x0)
{
    if (!(x0 >= 0 && x0 <= 1))
        throw ArgumentError("initial_point: x0 must lie in [0,1]");
    return [x0](ReplicateStream&) { return x0; };
}

InitialLaw initial_grid(const GridDensity& mu0)
{
    auto sampler = std::make_shared<GridSampler>(mu0);
    return [sampler](ReplicateStream& s) { return (*sampler)(s.uniform()); };
}

InitialLaw initial_beta(double a, double b)
{
    if (!(a > 0 && b > 0))
        throw ArgumentError("initial_beta: shapes must be positive");
    return [a, b](ReplicateStream& s) { return beta_sample(a, b, s); };
}

void SDEParams::validate() const
{
    if (!b)
        throw ArgumentError("SDEParams: drift is not set");
    if (!(dt > 0))
        throw ArgumentError("SDEParams: dt must be positive");
    if (!(t_end >= 0))
        throw ArgumentError("SDEParams: t_end must be nonnegative");
    if (b(0.0) < 0 || b(1.0) > 0)
        throw ArgumentError("SDEParams: requires b(0) >= 0 and b(1) <= 0");
}

long SDEParams::steps() const
{
    return static_cast<long>(std::llround(t_end / dt));
}

std::function<double(double)> mutation_drift(double theta0, double theta1)
{
    if (!(theta0 >= 0 && theta1 >= 0))
        throw ArgumentError("mutation_drift: rates must be nonnegative");
    return [theta0, theta1](double x) { return theta0 * (1 - x) - theta1 * x; };
}

EmResult em_wf_simulate(const SDEParams& params, const InitialLaw& x0, std::size_t reps, std::uint64_t master_seed)
{
    params.validate();
    long const steps = params.steps();
    double const dt = params.dt, sqdt = std::sqrt(params.dt);
    auto outs = map_replicates<std::pair<double, long>>(reps, master_seed, [&](std::uint64_t, ReplicateStream& s) {
        std::normal_distribution<double> normal;
        double x = x0(s);
        long clamps = 0;
        for (long t = 0; t < steps; ++t)
        {
            auto r = em_step(x, params.b(x), dt, sqdt, normal(s));
            x = r.x;
            clamps += r.clamped ? 1 : 0;
        }
        return std::pair<double, long>{x, clamps};
    });
    EmResult res;
    double clamps = 0;
    for (auto const& o : outs)
    {
        res.terminal.push_back(o.first);
        clamps += static_cast<double>(o.second);
    }
    double total = static_cast<double>(reps) * static_cast<double>(steps);
    res.clamp_rate = total > 0 ? clamps / total : 0.0;
    return res;
}

void CaseStudyParams::validate() const
{
    if (!(theta0 > 0 && theta1 > 0))
        throw ArgumentError("case study: mutation rates must be positive");
    if (!(gamma >= 0))
        throw ArgumentError("case study: gamma must be nonnegative");
    if (gamma >= 1 && !allow_range_extension)
        throw ArgumentError("case study: gamma >= 1 requires the range-extension flag");
}

double CaseStudyParams::drift(double x, double mean) const
{
    return theta0 * (1 - x) - theta1 * x - gamma * (x - mean);
}

NonLinearDrift CaseStudyParams::scaled_drift(long N) const
{
    validate();
    if (N < 1)
        throw ArgumentError("case study: N must be positive");
    double k = 2.0 / std::sqrt(3.0 * static_cast<double>(N));
    return NonLinearDrift::affine(k * theta0, 1 - k * (theta0 + theta1 + gamma), k * gamma, allow_range_extension);
}

CaseStudyInvariant case_study_invariant(const CaseStudyParams& c)
{
    c.validate();
    double m = c.m();
    double second = m * (2 * (c.theta0 + c.gamma * m) + 1) / (2 * (c.theta0 + c.theta1 + c.gamma) + 1);
    return {2 * c.theta0_bar(), 2 * c.theta1_bar(), m, second - m * m};
}

MvParticleResult mv_particle_em_simulate(std::size_t K,
                                         const std::function<double(double, double)>& bbar,
                                         double dt,
                                         double t_end,
                                         const InitialLaw& x0,
                                         std::uint64_t master_seed,
                                         const std::vector<double>& snapshot_times)
{
    if (K < 2)
        throw ArgumentError("mv_particle_em_simulate: need at least two particles");
    if (!(dt > 0) || !(t_end >= 0))
        throw ArgumentError("mv_particle_em_simulate: need dt > 0 and t_end >= 0");
    std::vector<ReplicateStream> streams;
    std::vector<std::normal_distribution<double>> normals(K);
    std::vector<double> x(K);
    streams.reserve(K);
    for (std::size_t i = 0; i < K; ++i)
    {
        streams.push_back(derive_stream(master_seed, i));
        x[i] = x0(streams[i]);
    }
    std::vector<long> snap_steps;
    for (double t : snapshot_times)
        snap_steps.push_back(std::llround(t / dt));
    MvParticleResult r;
    r.snapshots.resize(snapshot_times.size());
    auto record = [&](long step) {
        for (std::size_t j = 0; j < snap_steps.size(); ++j)
            if (snap_steps[j] == step)
                r.snapshots[j] = x;
    };
    long const steps = std::llround(t_end / dt);
    double const sqdt = std::sqrt(dt);
    double clamps = 0;
    record(0);
    for (long t = 0; t < steps; ++t)
    {
        double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(K);
        for (std::size_t i = 0; i < K; ++i)
        {
            auto c = em_step(x[i], bbar(x[i], m), dt, sqdt, normals[i](streams[i]));
            x[i] = c.x;
            clamps += c.clamped ? 1 : 0;
        }
        record(t + 1);
    }
    r.terminal = x;
    double total = static_cast<double>(K) * static_cast<double>(steps);
    r.clamp_rate = total > 0 ? clamps / total : 0.0;
    return r;
}

std::vector<double> scaled_chain_sample(
    long N, const std::function<double(double)>& b, const InitialLaw& x0, double t, std::size_t reps, std::uint64_t master_seed)
{
    ScalingParams sp{N};
    auto drift = DriftSpec::diffusion_scaled(b, N);
    double delta = sp.delta();
    long n = sp.generations(t);
    return map_replicates<double>(reps, master_seed, [&](std::uint64_t, ReplicateStream& s) {
        double z = x0(s);
        return run_chain(delta, drift, z, n, s);
    });
}

ScalingLimitResult scaling_limit_check(const std::vector<long>& N_list,
                                       const std::function<double(double)>& b,
                                       const InitialLaw& x0,
                                       double t,
                                       std::size_t reps,
                                       std::uint64_t master_seed,
                                       double dt_reference)
{
    ScalingLimitResult r;
    auto ref = em_wf_simulate(SDEParams{b, dt_reference, t}, x0, reps, splitmix64(master_seed ^ 0xe3ULL));
    r.reference_clamp_rate = ref.clamp_rate;
    for (long N : N_list)
    {
        auto sample = scaled_chain_sample(N, b, x0, t, reps, splitmix64(master_seed + static_cast<std::uint64_t>(N)));
        auto [w, se] = w1_with_stderr(sample, ref.terminal);
        r.points.push_back({N, w, se});
    }
    r.decreasing = true;
    for (std::size_t i = 1; i < r.points.size(); ++i)
        r.decreasing = r.decreasing && r.points[i].w1 < r.points[i - 1].w1;
    return r;
}

ScalingLimitResult scaling_limit_check_meanfield(const std::vector<long>& N_list,
                                                 const CaseStudyParams& c,
                                                 const GridDensity& mu0,
                                                 double t,
                                                 std::size_t reps,
                                                 std::uint64_t master_seed,
                                                 double dt_reference)
{
    c.validate();
    ScalingLimitResult r;
    auto bbar = [c](double x, double m) { return c.drift(x, m); };
    auto ref = mv_particle_em_simulate(reps, bbar, dt_reference, t, initial_grid(mu0), splitmix64(master_seed ^ 0xe3ULL));
    r.reference_clamp_rate = ref.clamp_rate;
    for (long N : N_list)
    {
        ScalingParams sp{N};
        auto sample = pooled_system_samples(static_cast<std::size_t>(N),
                                            sp.delta(),
                                            c.scaled_drift(N),
                                            mu0,
                                            sp.generations(t),
                                            reps,
                                            splitmix64(master_seed + static_cast<std::uint64_t>(N)));
        auto [w, se] = w1_with_stderr(sample, ref.terminal);
        r.points.push_back({N, w, se});
    }
    r.decreasing = true;
    for (std::size_t i = 1; i < r.points.size(); ++i)
        r.decreasing = r.decreasing && r.points[i].w1 < r.points[i - 1].w1;
    return r;
}

ErgodicRateResult ergodic_rate_check(const CaseStudyParams& c,
                                     const std::vector<double>& t_list,
                                     std::size_t K,
                                     double dt,
                                     const InitialLaw& x0,
                                     std::uint64_t master_seed)
{
    if (t_list.empty())
        throw ArgumentError("ergodic_rate_check: need at least one time");
    auto inv = case_study_invariant(c);
    double t_end = *std::max_element(t_list.begin(), t_list.end());
    auto bbar = [c](double x, double m) { return c.drift(x, m); };
    auto run = mv_particle_em_simulate(K, bbar, dt, t_end, x0, master_seed, t_list);

    ErgodicRateResult r;
    r.times = t_list;
    constexpr int floor_draws = 5;
    MeanAccumulator fl;
    for (int k = 0; k < floor_draws; ++k)
    {
        ReplicateStream s(master_seed, static_cast<std::uint64_t>(k), 7);
        fl.add(w1_empirical_vs_beta(beta_samples(inv.a, inv.b, K, s), inv.a, inv.b));
    }
    r.floor = fl.mean;
    std::vector<double> x, y;
    for (std::size_t j = 0; j < t_list.size(); ++j)
    {
        double w = w1_empirical_vs_beta(run.snapshots[j], inv.a, inv.b);
        r.w1.push_back(w);
        if (w > 3 * r.floor)
        {
            x.push_back(t_list[j]);
            y.push_back(std::log(w));
        }
    }
    r.points_used = x.size();
    if (x.size() >= 2)
    {
        auto fit = linear_fit(x, y);
        r.rate = -fit.slope;
        r.rate_stderr = fit.slope_stderr;
    }
    else
    {
        r.rate = NAN;
        r.rate_stderr = NAN;
    }
    return r;
}

CaseStudyRun case_study_run(const CaseStudyParams& c,
                            long N,
                            double T,
                            const GridDensity& mu0,
                            std::size_t samples,
                            std::uint64_t master_seed)
{
    if (samples < 2)
        throw ArgumentError("case_study_run: need at least two samples");
    ScalingParams sp{N};
    auto drift = c.scaled_drift(N);
    std::size_t M = static_cast<std::size_t>(N);
    std::size_t systems = (samples + M - 1) / M;
    GridSampler sampler(mu0);
    double delta = sp.delta();
    long n = sp.generations(T);
    auto outs = map_replicates<std::vector<double>>(systems, master_seed, [&](std::uint64_t, ReplicateStream& s) {
        auto init = s.split(1);
        auto state = system_init(M, sampler, init);
        return system_run(std::move(state), delta, drift, n, s.split(2)).z;
    });

    CaseStudyRun r;
    r.systems = systems;
    std::vector<double> s1(systems, 0.0), s2(systems, 0.0), cnt(systems, 0.0);
    for (std::size_t j = 0; j < systems && r.samples.size() < samples; ++j)
    {
        for (double x : outs[j])
        {
            if (r.samples.size() == samples)
                break;
            r.samples.push_back(x);
            s1[j] += x;
            s2[j] += x * x;
            cnt[j] += 1;
        }
    }
    double S1 = std::accumulate(s1.begin(), s1.end(), 0.0);
    double S2 = std::accumulate(s2.begin(), s2.end(), 0.0);
    double C = static_cast<double>(r.samples.size());
    r.mean = S1 / C;
    r.variance = S2 / C - r.mean * r.mean;
    if (systems < 2)
    {
        r.mean_stderr = NAN;
        r.variance_stderr = NAN;
        return r;
    }
    std::vector<double> jm, jv;
    for (std::size_t j = 0; j < systems; ++j)
    {
        double c_ = C - cnt[j];
        double m = (S1 - s1[j]) / c_;
        jm.push_back(m);
        jv.push_back((S2 - s2[j]) / c_ - m * m);
    }
    double J = static_cast<double>(systems);
    r.mean_stderr = std::sqrt((J - 1) * (J - 1) / J * variance(jm));
    r.variance_stderr = std::sqrt((J - 1) * (J - 1) / J * variance(jv));
    return r;
}

std::vector<std::pair<double, double>> beta_overlay(double a, double b, std::size_t points)
{
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i < points; ++i)
    {
        double z = (static_cast<double>(i) + 0.5) / static_cast<double>(points);
        out.emplace_back(z, beta_pdf(a, b, z));
    }
    return out;
}

}  // namespace wfsim
