//! Two-level host-pathogen systems and propagation of chaos.
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "law.hpp"
#include "nonlinear.hpp"
#include "rng.hpp"

namespace wfsim
{
/*!
 * M host frequencies updated conditionally independently given their
 * empirical measure.
 *
 * Coordinate i of generation g draws its two uniforms from block g*M + i of
 * the replicate stream, so every (replicate, generation, coordinate) triple
 * owns a disjoint slice of randomness.
 */
struct HostSystemState
{
    std::vector<double> z;
    long generation = 0;

    std::size_t size() const { return z.size(); }
    double mean() const;
};

HostSystemState system_init(std::size_t M, const GridSampler& mu0, ReplicateStream& stream);
HostSystemState system_step(const HostSystemState& state, double delta, const NonLinearDrift& drift, const ReplicateStream& stream);
//! In-place variant; q is scratch space
void system_step_inplace(HostSystemState& state,
                         double delta,
                         const NonLinearDrift& drift,
                         const ReplicateStream& stream,
                         std::vector<double>& q);
HostSystemState system_run(HostSystemState state, double delta, const NonLinearDrift& drift, long n, const ReplicateStream& stream);

//! Per-generation E|Z^M_{n,i} - Zbar_{n,i}| averaged over coordinates
SeriesEstimate twolevel_coupled_run(std::size_t M,
                                    double delta,
                                    const NonLinearDrift& drift,
                                    const GridDensity& mu0,
                                    long n,
                                    std::size_t reps,
                                    std::uint64_t master_seed);

struct ChaosPoint
{
    std::size_t M;
    long n;
    //! W1 between coordinate 1 across replicates and the grid law mu_n
    double w1_direct;
    //! W1 between an i.i.d. sample of mu_n of the same size and mu_n
    double w1_floor;
    //! Coupling transport cost E|Z^M_{n,1} - Zbar_{n,1}|, an upper bound on W1
    double w1_coupling;
    double coupling_stderr;
};

struct ChaosRateResult
{
    std::vector<ChaosPoint> points;
    double slope_coupling;
    double slope_coupling_stderr;
    double slope_direct;
};

ChaosRateResult chaos_rate_experiment(const std::vector<std::size_t>& M_list,
                                      double delta,
                                      const NonLinearDrift& drift,
                                      const GridDensity& mu0,
                                      long n,
                                      std::size_t reps,
                                      std::uint64_t master_seed);

struct GlivenkoCantelli
{
    std::vector<std::size_t> sizes;
    std::vector<double> mean_w1;
    double slope;
};

//! E[W1(empirical, Beta(a,b))] over i.i.d. samples of each size
GlivenkoCantelli glivenko_cantelli_check(double a,
                                         double b,
                                         const std::vector<std::size_t>& sizes,
                                         std::size_t reps,
                                         std::uint64_t master_seed);

struct ScalingParams
{
    long N;
    std::function<std::size_t(long)> M_of_N = [](long N) { return static_cast<std::size_t>(N); };

    double delta() const;
    long generations(double t) const;
};

struct ScaledRun
{
    std::vector<double> system;     // coordinate 1 at generation floor(N t)
    std::vector<double> nonlinear;  // independent non-linear chain endpoints
};

ScaledRun scaled_system_run(const ScalingParams& scaling,
                            const NonLinearDrift& drift,
                            const GridDensity& mu0,
                            double t_end,
                            std::size_t reps,
                            std::uint64_t master_seed);

//! All coordinates of ceil(samples / M) independent systems, first `samples` kept
std::vector<double> pooled_system_samples(std::size_t M,
                                          double delta,
                                          const NonLinearDrift& drift,
                                          const GridDensity& mu0,
                                          long n,
                                          std::size_t samples,
                                          std::uint64_t master_seed);

}  // namespace wfsim
