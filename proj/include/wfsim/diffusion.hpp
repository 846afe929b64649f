//! Euler-Maruyama references for the Wright-Fisher and McKean-Vlasov limits.
#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "law.hpp"
#include "meanfield.hpp"
#include "nonlinear.hpp"
#include "rng.hpp"

namespace wfsim
{
//! Draws an initial frequency from a replicate stream
using InitialLaw = std::function<double(ReplicateStream&)>;

InitialLaw initial_point(double x0);
InitialLaw initial_grid(const GridDensity& mu0);
InitialLaw initial_beta(double a, double b);

//! dX = b(X) dt + sqrt(X(1-X)) dW, clamped to [0,1] after every step
struct SDEParams
{
    std::function<double(double)> b;
    double dt = 1e-3;
    double t_end = 1.0;

    //! Requires dt > 0, t_end >= 0, b(0) >= 0 and b(1) <= 0
    void validate() const;
    long steps() const;
};

struct EmResult
{
    std::vector<double> terminal;
    //! Fraction of steps that had to be clamped back into [0,1]
    double clamp_rate;
};

//! b(x) = theta0 (1 - x) - theta1 x
std::function<double(double)> mutation_drift(double theta0, double theta1);

EmResult em_wf_simulate(const SDEParams& params, const InitialLaw& x0, std::size_t reps, std::uint64_t master_seed);

/*!
 * Self-stabilizing drift -theta1 x + theta0 (1 - x) - gamma (x - E[X]).
 *
 * gamma >= 1 lies outside the range of the stationary theory and is only
 * accepted with `allow_range_extension`.
 */
struct CaseStudyParams
{
    double theta0 = 0.8;
    double theta1 = 0.6;
    double gamma = 0;
    bool allow_range_extension = false;

    void validate() const;
    double m() const { return theta0 / (theta0 + theta1); }
    double theta0_bar() const { return theta0 * (1 + gamma / (theta0 + theta1)); }
    double theta1_bar() const { return theta1 * (1 + gamma / (theta0 + theta1)); }
    //! bbar(x, mean)
    double drift(double x, double mean) const;
    //! Discrete branch weight x + 2/sqrt(3N) bbar(x, mu) as an affine drift
    NonLinearDrift scaled_drift(long N) const;
};

struct CaseStudyInvariant
{
    double a;
    double b;
    double mean;
    double variance;
};

CaseStudyInvariant case_study_invariant(const CaseStudyParams& c);

struct MvParticleResult
{
    std::vector<double> terminal;
    //! Particle laws at the requested snapshot times
    std::vector<std::vector<double>> snapshots;
    double clamp_rate;
};

//! K interacting Euler particles; the drift reads the particle mean frozen per step
MvParticleResult mv_particle_em_simulate(std::size_t K,
                                         const std::function<double(double, double)>& bbar,
                                         double dt,
                                         double t_end,
                                         const InitialLaw& x0,
                                         std::uint64_t master_seed,
                                         const std::vector<double>& snapshot_times = {});

struct ScalingPoint
{
    long N;
    double w1;
    double stderr;
};

struct ScalingLimitResult
{
    std::vector<ScalingPoint> points;
    double reference_clamp_rate;
    bool decreasing;
};

//! Linear chain with delta_N = sqrt(3/N), p_N = x + 2/sqrt(3N) b(x) at generation floor(N t)
std::vector<double> scaled_chain_sample(
    long N, const std::function<double(double)>& b, const InitialLaw& x0, double t, std::size_t reps, std::uint64_t master_seed);

ScalingLimitResult scaling_limit_check(const std::vector<long>& N_list,
                                       const std::function<double(double)>& b,
                                       const InitialLaw& x0,
                                       double t,
                                       std::size_t reps,
                                       std::uint64_t master_seed,
                                       double dt_reference = 1e-4);

//! Mean-field variant: coordinate 1 of the N-scaled system against particle EM
ScalingLimitResult scaling_limit_check_meanfield(const std::vector<long>& N_list,
                                                 const CaseStudyParams& c,
                                                 const GridDensity& mu0,
                                                 double t,
                                                 std::size_t reps,
                                                 std::uint64_t master_seed,
                                                 double dt_reference = 1e-3);

struct ErgodicRateResult
{
    std::vector<double> times;
    std::vector<double> w1;
    double floor;
    double rate;
    double rate_stderr;
    std::size_t points_used;
};

ErgodicRateResult ergodic_rate_check(const CaseStudyParams& c,
                                     const std::vector<double>& t_list,
                                     std::size_t K,
                                     double dt,
                                     const InitialLaw& x0,
                                     std::uint64_t master_seed);

struct CaseStudyRun
{
    std::vector<double> samples;
    double mean;
    double mean_stderr;
    double variance;
    double variance_stderr;
    std::size_t systems;
};

//! Pooled terminal coordinates of N-host systems at generation floor(N T);
//! standard errors by delete-one-system jackknife
CaseStudyRun case_study_run(const CaseStudyParams& c,
                            long N,
                            double T,
                            const GridDensity& mu0,
                            std::size_t samples,
                            std::uint64_t master_seed);

//! (z, pdf) pairs of Beta(a, b) on an interior grid
std::vector<std::pair<double, double>> beta_overlay(double a, double b, std::size_t points = 200);

}  // namespace wfsim
