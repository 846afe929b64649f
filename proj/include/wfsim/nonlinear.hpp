//! Non-linear chains whose branch weight depends on the current marginal law.
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "chains.hpp"
#include "law.hpp"
#include "rng.hpp"

namespace wfsim
{
//! What a drift may read about the current law; unused pointers are null
struct LawSummary
{
    double mean = 0;
    const GridDensity* grid = nullptr;
    const std::vector<double>* sample = nullptr;
};

/*!
 * Law-dependent branch weight pbar(x, mu) with declared Lipschitz constants
 * L1 (in x) and L2 (in the law, Wasserstein-1).
 *
 * Affine-in-mean drifts pbar = a + b x + c <mu>_1 only read the mean. A drift
 * built with `allow_range_extension` skips the construction-time range check
 * and is checked at every evaluation instead.
 */
class NonLinearDrift
{
  public:
    using Fn = std::function<double(double, const LawSummary&)>;

    static NonLinearDrift affine(double a, double b, double c, bool allow_range_extension = false);
    //! a + b (eps x + (1 - eps) <mu>_1)
    static NonLinearDrift epsilon_interpolated(double a, double b, double eps);
    //! x + 2/sqrt(3N) bbar(x, mu); requires bbar(0,.) >= 0 and bbar(1,.) <= 0
    static NonLinearDrift diffusion_scaled(Fn bbar, long N, double L1, double L2, bool mean_only = false);
    static NonLinearDrift general(Fn f, double L1, double L2, std::string name, bool mean_only = false);
    //! Ordinary drift p(x) with no law dependence
    static NonLinearDrift linear(const DriftSpec& p);

    double operator()(double x, const LawSummary& mu) const;
    double operator()(double x, double mean) const { return (*this)(x, LawSummary{mean}); }

    double L1() const { return L1_; }
    double L2() const { return L2_; }
    bool mean_only() const { return mean_only_; }
    bool affine_form() const { return affine_; }
    bool range_extended() const { return extended_; }
    const std::string& name() const { return name_; }
    //! Coefficients (a, b, c) of an affine drift
    std::array<double, 3> coefficients() const { return {a_, b_, c_}; }

    //! Range check on an x-grid times a family of probe laws; throws ContractError
    void validate_probes() const;

  private:
    NonLinearDrift() = default;

    Fn f_;
    double L1_ = 0;
    double L2_ = 0;
    bool mean_only_ = false;
    bool affine_ = false;
    bool extended_ = false;
    double a_ = 0, b_ = 0, c_ = 0;
    std::string name_;
};

struct LipschitzCheck
{
    std::size_t samples;
    std::size_t violations;
    double worst_excess;  // max of lhs - rhs
};

//! Spot-checks |p(x,mu) - p(y,nu)| <= L1|x-y| + L2 W1(mu,nu) on random probes
LipschitzCheck lipschitz_spot_check(const NonLinearDrift& drift, std::size_t samples, std::uint64_t seed);

//! Probe laws used by the range and Lipschitz checks
std::vector<GridDensity> probe_laws(std::size_t grid_size = 256);

//! One step mu -> mu Q_mu on the grid; branch weights at cell midpoints
GridDensity propagate_law(const GridDensity& mu, double delta, const NonLinearDrift& drift);

struct LawFlow
{
    std::vector<GridDensity> laws;
    std::vector<double> means;

    std::size_t steps() const { return laws.empty() ? 0 : laws.size() - 1; }
    //! Law at generation n; held at the last computed law beyond the end
    const GridDensity& at(long n) const;
    LawSummary summary(long n) const;
};

LawFlow law_flow(const GridDensity& mu0, double delta, const NonLinearDrift& drift, long n);

struct StationaryLaw
{
    GridDensity law;
    long iterations;
    double residual;
};

//! Iterates propagate_law until the sup-norm change drops below tol
StationaryLaw stationary_law(const GridDensity& mu0,
                             double delta,
                             const NonLinearDrift& drift,
                             double tol = 1e-10,
                             long max_iter = 200000);

//! Sample path against a precomputed flow; Z_0 drawn from flow.laws[0]
ChainPath nonlinear_chain_path(const LawFlow& flow, double delta, const NonLinearDrift& drift, long n, ReplicateStream& stream);

std::pair<ChainPath, LawFlow> nonlinear_chain_simulate(
    const GridDensity& mu0, double delta, const NonLinearDrift& drift, long n, ReplicateStream& stream);

//! Terminal values of independent paths, one per replicate
std::vector<double> nonlinear_endpoints(const LawFlow& flow,
                                        double delta,
                                        const NonLinearDrift& drift,
                                        long n,
                                        std::size_t reps,
                                        std::uint64_t master_seed);

//! E|Zp_n - Zq_n| under the standard coupling; initial pair comonotone
SeriesEstimate nonlinear_coupling(const NonLinearDrift& drift_p,
                                  const NonLinearDrift& drift_q,
                                  double delta,
                                  const GridDensity& mu0_p,
                                  const GridDensity& mu0_q,
                                  long n,
                                  std::size_t reps,
                                  std::uint64_t master_seed);

struct FixedPoint
{
    double s;
    GridDensity law;
    long iterations;
};

//! Bisection on s -> pbar(0, beta_{delta,s}) - s for an x-independent drift
FixedPoint invariant_fixed_point_mean_only(const NonLinearDrift& drift,
                                           double delta,
                                           double tol = 1e-12,
                                           std::size_t grid_size = 2048);

struct PerturbationStats
{
    double mean;
    double variance;
};

//! Invariant mean and variance of the epsilon-interpolated chain
PerturbationStats perturbation_stats(double a, double b, double epsilon, double delta);
//! k 2 b eps / (1 - 2b)
double perturbation_moment_bound(int k, double b, double epsilon);

struct ErgodicityReport
{
    double factor;  // 1 - delta (1 - L1 - L2) / 2
    SeriesEstimate gap;
    std::vector<double> bound;  // factor^n gap_0
    std::size_t bound_violations;  // n with gap_n > bound_n + 3 stderr_n
    double fitted_factor;
    double fitted_factor_stderr;
};

//! One copy started at the invariant law, the other at mu0
ErgodicityReport nonlinear_ergodicity(const NonLinearDrift& drift,
                                      double delta,
                                      const GridDensity& mu0,
                                      long n,
                                      std::size_t reps,
                                      std::uint64_t master_seed);

}  // namespace wfsim
