//! One-level chains Z^{(delta,p)} driven by a state-dependent branch weight.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rng.hpp"

namespace wfsim
{
//! Selection/mutation parameters of the fittest-type-wins drift
struct FtwParams
{
    double delta = 0.5;
    double theta0 = 0;
    double theta1 = 0;
    //! sigma_0 .. sigma_{J-1}; empty means no selection
    std::vector<double> sigma;
    //! Bound on the dropped tail sum_{i >= J} sigma_i
    double sigma_tail = 0;

    void validate() const;
    double delta0() const { return 2.0 * delta / 3.0; }
    //! x + (2 delta/3)(-x(1-x) sum sigma_i x^i + theta0 (1-x) - theta1 x)
    double drift(double x) const;
};

//! sigma_i = s0 r^i truncated where the dropped tail is below tol
std::pair<std::vector<double>, double>
truncate_geometric_sigma(double s0, double r, double tol = 1e-12);

class DriftSpec
{
  public:
    enum class Kind
    {
        identity,
        fittest_type_wins,
        diffusion_scaled,
        tabulated,
        custom
    };

    static DriftSpec identity();
    static DriftSpec fittest_type_wins(FtwParams params);
    //! p_N(x) = x + 2/sqrt(3N) b(x); requires b(0) >= 0, b(1) <= 0
    static DriftSpec diffusion_scaled(std::function<double(double)> b, long N);
    //! Linear interpolation of values on the uniform grid {0, 1/(n-1), .., 1}
    static DriftSpec tabulated(std::vector<double> values);
    static DriftSpec custom(std::function<double(double)> p, std::string name);

    //! Evaluates p(x); throws ContractError naming x if outside [0,1]
    double operator()(double x) const;

    Kind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    const FtwParams* ftw() const { return kind_ == Kind::fittest_type_wins ? &ftw_ : nullptr; }
    long scale() const { return N_; }

  private:
    DriftSpec(Kind kind, std::string name, std::function<double(double)> f);
    void check_contract() const;

    Kind kind_;
    std::string name_;
    std::function<double(double)> f_;
    FtwParams ftw_;
    long N_ = 0;
};

using ChainPath = std::vector<double>;

double chain_step(double delta, const DriftSpec& drift, double x, ReplicateStream& stream);
ChainPath simulate_chain(double delta, const DriftSpec& drift, double z0, long n, ReplicateStream& stream);
//! Terminal value only, no path allocation
double run_chain(double delta, const DriftSpec& drift, double z0, long n, ReplicateStream& stream);

std::pair<ChainPath, ChainPath> coupled_chains(double delta,
                                               const DriftSpec& drift_p,
                                               const DriftSpec& drift_q,
                                               double x0,
                                               double y0,
                                               long n,
                                               ReplicateStream& stream);

//! Iterates e_{n+1} = (1 - delta/2) e_n + (delta/2)(L e_n + sup|p - q|), where
//! L is a Lipschitz constant of one of the two drifts
std::vector<double>
coupled_gap_bound(double delta, double lipschitz, double sup_drift_gap, double gap0, long n);

struct FixationEstimate
{
    double p_fix0;
    double p_fix1;
    double p_undecided;
    double stderr0;
    double stderr1;
};

FixationEstimate fixation_estimate(double delta,
                                   const DriftSpec& drift,
                                   double z0,
                                   long horizon,
                                   double eps,
                                   std::size_t reps,
                                   std::uint64_t master_seed);

struct SeriesEstimate
{
    std::vector<double> mean;
    std::vector<double> stderr;
};

//! E[Z_n (1 - Z_n)] for the neutral chain, n = 0..n_max
SeriesEstimate heterozygosity_series(double delta, double z0, long n_max, std::size_t reps, std::uint64_t master_seed);

struct HeterozygosityFit
{
    double slope;
    double slope_stderr;
    double expected;  // log(1 - delta^2/3)
    double relative_error;
};

HeterozygosityFit fit_heterozygosity(const SeriesEstimate& h, double delta);

}  // namespace wfsim
