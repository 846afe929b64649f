//! Backward chains dual to the forward frequency chains.
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "chains.hpp"
#include "rng.hpp"

namespace wfsim
{
//! Cemetery state of the killed dual; z^cemetery evaluates to 0
constexpr int cemetery = -1;

double binomial_coeff(int n, int k);

//! lambda_{n,k} = (1/delta) int_0^delta x^k (1-x)^(n-k) dx
double lambda_coeff(int n, int k, double delta);

//! w_k = C(n,k) lambda_{n,k}: law of Bin(n, U) with U uniform on [0, delta]
std::vector<double> merger_weights(int n, double delta);

class LambdaTable
{
  public:
    LambdaTable(int n_max, double delta);

    double operator()(int n, int k) const { return rows_[n][k]; }
    int n_max() const { return static_cast<int>(rows_.size()) - 1; }
    double delta() const { return delta_; }

  private:
    double delta_;
    std::vector<std::vector<double>> rows_;
};

/*!
 * Sparse transition row of a dual chain.
 *
 * Destinations are kept in ascending order with the cemetery last. Any
 * rounding remainder below 1e-12 is added to the stay probability and
 * recorded in `folded`.
 */
struct TransitionRow
{
    int source = 0;
    std::vector<std::pair<int, double>> entries;
    double folded = 0;

    double probability(int dest) const;
    double sum() const;
    //! sum_d P(source -> d) z^d with z^cemetery = 0
    double expectation(double z) const;
};

//! n -> n - k + 1 with probability C(n,k) lambda_{n,k}
TransitionRow neutral_dual_row(int m, double delta);
//! Rows for states 0..m; row 0 is absorbing
std::vector<TransitionRow> neutral_dual_matrix(int m, double delta);
//! Exact E_m[z^{M_n}] by n matrix-vector products
double neutral_dual_expectation(double z, int m, long n, double delta);

struct DualityResult
{
    double z;
    int m;
    long n;
    double lhs;
    double rhs;
    double stderr_lhs;
    double stderr_rhs;
    //! |lhs - rhs| / combined stderr
    double z_score;
    bool pass;  // |lhs - rhs| <= 3 combined stderr
};

//! Monte Carlo E_z[Z_n^m] of the neutral chain against the exact dual
DualityResult duality_check_neutral(double z, int m, long n, double delta, std::size_t reps, std::uint64_t master_seed);

//! Whole (z, m, n) grid; forward paths are shared across m and n for each z
std::vector<DualityResult> duality_grid_neutral(const std::vector<double>& z_list,
                                                const std::vector<int>& m_list,
                                                const std::vector<long>& n_list,
                                                double delta,
                                                std::size_t reps,
                                                std::uint64_t master_seed);

//---------------------------------------------------------------------------//
/*!
 * Parameters of the killed ancestral selection dual.
 *
 * rho_i = (sigma_{i-1} - sigma_i) / sigma_0 for i = 1..J with sigma_J := 0,
 * so rho sums to one by telescoping.
 */
struct FtwDualParams
{
    double delta = 0.5;
    double theta0 = 0;
    double theta1 = 0;
    std::vector<double> sigma;
    double sigma_tail = 0;

    static FtwDualParams from(const FtwParams& p);
    FtwParams forward() const;

    void validate() const;
    double delta0() const { return 2.0 * delta / 3.0; }
    double theta() const { return theta0 + theta1; }
    double sigma0() const { return sigma.empty() ? 0.0 : sigma[0]; }
    //! rho_1..rho_J stored at index 0..J-1
    std::vector<double> rho() const;
    //! sum_k k rho_k
    double mean_branching() const;
};

TransitionRow ftw_dual_row(int m, const FtwDualParams& params);

//! Prebuilt rows 0..m_max with cumulative tables for inverse-CDF sampling
class FtwDualTable
{
  public:
    FtwDualTable(const FtwDualParams& params, int m_max);

    const TransitionRow& row(int m) const;
    int m_max() const { return static_cast<int>(rows_.size()) - 1; }
    //! Throws ArgumentError if the chain leaves the table
    int step(int m, ReplicateStream& stream) const;

  private:
    std::vector<TransitionRow> rows_;
    std::vector<std::vector<double>> cum_;
};

std::vector<int> ftw_dual_simulate(int m0, const FtwDualTable& table, long n, ReplicateStream& stream);

//! Largest state reachable from m0 within n steps
int ftw_dual_reach(int m0, long n, const FtwDualParams& params);

/*!
 * Particle form of one dual step, coupling two duals A <= B.
 *
 * Both draw U uniform on [0, delta]; K_A ~ Bin(A, U) and
 * K_B = K_A + Bin(B - A, U). One further uniform picks the event from
 * selective branching at the bottom of [0,1) and mutation at the top.
 * Requires sigma_A <= sigma_B pointwise and B mutation-free or with the same
 * mutation rates as A; then A <= B until A enters the cemetery, with the
 * cemetery ordered above every integer state (z^cemetery = 0 is the
 * smallest moment).
 */
std::pair<int, int> ftw_dual_coupled_step(int a,
                                          int b,
                                          const FtwDualParams& pa,
                                          const FtwDualParams& pb,
                                          ReplicateStream& stream);

//! Single-chain particle step; same law as sampling ftw_dual_row
int ftw_dual_particle_step(int m, const FtwDualParams& params, ReplicateStream& stream);

//! Checks the comparison coupling preconditions; throws ArgumentError
void check_comparable(const FtwDualParams& pa, const FtwDualParams& pb);

struct ComparisonReport
{
    std::size_t reps;
    std::size_t violations;  // steps where both are alive and A > B
    std::size_t killed;      // replicates where A reached the cemetery
};

ComparisonReport ftw_dual_comparison(int m0,
                                     const FtwDualParams& pa,
                                     const FtwDualParams& pb,
                                     long n,
                                     std::size_t reps,
                                     std::uint64_t master_seed);

//! Monte Carlo on both sides: forward chain with the fittest-type-wins drift
DualityResult duality_check_ftw(double z, int m, long n, const FtwDualParams& params, std::size_t reps, std::uint64_t master_seed);

//! Grid version; forward paths shared per z, dual paths shared per m
std::vector<DualityResult> duality_grid_ftw(const std::vector<double>& z_list,
                                            const std::vector<int>& m_list,
                                            const std::vector<long>& n_list,
                                            const FtwDualParams& params,
                                            std::size_t reps,
                                            std::uint64_t master_seed);

struct AbsorptionFraction
{
    double absorbed;  // in {0, cemetery}
    double at_zero;
    double at_cemetery;
};

AbsorptionFraction ftw_dual_absorption_fraction(
    int m0, const FtwDualParams& params, long n, std::size_t reps, std::uint64_t master_seed);

//! h(j) = P_j(hit 0 before the cemetery) for j = 0..m_max, mutation only
std::vector<double> absorption_table(int m_max, double delta, double theta0, double theta1);
double absorption_prob_exact(int m, double delta, double theta0, double theta1);

}  // namespace wfsim
