//! The Wright-Fisher kernel family P_{delta,p}.
#pragma once

#include <utility>
#include <vector>

#include "law.hpp"
#include "rng.hpp"

namespace wfsim
{
struct KernelParams
{
    double delta;
    double p;

    //! Throws ArgumentError; delta = 0 only when allow_identity is set
    void validate(bool allow_identity = false) const;
};

//! x + (1 - x) delta U with probability p, else x (1 - delta U)
double kernel_step(const KernelParams& params, double x, ReplicateStream& stream);

inline double update_sup(double q, double delta, double y, double u, double v)
{
    return v <= 1.0 - q ? y * (1.0 - delta * u) : y + delta * u * (1.0 - y);
}

//! Requires p <= q; uses p/q := 1 when q = 0
double update_inf(double p, double q, double delta, double x, double u, double v, double w);

//! Draws U, V, W and couples P_{delta,p}(x,.) with P_{delta,q}(y,.)
std::pair<double, double>
coupled_step(double x, double y, double p, double q, double delta, ReplicateStream& stream);

//! Same coupling with externally supplied uniforms
std::pair<double, double> coupled_step_with(
    double x, double y, double p, double q, double delta, double u, double v, double w);

//! lambda_{n,k} = (1/delta) int_0^delta x^k (1-x)^(n-k) dx for k = 0..n
std::vector<double> lambda_row(int n, double delta);

struct InvariantMoments
{
    double delta;
    double p;
    std::vector<double> moments;  // index 0..k_max
};

InvariantMoments invariant_moments(double delta, double p, int k_max);

//! delta p (1 - p) / (3 - delta)
double invariant_variance(double delta, double p);

struct DensitySolve
{
    GridDensity density;
    long iterations;
    double residual;
};

DensitySolve invariant_density(double delta,
                               double p,
                               std::size_t grid_size = 2048,
                               double tol = 1e-8,
                               long max_iter = 100000);

//! One application of the transfer operator with per-cell branch weights
GridDensity apply_transfer(const GridDensity& g,
                           const std::vector<double>& p_cell,
                           double delta);

}  // namespace wfsim
