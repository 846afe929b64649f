#include "wfsim/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wfsim/engine.hpp"

namespace wfsim
{
namespace
{
double binom(int n, int k)
{
    double r = 1.0;
    for (int i = 1; i <= k; ++i)
        r = r * (n - k + i) / i;
    return r;
}
}  // namespace

void KernelParams::validate(bool allow_identity) const
{
    bool delta_ok = allow_identity ? (delta >= 0 && delta <= 1) : (delta > 0 && delta <= 1);
    if (!delta_ok)
        throw ArgumentError("kernel: delta out of range: " + std::to_string(delta));
    if (!(p >= 0 && p <= 1))
        throw ArgumentError("kernel: p out of range: " + std::to_string(p));
}

double kernel_step(const KernelParams& params, double x, ReplicateStream& stream)
{
    double u = stream.uniform();
    double v = stream.uniform();
    return update_sup(params.p, params.delta, x, u, v);
}

double update_inf(double p, double q, double delta, double x, double u, double v, double w)
{
    if (p > q)
        throw ArgumentError("update_inf: requires p <= q (p=" + std::to_string(p)
                            + ", q=" + std::to_string(q) + ")");
    double ratio = q > 0 ? p / q : 1.0;
    if (v > 1.0 - q && w <= ratio)
        return x + delta * u * (1.0 - x);
    return x * (1.0 - delta * u);
}

std::pair<double, double> coupled_step_with(
    double x, double y, double p, double q, double delta, double u, double v, double w)
{
    if (p <= q)
        return {update_inf(p, q, delta, x, u, v, w), update_sup(q, delta, y, u, v)};
    return {update_sup(p, delta, x, u, v), update_inf(q, p, delta, y, u, v, w)};
}

std::pair<double, double>
coupled_step(double x, double y, double p, double q, double delta, ReplicateStream& stream)
{
    double u = stream.uniform();
    double v = stream.uniform();
    double w = stream.uniform();
    return coupled_step_with(x, y, p, q, delta, u, v, w);
}

std::vector<double> lambda_row(int n, double delta)
{
    if (n < 0)
        throw ArgumentError("lambda_row: n must be nonnegative");
    if (!(delta > 0 && delta <= 1))
        throw ArgumentError("lambda_row: delta must lie in (0,1]");
    // Integration by parts keeps every term positive:
    // lambda_{n,k} = delta^k (1-delta)^(n-k)/(k+1) + (n-k)/(k+1) lambda_{n,k+1}
    std::vector<double> lam(static_cast<std::size_t>(n) + 1);
    lam[n] = std::pow(delta, n) / (n + 1);
    for (int k = n - 1; k >= 0; --k)
    {
        lam[k] = std::pow(delta, k) * std::pow(1.0 - delta, n - k) / (k + 1)
                 + static_cast<double>(n - k) / (k + 1) * lam[k + 1];
    }
    return lam;
}

InvariantMoments invariant_moments(double delta, double p, int k_max)
{
    if (!(delta > 0 && delta <= 1))
        throw ArgumentError("invariant_moments: delta must lie in (0,1]");
    if (!(p >= 0 && p <= 1))
        throw ArgumentError("invariant_moments: p must lie in [0,1]");
    if (k_max < 1)
        throw ArgumentError("invariant_moments: k_max must be at least 1");
    InvariantMoments out{delta, p, std::vector<double>(static_cast<std::size_t>(k_max) + 1)};
    auto& m = out.moments;
    m[0] = 1.0;
    for (int k = 1; k <= k_max; ++k)
    {
        auto lam = lambda_row(k, delta);
        double rhs = 0;
        for (int j = 0; j < k; ++j)
            rhs += binom(k, j) * m[j] * lam[k - j];
        m[k] = p * rhs / (1.0 - lam[0]);
    }
    return out;
}

double invariant_variance(double delta, double p)
{
    return delta * p * (1 - p) / (3 - delta);
}

GridDensity apply_transfer(const GridDensity& g, const std::vector<double>& p_cell, double delta)
{
    std::size_t const n = g.size();
    if (p_cell.size() != n)
        throw ArgumentError("apply_transfer: p_cell size mismatch");
    if (!(delta > 0 && delta <= 1))
        throw ArgumentError("apply_transfer: delta must lie in (0,1]");
    double const h = g.cell_width();
    auto edge = [h](std::size_t c) { return static_cast<double>(c) * h; };
    auto cell_of = [n, h](double x) {
        return std::min(static_cast<std::size_t>(x / h), n - 1);
    };

    // Down branch: TA(x) = int_x^1 g(1-p)/t dt.  Up branch: HB(x) = int_0^x g p/(1-t) dt.
    // Cell averages of the image density need the antiderivatives ITA, IHB.
    std::vector<double> a(n), b(n), sa(n + 1, 0.0), pb(n + 1, 0.0);
    for (std::size_t c = 0; c < n; ++c)
    {
        a[c] = g[c] * (1.0 - p_cell[c]);
        b[c] = g[c] * p_cell[c];
    }
    for (std::size_t c = n; c-- > 1;)
        sa[c] = sa[c + 1] + a[c] * std::log(edge(c + 1) / edge(c));
    for (std::size_t c = 0; c + 1 < n; ++c)
        pb[c + 1] = pb[c] + b[c] * (std::log1p(-edge(c)) - std::log1p(-edge(c + 1)));

    // F(t) = int_0^t log(r/s) ds + const on a cell with right edge r
    auto f_log = [](double t, double r) { return t > 0 ? t * std::log(r / t) + t : 0.0; };
    // G(t) = int_0^t -log(1-s) ds
    auto g_log = [](double t) { return t < 1 ? (1 - t) * std::log1p(-t) + t : 1.0; };

    std::vector<double> ita(n + 1, 0.0), ihb(n + 1, 0.0);
    for (std::size_t c = 0; c < n; ++c)
    {
        double l = edge(c), r = edge(c + 1);
        ita[c + 1] = ita[c] + h * sa[c + 1] + a[c] * (f_log(r, r) - f_log(l, r));
        ihb[c + 1] = ihb[c] + h * pb[c] + b[c] * (h * std::log1p(-l) + g_log(r) - g_log(l));
    }
    auto ita_at = [&](double x) {
        if (x >= 1.0)
            return ita[n];
        if (x <= 0.0)
            return 0.0;
        std::size_t c = cell_of(x);
        double l = edge(c), r = edge(c + 1);
        return ita[c] + (x - l) * sa[c + 1] + a[c] * (f_log(x, r) - f_log(l, r));
    };
    auto ihb_at = [&](double x) {
        if (x >= 1.0)
            return ihb[n];
        if (x <= 0.0)
            return 0.0;
        std::size_t c = cell_of(x);
        double l = edge(c);
        return ihb[c] + (x - l) * pb[c]
               + b[c] * ((x - l) * std::log1p(-l) + g_log(x) - g_log(l));
    };

    std::vector<double> out(n);
    double const keep = 1.0 - delta;
    for (std::size_t j = 0; j < n; ++j)
    {
        double l = edge(j), r = edge(j + 1);
        double down = ita[j + 1] - ita[j];
        double up = ihb[j + 1] - ihb[j];
        if (keep > 0)
        {
            down -= keep * (ita_at(r / keep) - ita_at(l / keep));
            up -= keep * (ihb_at((r - delta) / keep) - ihb_at((l - delta) / keep));
        }
        out[j] = std::max((down + up) / (delta * h), 0.0);
    }
    GridDensity res(std::move(out));
    res.normalize();
    return res;
}

DensitySolve invariant_density(double delta, double p, std::size_t grid_size, double tol, long max_iter)
{
    if (!(delta > 0 && delta < 1))
        throw ArgumentError("invariant_density: delta must lie in (0,1)");
    if (!(p > 0 && p < 1))
        throw ArgumentError("invariant_density: p must lie in (0,1)");
    if (grid_size < 64)
        throw ArgumentError("invariant_density: grid_size must be at least 64");
    std::vector<double> p_cell(grid_size, p);
    GridDensity g = GridDensity::uniform(grid_size);
    double residual = 0;
    for (long it = 1; it <= max_iter; ++it)
    {
        GridDensity next = apply_transfer(g, p_cell, delta);
        residual = 0;
        for (std::size_t i = 0; i < grid_size; ++i)
            residual = std::max(residual, std::abs(next[i] - g[i]));
        g = std::move(next);
        if (residual < tol)
            return {std::move(g), it, residual};
    }
    throw ConvergenceError("invariant_density: no convergence within "
                               + std::to_string(max_iter) + " sweeps, last sup-norm change "
                               + std::to_string(residual),
                           residual,
                           max_iter);
}

}  // namespace wfsim
