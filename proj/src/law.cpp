#include "wfsim/law.hpp"

#include <algorithm>
#include <cmath>

#include "wfsim/engine.hpp"
#include "wfsim/stats.hpp"

namespace wfsim
{
GridDensity::GridDensity(std::vector<double> values) : g_(std::move(values))
{
    if (g_.empty())
        throw ArgumentError("GridDensity: empty grid");
    for (double v : g_)
        if (!(v >= 0))
            throw ArgumentError("GridDensity: negative or NaN density value");
}

GridDensity GridDensity::uniform(std::size_t grid_size)
{
    return GridDensity(std::vector<double>(grid_size, 1.0));
}

GridDensity GridDensity::from_function(std::size_t grid_size,
                                       const std::function<double(double)>& f)
{
    // 4-point Gauss-Legendre per cell
    static const double gx[4] = {-0.8611363115940526, -0.3399810435848563,
                                 0.3399810435848563, 0.8611363115940526};
    static const double gw[4] = {0.3478548451374538, 0.6521451548625461,
                                 0.6521451548625461, 0.3478548451374538};
    std::vector<double> v(grid_size);
    double h = 1.0 / static_cast<double>(grid_size);
    for (std::size_t i = 0; i < grid_size; ++i)
    {
        double c = (static_cast<double>(i) + 0.5) * h;
        double acc = 0;
        for (int q = 0; q < 4; ++q)
            acc += gw[q] * f(c + 0.5 * h * gx[q]);
        v[i] = 0.5 * acc;
    }
    GridDensity out(std::move(v));
    out.normalize();
    return out;
}

GridDensity GridDensity::point_mass(std::size_t grid_size, double x)
{
    std::vector<double> v(grid_size, 0.0);
    auto k = static_cast<std::size_t>(std::clamp(x, 0.0, 1.0)
                                      * static_cast<double>(grid_size));
    v[std::min(k, grid_size - 1)] = static_cast<double>(grid_size);
    return GridDensity(std::move(v));
}

GridDensity GridDensity::beta(std::size_t grid_size, double a, double b)
{
    // Exact cell masses from the CDF so that singular endpoints stay finite
    std::vector<double> v(grid_size);
    double n = static_cast<double>(grid_size);
    double prev = 0.0;
    for (std::size_t i = 0; i < grid_size; ++i)
    {
        double cur = i + 1 == grid_size ? 1.0
                                        : beta_cdf(a, b, static_cast<double>(i + 1) / n);
        v[i] = (cur - prev) * n;
        prev = cur;
    }
    return GridDensity(std::move(v));
}

double GridDensity::mass() const
{
    double acc = 0;
    for (double v : g_)
        acc += v;
    return acc * cell_width();
}

void GridDensity::normalize()
{
    double m = mass();
    if (!(m > 0))
        throw ContractError("GridDensity: cannot normalize zero mass");
    for (auto& v : g_)
        v /= m;
}

double GridDensity::moment(int k) const
{
    // Exact integral of z^k over each cell
    double h = cell_width();
    double acc = 0;
    double prev = 0.0;
    for (std::size_t i = 0; i < g_.size(); ++i)
    {
        double r = static_cast<double>(i + 1) * h;
        double cur = std::pow(r, k + 1);
        acc += g_[i] * (cur - prev);
        prev = cur;
    }
    return acc / (k + 1);
}

double GridDensity::mean() const
{
    double acc = 0;
    for (std::size_t i = 0; i < g_.size(); ++i)
        acc += g_[i] * midpoint(i);
    return acc * cell_width();
}

double GridDensity::variance() const
{
    double m = mean();
    return moment(2) - m * m;
}

double GridDensity::cdf(double x) const
{
    if (x <= 0)
        return 0.0;
    if (x >= 1)
        return 1.0;
    double h = cell_width();
    auto k = std::min(static_cast<std::size_t>(x / h), g_.size() - 1);
    double acc = 0;
    for (std::size_t i = 0; i < k; ++i)
        acc += g_[i];
    return (acc + g_[k] * (x / h - static_cast<double>(k))) * h;
}

double GridDensity::quantile(double u) const
{
    double h = cell_width();
    double target = std::clamp(u, 0.0, 1.0) / h;
    double acc = 0;
    for (std::size_t i = 0; i < g_.size(); ++i)
    {
        if (acc + g_[i] >= target && g_[i] > 0)
        {
            double frac = (target - acc) / g_[i];
            return (static_cast<double>(i) + std::clamp(frac, 0.0, 1.0)) * h;
        }
        acc += g_[i];
    }
    // Round-off: return the right edge of the last occupied cell
    for (std::size_t i = g_.size(); i-- > 0;)
        if (g_[i] > 0)
            return static_cast<double>(i + 1) * h;
    return 1.0;
}

GridSampler::GridSampler(const GridDensity& g)
    : cum_(g.size() + 1, 0.0), g_(g.values()), h_(g.cell_width())
{
    for (std::size_t i = 0; i < g.size(); ++i)
        cum_[i + 1] = cum_[i] + g[i] * h_;
    double total = cum_.back();
    for (auto& c : cum_)
        c /= total;
    for (auto& v : g_)
        v /= total;
}

double GridSampler::operator()(double u) const
{
    u = std::clamp(u, 0.0, 1.0);
    auto it = std::lower_bound(cum_.begin() + 1, cum_.end(), u);
    if (it == cum_.end())
        it = cum_.end() - 1;
    auto i = static_cast<std::size_t>(it - cum_.begin()) - 1;
    // Skip empty cells so the result lies inside the support
    while (g_[i] == 0 && i + 1 < g_.size())
        ++i;
    double frac = g_[i] > 0 ? (u - cum_[i]) / (g_[i] * h_) : 0.0;
    return std::clamp((static_cast<double>(i) + std::clamp(frac, 0.0, 1.0)) * h_, 0.0, 1.0);
}

double l1_distance(const GridDensity& a, const GridDensity& b)
{
    if (a.size() != b.size())
        throw ArgumentError("l1_distance: grid sizes differ");
    double acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += std::abs(a[i] - b[i]);
    return acc * a.cell_width();
}

double w1_grid(const GridDensity& a, const GridDensity& b)
{
    if (a.size() != b.size())
        throw ArgumentError("w1_grid: grid sizes differ");
    // The CDF difference is linear in each cell; integrate |.| exactly.
    double h = a.cell_width();
    double d0 = 0;
    double acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        double d1 = d0 + (a[i] - b[i]) * h;
        if ((d0 >= 0 && d1 >= 0) || (d0 <= 0 && d1 <= 0))
            acc += 0.5 * (std::abs(d0) + std::abs(d1)) * h;
        else
            acc += 0.5 * (d0 * d0 + d1 * d1) / std::abs(d1 - d0) * h;
        d0 = d1;
    }
    return acc;
}

double w1_sample_vs_grid(std::vector<double> sample, const GridDensity& g)
{
    if (sample.empty())
        throw ArgumentError("w1_sample_vs_grid: empty sample");
    std::sort(sample.begin(), sample.end());
    double h = g.cell_width();
    double const inv = 1.0 / static_cast<double>(sample.size());
    // Breakpoints: cell edges and sample points. F_grid is linear between
    // consecutive breakpoints and F_emp is constant.
    double acc = 0;
    std::size_t j = 0;    // samples <= x
    std::size_t cell = 0;
    double x = 0.0;
    double fg = 0.0;
    while (x < 1.0)
    {
        while (j < sample.size() && sample[j] <= x)
            ++j;
        double next_edge = static_cast<double>(cell + 1) * h;
        double next = next_edge;
        if (j < sample.size() && sample[j] < next)
            next = sample[j];
        double fg_next = fg + g[cell] * (next - x);
        double fe = static_cast<double>(j) * inv;
        double d0 = fg - fe, d1 = fg_next - fe;
        double w = next - x;
        if ((d0 >= 0 && d1 >= 0) || (d0 <= 0 && d1 <= 0))
            acc += 0.5 * (std::abs(d0) + std::abs(d1)) * w;
        else
            acc += 0.5 * (d0 * d0 + d1 * d1) / std::abs(d1 - d0) * w;
        x = next;
        fg = fg_next;
        if (next == next_edge)
        {
            ++cell;
            if (cell == g.size())
                break;
        }
    }
    return acc;
}

}  // namespace wfsim
