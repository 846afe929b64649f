//! Piecewise-constant densities on a uniform partition of [0,1].
#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace wfsim
{
class GridDensity
{
  public:
    GridDensity() = default;
    explicit GridDensity(std::vector<double> values);

    static GridDensity uniform(std::size_t grid_size);
    //! Cell averages of f, then normalized
    static GridDensity from_function(std::size_t grid_size,
                                     const std::function<double(double)>& f);
    //! All mass in the cell containing x
    static GridDensity point_mass(std::size_t grid_size, double x);
    static GridDensity beta(std::size_t grid_size, double a, double b);

    std::size_t size() const { return g_.size(); }
    double cell_width() const { return 1.0 / static_cast<double>(g_.size()); }
    double midpoint(std::size_t i) const
    {
        return (static_cast<double>(i) + 0.5) * cell_width();
    }
    const std::vector<double>& values() const { return g_; }
    double operator[](std::size_t i) const { return g_[i]; }

    double mass() const;
    void normalize();
    double mean() const;
    double variance() const;
    //! Raw moment of order k of the piecewise-constant law
    double moment(int k) const;
    double cdf(double x) const;
    //! Inverse CDF; exact for the piecewise-linear CDF
    double quantile(double u) const;

  private:
    std::vector<double> g_;
};

//! Inverse-CDF sampler with a precomputed cumulative table
class GridSampler
{
  public:
    explicit GridSampler(const GridDensity& g);
    double operator()(double u) const;

  private:
    std::vector<double> cum_;  // cum_[i] = F(i h)
    std::vector<double> g_;
    double h_;
};

//! L1 distance between the two densities
double l1_distance(const GridDensity& a, const GridDensity& b);
//! W1 as the L1 distance between CDFs; grids must match
double w1_grid(const GridDensity& a, const GridDensity& b);
//! W1 between a sample's empirical law and a grid law, exact
double w1_sample_vs_grid(std::vector<double> sample, const GridDensity& g);

}  // namespace wfsim
