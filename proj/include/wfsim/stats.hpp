//! Distances, samplers and estimators on [0,1]-valued samples.
#pragma once

#include <cstddef>
#include <vector>

#include "rng.hpp"

namespace wfsim
{
using SampleVector = std::vector<double>;

//! Mean |a_(i) - b_(i)| over sorted order statistics; sizes must match
double w1_empirical(SampleVector a, SampleVector b);
double w1_sorted(const SampleVector& a, const SampleVector& b);
//! Same quantity computed as the L1 distance between empirical CDFs
double w1_cdf_l1(SampleVector a, SampleVector b);
//! |a1 - b1| / (a1 + a2) for Beta laws of equal total mass
double w1_beta_closed(double a1, double a2, double b1, double b2);
//! Exact W1 between an empirical law and Beta(a, b)
double w1_empirical_vs_beta(SampleVector s, double a, double b);

double beta_sample(double a, double b, ReplicateStream& stream);
SampleVector beta_samples(double a, double b, std::size_t n, ReplicateStream& stream);
double beta_pdf(double a, double b, double x);
double beta_cdf(double a, double b, double x);
//! Raw moments E[X^k] of Beta(a, b) for k = 0..k_max
std::vector<double> beta_moments(double a, double b, int k_max);

double mean(const SampleVector& s);
double variance(const SampleVector& s);
//! Sample raw moments, index 0..k_max
std::vector<double> moments_empirical(const SampleVector& s, int k_max);
double mc_stderr(const SampleVector& s);
//! Standard error of the sample variance (delta method via fourth moment)
double variance_stderr(const SampleVector& s);

struct KsResult
{
    double statistic;
    double p_value;
};
KsResult ks_two_sample(SampleVector a, SampleVector b);

struct LinearFit
{
    double slope;
    double intercept;
    double slope_stderr;
};
//! Least squares, optionally weighted by 1/sigma^2
LinearFit linear_fit(const std::vector<double>& x,
                     const std::vector<double>& y,
                     const std::vector<double>& sigma = {});

//! Two-sided normal tail probability of |Z| > z
double normal_two_sided_p(double z);

struct Histogram
{
    std::vector<double> edges;
    std::vector<std::size_t> counts;
};
Histogram histogram(const SampleVector& s, std::size_t bins);

}  // namespace wfsim
