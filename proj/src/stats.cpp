#include "wfsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <boost/math/distributions/beta.hpp>

#include "wfsim/engine.hpp"

namespace wfsim
{
double w1_sorted(const SampleVector& a, const SampleVector& b)
{
    if (a.size() != b.size())
        throw ArgumentError("w1_empirical: sample sizes differ ("
                            + std::to_string(a.size()) + " vs "
                            + std::to_string(b.size()) + ")");
    if (a.empty())
        return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += std::abs(a[i] - b[i]);
    return acc / static_cast<double>(a.size());
}

double w1_empirical(SampleVector a, SampleVector b)
{
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return w1_sorted(a, b);
}

double w1_cdf_l1(SampleVector a, SampleVector b)
{
    if (a.size() != b.size())
        throw ArgumentError("w1_cdf_l1: sample sizes differ");
    if (a.empty())
        return 0.0;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double const inv = 1.0 / static_cast<double>(a.size());
    std::size_t i = 0, j = 0;
    double x = std::min(a[0], b[0]);
    double acc = 0.0;
    while (i < a.size() || j < b.size())
    {
        double next = (j == b.size() || (i < a.size() && a[i] <= b[j])) ? a[i] : b[j];
        acc += std::abs(static_cast<double>(i) - static_cast<double>(j)) * inv
               * (next - x);
        x = next;
        while (i < a.size() && a[i] == x)
            ++i;
        while (j < b.size() && b[j] == x)
            ++j;
    }
    return acc;
}

double w1_beta_closed(double a1, double a2, double b1, double b2)
{
    if (a1 <= 0 || a2 <= 0 || b1 <= 0 || b2 <= 0)
        throw ArgumentError("w1_beta_closed: shapes must be positive");
    if (std::abs((a1 + a2) - (b1 + b2)) > 1e-12 * std::max(1.0, a1 + a2))
        throw ArgumentError("w1_beta_closed: total masses differ");
    return std::abs(a1 - b1) / (a1 + a2);
}

double w1_empirical_vs_beta(SampleVector s, double a, double b)
{
    if (s.empty())
        throw ArgumentError("w1_empirical_vs_beta: empty sample");
    std::sort(s.begin(), s.end());
    boost::math::beta_distribution<double> dist(a, b);
    // Integrate |F_n - F| piecewise: F_n is constant between order statistics
    // and the integral of F on an interval uses int F = x F(x) - E[X; X<=x].
    auto partial_mean = [&](double x) {
        // E[X 1{X<=x}] = a/(a+b) * I_x(a+1, b)
        return a / (a + b) * boost::math::ibeta(a + 1, b, x);
    };
    auto int_F = [&](double lo, double hi) {
        return (hi * boost::math::cdf(dist, hi) - partial_mean(hi))
               - (lo * boost::math::cdf(dist, lo) - partial_mean(lo));
    };
    double const n = static_cast<double>(s.size());
    double acc = 0.0;
    double lo = 0.0;
    for (std::size_t i = 0; i <= s.size(); ++i)
    {
        double hi = i < s.size() ? s[i] : 1.0;
        double level = static_cast<double>(i) / n;
        if (hi > lo)
        {
            // Split at the crossing point F(x) = level, if inside.
            double flo = boost::math::cdf(dist, lo);
            double fhi = boost::math::cdf(dist, hi);
            if (flo >= level)
                acc += int_F(lo, hi) - level * (hi - lo);
            else if (fhi <= level)
                acc += level * (hi - lo) - int_F(lo, hi);
            else
            {
                double c = boost::math::quantile(dist, level);
                acc += level * (c - lo) - int_F(lo, c);
                acc += int_F(c, hi) - level * (hi - c);
            }
        }
        lo = std::max(lo, hi);
    }
    return acc;
}

double beta_sample(double a, double b, ReplicateStream& stream)
{
    if (!(a > 0) || !(b > 0))
        throw ArgumentError("beta_sample: shapes must be positive");
    std::gamma_distribution<double> ga(a, 1.0);
    std::gamma_distribution<double> gb(b, 1.0);
    double x = ga(stream);
    double y = gb(stream);
    double s = x + y;
    if (s <= 0)
        return a >= b ? 1.0 : 0.0;
    return x / s;
}

SampleVector beta_samples(double a, double b, std::size_t n, ReplicateStream& stream)
{
    SampleVector out(n);
    for (auto& v : out)
        v = beta_sample(a, b, stream);
    return out;
}

double beta_pdf(double a, double b, double x)
{
    return boost::math::pdf(boost::math::beta_distribution<double>(a, b), x);
}

double beta_cdf(double a, double b, double x)
{
    return boost::math::cdf(boost::math::beta_distribution<double>(a, b), x);
}

std::vector<double> beta_moments(double a, double b, int k_max)
{
    std::vector<double> m(static_cast<std::size_t>(k_max) + 1, 1.0);
    for (int k = 1; k <= k_max; ++k)
        m[k] = m[k - 1] * (a + k - 1) / (a + b + k - 1);
    return m;
}

double mean(const SampleVector& s)
{
    if (s.empty())
        return 0.0;
    return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

double variance(const SampleVector& s)
{
    if (s.size() < 2)
        return 0.0;
    // shifted by the first value so constant samples give exactly zero
    double k = s[0], m = 0.0;
    for (double v : s)
        m += v - k;
    m /= static_cast<double>(s.size());
    double acc = 0.0;
    for (double v : s)
        acc += (v - k - m) * (v - k - m);
    return acc / static_cast<double>(s.size() - 1);
}

std::vector<double> moments_empirical(const SampleVector& s, int k_max)
{
    std::vector<double> m(static_cast<std::size_t>(k_max) + 1, 0.0);
    for (double v : s)
    {
        double p = 1.0;
        for (int k = 0; k <= k_max; ++k)
        {
            m[k] += p;
            p *= v;
        }
    }
    for (auto& x : m)
        x /= static_cast<double>(std::max<std::size_t>(s.size(), 1));
    return m;
}

double mc_stderr(const SampleVector& s)
{
    if (s.size() < 2)
        return 0.0;
    return std::sqrt(variance(s) / static_cast<double>(s.size()));
}

double variance_stderr(const SampleVector& s)
{
    if (s.size() < 4)
        return 0.0;
    double m = mean(s);
    double m2 = 0, m4 = 0;
    for (double v : s)
    {
        double d = (v - m) * (v - m);
        m2 += d;
        m4 += d * d;
    }
    double n = static_cast<double>(s.size());
    m2 /= n;
    m4 /= n;
    return std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);
}

KsResult ks_two_sample(SampleVector a, SampleVector b)
{
    if (a.empty() || b.empty())
        throw ArgumentError("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double const na = static_cast<double>(a.size());
    double const nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size())
    {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x)
            ++i;
        while (j < b.size() && b[j] == x)
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    double ne = na * nb / (na + nb);
    double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
    double p = 1.0;
    if (lambda > 0.2)
    {
        // Kolmogorov tail Q(l) = 2 sum (-1)^(k-1) exp(-2 k^2 l^2)
        p = 0.0;
        for (int k = 1; k <= 100; ++k)
        {
            double term = 2.0 * std::exp(-2.0 * k * k * lambda * lambda);
            p += (k % 2 == 1) ? term : -term;
            if (term < 1e-16)
                break;
        }
    }
    return {d, std::clamp(p, 0.0, 1.0)};
}

LinearFit linear_fit(const std::vector<double>& x,
                     const std::vector<double>& y,
                     const std::vector<double>& sigma)
{
    std::size_t const n = x.size();
    if (n < 2 || y.size() != n || (!sigma.empty() && sigma.size() != n))
        throw ArgumentError("linear_fit: need at least two matching points");
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        double w = sigma.empty() ? 1.0 : 1.0 / (sigma[i] * sigma[i]);
        sw += w;
        sx += w * x[i];
        sy += w * y[i];
        sxx += w * x[i] * x[i];
        sxy += w * x[i] * y[i];
    }
    double det = sw * sxx - sx * sx;
    LinearFit f;
    f.slope = (sw * sxy - sx * sy) / det;
    f.intercept = (sy - f.slope * sx) / sw;
    if (!sigma.empty())
    {
        f.slope_stderr = std::sqrt(sw / det);
    }
    else if (n > 2)
    {
        double rss = 0;
        for (std::size_t i = 0; i < n; ++i)
        {
            double r = y[i] - f.intercept - f.slope * x[i];
            rss += r * r;
        }
        f.slope_stderr = std::sqrt(rss / static_cast<double>(n - 2) * sw / det);
    }
    else
    {
        f.slope_stderr = 0.0;
    }
    return f;
}

double normal_two_sided_p(double z)
{
    return std::erfc(std::abs(z) / std::sqrt(2.0));
}

Histogram histogram(const SampleVector& s, std::size_t bins)
{
    if (bins == 0)
        throw ArgumentError("histogram: need at least one bin");
    Histogram h;
    h.edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i)
        h.edges[i] = static_cast<double>(i) / static_cast<double>(bins);
    h.counts.assign(bins, 0);
    for (double v : s)
    {
        auto k = static_cast<std::size_t>(v * static_cast<double>(bins));
        ++h.counts[std::min(k, bins - 1)];
    }
    return h;
}

}  // namespace wfsim
