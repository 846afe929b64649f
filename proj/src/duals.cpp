#include "wfsim/duals.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <limits>
#include <string>
#include <tuple>

#include "wfsim/engine.hpp"
#include "wfsim/kernel.hpp"

namespace wfsim
{
namespace
{
constexpr double fold_limit = 1e-12;

void finalize(TransitionRow& row)
{
    auto key = [](int d) { return d == cemetery ? std::numeric_limits<int>::max() : d; };
    std::sort(row.entries.begin(), row.entries.end(), [&](auto const& a, auto const& b) {
        return key(a.first) < key(b.first);
    });
    std::vector<std::pair<int, double>> merged;
    for (auto const& e : row.entries)
    {
        if (!merged.empty() && merged.back().first == e.first)
            merged.back().second += e.second;
        else
            merged.push_back(e);
    }
    bool has_stay = false;
    for (auto const& e : merged)
        has_stay = has_stay || e.first == row.source;
    if (!has_stay)
    {
        merged.emplace_back(row.source, 0.0);
        std::sort(merged.begin(), merged.end(), [&](auto const& a, auto const& b) {
            return key(a.first) < key(b.first);
        });
    }
    double total = 0;
    for (auto const& e : merged)
    {
        if (e.second < 0)
            throw ContractError("dual row " + std::to_string(row.source)
                                + ": negative transition probability");
        total += e.second;
    }
    double rem = 1.0 - total;
    if (std::abs(rem) >= fold_limit)
        throw ContractError("dual row " + std::to_string(row.source)
                            + ": probabilities sum to " + std::to_string(total));
    for (auto& e : merged)
        if (e.first == row.source)
            e.second += rem;
    row.folded = rem;
    merged.erase(std::remove_if(merged.begin(),
                                merged.end(),
                                [&](auto const& e) { return e.second <= 0 && e.first != row.source; }),
                 merged.end());
    row.entries = std::move(merged);
}

double power_or_zero(double z, int d)
{
    return d == cemetery ? 0.0 : std::pow(z, d);
}

int count_below(int trials, double u, ReplicateStream& stream)
{
    int k = 0;
    for (int i = 0; i < trials; ++i)
        k += stream.uniform() <= u ? 1 : 0;
    return k;
}

//! Merge K lines, then resolve the event selected by e in [0,1)
int apply_event(int m, int k, double e, const FtwDualParams& p)
{
    if (k == 0)
        return m;
    int a = m - k + 1;
    double d0 = p.delta0();
    int r = 0;
    while (r < static_cast<int>(p.sigma.size()) && e < d0 * p.sigma[r])
        ++r;
    if (r > 0)
        return a + r;
    if (e >= 1.0 - d0 * p.theta1)
        return cemetery;
    if (e >= 1.0 - d0 * p.theta())
        return a - 1;
    return a;
}
}  // namespace

double binomial_coeff(int n, int k)
{
    if (k < 0 || k > n)
        return 0.0;
    k = std::min(k, n - k);
    double r = 1.0;
    for (int i = 1; i <= k; ++i)
        r = r * (n - k + i) / i;
    return r;
}

double lambda_coeff(int n, int k, double delta)
{
    if (n < 0 || k < 0 || k > n)
        throw ArgumentError("lambda_coeff: need 0 <= k <= n");
    return lambda_row(n, delta)[k];
}

std::vector<double> merger_weights(int n, double delta)
{
    if (n < 0)
        throw ArgumentError("merger_weights: n must be nonnegative");
    if (!(delta > 0 && delta <= 1))
        throw ArgumentError("merger_weights: delta must lie in (0,1]");
    // w_k = sum_{i >= k} P(Bin(n, delta) = i) / (i + 1)
    std::vector<double> w(static_cast<std::size_t>(n) + 1);
    double acc = 0;
    for (int i = n; i >= 0; --i)
    {
        double pmf;
        if (delta == 1.0)
            pmf = i == n ? 1.0 : 0.0;
        else
            pmf = std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0)
                           + i * std::log(delta) + (n - i) * std::log1p(-delta));
        acc += pmf / (i + 1);
        w[i] = acc;
    }
    return w;
}

LambdaTable::LambdaTable(int n_max, double delta) : delta_(delta)
{
    if (n_max < 0)
        throw ArgumentError("LambdaTable: n_max must be nonnegative");
    for (int n = 0; n <= n_max; ++n)
        rows_.push_back(lambda_row(n, delta));
}

double TransitionRow::probability(int dest) const
{
    for (auto const& e : entries)
        if (e.first == dest)
            return e.second;
    return 0.0;
}

double TransitionRow::sum() const
{
    double s = 0;
    for (auto const& e : entries)
        s += e.second;
    return s;
}

double TransitionRow::expectation(double z) const
{
    double s = 0;
    for (auto const& e : entries)
        s += e.second * power_or_zero(z, e.first);
    return s;
}

TransitionRow neutral_dual_row(int m, double delta)
{
    if (m < 0)
        throw ArgumentError("neutral_dual_row: m must be nonnegative");
    TransitionRow row;
    row.source = m;
    if (m == 0)
    {
        row.entries = {{0, 1.0}};
        return row;
    }
    auto w = merger_weights(m, delta);
    row.entries.emplace_back(m, w[0] + w[1]);
    for (int k = 2; k <= m; ++k)
        row.entries.emplace_back(m - k + 1, w[k]);
    finalize(row);
    return row;
}

std::vector<TransitionRow> neutral_dual_matrix(int m, double delta)
{
    if (m < 1)
        throw ArgumentError("neutral_dual_matrix: m must be at least 1");
    std::vector<TransitionRow> rows;
    for (int i = 0; i <= m; ++i)
        rows.push_back(neutral_dual_row(i, delta));
    return rows;
}

double neutral_dual_expectation(double z, int m, long n, double delta)
{
    if (n < 0)
        throw ArgumentError("neutral_dual_expectation: n must be nonnegative");
    auto rows = neutral_dual_matrix(m, delta);
    std::vector<double> v(static_cast<std::size_t>(m) + 1);
    for (int j = 0; j <= m; ++j)
        v[j] = std::pow(z, j);
    for (long t = 0; t < n; ++t)
    {
        std::vector<double> next(v.size());
        for (int i = 0; i <= m; ++i)
            for (auto const& e : rows[i].entries)
                next[i] += e.second * v[e.first];
        v = std::move(next);
    }
    return v[m];
}

namespace
{
DualityResult make_result(double z, int m, long n, double lhs, double se_l, double rhs, double se_r)
{
    DualityResult r{z, m, n, lhs, rhs, se_l, se_r, 0.0, true};
    double se = std::hypot(se_l, se_r);
    double gap = std::abs(lhs - rhs);
    r.z_score = se > 0 ? gap / se : (gap == 0 ? 0.0 : INFINITY);
    r.pass = gap <= 3 * se;
    return r;
}

//! Forward values at each requested n, one vector per replicate
template<class Step>
std::vector<std::vector<double>> forward_snapshots(double z,
                                                   const std::vector<long>& n_list,
                                                   std::size_t reps,
                                                   std::uint64_t seed,
                                                   std::uint64_t substream,
                                                   Step&& step)
{
    long n_max = n_list.empty() ? 0 : *std::max_element(n_list.begin(), n_list.end());
    return map_replicates<std::vector<double>>(reps, seed, [&](std::uint64_t, ReplicateStream& s0) {
        auto s = s0.split(substream);
        std::vector<double> snap(n_list.size());
        double x = z;
        for (long t = 0; t <= n_max; ++t)
        {
            for (std::size_t i = 0; i < n_list.size(); ++i)
                if (n_list[i] == t)
                    snap[i] = x;
            if (t < n_max)
                x = step(x, s);
        }
        return snap;
    });
}
}  // namespace

std::vector<DualityResult> duality_grid_neutral(const std::vector<double>& z_list,
                                                const std::vector<int>& m_list,
                                                const std::vector<long>& n_list,
                                                double delta,
                                                std::size_t reps,
                                                std::uint64_t master_seed)
{
    if (reps < 2)
        throw ArgumentError("duality_grid_neutral: need at least two replicates");
    KernelParams{delta, 0.5}.validate();
    std::vector<DualityResult> out;
    for (std::size_t a = 0; a < z_list.size(); ++a)
    {
        double z = z_list[a];
        auto snaps = forward_snapshots(z, n_list, reps, master_seed, a, [&](double x, ReplicateStream& s) {
            double u = s.uniform();
            double v = s.uniform();
            return update_sup(x, delta, x, u, v);
        });
        for (int m : m_list)
        {
            for (std::size_t i = 0; i < n_list.size(); ++i)
            {
                MeanAccumulator acc;
                for (auto const& sn : snaps)
                    acc.add(std::pow(sn[i], m));
                double rhs = neutral_dual_expectation(z, m, n_list[i], delta);
                out.push_back(make_result(z, m, n_list[i], acc.mean, acc.stderr_mean(), rhs, 0.0));
            }
        }
    }
    return out;
}

DualityResult duality_check_neutral(double z, int m, long n, double delta, std::size_t reps, std::uint64_t master_seed)
{
    if (m < 1 || n < 0)
        throw ArgumentError("duality_check_neutral: need m >= 1 and n >= 0");
    return duality_grid_neutral({z}, {m}, {n}, delta, reps, master_seed).front();
}

//---------------------------------------------------------------------------//

FtwDualParams FtwDualParams::from(const FtwParams& p)
{
    return {p.delta, p.theta0, p.theta1, p.sigma, p.sigma_tail};
}

FtwParams FtwDualParams::forward() const
{
    return {delta, theta0, theta1, sigma, sigma_tail};
}

void FtwDualParams::validate() const
{
    forward().validate();
}

std::vector<double> FtwDualParams::rho() const
{
    std::vector<double> r(sigma.size());
    for (std::size_t i = 0; i < sigma.size(); ++i)
    {
        double next = i + 1 < sigma.size() ? sigma[i + 1] : 0.0;
        r[i] = (sigma[i] - next) / sigma[0];
    }
    return r;
}

double FtwDualParams::mean_branching() const
{
    auto r = rho();
    double b = 0;
    for (std::size_t i = 0; i < r.size(); ++i)
        b += static_cast<double>(i + 1) * r[i];
    return b;
}

TransitionRow ftw_dual_row(int m, const FtwDualParams& params)
{
    if (m < 0)
        throw ArgumentError("ftw_dual_row: m must be nonnegative");
    params.validate();
    TransitionRow row;
    row.source = m;
    if (m == 0)
    {
        row.entries = {{0, 1.0}};
        return row;
    }
    auto w = merger_weights(m, params.delta);
    auto rho = params.rho();
    int const J = static_cast<int>(rho.size());
    auto rho_at = [&](int i) { return i >= 1 && i <= J ? rho[i - 1] : 0.0; };
    double const d0 = params.delta0();
    double const c = 1.0 - d0 * (params.theta() + params.sigma0());
    double const s = d0 * params.sigma0();

    double stay = w[0] + c * w[1];
    for (int k = 2; k <= m; ++k)
        stay += s * w[k] * rho_at(k - 1);
    row.entries.emplace_back(m, stay);

    for (int j = 1; j <= m; ++j)
    {
        double p = d0 * params.theta0 * w[j];
        if (j + 1 <= m)
            p += c * w[j + 1];
        for (int k = j + 2; k <= m; ++k)
            p += s * w[k] * rho_at(k - j - 1);
        row.entries.emplace_back(m - j, p);
    }
    for (int j = 1; j <= J; ++j)
    {
        double p = 0;
        for (int k = 1; k <= m; ++k)
            p += w[k] * rho_at(j + k - 1);
        row.entries.emplace_back(m + j, s * p);
    }
    row.entries.emplace_back(cemetery, d0 * params.theta1 * (1.0 - w[0]));
    finalize(row);
    return row;
}

FtwDualTable::FtwDualTable(const FtwDualParams& params, int m_max)
{
    if (m_max < 0)
        throw ArgumentError("FtwDualTable: m_max must be nonnegative");
    params.validate();
    for (int m = 0; m <= m_max; ++m)
    {
        rows_.push_back(ftw_dual_row(m, params));
        std::vector<double> cum;
        double acc = 0;
        for (auto const& e : rows_.back().entries)
            cum.push_back(acc += e.second);
        cum.back() = 1.0;
        cum_.push_back(std::move(cum));
    }
}

const TransitionRow& FtwDualTable::row(int m) const
{
    if (m < 0 || m > m_max())
        throw ArgumentError("FtwDualTable: state " + std::to_string(m) + " outside table");
    return rows_[m];
}

int FtwDualTable::step(int m, ReplicateStream& stream) const
{
    if (m == cemetery)
        return cemetery;
    auto const& r = row(m);
    auto const& cum = cum_[m];
    double u = stream.uniform();
    auto i = static_cast<std::size_t>(std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
    return r.entries[std::min(i, cum.size() - 1)].first;
}

std::vector<int> ftw_dual_simulate(int m0, const FtwDualTable& table, long n, ReplicateStream& stream)
{
    std::vector<int> path{m0};
    path.reserve(static_cast<std::size_t>(n) + 1);
    for (long t = 0; t < n; ++t)
        path.push_back(table.step(path.back(), stream));
    return path;
}

int ftw_dual_reach(int m0, long n, const FtwDualParams& params)
{
    return m0 + static_cast<int>(n) * static_cast<int>(params.sigma.size());
}

int ftw_dual_particle_step(int m, const FtwDualParams& params, ReplicateStream& stream)
{
    if (m <= 0)
        return m;
    double u = params.delta * stream.uniform();
    int k = count_below(m, u, stream);
    double e = 1.0 - stream.uniform();
    return apply_event(m, k, e, params);
}

void check_comparable(const FtwDualParams& pa, const FtwDualParams& pb)
{
    pa.validate();
    pb.validate();
    if (pa.delta != pb.delta)
        throw ArgumentError("dual comparison: both chains need the same delta");
    std::size_t len = std::max(pa.sigma.size(), pb.sigma.size());
    for (std::size_t i = 0; i < len; ++i)
    {
        double a = i < pa.sigma.size() ? pa.sigma[i] : 0.0;
        double b = i < pb.sigma.size() ? pb.sigma[i] : 0.0;
        if (a > b)
            throw ArgumentError("dual comparison: need sigma_A <= sigma_B pointwise");
    }
    bool b_free = pb.theta0 == 0 && pb.theta1 == 0;
    bool same = pb.theta0 == pa.theta0 && pb.theta1 == pa.theta1;
    if (!b_free && !same)
        throw ArgumentError("dual comparison: B must be mutation-free or share A's mutation rates");
}

std::pair<int, int> ftw_dual_coupled_step(int a,
                                          int b,
                                          const FtwDualParams& pa,
                                          const FtwDualParams& pb,
                                          ReplicateStream& stream)
{
    if (a == cemetery)
        return {cemetery, ftw_dual_particle_step(b, pb, stream)};
    if (b == cemetery)
        return {ftw_dual_particle_step(a, pa, stream), cemetery};
    double u = pa.delta * stream.uniform();
    int lo = std::min(a, b);
    int k_lo = count_below(lo, u, stream);
    int k_hi = k_lo + count_below(std::max(a, b) - lo, u, stream);
    int ka = a <= b ? k_lo : k_hi;
    int kb = a <= b ? k_hi : k_lo;
    double e = 1.0 - stream.uniform();
    return {apply_event(a, ka, e, pa), apply_event(b, kb, e, pb)};
}

ComparisonReport ftw_dual_comparison(int m0,
                                     const FtwDualParams& pa,
                                     const FtwDualParams& pb,
                                     long n,
                                     std::size_t reps,
                                     std::uint64_t master_seed)
{
    check_comparable(pa, pb);
    auto outs = map_replicates<std::array<std::size_t, 2>>(
        reps, master_seed, [&](std::uint64_t, ReplicateStream& s) {
            int a = m0, b = m0;
            std::size_t bad = 0;
            for (long t = 0; t < n; ++t)
            {
                std::tie(a, b) = ftw_dual_coupled_step(a, b, pa, pb, s);
                if (a != cemetery && b != cemetery && a > b)
                    ++bad;
            }
            return std::array<std::size_t, 2>{bad, a == cemetery ? 1u : 0u};
        });
    ComparisonReport r{reps, 0, 0};
    for (auto const& o : outs)
    {
        r.violations += o[0];
        r.killed += o[1];
    }
    return r;
}

std::vector<DualityResult> duality_grid_ftw(const std::vector<double>& z_list,
                                            const std::vector<int>& m_list,
                                            const std::vector<long>& n_list,
                                            const FtwDualParams& params,
                                            std::size_t reps,
                                            std::uint64_t master_seed)
{
    if (reps < 2)
        throw ArgumentError("duality_grid_ftw: need at least two replicates");
    params.validate();
    auto drift = DriftSpec::fittest_type_wins(params.forward());
    long n_max = n_list.empty() ? 0 : *std::max_element(n_list.begin(), n_list.end());
    int m_top = m_list.empty() ? 0 : *std::max_element(m_list.begin(), m_list.end());
    FtwDualTable table(params, ftw_dual_reach(m_top, n_max, params));

    // Dual paths per m, on substreams 1000 + b, evaluated at every z afterwards
    std::vector<std::vector<std::vector<int>>> dual(m_list.size());
    for (std::size_t b = 0; b < m_list.size(); ++b)
    {
        dual[b] = map_replicates<std::vector<int>>(reps, master_seed, [&](std::uint64_t, ReplicateStream& s0) {
            auto s = s0.split(1000 + b);
            auto path = ftw_dual_simulate(m_list[b], table, n_max, s);
            std::vector<int> snap(n_list.size());
            for (std::size_t i = 0; i < n_list.size(); ++i)
                snap[i] = path[n_list[i]];
            return snap;
        });
    }

    std::vector<DualityResult> out;
    for (std::size_t a = 0; a < z_list.size(); ++a)
    {
        double z = z_list[a];
        auto snaps = forward_snapshots(z, n_list, reps, master_seed, a, [&](double x, ReplicateStream& s) {
            return chain_step(params.delta, drift, x, s);
        });
        for (std::size_t b = 0; b < m_list.size(); ++b)
        {
            int m = m_list[b];
            for (std::size_t i = 0; i < n_list.size(); ++i)
            {
                MeanAccumulator fwd, bwd;
                for (auto const& sn : snaps)
                    fwd.add(std::pow(sn[i], m));
                for (auto const& d : dual[b])
                    bwd.add(power_or_zero(z, d[i]));
                out.push_back(make_result(
                    z, m, n_list[i], fwd.mean, fwd.stderr_mean(), bwd.mean, bwd.stderr_mean()));
            }
        }
    }
    return out;
}

DualityResult duality_check_ftw(double z, int m, long n, const FtwDualParams& params, std::size_t reps, std::uint64_t master_seed)
{
    if (m < 1 || n < 0)
        throw ArgumentError("duality_check_ftw: need m >= 1 and n >= 0");
    return duality_grid_ftw({z}, {m}, {n}, params, reps, master_seed).front();
}

AbsorptionFraction ftw_dual_absorption_fraction(
    int m0, const FtwDualParams& params, long n, std::size_t reps, std::uint64_t master_seed)
{
    params.validate();
    auto ends = map_replicates<int>(reps, master_seed, [&](std::uint64_t, ReplicateStream& s) {
        int m = m0;
        for (long t = 0; t < n && m > 0; ++t)
            m = ftw_dual_particle_step(m, params, s);
        return m;
    });
    double zero = 0, dead = 0;
    for (int m : ends)
    {
        zero += m == 0 ? 1 : 0;
        dead += m == cemetery ? 1 : 0;
    }
    double r = static_cast<double>(reps);
    return {(zero + dead) / r, zero / r, dead / r};
}

std::vector<double> absorption_table(int m_max, double delta, double theta0, double theta1)
{
    if (m_max < 0)
        throw ArgumentError("absorption_table: m_max must be nonnegative");
    if (!(theta0 > 0 && theta1 > 0))
        throw ArgumentError("absorption_table: mutation rates must be positive");
    FtwDualParams p{delta, theta0, theta1, {}, 0.0};
    p.validate();
    std::vector<double> h(static_cast<std::size_t>(m_max) + 1);
    h[0] = 1.0;
    for (int j = 1; j <= m_max; ++j)
    {
        auto row = ftw_dual_row(j, p);
        double stay = 0, acc = 0;
        for (auto const& e : row.entries)
        {
            if (e.first == j)
                stay = e.second;
            else if (e.first == cemetery)
                continue;
            else if (e.first < j)
                acc += e.second * h[e.first];
            else
                throw ContractError("absorption_table: upward move without selection");
        }
        if (!(1.0 - stay > 0))
            throw ContractError("absorption_table: singular first-step system at state "
                                + std::to_string(j));
        h[j] = acc / (1.0 - stay);
    }
    return h;
}

double absorption_prob_exact(int m, double delta, double theta0, double theta1)
{
    return absorption_table(m, delta, theta0, theta1).back();
}

}  // namespace wfsim
