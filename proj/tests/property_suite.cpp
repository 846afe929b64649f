#include "property_suite.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <string>

#include "wfsim/chains.hpp"
#include "wfsim/duals.hpp"
#include "wfsim/engine.hpp"
#include "wfsim/kernel.hpp"
#include "wfsim/stats.hpp"

namespace wfsim::properties
{
namespace
{
constexpr std::size_t monotone_tuples = 1000000;
constexpr int row_sum_m_max = 20;
constexpr double row_sum_tol = 1e-12;
constexpr double density_mass_tol = 1e-10;
constexpr double density_mean_tol = 1e-3;

void report(std::ostream& os, SuiteResult& r, bool ok, const std::string& name, const std::string& detail)
{
    ++r.checks;
    r.failures += ok ? 0 : 1;
    os << (ok ? "PASS" : "FAIL") << "  " << name << ": " << detail << "\n";
}

std::size_t monotone_violations()
{
    auto bad = map_replicates<int>(monotone_tuples, 20240601, [](std::uint64_t, ReplicateStream& s) {
        double q = s.uniform(), p = q * s.uniform(), d = s.uniform();
        double y = s.uniform(), x = y * s.uniform();
        double u = s.uniform(), v = s.uniform(), w = s.uniform();
        return update_inf(p, q, d, x, u, v, w) > update_sup(q, d, y, u, v) ? 1 : 0;
    });
    std::size_t n = 0;
    for (int b : bad)
        n += static_cast<std::size_t>(b);
    return n;
}

double worst_row_error()
{
    double worst = 0;
    for (double delta : {0.1, 0.5, 1.0})
        for (auto const& row : neutral_dual_matrix(row_sum_m_max, delta))
            worst = std::max(worst, std::abs(row.sum() - 1));

    std::vector<FtwDualParams> cases;
    for (double delta : {0.2, 0.5, 0.8})
    {
        FtwDualParams p;
        p.delta = delta;
        p.theta0 = 0.3;
        p.theta1 = 0.2;
        p.sigma = {0.4, 0.2};
        cases.push_back(p);
        p.sigma = {0.3};
        p.theta1 = 0;
        cases.push_back(p);
        p.sigma = {0.5, 0.4, 0.1, 0.05};
        p.theta0 = 0.1;
        p.theta1 = 0.4;
        cases.push_back(p);
    }
    for (auto const& p : cases)
        for (int m = 1; m <= row_sum_m_max; ++m)
            worst = std::max(worst, std::abs(ftw_dual_row(m, p).sum() - 1));
    return worst;
}

std::string experiment_csv()
{
    std::ostringstream os;
    os << std::setprecision(17);
    auto h = heterozygosity_series(0.6, 0.5, 20, 2000, 99);
    os << "n,mean,stderr\n";
    for (std::size_t i = 0; i < h.mean.size(); ++i)
        os << i << "," << h.mean[i] << "," << h.stderr[i] << "\n";
    auto g = duality_grid_neutral({0.3, 0.6}, {2, 3}, {1, 4}, 0.7, 2000, 7);
    for (auto const& r : g)
        os << r.z << "," << r.m << "," << r.n << "," << r.lhs << "," << r.rhs << "\n";
    return os.str();
}
}  // namespace

SuiteResult run_all(std::ostream& os)
{
    SuiteResult r;

    auto v = monotone_violations();
    report(os, r, v == 0, "coupling monotonicity", std::to_string(monotone_tuples) + " tuples, " + std::to_string(v) + " violations");

    double worst = worst_row_error();
    std::ostringstream wd;
    wd << "max |row sum - 1| = " << worst << " over m <= " << row_sum_m_max;
    report(os, r, worst < row_sum_tol, "dual row conservation", wd.str());

    int saved = thread_count();
    set_thread_count(1);
    auto a = experiment_csv();
    set_thread_count(4);
    auto b = experiment_csv();
    auto c = experiment_csv();
    set_thread_count(saved);
    report(os, r, a == b && b == c, "determinism", std::to_string(a.size()) + " bytes, identical across reruns and thread counts");

    double worst_mass = 0, worst_mean = 0;
    for (double delta : {0.3, 0.7, 0.95})
        for (double p : {0.2, 0.5, 0.8})
        {
            auto d = invariant_density(delta, p, 1024).density;
            worst_mass = std::max(worst_mass, std::abs(d.mass() - 1));
            worst_mean = std::max(worst_mean, std::abs(d.mean() - p));
        }
    std::ostringstream dd;
    dd << "max mass error " << worst_mass << ", max mean error " << worst_mean;
    report(os, r, worst_mass < density_mass_tol && worst_mean < density_mean_tol, "density solver", dd.str());
    return r;
}
}  // namespace wfsim::properties
