#include "hybridsim/numerics.hpp"

#include "hybridsim/errors.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/tools/roots.hpp>
#include <numeric>

namespace hybridsim {

double normal_quantile(double p)
{
    if (!(p > 0.0 && p < 1.0))
        throw InvalidParameter("normal quantile requires p in (0, 1)");
    return boost::math::quantile(boost::math::normal_distribution<double>{}, p);
}

double normal_cdf(double x)
{
    return boost::math::cdf(boost::math::normal_distribution<double>{}, x);
}

double symmetric_mixture_quantile(double p, double shift, double sd)
{
    if (!(p > 0.0 && p < 1.0))
        throw InvalidParameter("mixture quantile requires p in (0, 1)");
    if (!(sd >= 0.0))
        throw InvalidParameter("standard deviation must be non-negative");
    const double b = std::abs(shift);
    if (sd == 0.0)
        return p < 0.5 ? -b : (p > 0.5 ? b : 0.0);
    const double z = normal_quantile(p);
    if (b == 0.0)
        return sd * z;
    const auto f = [&](double x) { return 0.5 * (normal_cdf((x - b) / sd) + normal_cdf((x + b) / sd)) - p; };
    double lo = sd * z - b, hi = sd * z + b;
    if (f(lo) >= 0.0)
        return lo;
    if (f(hi) <= 0.0)
        return hi;
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
    return 0.5 * (r.first + r.second);
}

Interval wald_ci(double estimate, double se, double level)
{
    if (!(se >= 0.0))
        throw InvalidParameter("standard error must be non-negative");
    const double z = normal_quantile(0.5 * (1.0 + level));
    return {estimate - z * se, estimate + z * se};
}

double sorted_quantile(std::span<const double> sorted, double p)
{
    if (sorted.empty())
        throw EmptyInput("quantile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0))
        throw InvalidParameter("quantile level must lie in [0, 1]");
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double empirical_quantile(std::span<const double> samples, double p)
{
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    return sorted_quantile(sorted, p);
}

double mean(std::span<const double> values)
{
    if (values.empty())
        throw EmptyInput("mean of an empty sample");
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double variance(std::span<const double> values)
{
    const double m = mean(values);
    double ss = 0.0;
    for (double v : values)
        ss += (v - m) * (v - m);
    return ss / static_cast<double>(values.size());
}

}  // namespace hybridsim
