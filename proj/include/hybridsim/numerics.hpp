#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace hybridsim {

/// Inverse logit, 1 / (1 + e^-x); saturates to 0 or 1 at floating-point extremes.
inline double expit(double x)
{
    if (x >= 0.0)
        return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

struct Interval {
    double lower;
    double upper;

    double half_width() const { return 0.5 * (upper - lower); }
    bool contains(double x) const { return lower <= x && x <= upper; }
};

/// Standard-normal quantile.
double normal_quantile(double p);
double normal_cdf(double x);

/// p-quantile of the equal mixture of Normal(shift, sd^2) and Normal(-shift, sd^2).
double symmetric_mixture_quantile(double p, double shift, double sd);

/// Two-sided Wald interval estimate +/- z * se, z the (1 + level) / 2 normal quantile.
Interval wald_ci(double estimate, double se, double level = 0.95);

/// Order-statistic quantile with linear interpolation between neighbours
/// (position (n - 1) * p). Throws EmptyInput.
double empirical_quantile(std::span<const double> samples, double p);

/// Same as empirical_quantile but for already sorted input.
double sorted_quantile(std::span<const double> sorted, double p);

double mean(std::span<const double> values);

/// Population variance (divides by n).
double variance(std::span<const double> values);

}  // namespace hybridsim
