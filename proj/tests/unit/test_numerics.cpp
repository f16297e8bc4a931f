#include "hybridsim/numerics.hpp"

#include "hybridsim/errors.hpp"

#include <doctest.h>

#include <vector>

using namespace hybridsim;

TEST_SUITE("numerics") {

TEST_CASE("expit and logit")
{
    CHECK(expit(0.0) == 0.5);
    CHECK(expit(-3.33) == doctest::Approx(0.034563).epsilon(1e-4));
    CHECK(expit(800.0) == 1.0);
    CHECK(expit(-800.0) == 0.0);
    for (double p : {0.001, 0.042, 0.5, 0.9})
        CHECK(expit(logit(p)) == doctest::Approx(p).epsilon(1e-12));
}

TEST_CASE("normal quantile and cdf")
{
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963985).epsilon(1e-9));
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0));
    CHECK(normal_cdf(1.959963985) == doctest::Approx(0.975).epsilon(1e-9));
}

TEST_CASE("wald interval")
{
    const Interval ci = wald_ci(-0.013, 0.0067);
    CHECK(ci.lower == doctest::Approx(-0.013 - 1.959963985 * 0.0067));
    CHECK(ci.upper == doctest::Approx(-0.013 + 1.959963985 * 0.0067));
    CHECK(ci.half_width() == doctest::Approx(1.959963985 * 0.0067));
    CHECK(ci.contains(0.0));
    CHECK_FALSE(ci.contains(0.01));
    CHECK_THROWS_AS(wald_ci(0.0, -1.0), InvalidParameter);
    const Interval point = wald_ci(0.3, 0.0);
    CHECK(point.lower == 0.3);
    CHECK(point.upper == 0.3);
}

TEST_CASE("empirical quantiles interpolate linearly")
{
    const std::vector<double> x{4.0, 1.0, 3.0, 2.0, 5.0};
    CHECK(empirical_quantile(x, 0.0) == 1.0);
    CHECK(empirical_quantile(x, 1.0) == 5.0);
    CHECK(empirical_quantile(x, 0.5) == 3.0);
    CHECK(empirical_quantile(x, 0.125) == doctest::Approx(1.5));
    const std::vector<double> one{7.0};
    CHECK(empirical_quantile(one, 0.3) == 7.0);
    CHECK_THROWS_AS(empirical_quantile(std::vector<double>{}, 0.5), EmptyInput);
    CHECK_THROWS_AS(empirical_quantile(x, 1.5), InvalidParameter);
}

TEST_CASE("mean and population variance")
{
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
    CHECK(mean(x) == 2.5);
    CHECK(variance(x) == doctest::Approx(1.25));
}

}
