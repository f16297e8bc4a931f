#include "hybridsim/super_learner.hpp"

#include "hybridsim/dgp.hpp"
#include "hybridsim/numerics.hpp"

#include <doctest.h>

#include <cmath>

using namespace hybridsim;

namespace {

LearningProblem noisy_problem(std::size_t n, double slope, std::uint64_t seed)
{
    LearningProblem p;
    Rng rng = RandomStream(seed).generator();
    for (std::size_t i = 0; i < n; ++i) {
        const double w1 = rng.normal(), w2 = rng.normal();
        p.rows.push_back({0.0, w1, w2, 0.0});
        p.target.push_back(rng.bernoulli(expit(-1.0 + slope * w1)) ? 1.0 : 0.0);
    }
    p.library = {{LearnerKind::Logistic, {Feature::W1, Feature::W2}}, {LearnerKind::SampleMean, {}}};
    return p;
}

}  // namespace

TEST_SUITE("super_learner") {

TEST_CASE("strong signal selects the logistic model")
{
    const auto p = noisy_problem(2000, 1.5, 41);
    const auto res = super_learn(p, 5, RandomStream(42));
    CHECK(res.winner == 0);
    CHECK_FALSE(res.predictor.is_constant());
    REQUIRE(res.cv_risk.size() == 2);
    CHECK(res.cv_risk[0] < res.cv_risk[1]);
    CHECK(std::abs(res.predictor.coefficients().slopes[0] - 1.5) < 0.2);
}

TEST_CASE("pure noise selects the sample mean")
{
    const auto p = noisy_problem(3000, 0.0, 43);
    const auto res = super_learn(p, 5, RandomStream(44));
    CHECK(res.winner == 1);
    CHECK(res.predictor.is_constant());
    CHECK(res.predictor.predict({0, 0, 0, 0}) == doctest::Approx(mean(p.target)));
}

TEST_CASE("cv risk of the mean candidate matches a direct computation")
{
    const auto p = noisy_problem(500, 0.5, 45);
    const auto res = super_learn(p, 5, RandomStream(46));
    // The mean's CV risk is at least the in-sample entropy of the sample mean.
    const double m = mean(p.target);
    const double in_sample = -(m * std::log(m) + (1 - m) * std::log(1 - m));
    CHECK(res.cv_risk[1] >= in_sample);
    CHECK(res.cv_risk[1] < in_sample + 0.01);
}

TEST_CASE("predictions respect bounds")
{
    const Predictor p = Predictor::logistic({8.0, {10.0}}, {Feature::W1}, kDefaultPropensityBounds);
    CHECK(p.predict({0, 5, 0, 0}) == 0.99);
    CHECK(p.predict({0, -5, 0, 0}) == 0.01);
    CHECK(Predictor::constant(0.0, kOutcomeBounds).predict({}) == kOutcomeBounds.lower);
    CHECK_THROWS_AS(Predictor::logistic({0.0, {1.0, 2.0}}, {Feature::W1}, kDefaultPropensityBounds),
                    InvalidParameter);
}

TEST_CASE("nuisance tasks use the right rows")
{
    const auto rwd = generate_rwd(2483, 0.0, true, RandomStream(47));
    const auto censored = rwd.count_if([](const SubjectRecord& r) { return r.c == 1; });
    REQUIRE(censored > 0);
    const auto outcome = super_learn(NuisanceTask::Outcome, rwd, 5, RandomStream(48));
    // Treatment is constant in real-world data, so A is dropped from the outcome model.
    CHECK(outcome.predictor.features().size() == 2);
    const auto cens = super_learn(NuisanceTask::CensoringPooled, rwd, 5, RandomStream(49));
    CHECK_FALSE(cens.predictor.is_constant());
    const double lo = cens.predictor.predict({0, -2, 2, 1}), hi = cens.predictor.predict({0, 2, -2, 1});
    CHECK(lo < hi);
    const auto rct = generate_rct(3183, RandomStream(50));
    const auto pi = super_learn(NuisanceTask::CensoringRct, rct, 5, RandomStream(51));
    CHECK(pi.predictor.is_constant());
    const double uncensored = rct.count_if([](const SubjectRecord& r) { return r.c == 0; }) / 3183.0;
    CHECK(pi.predictor.predict({}) == doctest::Approx(std::min(uncensored, 0.99)));
}

TEST_CASE("cache returns the uncached result")
{
    const auto p = noisy_problem(800, 0.7, 52);
    const auto direct = super_learn(p, 5, RandomStream(53));
    FitCacheScope cache;
    const auto first = super_learn(p, 5, RandomStream(53));
    const auto second = super_learn(p, 5, RandomStream(53));
    const auto other_stream = super_learn(p, 5, RandomStream(54));
    CHECK(cache.hits() == 1);
    CHECK(cache.misses() == 2);
    CHECK(first.cv_risk == direct.cv_risk);
    CHECK(second.cv_risk == direct.cv_risk);
    CHECK(second.predictor.coefficients().slopes == direct.predictor.coefficients().slopes);
    (void)other_stream;
}

TEST_CASE("argument validation")
{
    LearningProblem p;
    CHECK_THROWS_AS(super_learn(p, 5, RandomStream(1)), EmptyInput);
    p = noisy_problem(20, 0.0, 55);
    CHECK_THROWS_AS(super_learn(p, 1, RandomStream(1)), InvalidParameter);
    p.library.clear();
    CHECK_THROWS_AS(super_learn(p, 5, RandomStream(1)), InvalidParameter);
}

}
