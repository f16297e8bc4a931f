#include "hybridsim/designs.hpp"

#include <doctest.h>

using namespace hybridsim;

namespace {

EstimateWithCI with_upper(double upper)
{
    return EstimateWithCI::make(upper - 0.01, 0.005, {upper - 0.02, upper}, Estimand::RctUnadj);
}

IterationStreams streams_for(int i)
{
    return IterationStreams::derive(RandomStream(2024).child("iter", static_cast<std::uint64_t>(i)));
}

}  // namespace

TEST_SUITE("designs") {

TEST_CASE("significance is a strict upper-limit comparison")
{
    const SignificanceRule rule;
    CHECK(is_significant(with_upper(0.0109), rule));
    CHECK_FALSE(is_significant(with_upper(0.011), rule));
    CHECK(is_significant(with_upper(0.0), rule));
    CHECK_FALSE(is_significant(with_upper(0.03), rule));
}

TEST_CASE("person-year constants")
{
    CHECK(person_years::kStageOneOnly == 1591.5);
    CHECK(person_years::kSuperiorityOnly == 4750.0);
    CHECK(person_years::kBothStages == person_years::kStageOneOnly + person_years::kSuperiorityOnly);
}

TEST_CASE("tipping point to the shifted null")
{
    CHECK(tipping_point(with_upper(0.008), 0.011) == doctest::Approx(0.003));
    CHECK(tipping_point(with_upper(0.02), 0.011) == 0.0);
    CHECK(tipping_point(with_upper(-0.01), 0.011) == doctest::Approx(0.021));
}

TEST_CASE("Design 2 always spends the superiority-trial person-years")
{
    const SignificanceRule rule;
    for (int i = 0; i < 5; ++i) {
        const auto o = run_design2(streams_for(i), rule);
        CHECK(o.person_years == 4750.0);
        CHECK(o.stage == Stage::Second);
        CHECK(o.design == Design::D2);
        CHECK(o.rejected == is_significant(o.final, rule));
        CHECK_FALSE(o.rwd_inclusion_fraction.has_value());
    }
}

TEST_CASE("Design 1 stops early exactly when the first trial rejects")
{
    const SignificanceRule rule;
    for (int i = 0; i < 20; ++i) {
        const auto s = streams_for(i);
        const auto o = run_design1(s, rule);
        const auto stage1 = unadjusted_rd(generate_rct(3183, s.rct1), rule.level);
        if (is_significant(stage1, rule)) {
            CHECK(o.stage == Stage::First);
            CHECK(o.person_years == 1591.5);
            CHECK(o.rejected);
            CHECK(o.final.psi == stage1.psi);
        } else {
            CHECK(o.stage == Stage::Second);
            CHECK(o.person_years == 6341.5);
            CHECK(o.final.psi == run_design2(s, rule).final.psi);
        }
    }
}

TEST_CASE("Design 3 with an unadjusted first stage coincides with Design 1")
{
    const SignificanceRule rule;
    for (int i = 0; i < 40; ++i) {
        const auto s = streams_for(i);
        const auto d1 = run_design1(s, rule);
        const auto d3 = run_design3(s, rule, DgpConfig{}, SelectorConfig{}, StageOneAnalysis::Unadjusted);
        CHECK(d3.stage == d1.stage);
        CHECK(d3.rejected == d1.rejected);
        CHECK(d3.person_years == d1.person_years);
        CHECK(d3.final.psi == d1.final.psi);
        CHECK(d3.rwd_inclusion_fraction == 0.0);
    }
}

TEST_CASE("Design 3 second stage reuses the shared superiority trial")
{
    SignificanceRule rule;
    rule.threshold = -1.0;
    SelectorConfig selector;
    selector.V = 5;
    const auto s = streams_for(0);
    const auto d3 = run_design3(s, rule, DgpConfig{}, selector);
    CHECK(d3.stage == Stage::Second);
    CHECK(d3.person_years == 6341.5);
    CHECK(d3.final.psi == run_design2(s, rule).final.psi);
    REQUIRE(d3.rwd_inclusion_fraction.has_value());
    CHECK(*d3.rwd_inclusion_fraction >= 0.0);
    CHECK(*d3.rwd_inclusion_fraction <= 1.0);
}

TEST_CASE("naive pooling is single stage without person-years")
{
    SelectorConfig selector;
    selector.V = 5;
    const auto o = run_naive(streams_for(1), SignificanceRule{}, DgpConfig{}, selector);
    CHECK(o.design == Design::Naive);
    CHECK(o.stage == Stage::First);
    CHECK_FALSE(o.person_years.has_value());
    CHECK(o.rwd_inclusion_fraction == 1.0);
}

TEST_CASE("design names")
{
    CHECK(to_string(Design::D1) == "D1");
    CHECK(to_string(Design::D3) == "D3");
    CHECK(to_string(Design::Naive) == "Naive");
}

}
