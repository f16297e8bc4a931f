#include "hybridsim/harness.hpp"

#include "hybridsim/report.hpp"

#include <doctest.h>

#include <sstream>

using namespace hybridsim;

namespace {

ScenarioConfig small_config(Scenario s, std::vector<std::size_t> indices, int iterations)
{
    ScenarioConfig c;
    c.scenario = s;
    c.iterations = iterations;
    c.oracle_n_mc = 20'000;
    c.selector.V = 5;
    const BiasGrid grid = bias_grid();
    for (auto k : indices)
        c.bias_values.push_back(grid.values[k]);
    return c;
}

std::string csv_of(const CampaignResult& r)
{
    std::ostringstream os;
    write_csv(os, r.rows);
    return os.str();
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("scenario names round-trip")
{
    for (auto s : {Scenario::MainNcoShared, Scenario::NcoUnaffectedWithNco, Scenario::NcoUnaffectedNoNco,
                   Scenario::NaivePooling})
        CHECK(parse_scenario(to_string(s)) == s);
    CHECK_THROWS_AS(parse_scenario("Main"), ConfigError);
}

TEST_CASE("scenario selector overrides")
{
    ScenarioConfig c;
    c.scenario = Scenario::NcoUnaffectedNoNco;
    CHECK_FALSE(c.effective_selector().use_nco);
    CHECK(c.effective_selector().bias_source == BiasSource::PsiPound);
    c.scenario = Scenario::NcoUnaffectedWithNco;
    CHECK(c.effective_selector().use_nco);
    CHECK(c.effective_selector().bias_source == BiasSource::Nco);
}

TEST_CASE("default bias values")
{
    CHECK(default_bias_values(Scenario::MainNcoShared).size() == 21);
    const auto naive = default_bias_values(Scenario::NaivePooling);
    REQUIRE(naive.size() == 3);
    CHECK(naive[0] == 0.0);
    CHECK(naive[1] == doctest::Approx(0.65));
    CHECK(naive[2] == doctest::Approx(-1.7));
}

TEST_CASE("configuration validation")
{
    ScenarioConfig c;
    CHECK_NOTHROW(c.validate());
    c.iterations = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.bias_values = {0.1};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.bias_values = {0.065, 0.065};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.parallelism = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK_THROWS_AS(run_campaign(c), ConfigError);
    c = {};
    c.selector.mc_draws = 10;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("JSON configuration")
{
    const auto c = scenario_from_json(nlohmann::json::parse(
        R"({"scenario":"NcoUnaffectedNoNco","iterations":7,"bias_indices":[0,11],"master_seed":5,
            "selector":{"V":4,"mc_draws":600,"bounds":{"lower":0.02}},"rule":{"threshold":0.01}})"));
    CHECK(c.scenario == Scenario::NcoUnaffectedNoNco);
    CHECK(c.iterations == 7);
    REQUIRE(c.bias_values.size() == 2);
    CHECK(c.bias_values[1] == doctest::Approx(-0.17));
    CHECK(c.master_seed == 5);
    CHECK(c.selector.V == 4);
    CHECK(c.selector.mc_draws == 600);
    CHECK(c.selector.bounds.lower == 0.02);
    CHECK(c.rule.threshold == 0.01);
    const auto back = scenario_from_json(to_json(c));
    CHECK(back.bias_values == c.bias_values);
    CHECK(back.selector.V == 4);

    CHECK_THROWS_AS(scenario_from_json(nlohmann::json::parse(R"({"iterationz":3})")), ConfigError);
    CHECK_THROWS_AS(scenario_from_json(nlohmann::json::parse(R"({"scenario":"Nope"})")), ConfigError);
    CHECK_THROWS_AS(scenario_from_json(nlohmann::json::parse(R"({"iterations":"many"})")), ConfigError);
    CHECK_THROWS_AS(scenario_from_json(nlohmann::json::parse(R"({"iterations":0})")), ConfigError);
    CHECK_THROWS_AS(scenario_from_json(nlohmann::json::parse(R"({"bias_indices":[21]})")), ConfigError);
    CHECK_THROWS_AS(scenario_from_json(nlohmann::json::parse(R"({"selector":{"W":3}})")), ConfigError);
    CHECK_THROWS_AS(scenario_from_json(nlohmann::json::parse(R"([1,2])")), ConfigError);
}

TEST_CASE("paired scenarios share their trial data")
{
    ScenarioConfig a, b, c;
    a.scenario = Scenario::NcoUnaffectedWithNco;
    b.scenario = Scenario::NcoUnaffectedNoNco;
    c.scenario = Scenario::MainNcoShared;
    CHECK(iteration_streams(a, 3).rwd == iteration_streams(b, 3).rwd);
    CHECK(iteration_streams(a, 3).estimator == iteration_streams(b, 3).estimator);
    CHECK_FALSE(iteration_streams(a, 3).rwd == iteration_streams(c, 3).rwd);
    CHECK_FALSE(iteration_streams(c, 3).rct1 == iteration_streams(c, 4).rct1);
}

TEST_CASE("campaign rows and determinism")
{
    const auto config = small_config(Scenario::MainNcoShared, {0, 10}, 3);
    const auto r1 = run_campaign(config);
    REQUIRE(r1.rows.size() == 4);
    CHECK(r1.rows[0].design == "D1");
    CHECK(r1.rows[1].design == "D2");
    CHECK_FALSE(r1.rows[0].bias_b.has_value());
    CHECK(r1.rows[2].design == "D3");
    CHECK(r1.rows[2].true_bias == 0.0);
    CHECK(*r1.rows[3].true_bias < 0.0);
    CHECK(r1.rows[1].mean_person_years == 4750.0);
    for (const auto& row : r1.rows) {
        CHECK(row.iterations == 3);
        CHECK(row.coverage >= 0.0);
        CHECK(row.coverage <= 1.0);
        CHECK(row.scenario == "MainNcoShared");
    }
    CHECK(r1.failures == 0);
    CHECK(r1.metadata["oracle_true_bias"].size() == 2);
    CHECK(csv_of(run_campaign(config)) == csv_of(r1));
}

TEST_CASE("parallel and serial campaigns agree byte for byte")
{
    auto config = small_config(Scenario::NcoUnaffectedNoNco, {3, 14}, 4);
    const auto serial = csv_of(run_campaign(config));
    config.parallelism = 3;
    CHECK(csv_of(run_campaign(config)) == serial);
}

TEST_CASE("naive pooling rows carry no person-years")
{
    const auto r = run_campaign(small_config(Scenario::NaivePooling, {0}, 2));
    REQUIRE(r.rows.size() == 1);
    CHECK(r.rows[0].design == "Naive");
    CHECK_FALSE(r.rows[0].mean_person_years.has_value());
    CHECK(r.rows[0].mean_inclusion_fraction == 1.0);
}

TEST_CASE("a full grid yields one D1, one D2 and 21 D3 rows")
{
    auto config = small_config(Scenario::MainNcoShared, {}, 1);
    config.bias_values.clear();
    const auto r = run_campaign(config);
    REQUIRE(r.rows.size() == 23);
    int d3 = 0;
    for (const auto& row : r.rows)
        d3 += row.design == "D3" ? 1 : 0;
    CHECK(d3 == 21);
}

}
