#include "hybridsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

namespace hybridsim {

namespace {

constexpr std::string_view kScenarioNames[] = {"MainNcoShared", "NcoUnaffectedWithNco", "NcoUnaffectedNoNco",
                                               "NaivePooling"};

bool uses_nco_affected_data(Scenario s)
{
    return s == Scenario::MainNcoShared || s == Scenario::NaivePooling;
}

template <class T>
T get_field(const nlohmann::json& j, const char* key)
{
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("field '") + key + "': " + e.what());
    }
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<std::string_view> known, const char* where)
{
    if (!j.is_object())
        throw ConfigError(std::string(where) + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError(std::string("unknown key '") + key + "' in " + where);
    }
}

SelectorConfig selector_from_json(const nlohmann::json& j, SelectorConfig s)
{
    reject_unknown(j, {"V", "bias_source", "use_nco", "mc_draws", "inner_V", "level", "bounds"}, "selector");
    if (j.contains("V")) s.V = get_field<int>(j, "V");
    if (j.contains("mc_draws")) s.mc_draws = get_field<int>(j, "mc_draws");
    if (j.contains("inner_V")) s.inner_V = get_field<int>(j, "inner_V");
    if (j.contains("level")) s.level = get_field<double>(j, "level");
    if (j.contains("use_nco")) s.use_nco = get_field<bool>(j, "use_nco");
    if (j.contains("bias_source")) {
        const auto name = get_field<std::string>(j, "bias_source");
        if (name == "Nco") s.bias_source = BiasSource::Nco;
        else if (name == "PsiPound") s.bias_source = BiasSource::PsiPound;
        else throw ConfigError("unknown bias_source '" + name + "'");
    }
    if (j.contains("bounds")) {
        const auto& b = j.at("bounds");
        reject_unknown(b, {"lower", "upper"}, "selector.bounds");
        if (b.contains("lower")) s.bounds.lower = get_field<double>(b, "lower");
        if (b.contains("upper")) s.bounds.upper = get_field<double>(b, "upper");
    }
    return s;
}

}  // namespace

std::string_view to_string(Scenario s) { return kScenarioNames[static_cast<int>(s)]; }

Scenario parse_scenario(std::string_view name)
{
    for (int i = 0; i < 4; ++i)
        if (kScenarioNames[i] == name)
            return static_cast<Scenario>(i);
    throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

std::vector<double> default_bias_values(Scenario s)
{
    const BiasGrid grid = bias_grid();
    if (s == Scenario::NaivePooling)
        return {grid.values[0], grid.values[10], grid.values[20]};
    return {grid.values.begin(), grid.values.end()};
}

SelectorConfig ScenarioConfig::effective_selector() const
{
    SelectorConfig s = selector;
    if (scenario == Scenario::NcoUnaffectedNoNco) {
        s.use_nco = false;
        s.bias_source = BiasSource::PsiPound;
    } else {
        s.use_nco = true;
        s.bias_source = BiasSource::Nco;
    }
    return s;
}

std::vector<double> ScenarioConfig::effective_bias_values() const
{
    return bias_values.empty() ? default_bias_values(scenario) : bias_values;
}

void ScenarioConfig::validate() const
{
    if (iterations < 1)
        throw ConfigError("iterations must be at least 1");
    if (parallelism < 1)
        throw ConfigError("parallelism must be at least 1");
    if (oracle_n_mc < 1)
        throw ConfigError("oracle_n_mc must be positive");
    if (!std::isfinite(rule.threshold))
        throw ConfigError("significance threshold must be finite");
    if (!(rule.level > 0.0 && rule.level < 1.0))
        throw ConfigError("significance level must lie in (0, 1)");
    const BiasGrid grid = bias_grid();
    std::set<std::size_t> seen;
    for (double b : effective_bias_values()) {
        try {
            if (!seen.insert(grid.index_of(b)).second)
                throw ConfigError("bias value listed twice: " + std::to_string(b));
        } catch (const InvalidParameter& e) {
            throw ConfigError(e.what());
        }
    }
    effective_selector().validate();
    try {
        dgp.validate();
    } catch (const InvalidParameter& e) {
        throw ConfigError(e.what());
    }
}

ScenarioConfig scenario_from_json(const nlohmann::json& j)
{
    reject_unknown(j,
                   {"scenario", "iterations", "bias_values", "bias_indices", "master_seed", "selector", "rule",
                    "parallelism", "oracle_n_mc"},
                   "config");
    ScenarioConfig c;
    if (j.contains("scenario")) c.scenario = parse_scenario(get_field<std::string>(j, "scenario"));
    if (j.contains("iterations")) c.iterations = get_field<int>(j, "iterations");
    if (j.contains("master_seed")) c.master_seed = get_field<std::uint64_t>(j, "master_seed");
    if (j.contains("parallelism")) c.parallelism = get_field<int>(j, "parallelism");
    if (j.contains("oracle_n_mc")) c.oracle_n_mc = get_field<std::size_t>(j, "oracle_n_mc");
    if (j.contains("bias_values") && j.contains("bias_indices"))
        throw ConfigError("give bias_values or bias_indices, not both");
    if (j.contains("bias_values")) c.bias_values = get_field<std::vector<double>>(j, "bias_values");
    if (j.contains("bias_indices")) {
        const BiasGrid grid = bias_grid();
        for (int k : get_field<std::vector<int>>(j, "bias_indices")) {
            if (k < 0 || k >= static_cast<int>(grid.size()))
                throw ConfigError("bias index out of range: " + std::to_string(k));
            c.bias_values.push_back(grid.values[static_cast<std::size_t>(k)]);
        }
    }
    if (j.contains("selector")) c.selector = selector_from_json(j.at("selector"), c.selector);
    if (j.contains("rule")) {
        const auto& r = j.at("rule");
        reject_unknown(r, {"threshold", "level"}, "rule");
        if (r.contains("threshold")) c.rule.threshold = get_field<double>(r, "threshold");
        if (r.contains("level")) c.rule.level = get_field<double>(r, "level");
    }
    c.validate();
    return c;
}

nlohmann::json to_json(const ScenarioConfig& c)
{
    const SelectorConfig s = c.effective_selector();
    return {
        {"scenario", std::string(to_string(c.scenario))},
        {"iterations", c.iterations},
        {"bias_values", c.effective_bias_values()},
        {"master_seed", c.master_seed},
        {"oracle_n_mc", c.oracle_n_mc},
        {"selector",
         {{"V", s.V},
          {"bias_source", std::string(to_string(s.bias_source))},
          {"use_nco", s.use_nco},
          {"mc_draws", s.mc_draws},
          {"inner_V", s.inner_V},
          {"level", s.level},
          {"bounds", {{"lower", s.bounds.lower}, {"upper", s.bounds.upper}}}}},
        {"rule", {{"threshold", c.rule.threshold}, {"level", c.rule.level}}},
    };
}

IterationStreams iteration_streams(const ScenarioConfig& config, int iter)
{
    const std::uint64_t dgp_key = uses_nco_affected_data(config.scenario) ? 0 : 1;
    return IterationStreams::derive(
        RandomStream(config.master_seed).child("dgp", dgp_key).child("iter", static_cast<std::uint64_t>(iter)));
}

IterationOutcome run_iteration(const ScenarioConfig& config, int iter)
{
    config.validate();
    const IterationStreams streams = iteration_streams(config, iter);
    const SelectorConfig selector = config.effective_selector();
    DgpConfig dgp = config.dgp;
    dgp.nco_affected = uses_nco_affected_data(config.scenario);

    // Bias values share every nuisance fit that does not see the outcome.
    const FitCacheScope cache;
    IterationOutcome out;
    auto attempt = [&](const char* what, auto&& fn) -> std::optional<DesignOutcome> {
        try {
            return fn();
        } catch (const Error& e) {
            out.errors.push_back("iteration " + std::to_string(iter) + " " + what + ": " + e.what());
            return std::nullopt;
        }
    };

    const bool naive = config.scenario == Scenario::NaivePooling;
    if (!naive) {
        out.d1 = attempt("D1", [&] { return run_design1(streams, config.rule, dgp); });
        out.d2 = attempt("D2", [&] { return run_design2(streams, config.rule, dgp); });
    }
    for (double b : config.effective_bias_values()) {
        dgp.bias_b = b;
        const std::string what = std::string(naive ? "Naive" : "D3") + " B=" + std::to_string(b);
        out.by_bias.push_back(attempt(what.c_str(), [&] {
            return naive ? run_naive(streams, config.rule, dgp, selector)
                         : run_design3(streams, config.rule, dgp, selector);
        }));
    }
    return out;
}

namespace {

struct Accumulator {
    int n = 0;
    int covered = 0;
    int rejected = 0;
    double person_years = 0.0;
    bool has_person_years = false;
    double inclusion = 0.0;
    bool has_inclusion = false;

    void add(const DesignOutcome& o)
    {
        ++n;
        covered += o.final.interval().contains(0.0) ? 1 : 0;
        rejected += o.rejected ? 1 : 0;
        if (o.person_years) {
            person_years += *o.person_years;
            has_person_years = true;
        }
        if (o.rwd_inclusion_fraction) {
            inclusion += *o.rwd_inclusion_fraction;
            has_inclusion = true;
        }
    }

    MetricsRow row(std::string design, const ScenarioConfig& config, std::optional<double> b,
                   std::optional<double> true_bias) const
    {
        MetricsRow r;
        r.design = std::move(design);
        r.scenario = std::string(to_string(config.scenario));
        r.bias_b = b;
        r.true_bias = true_bias;
        r.iterations = n;
        if (n > 0) {
            r.coverage = covered / static_cast<double>(n);
            r.power = rejected / static_cast<double>(n);
            if (has_person_years)
                r.mean_person_years = person_years / n;
            if (has_inclusion)
                r.mean_inclusion_fraction = inclusion / n;
        }
        return r;
    }
};

}  // namespace

CampaignResult run_campaign(const ScenarioConfig& config)
{
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    const auto biases = config.effective_bias_values();

    std::vector<IterationOutcome> outcomes(static_cast<std::size_t>(config.iterations));
    std::atomic<int> next{0};
    std::exception_ptr fatal;
    std::mutex fatal_mutex;
    auto worker = [&] {
        for (int i = next++; i < config.iterations; i = next++) {
            try {
                outcomes[static_cast<std::size_t>(i)] = run_iteration(config, i);
            } catch (...) {
                std::lock_guard lock(fatal_mutex);
                if (!fatal)
                    fatal = std::current_exception();
                next = config.iterations;
            }
        }
    };
    const int threads = std::min(config.parallelism, config.iterations);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    if (fatal)
        std::rethrow_exception(fatal);

    const auto oracle = oracle_true_bias_grid(config.oracle_n_mc, config.dgp);
    const BiasGrid grid = bias_grid();

    CampaignResult result;
    Accumulator d1, d2;
    std::vector<Accumulator> per_bias(biases.size());
    for (const auto& o : outcomes) {
        if (o.d1) d1.add(*o.d1);
        if (o.d2) d2.add(*o.d2);
        for (std::size_t k = 0; k < biases.size(); ++k)
            if (o.by_bias[k])
                per_bias[k].add(*o.by_bias[k]);
        result.failures += static_cast<int>(o.errors.size());
        for (const auto& e : o.errors)
            result.failure_messages.push_back(e);
    }

    const bool naive = config.scenario == Scenario::NaivePooling;
    if (!naive) {
        result.rows.push_back(d1.row("D1", config, std::nullopt, std::nullopt));
        result.rows.push_back(d2.row("D2", config, std::nullopt, std::nullopt));
    }
    nlohmann::json oracle_json = nlohmann::json::array();
    for (std::size_t k = 0; k < biases.size(); ++k) {
        const std::size_t idx = grid.index_of(biases[k]);
        result.rows.push_back(per_bias[k].row(naive ? "Naive" : "D3", config, biases[k], oracle[idx]));
        oracle_json.push_back({{"grid_index", idx}, {"bias_b", biases[k]}, {"true_bias", oracle[idx]}});
    }

    result.metadata = {
        {"config", to_json(config)},
        {"failures", result.failures},
        {"failure_messages", result.failure_messages},
        {"oracle_true_bias", oracle_json},
    };
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace hybridsim
