#include "hybridsim/report.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

using namespace hybridsim;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::vector<std::size_t> parse_index_list(const std::string& list)
{
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while (pos <= list.size()) {
        const std::size_t comma = std::min(list.find(',', pos), list.size());
        const std::string item = list.substr(pos, comma - pos);
        if (!item.empty()) {
            const auto dash = item.find('-');
            try {
                if (dash != std::string::npos && dash > 0) {
                    const auto lo = std::stoul(item.substr(0, dash)), hi = std::stoul(item.substr(dash + 1));
                    if (hi < lo)
                        throw ConfigError("bad bias index range '" + item + "'");
                    for (auto k = lo; k <= hi; ++k)
                        out.push_back(k);
                } else {
                    out.push_back(std::stoul(item));
                }
            } catch (const std::logic_error&) {
                throw ConfigError("bad bias index '" + item + "'");
            }
        }
        pos = comma + 1;
    }
    const std::size_t n = bias_grid().size();
    for (auto k : out)
        if (k >= n)
            throw ConfigError("bias index out of range: " + std::to_string(k));
    return out;
}

struct SimulateArgs {
    std::string config;
    std::string out = "results";
    std::optional<std::uint64_t> seed;
    std::optional<int> iterations;
    std::optional<std::string> scenario;
    std::optional<std::string> bias_index;
    std::optional<int> threads;
    bool quick = false;
};

int simulate(const SimulateArgs& args)
{
    nlohmann::json j = nlohmann::json::object();
    if (!args.config.empty()) {
        std::ifstream is(args.config);
        if (!is)
            throw ConfigError("cannot open config file " + args.config);
        try {
            j = nlohmann::json::parse(is);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(std::string("invalid JSON: ") + e.what());
        }
    }
    ScenarioConfig config = scenario_from_json(j);
    if (args.quick) {
        config.iterations = 200;
        const BiasGrid grid = bias_grid();
        if (config.scenario != Scenario::NaivePooling)
            config.bias_values = {grid.values[0], grid.values[5], grid.values[10], grid.values[15], grid.values[20]};
    }
    if (args.seed) config.master_seed = *args.seed;
    if (args.iterations) config.iterations = *args.iterations;
    if (args.scenario) config.scenario = parse_scenario(*args.scenario);
    if (args.threads) config.parallelism = *args.threads;
    if (args.bias_index) {
        const BiasGrid grid = bias_grid();
        config.bias_values.clear();
        for (auto k : parse_index_list(*args.bias_index))
            config.bias_values.push_back(grid.values[k]);
    }
    config.validate();

    const CampaignResult result = run_campaign(config);
    emit_tables(result.rows, result.metadata, args.out);
    emit_timing(result.wall_seconds, config.parallelism, args.out);
    write_csv(std::cout, result.rows);
    std::cerr << "wrote " << args.out << "/results.csv (" << result.rows.size() << " rows, " << result.failures
              << " failed cells, " << result.wall_seconds << " s)\n";
    return result.failures == 0 ? 0 : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Hybrid RCT + real-world data trial design simulator"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "Run a simulation campaign");
    simulate_cmd->add_option("--config", sim.config, "JSON scenario configuration")->check(CLI::ExistingFile);
    simulate_cmd->add_option("--out", sim.out, "Output directory");
    simulate_cmd->add_option("--seed", sim.seed, "Master seed");
    simulate_cmd->add_option("--iterations", sim.iterations, "Iterations per cell");
    simulate_cmd->add_option("--scenario", sim.scenario,
                             "MainNcoShared | NcoUnaffectedWithNco | NcoUnaffectedNoNco | NaivePooling");
    simulate_cmd->add_option("--bias-index", sim.bias_index, "Grid indices, e.g. 0,3,11-13");
    simulate_cmd->add_option("--threads", sim.threads, "Worker threads");
    simulate_cmd->add_flag("--quick", sim.quick, "200 iterations on 5 grid points");

    double oracle_b = 0.0;
    std::size_t oracle_n = 10'000'000;
    auto* oracle_cmd = app.add_subcommand("oracle", "Print the true pooled bias for a logit shift");
    oracle_cmd->add_option("--bias", oracle_b, "Logit-scale bias B")->required();
    oracle_cmd->add_option("--n-mc", oracle_n, "Monte Carlo draws")->check(CLI::PositiveNumber);

    std::string plot_in, plot_out = "fig.svg";
    auto* plot_cmd = app.add_subcommand("plot", "Render results.csv as an SVG figure");
    plot_cmd->add_option("--in", plot_in, "results.csv")->required()->check(CLI::ExistingFile);
    plot_cmd->add_option("--out", plot_out, "Output SVG path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*simulate_cmd)
            return simulate(sim);
        if (*oracle_cmd) {
            std::printf("%.8f\n", oracle_true_bias(oracle_b, oracle_n));
            return 0;
        }
        if (*plot_cmd) {
            emit_plot(read_csv(std::filesystem::path(plot_in)), plot_out);
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kExitConfig;
    } catch (const InvalidParameter& e) {
        std::cerr << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
