// forestrot: optimal forest rotation under carbon pricing and stochastic damage.
//
//   forestrot solve    --config scenario.json
//   forestrot simulate --config scenario.json --seed 7 --workers 4
//   forestrot sweep    --config presets/sweep_default.json --out results/
//   forestrot curves   --config presets/pine_fire.json
//   forestrot run      --config scenario.json      (mode taken from run.mode)

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "forestrot/app.hpp"
#include "forestrot/config.hpp"

int main(int argc, char** argv)
{
    using namespace forestrot;
    CLI::App app{"Optimal forest rotation under carbon pricing and stochastic damage"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;

    struct Mode {
        const char* name;
        const char* help;
        std::optional<RunMode> mode;
    };
    const Mode modes[] = {
        {"solve", "Optimal rotation and land value", RunMode::solve},
        {"simulate", "Monte Carlo NPV spread and long-run carbon stock and harvest", RunMode::simulate},
        {"sweep", "Carbon price x damage rate grid, frontier and contour tables", RunMode::sweep},
        {"curves", "Growth, price and carbon-decay tables", RunMode::curves},
        {"run", "Mode taken from run.mode in the config", std::nullopt},
    };
    for (const auto& m : modes) {
        auto* sub = app.add_subcommand(m.name, m.help);
        sub->add_option("-c,--config", config_path, "Scenario JSON file")->required();
        sub->add_option("-o,--out", out_dir, "Output directory (else run.output_dir, $" +
                                                 std::string(output_dir_env) + ", ./" + default_output_dir + ")");
        sub->add_option("-s,--seed", seed, "Random seed override");
        sub->add_option("-w,--workers", workers, "Worker threads")->check(CLI::Range(1, 4096));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ExitCode::validation);
    }

    RunOverrides overrides;
    for (const auto& m : modes)
        if (app.got_subcommand(m.name)) overrides.mode = m.mode;
    overrides.output_dir = out_dir;
    overrides.seed = seed;
    overrides.workers = workers;

    try {
        const auto cfg = load_config(config_path);
        for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
        const auto report = run(cfg, overrides);
        std::cout << report.summary.dump(2) << "\n";
        return static_cast<int>(ExitCode::success);
    } catch (const std::exception& e) {
        const auto [code, err] = describe_error(e);
        auto j = err;
        j["exit_code"] = static_cast<int>(code);
        std::cerr << j.dump() << "\n";
        return static_cast<int>(code);
    }
}
