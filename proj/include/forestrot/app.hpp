#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "forestrot/carbon.hpp"
#include "forestrot/config.hpp"
#include "forestrot/error.hpp"
#include "forestrot/growth.hpp"
#include "forestrot/optimizer.hpp"
#include "forestrot/output.hpp"
#include "forestrot/simulation.hpp"
#include "forestrot/sweep.hpp"

namespace forestrot {

inline constexpr const char* output_dir_env = "FORESTROT_OUTPUT_DIR";
inline constexpr const char* default_output_dir = "forestrot_out";

/// Command-line overrides applied on top of a loaded config.
struct RunOverrides {
    std::optional<RunMode> mode;
    std::optional<std::string> output_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
};

struct RunReport {
    std::filesystem::path output_dir;
    std::vector<std::string> files; ///< written, in order
    json summary;                   ///< short machine-readable result for stdout
};

enum class ExitCode { success = 0, validation = 1, numerical = 2 };

/// Flag, then run.output_dir, then the environment variable, then "forestrot_out".
inline std::filesystem::path resolve_output_dir(const ScenarioConfig& cfg, const RunOverrides& o)
{
    if (o.output_dir) return *o.output_dir;
    if (cfg.run.output_dir) return *cfg.run.output_dir;
    if (const char* env = std::getenv(output_dir_env); env && *env) return env;
    return default_output_dir;
}

inline ScenarioConfig apply_overrides(ScenarioConfig cfg, const RunOverrides& o)
{
    if (o.mode) cfg.run.mode = *o.mode;
    if (o.seed) cfg.run.sim.rng_seed = *o.seed;
    if (o.workers) {
        detail::check(*o.workers >= 1 && *o.workers <= 4096, "--workers", "must lie in [1, 4096]");
        cfg.run.sim.workers = *o.workers;
    }
    return cfg;
}

namespace detail {

class ArtifactWriter {
public:
    ArtifactWriter(std::filesystem::path dir, const ScenarioConfig& cfg) : dir_(std::move(dir)), cfg_(cfg)
    {
        std::filesystem::create_directories(dir_);
        hash_ = config_hash(cfg);
    }

    std::string provenance() const { return fmt::format("config_hash={} seed={}", hash_, cfg_.run.sim.rng_seed); }
    const std::string& hash() const { return hash_; }

    io::CsvTable table(std::vector<std::string> columns) const { return {std::move(columns), provenance()}; }

    /// JSON document stamped with config hash, seed and the resolved config.
    json document() const
    {
        return {{"config_hash", hash_}, {"seed", cfg_.run.sim.rng_seed}, {"config", config_to_json(cfg_)}};
    }

    void write(const std::string& name, const io::CsvTable& t) { emit(name, t.str()); }
    void write(const std::string& name, const json& j) { emit(name, io::json_text(j)); }

    std::vector<std::string> files;

private:
    void emit(const std::string& name, const std::string& text)
    {
        io::write_text(dir_ / name, text);
        files.push_back((dir_ / name).string());
    }

    std::filesystem::path dir_;
    const ScenarioConfig& cfg_;
    std::string hash_;
};

inline json solution_json(const RotationSolution& s)
{
    const auto& d = s.diagnostics;
    return {
        {"regime", to_string(s.regime)},
        {"t_star", io::number(s.t_star)},
        {"lev", io::number(s.lev)},
        {"lev_lower_bound", io::number(s.lev_lower_bound)},
        {"foc_residual", io::number(s.foc_residual_at_solution)},
        {"diagnostics",
         {{"method", d.method},
          {"bracket", {io::number(d.bracket_lo), io::number(d.bracket_hi)}},
          {"iterations", d.iterations},
          {"grid_argmax", io::number(d.grid_argmax)},
          {"tie_break_applied", d.tie_break_applied},
          {"local_maxima", d.local_maxima},
          {"lev_at_t_max", io::number(d.lev_at_t_max)},
          {"foc_at_t_max", io::number(d.foc_at_t_max)},
          {"golden_section_t", io::number(d.golden_section_t)}}},
    };
}

inline json problem_json(const RotationProblem& p)
{
    return {{"carbon_price", p.econ.p_c},          {"damage_rate", p.damage_rate},
            {"damage_type", to_string(p.damage_type)}, {"alpha", p.carbon.alpha},
            {"gamma", p.carbon.gamma},             {"beta", p.carbon.beta}};
}

inline RunReport run_solve(const ScenarioConfig& cfg, ArtifactWriter& out)
{
    const auto& species = cfg.selected_species();
    const auto problem = make_problem(cfg, species);
    const auto sol = solve_optimal_rotation(problem, cfg.run.solver);
    json doc = out.document();
    doc["species"] = species.name;
    doc["problem"] = problem_json(problem);
    doc["solution"] = solution_json(sol);
    doc["warnings"] = cfg.warnings;
    out.write("solution.json", doc);
    return {{}, {}, {{"mode", "solve"}, {"species", species.name}, {"solution", doc["solution"]}}};
}

inline RunReport run_simulate(const ScenarioConfig& cfg, ArtifactWriter& out)
{
    const auto& species = cfg.selected_species();
    const auto problem = make_problem(cfg, species);
    std::optional<RotationSolution> sol;
    double T;
    if (cfg.run.rotation) {
        T = *cfg.run.rotation;
    } else {
        sol = solve_optimal_rotation(problem, cfg.run.solver);
        T = sol->t_star;
    }
    const auto s = simulate(problem, T, cfg.run.sim);
    std::vector<std::string> warnings = cfg.warnings;
    warnings.insert(warnings.end(), s.warnings.begin(), s.warnings.end());

    auto table = out.table({"species", "damage_type", "carbon_price", "damage_rate", "rotation", "n_paths", "seed",
                            "mean_npv", "ci_mean_npv", "rel_std_npv", "land_value", "avg_carbon_stock",
                            "ci_avg_carbon_stock", "avg_harvest", "ci_avg_harvest", "avg_harvest_analytic",
                            "harvest_fraction"});
    const double lev = std::isfinite(T) ? land_value(problem, T) : land_value_limit(problem);
    table.add({species.name, std::string(to_string(problem.damage_type)), problem.econ.p_c, problem.damage_rate, T,
               static_cast<std::int64_t>(s.n_paths), fmt::format("{}", s.rng_seed), s.mean_npv, s.ci_mean_npv,
               s.rel_std_npv, lev, s.avg_carbon_stock, s.ci_avg_carbon_stock, s.avg_harvest, s.ci_avg_harvest,
               s.avg_harvest_analytic, s.harvest_fraction});
    out.write("simulation.csv", table);

    json summary = {
        {"rotation", io::number(T)},
        {"n_paths", s.n_paths},
        {"mean_npv", s.mean_npv},
        {"rel_std_npv", s.rel_std_npv},
        {"land_value", io::number(lev)},
        {"avg_carbon_stock", s.avg_carbon_stock},
        {"avg_harvest", s.avg_harvest},
        {"avg_harvest_analytic", s.avg_harvest_analytic},
        {"harvest_fraction", s.harvest_fraction},
        {"ci_halfwidths",
         {{"mean_npv", s.ci_mean_npv}, {"avg_carbon_stock", s.ci_avg_carbon_stock}, {"avg_harvest", s.ci_avg_harvest}}},
    };
    json doc = out.document();
    doc["species"] = species.name;
    doc["problem"] = problem_json(problem);
    if (sol) doc["solution"] = solution_json(*sol);
    doc["summary"] = summary;
    doc["warnings"] = warnings;
    out.write("simulation.json", doc);

    const auto traj = stock_trajectory(problem, T, cfg.run.sim, 0);
    auto tt = out.table({"year", "carbon_stock"});
    for (std::size_t k = 0; k < traj.size(); ++k) tt.add({static_cast<double>(k) * cfg.run.sim.time_step, traj[k]});
    out.write("stock_trajectory.csv", tt);
    return {{}, {}, {{"mode", "simulate"}, {"species", species.name}, {"summary", summary}}};
}

inline RunReport run_sweep_mode(const ScenarioConfig& cfg, ArtifactWriter& out)
{
    const auto grid = make_sweep_grid(cfg);
    SweepOptions options;
    options.solver = cfg.run.solver;
    options.sim = cfg.run.sim;
    options.simulate = cfg.run.sweep.simulate;
    const auto cells = run_sweep(grid, options);

    auto table = out.table({"species", "damage_type", "carbon_price", "damage_rate", "regime", "t_star", "lev",
                            "lev_lower_bound", "foc_residual", "avg_harvest", "avg_harvest_mc", "avg_carbon_stock",
                            "ci_avg_carbon_stock", "mean_npv", "rel_std_npv", "error"});
    json cell_json = json::array();
    std::int64_t failures = 0;
    for (const auto& c : cells) {
        const auto& s = c.solution;
        const std::string regime = c.ok() ? std::string(to_string(s.regime)) : "failed";
        failures += c.ok() ? 0 : 1;
        table.add({c.species, std::string(to_string(c.damage_type)), c.p_c, c.lambda, regime, s.t_star, s.lev,
                   s.lev_lower_bound, s.foc_residual_at_solution, c.avg_harvest, c.avg_harvest_mc,
                   c.avg_carbon_stock, c.ci_avg_carbon_stock, c.mean_npv, c.rel_std_npv, c.error.value_or("")});
        json j = {{"species", c.species},       {"damage_type", to_string(c.damage_type)},
                  {"carbon_price", c.p_c},      {"damage_rate", c.lambda},
                  {"avg_harvest", c.avg_harvest}, {"avg_harvest_mc", c.avg_harvest_mc},
                  {"avg_carbon_stock", c.avg_carbon_stock}, {"ci_avg_carbon_stock", c.ci_avg_carbon_stock},
                  {"mean_npv", c.mean_npv},     {"rel_std_npv", c.rel_std_npv}};
        if (c.ok()) j["solution"] = solution_json(s);
        else j["error"] = *c.error;
        cell_json.push_back(j);
    }
    out.write("sweep_cells.csv", table);

    auto frontier_table = out.table({"species", "damage_type", "damage_rate", "carbon_price", "regime",
                                     "avg_carbon_stock", "avg_harvest", "mixed_regime", "monotone"});
    json frontier_json = json::array();
    auto tradeoff_table = out.table({"species", "damage_rate_lo", "damage_rate_hi", "carbon_price", "carbon_price_match",
                                     "t_star", "delta_carbon_price"});
    json tradeoff_json = json::array();
    for (std::size_t si = 0; si < grid.species.size(); ++si) {
        const auto& name = grid.species[si].name;
        for (const auto& f : extract_frontier(cells, name, grid.damage_type)) {
            json pts = json::array();
            for (const auto& p : f.points) {
                frontier_table.add({name, std::string(to_string(grid.damage_type)), f.lambda, p.p_c,
                                    std::string(to_string(p.regime)), p.avg_carbon_stock, p.avg_harvest,
                                    static_cast<std::int64_t>(f.mixed_regime), static_cast<std::int64_t>(f.monotone)});
                pts.push_back({{"carbon_price", p.p_c},
                               {"regime", to_string(p.regime)},
                               {"avg_carbon_stock", p.avg_carbon_stock},
                               {"avg_harvest", p.avg_harvest}});
            }
            frontier_json.push_back({{"species", name},
                                     {"damage_rate", f.lambda},
                                     {"mixed_regime", f.mixed_regime},
                                     {"monotone", f.monotone},
                                     {"points", pts}});
        }
        for (const auto& t : iso_rotation_pairs(cells, name)) {
            tradeoff_table.add({name, t.lambda_lo, t.lambda_hi, t.p_c, t.p_c_match, t.t_star, t.delta_p_c});
            tradeoff_json.push_back({{"species", name},
                                     {"damage_rate_lo", t.lambda_lo},
                                     {"damage_rate_hi", t.lambda_hi},
                                     {"carbon_price", t.p_c},
                                     {"carbon_price_match", t.p_c_match},
                                     {"t_star", t.t_star},
                                     {"delta_carbon_price", t.delta_p_c}});
        }
        for (const auto field : {CellField::t_star, CellField::lev, CellField::avg_harvest,
                                 CellField::avg_carbon_stock, CellField::rel_std_npv}) {
            const auto m = grid_matrix(grid, cells, si, field);
            std::vector<std::string> cols{"carbon_price"};
            for (const double l : m.lambda_values) cols.push_back("lambda=" + io::format_number(l));
            auto mt = out.table(cols);
            for (std::size_t i = 0; i < m.p_c_values.size(); ++i) {
                std::vector<io::Cell> row{m.p_c_values[i]};
                for (const double v : m.values[i]) row.emplace_back(v);
                mt.add(row);
            }
            out.write(fmt::format("contour_{}_{}.csv", to_string(field), name), mt);
        }
    }
    out.write("frontier.csv", frontier_table);
    out.write("tradeoff.csv", tradeoff_table);

    json doc = out.document();
    doc["cells"] = cell_json;
    doc["frontier"] = frontier_json;
    doc["tradeoff"] = tradeoff_json;
    doc["warnings"] = cfg.warnings;
    out.write("sweep.json", doc);
    return {{}, {}, {{"mode", "sweep"}, {"cells", cells.size()}, {"failed_cells", failures}}};
}

inline RunReport run_curves(const ScenarioConfig& cfg, ArtifactWriter& out)
{
    const auto& cv = cfg.run.curves;
    const auto rows = [](double end, double step) { return static_cast<std::size_t>(std::floor(end / step + 1e-9)); };
    auto retention = out.table({"species", "event", "npv_retained_fraction", "configured"});
    for (const auto& s : cfg.species) {
        auto g = out.table({"age", "stem_volume", "stem_increment", "timber_price"});
        for (std::size_t k = 0; k <= rows(cv.t_end, cv.step); ++k) {
            const double t = static_cast<double>(k) * cv.step;
            g.add({t, stem_volume(s.growth, t), stem_increment(s.growth, t), timber_price(cfg.economics.price, t)});
        }
        out.write(fmt::format("growth_{}.csv", s.name), g);

        for (const auto kind : {EventKind::storm, EventKind::fire, EventKind::harvest}) {
            const auto profile = event_profile(kind, s.compartments, s.decay);
            auto d = out.table({"years_since_event", "remaining_fraction"});
            for (std::size_t k = 0; k <= rows(cv.decay_years, cv.step); ++k) {
                const double t = static_cast<double>(k) * cv.step;
                d.add({t, remaining_stock_fraction(profile, t)});
            }
            out.write(fmt::format("decay_{}_{}.csv", s.name, to_string(kind)), d);
            const double configured =
                kind == EventKind::storm ? s.gamma_storm : kind == EventKind::fire ? s.gamma_fire : s.beta;
            retention.add({s.name, std::string(to_string(kind)),
                           npv_retained_fraction(profile, cfg.economics.discount_rate), configured});
        }
    }
    out.write("retention.csv", retention);
    return {{}, {}, {{"mode", "curves"}, {"species", cfg.species.size()}}};
}

} // namespace detail

/// Runs the configured mode and writes its artifacts. Throws ValidationError,
/// DomainError or NumericalError; `exit_code_for` maps them to exit codes.
inline RunReport run(const ScenarioConfig& config, const RunOverrides& overrides = {})
{
    const ScenarioConfig cfg = apply_overrides(config, overrides);
    const auto dir = resolve_output_dir(cfg, overrides);
    detail::ArtifactWriter out(dir, cfg);
    RunReport report;
    switch (cfg.run.mode) {
    case RunMode::solve: report = detail::run_solve(cfg, out); break;
    case RunMode::simulate: report = detail::run_simulate(cfg, out); break;
    case RunMode::sweep: report = detail::run_sweep_mode(cfg, out); break;
    case RunMode::curves: report = detail::run_curves(cfg, out); break;
    }
    report.output_dir = dir;
    report.files = out.files;
    report.summary["config_hash"] = out.hash();
    report.summary["seed"] = cfg.run.sim.rng_seed;
    report.summary["output_dir"] = dir.string();
    report.summary["warnings"] = cfg.warnings;
    return report;
}

/// Error report for stderr plus the matching exit code.
inline std::pair<ExitCode, json> describe_error(const std::exception& e)
{
    if (const auto* v = dynamic_cast<const ValidationError*>(&e))
        return {ExitCode::validation, {{"error", {{"kind", "validation"}, {"field", v->field()}, {"message", e.what()}}}}};
    if (dynamic_cast<const DomainError*>(&e))
        return {ExitCode::validation, {{"error", {{"kind", "domain"}, {"message", e.what()}}}}};
    if (const auto* s = dynamic_cast<const SolverError*>(&e))
        return {ExitCode::numerical,
                {{"error",
                  {{"kind", "numerical"},
                   {"message", e.what()},
                   {"bracket", {io::number(s->bracket_lo()), io::number(s->bracket_hi())}}}}}};
    if (dynamic_cast<const NumericalError*>(&e))
        return {ExitCode::numerical, {{"error", {{"kind", "numerical"}, {"message", e.what()}}}}};
    return {ExitCode::numerical, {{"error", {{"kind", "internal"}, {"message", e.what()}}}}};
}

} // namespace forestrot
