#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "forestrot/carbon.hpp"
#include "forestrot/error.hpp"
#include "forestrot/growth.hpp"
#include "forestrot/optimizer.hpp"
#include "forestrot/rotation.hpp"
#include "forestrot/simulation.hpp"
#include "forestrot/sweep.hpp"

namespace forestrot {

using json = nlohmann::json;

struct SpeciesConfig {
    std::string name;
    GrowthCurve growth;
    std::optional<double> v5;
    double alpha = 1.0;
    double gamma_fire = 0.0;
    double gamma_storm = 0.0;
    double beta = 0.0;
    RetentionSource retention_source = RetentionSource::configured_constant;
    TreeCompartments compartments;
    DecayRates decay;
};

struct EconomicsConfig {
    double carbon_price = 0.0;
    double discount_rate = 0.03;
    double regeneration_cost = 0.0;
    double salvage_fraction = 0.0;
    PriceSchedule price = PriceSchedule::age_dependent();
};

struct DamageConfig {
    DamageType type = DamageType::fire;
    double rate = 0.0;
};

enum class RunMode { solve, simulate, sweep, curves };

inline std::string_view to_string(RunMode m)
{
    switch (m) {
    case RunMode::solve: return "solve";
    case RunMode::simulate: return "simulate";
    case RunMode::sweep: return "sweep";
    case RunMode::curves: return "curves";
    }
    return "?";
}

struct SweepConfig {
    std::vector<double> p_c_values = SweepGrid::default_p_c_values();
    std::vector<double> lambda_values = SweepGrid::default_lambda_values();
    std::vector<std::string> species; ///< empty: every configured species
    bool simulate = true;
};

struct CurvesConfig {
    double t_end = 200.0; ///< yr, last tabulated stand age
    double step = 1.0;
    double decay_years = 100.0; ///< yr after an event covered by the decay tables
};

struct RunConfig {
    RunMode mode = RunMode::solve;
    std::string species;              ///< used by solve/simulate; empty: the first species
    std::optional<double> rotation;   ///< simulate at this T instead of the optimum
    SimulationConfig sim;
    SolverOptions solver;
    SweepConfig sweep;
    CurvesConfig curves;
    std::optional<std::string> output_dir;
};

struct ScenarioConfig {
    std::vector<SpeciesConfig> species;
    EconomicsConfig economics;
    DamageConfig damage;
    RunConfig run;
    std::vector<std::string> warnings; ///< produced while loading, not part of the config

    const SpeciesConfig& selected_species() const
    {
        if (run.species.empty()) return species.front();
        for (const auto& s : species)
            if (s.name == run.species) return s;
        throw ValidationError("run.species", "no species named '" + run.species + "'");
    }
};

/// Table values for the built-in species; nullopt for other names.
inline std::optional<SpeciesConfig> species_preset(const std::string& name)
{
    SpeciesConfig s;
    s.name = name;
    if (name == "pine") {
        s.growth = scots_pine_growth();
        s.v5 = -483.0;
        s.alpha = 1.29;
        s.gamma_fire = 0.403;
        s.gamma_storm = 0.525;
        s.beta = 0.319;
        s.compartments = scots_pine_compartments();
        return s;
    }
    if (name == "spruce") {
        s.growth = norway_spruce_growth();
        s.v5 = -1270.0;
        s.alpha = 1.36;
        s.gamma_fire = 0.387;
        s.gamma_storm = 0.508;
        s.beta = 0.303;
        s.compartments = norway_spruce_compartments();
        return s;
    }
    return std::nullopt;
}

namespace detail {

inline std::string join_path(const std::string& path, const std::string& key)
{
    return path.empty() ? key : path + "." + key;
}

inline void check(bool condition, const std::string& field, const std::string& message)
{
    if (!condition) throw ValidationError(field, message);
}

/// Reads keys of one JSON object and rejects keys that were never asked for.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        check(j.is_object(), path_.empty() ? "<root>" : path_, "must be an object");
    }

    std::string field(const std::string& key) const { return join_path(path_, key); }

    const json* find(const std::string& key)
    {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    double number(const std::string& key, double fallback)
    {
        const auto v = opt_number(key);
        return v ? *v : fallback;
    }

    std::optional<double> opt_number(const std::string& key)
    {
        const json* v = find(key);
        if (!v || v->is_null()) return std::nullopt;
        check(v->is_number(), field(key), "must be a number");
        const double d = v->get<double>();
        check(std::isfinite(d), field(key), "must be finite");
        return d;
    }

    double required_number(const std::string& key)
    {
        const auto v = opt_number(key);
        check(v.has_value(), field(key), "is required");
        return *v;
    }

    std::int64_t integer(const std::string& key, std::int64_t fallback)
    {
        const json* v = find(key);
        if (!v || v->is_null()) return fallback;
        check(v->is_number_integer(), field(key), "must be an integer");
        if (v->is_number_unsigned()) {
            check(v->get<std::uint64_t>() <= static_cast<std::uint64_t>(INT64_MAX), field(key), "is too large");
            return static_cast<std::int64_t>(v->get<std::uint64_t>());
        }
        return v->get<std::int64_t>();
    }

    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback)
    {
        const json* v = find(key);
        if (!v || v->is_null()) return fallback;
        check(v->is_number_unsigned() || (v->is_number_integer() && v->get<std::int64_t>() >= 0), field(key),
              "must be a non-negative integer");
        return v->get<std::uint64_t>();
    }

    std::string string(const std::string& key, const std::string& fallback)
    {
        const json* v = find(key);
        if (!v || v->is_null()) return fallback;
        check(v->is_string(), field(key), "must be a string");
        return v->get<std::string>();
    }

    bool boolean(const std::string& key, bool fallback)
    {
        const json* v = find(key);
        if (!v || v->is_null()) return fallback;
        check(v->is_boolean(), field(key), "must be true or false");
        return v->get<bool>();
    }

    std::vector<double> number_list(const std::string& key, std::vector<double> fallback)
    {
        const json* v = find(key);
        if (!v || v->is_null()) return fallback;
        check(v->is_array(), field(key), "must be a list of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v->size(); ++i) {
            const auto& x = (*v)[i];
            check(x.is_number() && std::isfinite(x.get<double>()), fmt::format("{}[{}]", field(key), i),
                  "must be a finite number");
            out.push_back(x.get<double>());
        }
        return out;
    }

    std::vector<std::string> string_list(const std::string& key)
    {
        const json* v = find(key);
        if (!v || v->is_null()) return {};
        check(v->is_array(), field(key), "must be a list of strings");
        std::vector<std::string> out;
        for (std::size_t i = 0; i < v->size(); ++i) {
            check((*v)[i].is_string(), fmt::format("{}[{}]", field(key), i), "must be a string");
            out.push_back((*v)[i].get<std::string>());
        }
        return out;
    }

    void finish() const
    {
        for (const auto& [key, value] : j_.items())
            if (!seen_.count(key)) throw ValidationError(field(key), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline SpeciesConfig parse_species(const json& j, const std::string& path)
{
    ObjectReader r(j, path);
    const std::string name = r.string("name", "");
    check(!name.empty(), r.field("name"), "is required");
    const auto preset = species_preset(name);
    SpeciesConfig s = preset.value_or(SpeciesConfig{});
    s.name = name;
    const bool need = !preset.has_value(); // custom species must spell out every value

    auto num = [&](ObjectReader& rr, const std::string& key, double& target) {
        if (need) target = rr.required_number(key);
        else target = rr.number(key, target);
    };

    if (const json* g = r.find("growth")) {
        ObjectReader gr(*g, r.field("growth"));
        num(gr, "v1", s.growth.v1);
        num(gr, "v2", s.growth.v2);
        num(gr, "v3", s.growth.v3);
        num(gr, "v4", s.growth.v4);
        if (const auto v5 = gr.opt_number("v5")) s.v5 = v5;
        gr.finish();
    } else {
        check(!need, r.field("growth"), "is required for species without built-in values");
    }

    if (const json* c = r.find("carbon")) {
        ObjectReader cr(*c, r.field("carbon"));
        num(cr, "alpha", s.alpha);
        const std::string source = cr.string("retention_source", "constant");
        if (source == "constant") s.retention_source = RetentionSource::configured_constant;
        else if (source == "profile") s.retention_source = RetentionSource::computed_from_profile;
        else throw ValidationError(cr.field("retention_source"), "must be \"constant\" or \"profile\"");
        const bool constant = s.retention_source == RetentionSource::configured_constant;
        if (need && constant) {
            s.gamma_fire = cr.required_number("gamma_fire");
            s.gamma_storm = cr.required_number("gamma_storm");
            s.beta = cr.required_number("beta");
        } else {
            s.gamma_fire = cr.number("gamma_fire", s.gamma_fire);
            s.gamma_storm = cr.number("gamma_storm", s.gamma_storm);
            s.beta = cr.number("beta", s.beta);
        }
        if (const json* k = cr.find("compartments")) {
            ObjectReader kr(*k, cr.field("compartments"));
            num(kr, "stem", s.compartments.stem);
            num(kr, "branches", s.compartments.branches);
            num(kr, "foliage", s.compartments.foliage);
            num(kr, "roots", s.compartments.roots);
            kr.finish();
        } else {
            check(!need, cr.field("compartments"), "is required for species without built-in values");
        }
        if (const json* d = cr.find("decay_rates")) {
            ObjectReader dr(*d, cr.field("decay_rates"));
            s.decay.coarse_woody = dr.number("coarse_woody", s.decay.coarse_woody);
            s.decay.branches = dr.number("branches", s.decay.branches);
            s.decay.foliage = dr.number("foliage", s.decay.foliage);
            s.decay.long_products = dr.number("long_products", s.decay.long_products);
            s.decay.medium_products = dr.number("medium_products", s.decay.medium_products);
            dr.finish();
        }
        cr.finish();
    } else {
        check(!need, r.field("carbon"), "is required for species without built-in values");
    }
    r.finish();
    return s;
}

inline void validate_species(const SpeciesConfig& s, const std::string& path)
{
    const auto& g = s.growth;
    check(g.v1 >= 0.0, path + ".growth.v1", "must be non-negative");
    check(g.v2 < 0.0, path + ".growth.v2", "must be negative (v2 < 0)");
    check(g.v3 >= 0.0, path + ".growth.v3", "must be non-negative");
    check(g.v4 < 0.0, path + ".growth.v4", "must be negative (v4 < 0)");
    check(s.alpha > 0.0, path + ".carbon.alpha", "must be positive");
    check(s.gamma_fire >= 0.0 && s.gamma_fire <= 1.0, path + ".carbon.gamma_fire", "must lie in [0, 1]");
    check(s.gamma_storm >= 0.0 && s.gamma_storm <= 1.0, path + ".carbon.gamma_storm", "must lie in [0, 1]");
    check(s.beta >= 0.0 && s.beta <= 1.0, path + ".carbon.beta", "must lie in [0, 1]");
    const auto& k = s.compartments;
    for (const auto& [name, v] : {std::pair{"stem", k.stem}, std::pair{"branches", k.branches},
                                  std::pair{"foliage", k.foliage}, std::pair{"roots", k.roots}})
        check(v >= 0.0, path + ".carbon.compartments." + name, "must be non-negative");
    check(std::abs(k.stem + k.branches + k.foliage + k.roots - 1.0) <= 1e-9, path + ".carbon.compartments",
          "shares must sum to 1");
    const auto& d = s.decay;
    for (const auto& [name, v] :
         {std::pair{"coarse_woody", d.coarse_woody}, std::pair{"branches", d.branches},
          std::pair{"foliage", d.foliage}, std::pair{"long_products", d.long_products},
          std::pair{"medium_products", d.medium_products}})
        check(v > 0.0, path + ".carbon.decay_rates." + name, "must be positive");
}

inline EconomicsConfig parse_economics(const json& j)
{
    ObjectReader r(j, "economics");
    EconomicsConfig e;
    e.carbon_price = r.number("carbon_price", e.carbon_price);
    e.discount_rate = r.number("discount_rate", e.discount_rate);
    e.regeneration_cost = r.number("regeneration_cost", e.regeneration_cost);
    e.salvage_fraction = r.number("salvage_fraction", e.salvage_fraction);
    check(e.carbon_price >= 0.0, r.field("carbon_price"), "must be non-negative");
    check(e.discount_rate > 0.0, r.field("discount_rate"), "must be positive");
    check(e.regeneration_cost >= 0.0, r.field("regeneration_cost"), "must be non-negative");
    check(e.salvage_fraction >= 0.0 && e.salvage_fraction <= 1.0, r.field("salvage_fraction"), "must lie in [0, 1]");
    if (const json* p = r.find("timber_price")) {
        ObjectReader pr(*p, r.field("timber_price"));
        const std::string kind = pr.string("kind", "age_dependent");
        if (kind == "age_dependent") {
            const double mu = pr.number("mu", 0.015);
            const double p_max = pr.number("p_f_max", 60.0);
            check(mu > 0.0, pr.field("mu"), "must be positive");
            check(p_max >= 0.0, pr.field("p_f_max"), "must be non-negative");
            e.price = PriceSchedule::age_dependent(mu, p_max);
        } else if (kind == "constant") {
            const double price = pr.required_number("price");
            check(price >= 0.0, pr.field("price"), "must be non-negative");
            e.price = PriceSchedule::constant(price);
        } else {
            throw ValidationError(pr.field("kind"), "must be \"age_dependent\" or \"constant\"");
        }
        pr.finish();
    }
    r.finish();
    return e;
}

inline DamageConfig parse_damage(const json& j)
{
    ObjectReader r(j, "damage");
    DamageConfig d;
    const std::string type = r.string("type", "fire");
    if (type == "fire") d.type = DamageType::fire;
    else if (type == "storm") d.type = DamageType::storm;
    else throw ValidationError(r.field("type"), "must be \"fire\" or \"storm\"");
    d.rate = r.number("rate", 0.0);
    check(d.rate >= 0.0, r.field("rate"), "must be non-negative (damage_rate >= 0)");
    r.finish();
    return d;
}

inline RunConfig parse_run(const json& j)
{
    ObjectReader r(j, "run");
    RunConfig run;
    const std::string mode = r.string("mode", "solve");
    if (mode == "solve") run.mode = RunMode::solve;
    else if (mode == "simulate") run.mode = RunMode::simulate;
    else if (mode == "sweep") run.mode = RunMode::sweep;
    else if (mode == "curves" || mode == "tabulate-curves") run.mode = RunMode::curves;
    else throw ValidationError(r.field("mode"), "must be one of solve, simulate, sweep, curves");
    run.species = r.string("species", "");

    if (const json* t = r.find("rotation"); t && !t->is_null()) {
        if (t->is_string()) {
            const auto s = t->get<std::string>();
            if (s == "infinite") run.rotation = std::numeric_limits<double>::infinity();
            else check(s == "optimal", r.field("rotation"), "must be a positive number, \"optimal\" or \"infinite\"");
        } else {
            check(t->is_number() && t->get<double>() > 0.0, r.field("rotation"),
                  "must be a positive number, \"optimal\" or \"infinite\"");
            run.rotation = t->get<double>();
        }
    }

    auto& sim = run.sim;
    sim.n_paths = r.integer("n_paths", sim.n_paths);
    sim.npv_horizon = r.number("npv_horizon", sim.npv_horizon);
    sim.stock_horizon = r.number("stock_horizon", sim.stock_horizon);
    sim.rng_seed = r.unsigned_integer("seed", sim.rng_seed);
    sim.time_step = r.number("time_step", sim.time_step);
    const auto workers = r.integer("workers", sim.workers);
    check(workers >= 1 && workers <= 4096, r.field("workers"), "must lie in [1, 4096]");
    sim.workers = static_cast<int>(workers);
    check(sim.n_paths >= 1, r.field("n_paths"), "must be at least 1");
    check(sim.npv_horizon > 0.0, r.field("npv_horizon"), "must be positive");
    check(sim.stock_horizon > 0.0, r.field("stock_horizon"), "must be positive");
    check(sim.time_step > 0.0, r.field("time_step"), "must be positive");
    if (const json* o = r.find("output_dir"); o && !o->is_null()) {
        check(o->is_string(), r.field("output_dir"), "must be a string");
        run.output_dir = o->get<std::string>();
    }

    if (const json* s = r.find("solver")) {
        ObjectReader sr(*s, r.field("solver"));
        run.solver.t_max = sr.number("t_max", run.solver.t_max);
        run.solver.grid_step = sr.number("grid_step", run.solver.grid_step);
        check(run.solver.grid_step > 0.0, sr.field("grid_step"), "must be positive");
        check(run.solver.t_max > run.solver.grid_step, sr.field("t_max"), "must exceed grid_step");
        sr.finish();
    }
    if (const json* s = r.find("sweep")) {
        ObjectReader sr(*s, r.field("sweep"));
        auto& sw = run.sweep;
        sw.p_c_values = sr.number_list("p_c_values", sw.p_c_values);
        sw.lambda_values = sr.number_list("lambda_values", sw.lambda_values);
        sw.species = sr.string_list("species");
        sw.simulate = sr.boolean("simulate", sw.simulate);
        check(!sw.p_c_values.empty(), sr.field("p_c_values"), "must not be empty");
        check(!sw.lambda_values.empty(), sr.field("lambda_values"), "must not be empty");
        for (std::size_t i = 0; i < sw.p_c_values.size(); ++i)
            check(sw.p_c_values[i] >= 0.0, fmt::format("{}[{}]", sr.field("p_c_values"), i), "must be non-negative");
        for (std::size_t i = 0; i < sw.lambda_values.size(); ++i)
            check(sw.lambda_values[i] >= 0.0, fmt::format("{}[{}]", sr.field("lambda_values"), i),
                  "must be non-negative (damage_rate >= 0)");
        sr.finish();
    }
    if (const json* c = r.find("curves")) {
        ObjectReader cr(*c, r.field("curves"));
        auto& cv = run.curves;
        cv.t_end = cr.number("t_end", cv.t_end);
        cv.step = cr.number("step", cv.step);
        cv.decay_years = cr.number("decay_years", cv.decay_years);
        check(cv.t_end > 0.0, cr.field("t_end"), "must be positive");
        check(cv.step > 0.0, cr.field("step"), "must be positive");
        check(cv.decay_years > 0.0, cr.field("decay_years"), "must be positive");
        check(cv.t_end / cv.step <= 1e7 && cv.decay_years / cv.step <= 1e7, cr.field("step"),
              "gives more than 1e7 rows");
        cr.finish();
    }
    r.finish();
    return run;
}

} // namespace detail

/// Builds a validated config from parsed JSON. Throws ValidationError naming the field.
inline ScenarioConfig config_from_json(const json& j)
{
    detail::ObjectReader root(j, "");
    std::vector<std::string> missing;
    for (const char* block : {"species", "economics", "damage", "run"})
        if (!j.is_object() || !j.contains(block)) missing.emplace_back(block);
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
        throw ValidationError("<root>", "missing required top-level block(s): " + list +
                                            " (required: species, economics, damage, run)");
    }

    ScenarioConfig cfg;
    const json& sp = *root.find("species");
    if (sp.is_object()) {
        cfg.species.push_back(detail::parse_species(sp, "species"));
    } else {
        detail::check(sp.is_array() && !sp.empty(), "species", "must be a species object or a non-empty list");
        for (std::size_t i = 0; i < sp.size(); ++i)
            cfg.species.push_back(detail::parse_species(sp[i], fmt::format("species[{}]", i)));
    }
    for (std::size_t i = 0; i < cfg.species.size(); ++i) {
        const std::string path = sp.is_object() ? "species" : fmt::format("species[{}]", i);
        detail::validate_species(cfg.species[i], path);
        for (std::size_t k = 0; k < i; ++k)
            detail::check(cfg.species[k].name != cfg.species[i].name, path + ".name", "duplicate species name");
        if (cfg.species[i].v5)
            if (auto w = check_integration_constant(cfg.species[i].growth, *cfg.species[i].v5))
                cfg.warnings.push_back(cfg.species[i].name + ": " + *w);
    }
    cfg.economics = detail::parse_economics(*root.find("economics"));
    cfg.damage = detail::parse_damage(*root.find("damage"));
    cfg.run = detail::parse_run(*root.find("run"));
    root.finish();

    (void)cfg.selected_species();
    for (std::size_t i = 0; i < cfg.run.sweep.species.size(); ++i) {
        const auto& name = cfg.run.sweep.species[i];
        bool found = false;
        for (const auto& s : cfg.species) found = found || s.name == name;
        detail::check(found, fmt::format("run.sweep.species[{}]", i), "no species named '" + name + "'");
    }
    return cfg;
}

/// Parses JSON text; syntax errors report line and column.
inline ScenarioConfig parse_config(const std::string& text, const std::string& source = "<config>")
{
    std::string trimmed = text;
    trimmed.erase(0, trimmed.find_first_not_of(" \t\r\n"));
    if (trimmed.empty()) return config_from_json(json::object());

    json j;
    try {
        j = json::parse(text);
        // a solution or simulation artifact carries its resolved config
        if (j.is_object() && j.contains("config_hash") && j.contains("config")) j = j.at("config");
    } catch (const json::parse_error& e) {
        // byte offset to line/column
        std::size_t line = 1, column = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw ValidationError(fmt::format("{}:{}:{}", source, line, column), fmt::format("parse error: {}", e.what()));
    }
    return config_from_json(j);
}

inline ScenarioConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError(path, "cannot open config file");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path);
}

/// Resolved config as JSON. Output directory and worker count are left out: they
/// do not change results. Feeding this back through config_from_json gives the same config.
inline json config_to_json(const ScenarioConfig& cfg)
{
    json species = json::array();
    for (const auto& s : cfg.species) {
        json growth = {{"v1", s.growth.v1}, {"v2", s.growth.v2}, {"v3", s.growth.v3}, {"v4", s.growth.v4}};
        if (s.v5) growth["v5"] = *s.v5;
        species.push_back({
            {"name", s.name},
            {"growth", growth},
            {"carbon",
             {{"alpha", s.alpha},
              {"gamma_fire", s.gamma_fire},
              {"gamma_storm", s.gamma_storm},
              {"beta", s.beta},
              {"retention_source",
               s.retention_source == RetentionSource::configured_constant ? "constant" : "profile"},
              {"compartments",
               {{"stem", s.compartments.stem},
                {"branches", s.compartments.branches},
                {"foliage", s.compartments.foliage},
                {"roots", s.compartments.roots}}},
              {"decay_rates",
               {{"coarse_woody", s.decay.coarse_woody},
                {"branches", s.decay.branches},
                {"foliage", s.decay.foliage},
                {"long_products", s.decay.long_products},
                {"medium_products", s.decay.medium_products}}}}},
        });
    }
    const auto& e = cfg.economics;
    json price = e.price.kind == PriceKind::constant
                     ? json{{"kind", "constant"}, {"price", e.price.p_const}}
                     : json{{"kind", "age_dependent"}, {"mu", e.price.mu}, {"p_f_max", e.price.p_f_max}};
    const auto& run = cfg.run;
    json rotation = "optimal";
    if (run.rotation) rotation = std::isinf(*run.rotation) ? json("infinite") : json(*run.rotation);
    return {
        {"species", species},
        {"economics",
         {{"carbon_price", e.carbon_price},
          {"discount_rate", e.discount_rate},
          {"regeneration_cost", e.regeneration_cost},
          {"salvage_fraction", e.salvage_fraction},
          {"timber_price", price}}},
        {"damage", {{"type", to_string(cfg.damage.type)}, {"rate", cfg.damage.rate}}},
        {"run",
         {{"mode", to_string(run.mode)},
          {"species", run.species},
          {"rotation", rotation},
          {"n_paths", run.sim.n_paths},
          {"npv_horizon", run.sim.npv_horizon},
          {"stock_horizon", run.sim.stock_horizon},
          {"seed", run.sim.rng_seed},
          {"time_step", run.sim.time_step},
          {"solver", {{"t_max", run.solver.t_max}, {"grid_step", run.solver.grid_step}}},
          {"sweep",
           {{"p_c_values", run.sweep.p_c_values},
            {"lambda_values", run.sweep.lambda_values},
            {"species", run.sweep.species},
            {"simulate", run.sweep.simulate}}},
          {"curves",
           {{"t_end", run.curves.t_end}, {"step", run.curves.step}, {"decay_years", run.curves.decay_years}}}}},
    };
}

/// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
inline std::string config_hash(const ScenarioConfig& cfg)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const unsigned char c : config_to_json(cfg).dump()) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return fmt::format("{:016x}", h);
}

/// Rotation problem for one species under the configured economics and damage.
inline RotationProblem make_problem(const ScenarioConfig& cfg, const SpeciesConfig& s)
{
    RotationProblem p;
    p.growth = s.growth;
    p.price = cfg.economics.price;
    p.econ = {cfg.economics.carbon_price, cfg.economics.discount_rate, cfg.economics.regeneration_cost,
              cfg.economics.salvage_fraction};
    p.damage_rate = cfg.damage.rate;
    p.damage_type = cfg.damage.type;
    auto& c = p.carbon;
    c.alpha = s.alpha;
    c.damage_profile = event_profile(event_of(cfg.damage.type), s.compartments, s.decay);
    c.harvest_profile = harvest_profile(s.compartments, s.decay);
    if (s.retention_source == RetentionSource::computed_from_profile) {
        c.gamma_source = c.beta_source = RetentionSource::computed_from_profile;
        c.gamma = npv_retained_fraction(*c.damage_profile, p.econ.r);
        c.beta = npv_retained_fraction(*c.harvest_profile, p.econ.r);
    } else {
        c.gamma = cfg.damage.type == DamageType::fire ? s.gamma_fire : s.gamma_storm;
        c.beta = s.beta;
    }
    p.validate();
    return p;
}

inline SweepGrid make_sweep_grid(const ScenarioConfig& cfg)
{
    SweepGrid grid;
    grid.p_c_values = cfg.run.sweep.p_c_values;
    grid.lambda_values = cfg.run.sweep.lambda_values;
    grid.damage_type = cfg.damage.type;
    for (const auto& s : cfg.species) {
        const auto& names = cfg.run.sweep.species;
        if (!names.empty() && std::find(names.begin(), names.end(), s.name) == names.end()) continue;
        grid.species.push_back({s.name, make_problem(cfg, s)});
    }
    return grid;
}

} // namespace forestrot
