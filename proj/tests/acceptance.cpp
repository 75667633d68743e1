// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <fmt/format.h>

#include "fixtures.hpp"
#include "forestrot/forestrot.hpp"
#include "oracles.hpp"

using namespace forestrot;
using fixture::Species;
namespace fs = std::filesystem;

namespace {

const std::string presets = FORESTROT_PRESETS_DIR;

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, const std::function<Outcome()>& body)
{
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += o.pass ? 0 : 1;
    std::cout << fmt::format("[{}] {:2d} {}: {} ({:.1f} s)", o.pass ? "PASS" : "FAIL", id, title, o.detail, secs)
              << std::endl;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RotationProblem preset_problem(const std::string& name, double p_c, double lambda)
{
    auto cfg = load_config(presets + "/" + name + ".json");
    cfg.economics.carbon_price = p_c;
    cfg.damage.rate = lambda;
    return make_problem(cfg, cfg.selected_species());
}

/// Two-stage brute force: 0.5-yr scan for the global peak, then a 0.01-yr grid around it.
template <class F>
oracle::Argmax brute_force(F f, double lo, double hi)
{
    const auto coarse = oracle::grid_argmax(f, lo, hi, 0.5);
    return oracle::grid_argmax(f, std::max(lo, coarse.t - 1.0), std::min(hi, coarse.t + 1.0), 0.01);
}

std::map<std::string, std::string> contents(const fs::path& dir)
{
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        std::ifstream in(e.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        out[e.path().filename().string()] = ss.str();
    }
    return out;
}

Outcome degenerate_reductions()
{
    const auto t0 = std::chrono::steady_clock::now();
    const double price = 40.0, r = 0.03;
    struct Case {
        std::string name;
        double p_c, lambda;
        std::function<double(const GrowthCurve&, double)> value;
    };
    const std::vector<Case> cases{
        {"Faustmann", 0.0, 0.0, [&](const GrowthCurve& g, double t) { return oracle::faustmann(g, price, r, t); }},
        {"Reed", 0.0, 0.008, [&](const GrowthCurve& g, double t) { return oracle::reed(g, price, r, 0.008, t); }},
        {"van Kooten", 30.0, 0.0,
         [&](const GrowthCurve& g, double t) { return oracle::van_kooten(g, price, r, 1.29, 30.0, 0.319, t); }},
    };
    double worst = 0.0;
    std::string detail;
    for (const auto& c : cases) {
        auto p = fixture::problem(Species::pine, c.p_c, c.lambda);
        p.price = PriceSchedule::constant(price);
        const auto s = solve_optimal_rotation(p);
        const auto best = oracle::grid_argmax([&](double t) { return c.value(p.growth, t); }, 1.0, 400.0, 0.01);
        const double err = s.is_finite() ? std::abs(s.t_star - best.t) : INFINITY;
        worst = std::max(worst, err);
        detail += fmt::format("{} T*={:.3f} oracle={:.2f}; ", c.name, s.t_star, best.t);
    }
    const double secs = seconds_since(t0);
    return {worst <= 0.05 && secs < 10.0, detail + fmt::format("max |dT|={:.4f} yr (tol 0.05), runtime {:.1f} s (< 10)", worst, secs)};
}

Outcome foc_value_consistency()
{
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> upc(0.0, 100.0), ul(0.0, 0.01);
    int finite = 0, draws = 0, bad = 0;
    double worst_t = 0.0, worst_v = 0.0;
    while (finite < 50 && draws < 500) {
        ++draws;
        const auto sp = rng() % 2 ? Species::spruce : Species::pine;
        const auto type = rng() % 2 ? DamageType::storm : DamageType::fire;
        const double pc = upc(rng), l = ul(rng);
        const auto p = fixture::problem(sp, pc, l, type);
        const auto s = solve_optimal_rotation(p);
        if (!s.is_finite()) continue;
        ++finite;
        const auto best = brute_force([&](double t) { return land_value(p, t); }, 1.0, 1000.0);
        const double dt = std::abs(s.t_star - best.t);
        const double dv = std::abs(s.lev - best.value) / std::abs(best.value);
        worst_t = std::max(worst_t, dt);
        worst_v = std::max(worst_v, dv);
        bad += (dt > 0.05 || dv > 1e-6) ? 1 : 0;
    }
    const double secs = seconds_since(t0);
    return {finite == 50 && bad == 0 && secs < 60.0,
            fmt::format("{} finite-regime draws ({} drawn), max |dT|={:.4f} yr (tol 0.05), max rel dLEV={:.2e} (tol 1e-6), "
                        "runtime {:.1f} s (< 60)",
                        finite, draws, worst_t, worst_v, secs)};
}

Outcome lev_amplification()
{
    bool ok = true;
    std::string detail;
    for (const char* name : {"pine_fire", "spruce_fire"})
        for (double l : {0.0, 0.005, 0.01}) {
            const double lo = solve_optimal_rotation(preset_problem(name, 0.0, l)).lev;
            const double hi = solve_optimal_rotation(preset_problem(name, 100.0, l)).lev;
            const double ratio = hi / lo;
            ok = ok && ratio >= 6.0 && ratio <= 10.0;
            detail += fmt::format("{} l={}: {:.2f}; ", name, l, ratio);
        }
    return {ok, detail + "band [6, 10]"};
}

Outcome risk_halving()
{
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string detail;
    SimulationConfig sim;
    sim.n_paths = 100000;
    for (const char* name : {"pine_fire", "spruce_fire"}) {
        double rel[2];
        int i = 0;
        for (double pc : {0.0, 100.0}) {
            const auto p = preset_problem(name, pc, 0.01);
            const auto sol = solve_optimal_rotation(p);
            const double T = sol.t_star;
            const auto s = npv_statistics(p, T, sim);
            const double gap = std::abs(s.mean - sol.lev);
            ok = ok && gap <= 3.0 * s.ci_halfwidth;
            detail += fmt::format("{} Pc={}: |mean-LEV|/CI={:.2f}; ", name, pc, gap / s.ci_halfwidth);
            rel[i++] = s.rel_std;
        }
        const double ratio = rel[1] / rel[0];
        ok = ok && ratio >= 0.35 && ratio <= 0.65;
        detail += fmt::format("{} ratio {:.3f}; ", name, ratio);
    }
    const double secs = seconds_since(t0);
    return {ok && secs < 300.0, detail + fmt::format("band [0.35, 0.65], mean within 3 CI, runtime {:.1f} s (< 300)", secs)};
}

Outcome tradeoff_slope()
{
    bool ok = true;
    std::string detail;
    SweepOptions options;
    options.simulate = false;
    for (auto type : {DamageType::fire, DamageType::storm}) {
        SweepGrid grid;
        grid.p_c_values = SweepGrid::default_p_c_values();
        grid.lambda_values = SweepGrid::default_lambda_values();
        grid.damage_type = type;
        for (auto sp : {Species::pine, Species::spruce})
            grid.species.push_back({fixture::name(sp), fixture::problem(sp, 0.0, 0.0, type)});
        const auto cells = run_sweep(grid, options);
        for (auto sp : {Species::pine, Species::spruce}) {
            const auto pairs = iso_rotation_pairs(cells, fixture::name(sp), 0.01);
            double lo = INFINITY, hi = -INFINITY;
            for (const auto& p : pairs) {
                lo = std::min(lo, p.delta_p_c);
                hi = std::max(hi, p.delta_p_c);
            }
            ok = ok && !pairs.empty() && lo >= -20.0 && hi <= -7.0;
            detail += fmt::format("{} {}: {} pairs, dPc in [{:.1f}, {:.1f}]; ", fixture::name(sp), to_string(type),
                                  pairs.size(), lo, hi);
        }
    }
    return {ok, detail + "band [-20, -7] per +1 pp damage rate"};
}

Outcome stock_amplification()
{
    SimulationConfig sim;
    double stock[2];
    int i = 0;
    for (double pc : {0.0, 100.0}) {
        const auto p = preset_problem("spruce_fire", pc, 0.01);
        stock[i++] = long_term_carbon_stock(p, solve_optimal_rotation(p).t_star, sim);
    }
    const double ratio = stock[1] / stock[0];
    return {ratio >= 1.8 && ratio <= 3.5,
            fmt::format("spruce l=0.01: {:.1f} vs {:.1f} t/ha, ratio {:.3f} (band [1.8, 3.5])", stock[1], stock[0], ratio)};
}

Outcome harvest_formula_vs_simulation()
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ul(0.001, 0.01), ut(30.0, 150.0);
    SimulationConfig sim; // 1e5 paths, default seed
    int inside = 0;
    std::string detail;
    for (int k = 0; k < 10; ++k) {
        const double l = ul(rng), T = ut(rng);
        const auto p = fixture::problem(k % 2 ? Species::spruce : Species::pine, 0.0, l);
        const double analytic = average_harvest_analytic(p, T);
        const auto lr = long_run_averages(p, T, sim);
        const double z = (lr.harvest.value - analytic) / lr.harvest.ci_halfwidth;
        inside += std::abs(z) <= 1.0 ? 1 : 0;
        detail += fmt::format("{:+.2f} ", z);
    }
    return {inside == 10, fmt::format("{}/10 pairs inside the 95% CI; (MC-analytic)/halfwidth: {}", inside, detail)};
}

Outcome carbon_calibration()
{
    bool ok = true;
    std::string detail;
    struct Row {
        const char* name;
        TreeCompartments comp;
        double storm, fire, beta;
    };
    for (const Row& row : {Row{"pine", scots_pine_compartments(), 0.525, 0.403, 0.319},
                           Row{"spruce", norway_spruce_compartments(), 0.508, 0.387, 0.303}}) {
        const double gs = npv_retained_fraction(storm_profile(row.comp), 0.03);
        const double gf = npv_retained_fraction(fire_profile(row.comp), 0.03);
        const double b = npv_retained_fraction(harvest_profile(row.comp), 0.03);
        ok = ok && std::abs(gs - row.storm) <= 0.02 && std::abs(gf - row.fire) <= 0.02 && std::abs(b - row.beta) <= 0.02;
        ok = ok && gs > gf && gf > b;
        detail += fmt::format("{} storm {:.4f}/{} fire {:.4f}/{} harvest {:.4f}/{}; ", row.name, gs, row.storm, gf,
                              row.fire, b, row.beta);
    }
    return {ok, detail + "tol 0.02, storm > fire > harvest"};
}

Outcome growth_integrity()
{
    bool ok = true;
    std::string detail;
    double worst = 0.0;
    for (auto [g, v5, name] : {std::tuple{scots_pine_growth(), 483.0, "pine"},
                               std::tuple{norway_spruce_growth(), 1270.0, "spruce"}}) {
        ok = ok && stem_volume(g, 0.0) == 0.0;
        const double dev = std::abs(g.integration_constant() - v5) / v5;
        ok = ok && dev <= 0.005;
        detail += fmt::format("{} constant {:.3f} vs {} ({:.3f}%); ", name, g.integration_constant(), v5, 100 * dev);
        for (double r : {0.0, 0.01, 0.03, 0.08})
            for (double t : {0.5, 5.0, 40.0, 90.0, 200.0, 600.0}) {
                const double q = oracle::discounted_volume(g, t, r);
                worst = std::max(worst, std::abs(discounted_increment_integral(g, t, r) - q) / q);
            }
    }
    ok = ok && worst <= 1e-8;
    return {ok, detail + fmt::format("v(0)=0; max rel closed form vs quadrature {:.2e} (tol 1e-8)", worst)};
}

Outcome determinism()
{
    const fs::path root = fs::temp_directory_path() / fmt::format("forestrot_acceptance_{}", ::getpid());
    fs::remove_all(root);
    auto sim_cfg = load_config(presets + "/pine_fire.json");
    sim_cfg.run.mode = RunMode::simulate;
    auto sweep_cfg = load_config(presets + "/sweep_default.json");
    sweep_cfg.run.sweep.p_c_values = {0.0, 25.0, 50.0, 75.0, 100.0};
    sweep_cfg.run.sweep.lambda_values = {0.0, 0.0025, 0.005, 0.0075, 0.01};

    bool ok = true;
    std::string detail;
    for (const auto& [label, cfg] : {std::pair{"simulate", sim_cfg}, std::pair{"sweep", sweep_cfg}}) {
        std::vector<std::map<std::string, std::string>> runs;
        for (int workers : {1, 4, 4}) {
            RunOverrides o;
            o.workers = workers;
            o.output_dir = (root / fmt::format("{}_{}", label, runs.size())).string();
            run(cfg, o);
            runs.push_back(contents(*o.output_dir));
        }
        const bool same = runs[0] == runs[1] && runs[1] == runs[2];
        ok = ok && same && !runs[0].empty();
        detail += fmt::format("{}: {} files {} across workers 1/4/4; ", label, runs[0].size(),
                              same ? "identical" : "DIFFER");
    }
    fs::remove_all(root);
    return {ok, detail};
}

} // namespace

int main()
{
    criterion(1, "degenerate reductions", degenerate_reductions);
    criterion(2, "first-order root vs value argmax", foc_value_consistency);
    criterion(3, "land value amplification", lev_amplification);
    criterion(4, "risk halving", risk_halving);
    criterion(5, "tradeoff slope", tradeoff_slope);
    criterion(6, "stock amplification", stock_amplification);
    criterion(7, "average harvest formula vs simulation", harvest_formula_vs_simulation);
    criterion(8, "carbon calibration", carbon_calibration);
    criterion(9, "growth curve integrity", growth_integrity);
    criterion(10, "determinism", determinism);
    std::cout << fmt::format("{} of 10 criteria passed", 10 - failures) << std::endl;
    return failures == 0 ? 0 : 1;
}
