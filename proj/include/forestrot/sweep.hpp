#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "forestrot/error.hpp"
#include "forestrot/optimizer.hpp"
#include "forestrot/parallel.hpp"
#include "forestrot/simulation.hpp"

namespace forestrot {

/// A species with everything but carbon price and damage rate fixed.
struct SpeciesCase {
    std::string name;
    RotationProblem base;
};

struct SweepGrid {
    std::vector<double> p_c_values;
    std::vector<double> lambda_values;
    std::vector<SpeciesCase> species;
    DamageType damage_type = DamageType::fire;

    /// P_c 0..100 step 5, lambda 0..0.01 step 0.001.
    static std::vector<double> default_p_c_values()
    {
        std::vector<double> v;
        for (int i = 0; i <= 20; ++i) v.push_back(5.0 * i);
        return v;
    }
    static std::vector<double> default_lambda_values()
    {
        std::vector<double> v;
        for (int i = 0; i <= 10; ++i) v.push_back(0.001 * i);
        return v;
    }

    std::size_t size() const { return p_c_values.size() * lambda_values.size() * species.size(); }

    void validate() const
    {
        detail::require(!p_c_values.empty() && !lambda_values.empty() && !species.empty(),
                        "sweep: grid needs at least one carbon price, damage rate and species");
        for (const auto& s : species)
            if (s.base.damage_type != damage_type)
                throw DomainError("sweep: species '" + s.name + "' is configured for a different damage type");
    }
};

struct SweepOptions {
    SolverOptions solver;
    SimulationConfig sim;
    bool simulate = true; ///< Monte Carlo stock and NPV spread per cell
};

struct SweepCell {
    std::string species;
    DamageType damage_type = DamageType::fire;
    double p_c = 0.0;
    double lambda = 0.0;
    std::optional<std::string> error; ///< set when the cell failed; other fields are then meaningless
    RotationSolution solution;
    double avg_harvest = 0.0;        ///< analytic long-run average, 0 in the infinite regime
    double avg_harvest_mc = 0.0;
    double avg_carbon_stock = 0.0;
    double ci_avg_carbon_stock = 0.0;
    double mean_npv = 0.0;
    double rel_std_npv = 0.0;

    bool ok() const { return !error.has_value(); }
};

/// Rotation simulated for a cell: T*, or +inf in the infinite regime.
inline double applied_rotation(const RotationSolution& s) { return s.t_star; }

/// Solves every cell, then adds the long-run harvest and (optionally) Monte Carlo
/// statistics. Output order is species, then carbon price, then damage rate.
inline std::vector<SweepCell> run_sweep(const SweepGrid& grid, const SweepOptions& options = {})
{
    grid.validate();
    options.sim.validate();
    std::vector<SweepCell> cells(grid.size());
    const std::size_t per_species = grid.p_c_values.size() * grid.lambda_values.size();
    const std::size_t n_lambda = grid.lambda_values.size();

    SimulationConfig cell_sim = options.sim;
    cell_sim.workers = 1; // parallelism is across cells

    parallel_for(cells.size(), options.sim.workers, [&](std::size_t idx) {
        const auto& sp = grid.species[idx / per_species];
        const std::size_t within = idx % per_species;
        SweepCell& cell = cells[idx];
        cell.species = sp.name;
        cell.damage_type = grid.damage_type;
        cell.p_c = grid.p_c_values[within / n_lambda];
        cell.lambda = grid.lambda_values[within % n_lambda];
        try {
            RotationProblem p = sp.base;
            p.econ.p_c = cell.p_c;
            p.damage_rate = cell.lambda;
            cell.solution = solve_optimal_rotation(p, options.solver);
            const double T = applied_rotation(cell.solution);
            cell.avg_harvest = average_harvest_analytic(p, T);
            if (options.simulate) {
                const auto s = simulate(p, T, cell_sim);
                cell.avg_harvest_mc = s.avg_harvest;
                cell.avg_carbon_stock = s.avg_carbon_stock;
                cell.ci_avg_carbon_stock = s.ci_avg_carbon_stock;
                cell.mean_npv = s.mean_npv;
                cell.rel_std_npv = s.rel_std_npv;
            }
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
    });
    return cells;
}

struct FrontierPoint {
    double p_c = 0.0;
    double avg_carbon_stock = 0.0;
    double avg_harvest = 0.0;
    Regime regime = Regime::finite;
};

struct FrontierCurve {
    double lambda = 0.0;
    std::vector<FrontierPoint> points; ///< ascending carbon price
    bool mixed_regime = false;         ///< curve crosses into the infinite or no-value regime
    bool monotone = true;              ///< harvest weakly falls and stock weakly rises along the curve
};

/// Harvest/stock frontier per damage rate for one species, skipping failed cells.
inline std::vector<FrontierCurve> extract_frontier(const std::vector<SweepCell>& cells, const std::string& species,
                                                   DamageType damage_type, double tolerance = 1e-9)
{
    std::vector<FrontierCurve> curves;
    for (const auto& c : cells) {
        if (c.species != species || c.damage_type != damage_type || !c.ok()) continue;
        auto it = std::find_if(curves.begin(), curves.end(), [&](const FrontierCurve& f) { return f.lambda == c.lambda; });
        if (it == curves.end()) {
            curves.push_back({c.lambda, {}, false, true});
            it = curves.end() - 1;
        }
        it->points.push_back({c.p_c, c.avg_carbon_stock, c.avg_harvest, c.solution.regime});
    }
    std::sort(curves.begin(), curves.end(), [](const auto& a, const auto& b) { return a.lambda < b.lambda; });
    for (auto& f : curves) {
        std::stable_sort(f.points.begin(), f.points.end(), [](const auto& a, const auto& b) { return a.p_c < b.p_c; });
        for (std::size_t i = 0; i < f.points.size(); ++i) {
            if (f.points[i].regime != f.points.front().regime) f.mixed_regime = true;
            if (i == 0) continue;
            const auto& a = f.points[i - 1];
            const auto& b = f.points[i];
            if (b.avg_harvest > a.avg_harvest + tolerance * std::max(1.0, a.avg_harvest)
                || b.avg_carbon_stock < a.avg_carbon_stock - tolerance * std::max(1.0, a.avg_carbon_stock))
                f.monotone = false;
        }
    }
    return curves;
}

/// Iso-rotation pairing of two damage rates.
///
/// `p_c_match` is the carbon price on the higher-rate row giving the same
/// optimal rotation as `p_c` on the lower-rate row (linear interpolation between
/// finite-regime cells). `delta_p_c = p_c - p_c_match` is the carbon-price change
/// with the same effect on the rotation as the rise in damage rate.
struct TradeoffPair {
    std::string species;
    double lambda_lo = 0.0;
    double lambda_hi = 0.0;
    double p_c = 0.0;
    double p_c_match = 0.0;
    double t_star = 0.0;
    double delta_p_c = 0.0;
};

inline std::vector<TradeoffPair> iso_rotation_pairs(const std::vector<SweepCell>& cells, const std::string& species,
                                                    double delta_lambda = 0.01)
{
    auto row = [&](double lambda) {
        std::vector<const SweepCell*> r;
        for (const auto& c : cells)
            if (c.species == species && c.ok() && c.lambda == lambda) r.push_back(&c);
        std::sort(r.begin(), r.end(), [](auto* a, auto* b) { return a->p_c < b->p_c; });
        return r;
    };
    std::vector<double> lambdas;
    for (const auto& c : cells)
        if (c.species == species && std::find(lambdas.begin(), lambdas.end(), c.lambda) == lambdas.end())
            lambdas.push_back(c.lambda);
    std::sort(lambdas.begin(), lambdas.end());

    std::vector<TradeoffPair> out;
    for (const double lo : lambdas) {
        const auto hi_it = std::find_if(lambdas.begin(), lambdas.end(),
                                        [&](double l) { return std::abs(l - lo - delta_lambda) < 1e-12; });
        if (hi_it == lambdas.end()) continue;
        const auto lower = row(lo);
        const auto upper = row(*hi_it);
        for (const auto* cell : lower) {
            if (!cell->solution.is_finite()) continue;
            const double target = cell->solution.t_star;
            for (std::size_t k = 0; k + 1 < upper.size(); ++k) {
                const auto& a = upper[k]->solution;
                const auto& b = upper[k + 1]->solution;
                if (!a.is_finite() || !b.is_finite()) continue;
                if ((a.t_star - target) * (b.t_star - target) > 0.0 || a.t_star == b.t_star) continue;
                const double w = (target - a.t_star) / (b.t_star - a.t_star);
                const double match = upper[k]->p_c + w * (upper[k + 1]->p_c - upper[k]->p_c);
                out.push_back({species, lo, *hi_it, cell->p_c, match, target, cell->p_c - match});
                break;
            }
        }
    }
    return out;
}

/// Per-species matrix over (carbon price rows, damage rate columns).
struct GridMatrix {
    std::string species;
    std::vector<double> p_c_values;
    std::vector<double> lambda_values;
    std::vector<std::vector<double>> values; ///< [p_c][lambda]; NaN for failed cells
};

enum class CellField { t_star, lev, avg_harvest, avg_carbon_stock, rel_std_npv };

inline std::string_view to_string(CellField f)
{
    switch (f) {
    case CellField::t_star: return "t_star";
    case CellField::lev: return "lev";
    case CellField::avg_harvest: return "avg_harvest";
    case CellField::avg_carbon_stock: return "avg_carbon_stock";
    case CellField::rel_std_npv: return "rel_std_npv";
    }
    return "?";
}

inline double cell_value(const SweepCell& c, CellField f)
{
    if (!c.ok()) return std::numeric_limits<double>::quiet_NaN();
    switch (f) {
    case CellField::t_star: return c.solution.t_star;
    case CellField::lev: return c.solution.lev;
    case CellField::avg_harvest: return c.avg_harvest;
    case CellField::avg_carbon_stock: return c.avg_carbon_stock;
    case CellField::rel_std_npv: return c.rel_std_npv;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

/// Contour-ready matrix of one field (cells must come from `grid`).
inline GridMatrix grid_matrix(const SweepGrid& grid, const std::vector<SweepCell>& cells, std::size_t species_index,
                              CellField field)
{
    detail::require(cells.size() == grid.size() && species_index < grid.species.size(),
                    "grid_matrix: cells do not match the grid");
    GridMatrix m{grid.species[species_index].name, grid.p_c_values, grid.lambda_values, {}};
    const std::size_t n_lambda = grid.lambda_values.size();
    const std::size_t offset = species_index * grid.p_c_values.size() * n_lambda;
    m.values.resize(grid.p_c_values.size());
    for (std::size_t i = 0; i < grid.p_c_values.size(); ++i)
        for (std::size_t j = 0; j < n_lambda; ++j) m.values[i].push_back(cell_value(cells[offset + i * n_lambda + j], field));
    return m;
}

} // namespace forestrot
