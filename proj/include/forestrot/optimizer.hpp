#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "forestrot/error.hpp"
#include "forestrot/rotation.hpp"

namespace forestrot {

enum class Regime { finite, infinite, no_positive_value };

inline std::string_view to_string(Regime r)
{
    switch (r) {
    case Regime::finite: return "finite";
    case Regime::infinite: return "infinite";
    case Regime::no_positive_value: return "no_positive_value";
    }
    return "?";
}

struct SolverOptions {
    double t_max = 1000.0;      ///< finite/infinite decision horizon, yr
    double grid_step = 1.0;     ///< coarse scan resolution, yr
    int max_iterations = 200;   ///< per refinement stage
    double tie_tolerance = 1e-9; ///< relative LEV difference treated as a tie
    double tail_tolerance = 1e-9; ///< normalized residual above which V is still rising at t_max
};

struct SolveDiagnostics {
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    int iterations = 0;
    std::string method;
    double grid_argmax = 0.0;   ///< coarse-grid maximiser after tie-breaking
    bool tie_break_applied = false;
    int local_maxima = 0;       ///< residual sign changes + to - on the grid
    double lev_at_t_max = 0.0;
    double foc_at_t_max = 0.0;  ///< normalized
    double golden_section_t = std::numeric_limits<double>::quiet_NaN();
};

struct RotationSolution {
    Regime regime = Regime::finite;
    /// Optimal rotation; +inf in the infinite regime. For no_positive_value this
    /// is the best rotation found, whose LEV is still negative.
    double t_star = 0.0;
    double lev = 0.0;               ///< at t_star; the analytic limit V(inf) for the infinite regime
    double lev_lower_bound = 0.0;   ///< V(t_max) for the infinite regime, otherwise equal to lev
    double foc_residual_at_solution = 0.0; ///< normalized
    SolveDiagnostics diagnostics;

    bool is_finite() const { return regime == Regime::finite; }
};

/// Raised when refinement does not converge; carries the best bracket found.
class SolverError : public NumericalError {
public:
    SolverError(const std::string& what, double lo, double hi)
        : NumericalError(fmt::format("{} (best bracket [{}, {}])", what, lo, hi)), lo_(lo), hi_(hi)
    {}
    double bracket_lo() const noexcept { return lo_; }
    double bracket_hi() const noexcept { return hi_; }

private:
    double lo_, hi_;
};

namespace detail {

struct GoldenResult {
    double t;
    double value;
    int iterations;
};

/// Golden-section maximisation of f on [lo, hi].
template <class F>
GoldenResult golden_section_max(const F& f, double lo, double hi, int max_iterations, double x_tol)
{
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    int it = 0;
    while (b - a > x_tol && it < max_iterations) {
        ++it;
        if (fc >= fd) { // ties move towards the shorter rotation
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return fc >= fd ? GoldenResult{c, fc, it} : GoldenResult{d, fd, it};
}

} // namespace detail

/// Optimal rotation length T* maximising land_value.
///
/// Scans land_value and the normalized first-order residual on a grid over
/// (0, t_max]. Every cell where the residual turns from positive to
/// non-positive brackets a local maximum; each is refined by golden-section on
/// land_value and polished by bracketed root-finding on the residual, and the
/// best is kept (ties go to the shorter rotation). When the residual is still
/// positive at t_max and the limit V(inf) beats every interior maximum, the
/// regime is infinite. A best LEV below zero gives no_positive_value.
inline RotationSolution solve_optimal_rotation(const RotationProblem& problem, const SolverOptions& opt = {})
{
    problem.validate();
    detail::require(opt.t_max > opt.grid_step && opt.grid_step > 0.0, "solver: need t_max > grid_step > 0");

    const int n = static_cast<int>(std::floor(opt.t_max / opt.grid_step + 1e-9));
    std::vector<double> ts(n), lev(n), foc(n);
    double damage_term = 0.0; // accumulated cell by cell along the grid
    double prev = 0.0;
    for (int k = 0; k < n; ++k) {
        ts[k] = (k + 1 == n) ? opt.t_max : (k + 1) * opt.grid_step;
        const double tol = 1e-3 * damage_quadrature_tolerance(harvest_revenue(problem, ts[k]));
        damage_term += expected_damage_revenue(problem, prev, ts[k], tol);
        prev = ts[k];
        const auto e = evaluate_rotation(problem, ts[k], land_value_parts(problem, ts[k], damage_term));
        lev[k] = e.lev;
        foc[k] = e.foc;
    }

    RotationSolution sol;
    auto& diag = sol.diagnostics;
    diag.lev_at_t_max = lev.back();
    diag.foc_at_t_max = foc.back();

    auto tie_band = [&](double v) { return opt.tie_tolerance * std::max(1.0, std::abs(v)); };

    int arg = 0;
    for (int k = 1; k < n; ++k)
        if (lev[k] > lev[arg]) arg = k;
    for (int k = 0; k < arg; ++k) {
        if (lev[arg] - lev[k] <= tie_band(lev[arg])) {
            arg = k;
            diag.tie_break_applied = true;
            break;
        }
    }
    diag.grid_argmax = ts[arg];

    auto value_at = [&](double t) { return land_value(problem, t); };
    auto residual_at = [&](double t) { return normalized_foc_residual(problem, t); };

    bool have_interior = false;
    double best_t = 0.0, best_v = -std::numeric_limits<double>::infinity(), best_res = 0.0;
    double best_lo = 0.0, best_hi = 0.0, best_golden = 0.0;
    int total_iterations = 0;

    for (int k = 0; k + 1 < n; ++k) {
        if (!(foc[k] > 0.0 && foc[k + 1] <= 0.0)) continue;
        ++diag.local_maxima;
        const double lo = ts[k], hi = ts[k + 1];
        const auto g = detail::golden_section_max(value_at, lo, hi, opt.max_iterations, 1e-7 * hi);
        total_iterations += g.iterations;

        double root;
        if (foc[k + 1] == 0.0) {
            root = hi;
        } else {
            std::uintmax_t iters = static_cast<std::uintmax_t>(opt.max_iterations);
            const auto bracket = boost::math::tools::toms748_solve(
                residual_at, lo, hi, foc[k], foc[k + 1], boost::math::tools::eps_tolerance<double>(48), iters);
            total_iterations += static_cast<int>(iters);
            if (iters >= static_cast<std::uintmax_t>(opt.max_iterations))
                throw SolverError("first-order residual root did not converge", bracket.first, bracket.second);
            root = 0.5 * (bracket.first + bracket.second);
        }
        const double v = value_at(root);
        if (!have_interior || v > best_v + tie_band(best_v)) {
            have_interior = true;
            best_t = root;
            best_v = v;
            best_res = residual_at(root);
            best_lo = lo;
            best_hi = hi;
            best_golden = g.t;
        }
    }
    diag.iterations = total_iterations;

    const bool rising_at_horizon = foc.back() > opt.tail_tolerance;
    if (rising_at_horizon) {
        const double limit = land_value_limit(problem);
        if (!have_interior || limit > best_v + tie_band(best_v)) {
            sol.regime = Regime::infinite;
            sol.t_star = std::numeric_limits<double>::infinity();
            sol.lev = limit;
            sol.lev_lower_bound = lev.back();
            sol.foc_residual_at_solution = foc.back();
            diag.bracket_lo = opt.t_max;
            diag.bracket_hi = std::numeric_limits<double>::infinity();
            diag.method = "grid-scan; residual positive at t_max; analytic limit";
            if (sol.lev < 0.0) sol.regime = Regime::no_positive_value;
            return sol;
        }
    }

    if (have_interior) {
        sol.t_star = best_t;
        sol.lev = best_v;
        sol.foc_residual_at_solution = best_res;
        diag.bracket_lo = best_lo;
        diag.bracket_hi = best_hi;
        diag.golden_section_t = best_golden;
        diag.method = "grid-scan; golden-section; toms748 on first-order residual";
    } else {
        // Residual never turns negative inside the grid and V is not rising at
        // t_max: the supremum sits on the grid edge. Refine around the grid argmax.
        const double lo = arg > 0 ? ts[arg - 1] : 0.5 * ts[0];
        const double hi = arg + 1 < n ? ts[arg + 1] : ts[arg];
        const auto g = detail::golden_section_max(value_at, lo, hi, opt.max_iterations, 1e-7 * hi);
        sol.t_star = g.t;
        sol.lev = g.value;
        sol.foc_residual_at_solution = residual_at(g.t);
        diag.bracket_lo = lo;
        diag.bracket_hi = hi;
        diag.golden_section_t = g.t;
        diag.iterations += g.iterations;
        diag.method = "grid-scan; golden-section (no residual sign change)";
    }
    sol.lev_lower_bound = sol.lev;
    sol.regime = sol.lev < 0.0 ? Regime::no_positive_value : Regime::finite;
    return sol;
}

enum class SensitivityParam { carbon_price, damage_rate };

struct Sensitivity {
    double change = 0.0;        ///< T*(param + delta) - T*(param), yr
    bool regime_change = false; ///< either side outside the finite regime; change is NaN
    Regime base = Regime::finite;
    Regime perturbed = Regime::finite;
};

/// Signed change in the optimal rotation when the carbon price or damage rate moves by `delta`.
inline Sensitivity solution_sensitivity(const RotationProblem& problem, SensitivityParam param, double delta,
                                        const SolverOptions& opt = {})
{
    if (delta == 0.0) return {};
    RotationProblem moved = problem;
    if (param == SensitivityParam::carbon_price)
        moved.econ.p_c += delta;
    else
        moved.damage_rate += delta;
    const auto a = solve_optimal_rotation(problem, opt);
    const auto b = solve_optimal_rotation(moved, opt);
    Sensitivity s;
    s.base = a.regime;
    s.perturbed = b.regime;
    if (!a.is_finite() || !b.is_finite()) {
        s.regime_change = true;
        s.change = std::numeric_limits<double>::quiet_NaN();
        return s;
    }
    s.change = b.t_star - a.t_star;
    return s;
}

} // namespace forestrot
