#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "forestrot/carbon.hpp"
#include "forestrot/error.hpp"
#include "forestrot/growth.hpp"
#include "forestrot/parallel.hpp"
#include "forestrot/random.hpp"
#include "forestrot/rotation.hpp"

namespace forestrot {

struct SimulationConfig {
    std::int64_t n_paths = 100000;
    double npv_horizon = 2000.0;    ///< yr
    double stock_horizon = 10000.0; ///< yr, long-run averages
    std::uint64_t rng_seed = 20240601;
    double time_step = 1.0;         ///< yr, sampling step of the stock trajectory
    int workers = 1;

    void validate() const
    {
        detail::require(n_paths >= 1, "simulation: n_paths must be at least 1");
        detail::require(std::isfinite(npv_horizon) && npv_horizon > 0.0, "simulation: npv_horizon must be positive");
        detail::require(std::isfinite(stock_horizon) && stock_horizon > 0.0,
                        "simulation: stock_horizon must be positive");
        detail::require(std::isfinite(time_step) && time_step > 0.0, "simulation: time_step must be positive");
        detail::require(workers >= 1, "simulation: workers must be at least 1");
    }
};

enum class RotationEnd { harvest, damage, censored };

inline std::string_view to_string(RotationEnd e)
{
    switch (e) {
    case RotationEnd::harvest: return "harvest";
    case RotationEnd::damage: return "damage";
    case RotationEnd::censored: return "censored";
    }
    return "?";
}

/// One rotation of a sampled chain. `age` is the stand age at its end, +inf for
/// a stand that is never harvested nor damaged.
struct RotationRecord {
    double start = 0.0;
    double age = 0.0;
    RotationEnd end = RotationEnd::harvest;
};

namespace detail {

inline void require_rotation(double T)
{
    if (!(T > 0.0)) throw DomainError("simulation: rotation length must be positive (use +inf for no harvest)");
}

/// Visits every rotation that starts before `horizon`. The last one may end
/// after the horizon. One exponential draw is consumed per rotation when lambda > 0.
template <class Fn>
void for_each_rotation(double lambda, double T, double horizon, PathStream& stream, Fn&& fn)
{
    double start = 0.0;
    while (start < horizon) {
        RotationRecord rec{start, T, RotationEnd::harvest};
        if (lambda > 0.0) {
            const double z = stream.exponential(lambda);
            if (z < T) rec = {start, z, RotationEnd::damage};
        } else if (std::isinf(T)) {
            rec.end = RotationEnd::censored;
        }
        fn(rec);
        if (std::isinf(rec.age)) return;
        start += rec.age;
    }
}

struct MomentSummary {
    double mean = 0.0;
    double std = 0.0;
};

inline MomentSummary moments(const std::vector<double>& xs)
{
    MomentSummary m;
    m.mean = compensated_mean(xs);
    if (xs.size() < 2) return m;
    std::vector<double> sq(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - m.mean) * (xs[i] - m.mean);
    m.std = std::sqrt(compensated_sum(sq) / static_cast<double>(xs.size() - 1));
    return m;
}

inline constexpr double z95 = 1.959963984540054;

} // namespace detail

/// Rotations starting before config.stock_horizon for one path.
inline std::vector<RotationRecord> sample_rotation_chain(const RotationProblem& problem, double T,
                                                         const SimulationConfig& config, std::uint64_t path_index)
{
    problem.validate();
    config.validate();
    detail::require_rotation(T);
    PathStream stream(config.rng_seed, path_index);
    std::vector<RotationRecord> out;
    detail::for_each_rotation(problem.damage_rate, T, config.stock_horizon, stream,
                              [&](const RotationRecord& r) { out.push_back(r); });
    return out;
}

/// Discounted cash flow of one path over [0, horizon].
///
/// Carbon payments for growth use the exact integral of e^{-r t} v'(t) over the
/// part of each rotation inside the horizon; events inside the horizon pay the
/// release charge, regeneration cost and the timber or salvage sale.
inline double path_npv(const RotationProblem& p, double T, double horizon, PathStream& stream)
{
    const double r = p.econ.r;
    const double a_pc = p.carbon.alpha * p.econ.p_c;
    // every harvest happens at age T
    const bool finite_T = std::isfinite(T);
    const double growth_at_T = finite_T && a_pc != 0.0 ? discounted_increment_integral(p.growth, T, r) : 0.0;
    const double harvest_flow = finite_T ? (timber_price(p.price, T) - (1.0 - p.carbon.beta) * a_pc)
                                                   * stem_volume(p.growth, T)
                                               - p.econ.regen_cost
                                         : 0.0;
    double npv = 0.0;
    detail::for_each_rotation(p.damage_rate, T, horizon, stream, [&](const RotationRecord& rec) {
        const double disc_start = std::exp(-r * rec.start);
        const bool complete = rec.end != RotationEnd::censored && rec.start + rec.age <= horizon;
        if (a_pc != 0.0) {
            const bool harvested = complete && rec.end == RotationEnd::harvest;
            const double grown = std::min(rec.age, horizon - rec.start);
            npv += disc_start * a_pc * (harvested ? growth_at_T : discounted_increment_integral(p.growth, grown, r));
        }
        if (!complete) return;
        const double L = rec.age;
        double flow = harvest_flow;
        if (rec.end == RotationEnd::damage) {
            const double v = stem_volume(p.growth, L);
            flow = -(1.0 - p.carbon.gamma) * a_pc * v - p.econ.regen_cost
                 + p.econ.salvage_fraction * timber_price(p.price, L) * v;
        }
        npv += disc_start * std::exp(-r * L) * flow;
    });
    return npv;
}

struct NpvStatistics {
    double mean = 0.0;
    double std = 0.0;
    double rel_std = 0.0;        ///< std / |mean|; 0 when the mean is 0
    double ci_halfwidth = 0.0;   ///< 95%, of the mean
    std::int64_t n_paths = 0;
    std::vector<std::string> warnings;
};

/// Mean and spread of per-path NPV over config.npv_horizon.
inline NpvStatistics npv_statistics(const RotationProblem& problem, double T, const SimulationConfig& config)
{
    problem.validate();
    config.validate();
    detail::require_rotation(T);
    std::vector<double> values(static_cast<std::size_t>(config.n_paths));
    parallel_for(values.size(), config.workers, [&](std::size_t i) {
        PathStream stream(config.rng_seed, i);
        values[i] = path_npv(problem, T, config.npv_horizon, stream);
    });
    const auto m = detail::moments(values);
    NpvStatistics s;
    s.mean = m.mean;
    s.std = m.std;
    s.rel_std = m.mean != 0.0 ? m.std / std::abs(m.mean) : 0.0;
    s.ci_halfwidth = detail::z95 * m.std / std::sqrt(static_cast<double>(values.size()));
    s.n_paths = config.n_paths;
    const double tail = std::exp(-problem.econ.r * config.npv_horizon);
    if (tail > 1e-3)
        s.warnings.push_back(fmt::format("npv_horizon {} yr leaves a discount factor of {:.3g} (> 1e-3); the "
                                         "truncated tail biases the mean NPV",
                                         config.npv_horizon, tail));
    return s;
}

/// Long-run average harvest volume (m3/ha/yr) of the renewal chain: expected
/// harvest per rotation over expected rotation length.
inline double average_harvest_analytic(const RotationProblem& problem, double T)
{
    detail::require_rotation(T);
    if (std::isinf(T)) return 0.0;
    const double lambda = problem.damage_rate;
    if (!(lambda >= 0.0)) throw DomainError("average_harvest_analytic: damage rate must be non-negative");
    const double v = stem_volume(problem.growth, T);
    if (lambda == 0.0) return v / T;
    const double survive = std::exp(-lambda * T);
    if (survive == 0.0) return 0.0;
    // expected rotation length E[min(Z, T)] = (1 - e^{-lambda T}) / lambda
    return survive * v / (-std::expm1(-lambda * T) / lambda);
}

struct RatioEstimate {
    double value = 0.0;
    double ci_halfwidth = 0.0; ///< 95%
};

struct LongRunAverages {
    RatioEstimate carbon_stock; ///< t_CO2/ha
    RatioEstimate harvest;      ///< m3/ha/yr
    double harvest_fraction = 0.0; ///< share of completed rotations ending in harvest
    std::int64_t rotations = 0;
    std::int64_t n_paths = 0;
};

namespace detail {

/// Pooled ratio sum(y)/sum(x) over paths with a delta-method 95% half-width.
inline RatioEstimate pooled_ratio(const std::vector<double>& y, const std::vector<double>& x)
{
    const double mean_x = compensated_mean(x);
    RatioEstimate e;
    e.value = compensated_sum(y) / compensated_sum(x);
    if (y.size() < 2) return e;
    std::vector<double> resid(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) resid[i] = y[i] - e.value * x[i];
    const auto m = moments(resid);
    e.ci_halfwidth = z95 * m.std / (mean_x * std::sqrt(static_cast<double>(y.size())));
    return e;
}

inline const EventCarbonProfile& require_profile(const std::optional<EventCarbonProfile>& p, const char* which)
{
    if (!p) throw DomainError(fmt::format("carbon stock simulation needs a {} carbon profile", which));
    return *p;
}

} // namespace detail

/// Renewal-reward estimates of the long-run average carbon stock and harvest.
///
/// Each path contributes the rotations starting before config.stock_horizon.
/// Per rotation the reward is the time integral of the live stock over the
/// rotation plus the time integral of the event's remaining carbon (capped at
/// the horizon), and the cycle length is the rotation length. The pooled ratio
/// of reward to length is the stationary average. A never-ending stand (no
/// damage, no harvest) is averaged over [0, horizon] instead.
inline LongRunAverages long_run_averages(const RotationProblem& problem, double T, const SimulationConfig& config)
{
    problem.validate();
    config.validate();
    detail::require_rotation(T);
    const auto& damage = detail::require_profile(problem.carbon.damage_profile, "damage");
    const auto& harvest = detail::require_profile(problem.carbon.harvest_profile, "harvest");
    const double H = config.stock_horizon;
    const double alpha = problem.carbon.alpha;
    const double damage_tail = remaining_stock_time_integral(damage, H);
    const double harvest_tail = remaining_stock_time_integral(harvest, H);

    const double v_T = std::isfinite(T) ? stem_volume(problem.growth, T) : 0.0;
    const double v_integral_T = std::isfinite(T) ? stem_volume_integral(problem.growth, T) : 0.0;

    const auto n = static_cast<std::size_t>(config.n_paths);
    std::vector<double> stock(n), volume(n), length(n), harvests(n), completed(n), count(n);
    parallel_for(n, config.workers, [&](std::size_t i) {
        PathStream stream(config.rng_seed, i);
        double s = 0.0, vol = 0.0, len = 0.0, nh = 0.0, nc = 0.0, nr = 0.0;
        detail::for_each_rotation(problem.damage_rate, T, H, stream, [&](const RotationRecord& rec) {
            nr += 1.0;
            if (rec.end == RotationEnd::censored) {
                s += alpha * stem_volume_integral(problem.growth, H);
                len += H;
                return;
            }
            const bool harvested = rec.end == RotationEnd::harvest;
            const double v = harvested ? v_T : stem_volume(problem.growth, rec.age);
            s += alpha * (harvested ? v_integral_T : stem_volume_integral(problem.growth, rec.age));
            s += alpha * v * (rec.end == RotationEnd::damage ? damage_tail : harvest_tail);
            len += rec.age;
            nc += 1.0;
            if (rec.end == RotationEnd::harvest) {
                vol += v;
                nh += 1.0;
            }
        });
        stock[i] = s;
        volume[i] = vol;
        length[i] = len;
        harvests[i] = nh;
        completed[i] = nc;
        count[i] = nr;
    });

    LongRunAverages out;
    out.carbon_stock = detail::pooled_ratio(stock, length);
    out.harvest = detail::pooled_ratio(volume, length);
    const double total_completed = compensated_sum(completed);
    out.harvest_fraction = total_completed > 0.0 ? compensated_sum(harvests) / total_completed : 0.0;
    out.rotations = static_cast<std::int64_t>(compensated_sum(count));
    out.n_paths = config.n_paths;
    return out;
}

/// Long-run average carbon stock (t_CO2/ha) in live trees, dead wood, residues and products.
inline double long_term_carbon_stock(const RotationProblem& problem, double T, const SimulationConfig& config)
{
    return long_run_averages(problem, T, config).carbon_stock.value;
}

/// Carbon stock of one path sampled every config.time_step years over [0, stock_horizon].
///
/// Event pools whose remaining fraction falls below 1e-6 are dropped; pools
/// with a permanent share never fall below that and are kept.
inline std::vector<double> stock_trajectory(const RotationProblem& problem, double T, const SimulationConfig& config,
                                            std::uint64_t path_index)
{
    const auto& damage = detail::require_profile(problem.carbon.damage_profile, "damage");
    const auto& harvest = detail::require_profile(problem.carbon.harvest_profile, "harvest");
    const auto chain = sample_rotation_chain(problem, T, config, path_index);
    const double alpha = problem.carbon.alpha;
    const double H = config.stock_horizon;
    const auto steps = static_cast<std::size_t>(std::floor(H / config.time_step + 1e-9));

    struct Pool {
        double time;
        double stock;
        const EventCarbonProfile* profile;
    };
    std::vector<Pool> active;
    std::vector<double> out;
    out.reserve(steps + 1);
    std::size_t next = 0; // first rotation not yet ended
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * config.time_step;
        while (next < chain.size() && chain[next].end != RotationEnd::censored
               && chain[next].start + chain[next].age <= t) {
            const auto& rec = chain[next];
            active.push_back({rec.start + rec.age, alpha * stem_volume(problem.growth, rec.age),
                              rec.end == RotationEnd::damage ? &damage : &harvest});
            ++next;
        }
        double total = 0.0;
        if (next < chain.size()) total += alpha * stem_volume(problem.growth, t - chain[next].start);
        std::erase_if(active, [&](const Pool& p) {
            const double f = remaining_stock_fraction(*p.profile, t - p.time);
            if (f < 1e-6) return true;
            total += p.stock * f;
            return false;
        });
        out.push_back(total);
    }
    return out;
}

struct SimulationSummary {
    double mean_npv = 0.0;
    double rel_std_npv = 0.0;
    double avg_carbon_stock = 0.0;
    double avg_harvest = 0.0;          ///< Monte Carlo
    double avg_harvest_analytic = 0.0;
    double ci_mean_npv = 0.0;          ///< 95% half-widths
    double ci_avg_carbon_stock = 0.0;
    double ci_avg_harvest = 0.0;
    double harvest_fraction = 0.0;
    std::int64_t n_paths = 0;
    std::uint64_t rng_seed = 0;
    std::vector<std::string> warnings;
};

/// NPV statistics and long-run averages for rotation length T (+inf: never harvest).
/// Long-run averages need both carbon profiles; without them they are reported as 0 with a warning.
inline SimulationSummary simulate(const RotationProblem& problem, double T, const SimulationConfig& config)
{
    const auto npv = npv_statistics(problem, T, config);
    SimulationSummary s;
    s.mean_npv = npv.mean;
    s.rel_std_npv = npv.rel_std;
    s.ci_mean_npv = npv.ci_halfwidth;
    s.n_paths = config.n_paths;
    s.rng_seed = config.rng_seed;
    s.warnings = npv.warnings;
    s.avg_harvest_analytic = average_harvest_analytic(problem, T);
    if (problem.carbon.damage_profile && problem.carbon.harvest_profile) {
        const auto lr = long_run_averages(problem, T, config);
        s.avg_carbon_stock = lr.carbon_stock.value;
        s.ci_avg_carbon_stock = lr.carbon_stock.ci_halfwidth;
        s.avg_harvest = lr.harvest.value;
        s.ci_avg_harvest = lr.harvest.ci_halfwidth;
        s.harvest_fraction = lr.harvest_fraction;
    } else {
        s.warnings.emplace_back("carbon profiles missing; long-run carbon stock and harvest not simulated");
    }
    return s;
}

} // namespace forestrot
