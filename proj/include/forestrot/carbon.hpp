#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "forestrot/error.hpp"

namespace forestrot {

enum class ReleaseKind { immediate, exponential, permanent };
enum class EventKind { storm, fire, harvest };
enum class DamageType { fire, storm };

inline std::string_view to_string(EventKind k)
{
    switch (k) {
    case EventKind::storm: return "storm";
    case EventKind::fire: return "fire";
    case EventKind::harvest: return "harvest";
    }
    return "?";
}

inline std::string_view to_string(DamageType d) { return d == DamageType::fire ? "fire" : "storm"; }
inline EventKind event_of(DamageType d) { return d == DamageType::fire ? EventKind::fire : EventKind::storm; }

/// Fraction of the event-time carbon stock following one release path.
struct CarbonPool {
    double share = 0.0;
    ReleaseKind release = ReleaseKind::immediate;
    double rate = 0.0; ///< 1/yr, exponential pools only

    static CarbonPool immediate(double share) { return {share, ReleaseKind::immediate, 0.0}; }
    static CarbonPool exponential(double share, double rate) { return {share, ReleaseKind::exponential, rate}; }
    static CarbonPool permanent(double share) { return {share, ReleaseKind::permanent, 0.0}; }

    friend bool operator==(const CarbonPool&, const CarbonPool&) = default;
};

/// How the carbon stock present at a storm, fire or harvest is released afterwards.
struct EventCarbonProfile {
    EventKind label = EventKind::harvest;
    std::vector<CarbonPool> pools;

    void validate() const
    {
        double total = 0.0;
        for (std::size_t i = 0; i < pools.size(); ++i) {
            const auto& p = pools[i];
            if (!(p.share >= 0.0 && p.share <= 1.0))
                throw DomainError(fmt::format("{} profile: pool {} share must lie in [0, 1]", to_string(label), i));
            if (p.release == ReleaseKind::exponential && !(p.rate > 0.0 && std::isfinite(p.rate)))
                throw DomainError(fmt::format("{} profile: pool {} needs a positive decay rate", to_string(label), i));
            total += p.share;
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw DomainError(fmt::format("{} profile: pool shares sum to {} instead of 1", to_string(label), total));
    }

    friend bool operator==(const EventCarbonProfile&, const EventCarbonProfile&) = default;
};

/// Carbon remaining s years after the event, as a fraction of the event-time stock.
inline double remaining_stock_fraction(const EventCarbonProfile& profile, double s)
{
    if (!(s >= 0.0)) throw DomainError("remaining_stock_fraction: elapsed time must be non-negative");
    double total = 0.0;
    for (const auto& p : profile.pools) {
        switch (p.release) {
        case ReleaseKind::immediate: break;
        case ReleaseKind::exponential: total += p.share * std::exp(-p.rate * s); break;
        case ReleaseKind::permanent: total += p.share; break;
        }
    }
    return total;
}

/// Share of the event-time carbon treated as still stored in present-value terms
/// (the gamma or beta of the revenue functions): one minus the discounted release.
inline double npv_retained_fraction(const EventCarbonProfile& profile, double r)
{
    if (!(r >= 0.0)) throw DomainError("npv_retained_fraction: discount rate must be non-negative");
    double released = 0.0;
    for (const auto& p : profile.pools) {
        switch (p.release) {
        case ReleaseKind::immediate: released += p.share; break;
        // NPV of the release density rate * e^{-rate s}
        case ReleaseKind::exponential: released += p.share * p.rate / (p.rate + r); break;
        case ReleaseKind::permanent: break;
        }
    }
    return 1.0 - released;
}

/// \int_0^h remaining_stock_fraction(s) ds, in years. `h` may be infinite when no pool is permanent.
inline double remaining_stock_time_integral(const EventCarbonProfile& profile, double h)
{
    if (!(h >= 0.0)) throw DomainError("remaining_stock_time_integral: horizon must be non-negative");
    double total = 0.0;
    for (const auto& p : profile.pools) {
        switch (p.release) {
        case ReleaseKind::immediate: break;
        case ReleaseKind::exponential: total += p.share * (-std::expm1(-p.rate * h)) / p.rate; break;
        case ReleaseKind::permanent: total += p.share * h; break;
        }
    }
    return total;
}

/// t_CO2/ha held in `volume` m3/ha of stem volume.
inline double carbon_stock(double alpha, double volume)
{
    if (!(volume >= 0.0)) throw DomainError("carbon_stock: volume must be non-negative");
    return alpha * volume;
}

enum class RetentionSource { configured_constant, computed_from_profile };

/// Carbon content and retained fractions entering the revenue functions.
///
/// `gamma` is the pure carbon retention after damage of the problem's damage
/// type; salvage is priced separately (EconomicEnv::salvage_fraction).
struct CarbonParams {
    double alpha = 1.0; ///< t_CO2 per m3 stem volume
    double gamma = 0.0;
    double beta = 0.0;
    RetentionSource gamma_source = RetentionSource::configured_constant;
    RetentionSource beta_source = RetentionSource::configured_constant;
    std::optional<EventCarbonProfile> damage_profile;
    std::optional<EventCarbonProfile> harvest_profile;

    void validate() const
    {
        detail::require(std::isfinite(alpha) && alpha > 0.0, "carbon: alpha must be positive");
        detail::require(gamma >= 0.0 && gamma <= 1.0, "carbon: gamma must lie in [0, 1]");
        detail::require(beta >= 0.0 && beta <= 1.0, "carbon: beta must lie in [0, 1]");
        if (damage_profile) damage_profile->validate();
        if (harvest_profile) harvest_profile->validate();
    }
};

// Default profiles ------------------------------------------------------------
//
// Compartment shares of total tree carbon and single-exponential decay rates
// are calibration values: with them npv_retained_fraction at r = 0.03 lands
// within 0.01 of the tabulated gamma_fire, gamma_storm and beta of both
// species. The structural shares (what burns, what the sawmill releases) are
// fixed facts of the event types.

struct TreeCompartments {
    double stem = 0.0;     ///< stemwood and bark
    double branches = 0.0;
    double foliage = 0.0;
    double roots = 0.0;    ///< coarse roots and stump
};

struct DecayRates {
    double coarse_woody = 0.023;  ///< stem, stump and roots left on site
    double branches = 0.038;
    double foliage = 1.0;
    double long_products = 0.01;  ///< construction timber
    double medium_products = 0.05;
};

inline TreeCompartments scots_pine_compartments() { return {0.58, 0.12, 0.04, 0.26}; }
inline TreeCompartments norway_spruce_compartments() { return {0.52, 0.14, 0.08, 0.26}; }

inline constexpr double fire_burnt_foliage = 1.0;
inline constexpr double fire_burnt_branches = 0.75;
inline constexpr double fire_burnt_stem = 0.25;
inline constexpr double sawmill_release = 0.56;
inline constexpr double long_product_share = 0.50;   ///< of the wood leaving the sawmill
inline constexpr double medium_product_share = 0.15; ///< of the wood leaving the sawmill

/// Whole tree left on site to decay.
inline EventCarbonProfile storm_profile(const TreeCompartments& c, const DecayRates& k = {})
{
    return {EventKind::storm,
            {CarbonPool::exponential(c.stem + c.roots, k.coarse_woody),
             CarbonPool::exponential(c.branches, k.branches), CarbonPool::exponential(c.foliage, k.foliage)}};
}

inline EventCarbonProfile fire_profile(const TreeCompartments& c, const DecayRates& k = {})
{
    const double burnt = fire_burnt_foliage * c.foliage + fire_burnt_branches * c.branches + fire_burnt_stem * c.stem;
    return {EventKind::fire,
            {CarbonPool::immediate(burnt),
             CarbonPool::exponential((1.0 - fire_burnt_stem) * c.stem + c.roots, k.coarse_woody),
             CarbonPool::exponential((1.0 - fire_burnt_branches) * c.branches, k.branches),
             CarbonPool::exponential((1.0 - fire_burnt_foliage) * c.foliage, k.foliage)}};
}

/// Stemwood to the sawmill and on to products; residues decay on site.
inline EventCarbonProfile harvest_profile(const TreeCompartments& c, const DecayRates& k = {})
{
    const double milled = (1.0 - sawmill_release) * c.stem;
    const double released = sawmill_release * c.stem + (1.0 - long_product_share - medium_product_share) * milled;
    return {EventKind::harvest,
            {CarbonPool::immediate(released), CarbonPool::exponential(long_product_share * milled, k.long_products),
             CarbonPool::exponential(medium_product_share * milled, k.medium_products),
             CarbonPool::exponential(c.roots, k.coarse_woody), CarbonPool::exponential(c.branches, k.branches),
             CarbonPool::exponential(c.foliage, k.foliage)}};
}

inline EventCarbonProfile event_profile(EventKind kind, const TreeCompartments& c, const DecayRates& k = {})
{
    switch (kind) {
    case EventKind::storm: return storm_profile(c, k);
    case EventKind::fire: return fire_profile(c, k);
    case EventKind::harvest: return harvest_profile(c, k);
    }
    throw DomainError("unknown event kind");
}

} // namespace forestrot
