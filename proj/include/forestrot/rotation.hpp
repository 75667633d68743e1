#pragma once

#include <algorithm>
#include <cmath>

#include "forestrot/carbon.hpp"
#include "forestrot/error.hpp"
#include "forestrot/growth.hpp"
#include "forestrot/quadrature.hpp"

namespace forestrot {

struct EconomicEnv {
    double p_c = 0.0;              ///< carbon price, EUR/t_CO2
    double r = 0.03;               ///< discount rate, 1/yr
    double regen_cost = 0.0;       ///< R, EUR/ha
    double salvage_fraction = 0.0; ///< delta, share of timber value recovered after damage

    void validate() const
    {
        detail::require(std::isfinite(r) && r > 0.0, "economics: discount rate must be positive");
        detail::require(std::isfinite(p_c) && p_c >= 0.0, "economics: carbon price must be non-negative");
        detail::require(std::isfinite(regen_cost) && regen_cost >= 0.0,
                        "economics: regeneration cost must be non-negative");
        detail::require(salvage_fraction >= 0.0 && salvage_fraction <= 1.0,
                        "economics: salvage fraction must lie in [0, 1]");
    }
};

/// One stand-level rotation problem under Poisson damage arrivals.
struct RotationProblem {
    GrowthCurve growth;
    PriceSchedule price;
    CarbonParams carbon;
    EconomicEnv econ;
    double damage_rate = 0.0; ///< lambda, 1/yr
    DamageType damage_type = DamageType::fire;

    void validate() const
    {
        (void)GrowthCurve::make(growth.v1, growth.v2, growth.v3, growth.v4);
        if (price.kind == PriceKind::age_dependent)
            (void)PriceSchedule::age_dependent(price.mu, price.p_f_max);
        else
            (void)PriceSchedule::constant(price.p_const);
        carbon.validate();
        econ.validate();
        detail::require(std::isfinite(damage_rate) && damage_rate >= 0.0, "damage: rate must be non-negative");
    }
};

/// \int_0^inf e^{-r s} v'(s) ds for r >= 0.
inline double discounted_increment_total(const GrowthCurve& c, double r)
{
    const double a2 = c.v2 - r;
    const double a4 = c.v4 - r;
    return c.v1 / (a2 * a2) + 6.0 * c.v3 / (a4 * a4 * a4 * a4);
}

/// D(t): NPV of one rotation destroyed by damage at age t, including salvage.
inline double damage_revenue(const RotationProblem& p, double t)
{
    const auto& e = p.econ;
    const double a_pc = p.carbon.alpha * e.p_c;
    const double v = stem_volume(p.growth, t);
    const double disc = std::exp(-e.r * t);
    return a_pc * discounted_increment_integral(p.growth, t, e.r)
         - disc * ((1.0 - p.carbon.gamma) * a_pc * v + e.regen_cost)
         + disc * e.salvage_fraction * timber_price(p.price, t) * v;
}

/// H(T): NPV of one rotation ending in final felling at age T.
inline double harvest_revenue(const RotationProblem& p, double T)
{
    if (!(T > 0.0)) throw DomainError("harvest_revenue: rotation length must be positive");
    const auto& e = p.econ;
    const double a_pc = p.carbon.alpha * e.p_c;
    return a_pc * discounted_increment_integral(p.growth, T, e.r)
         + std::exp(-e.r * T)
               * ((timber_price(p.price, T) - (1.0 - p.carbon.beta) * a_pc) * stem_volume(p.growth, T)
                  - e.regen_cost);
}

/// Components of the land expectation value at rotation length T.
struct LandValueParts {
    double damage_term = 0.0;  ///< \int_0^T D(t) lambda e^{-lambda t} dt
    double harvest_term = 0.0; ///< H(T) e^{-lambda T}
    double divisor = 0.0;      ///< r/(lambda+r) (1 - e^{-(lambda+r) T})
    double harvest = 0.0;      ///< H(T)
    double value() const { return (damage_term + harvest_term) / divisor; }
};

inline constexpr double min_rotation = 1e-6;

/// \int_a^b D(t) lambda e^{-lambda t} dt by adaptive Gauss-Kronrod quadrature.
inline double expected_damage_revenue(const RotationProblem& p, double a, double b, double abs_tol)
{
    const double lambda = p.damage_rate;
    if (lambda == 0.0) return 0.0;
    auto integrand = [&](double t) { return damage_revenue(p, t) * lambda * std::exp(-lambda * t); };
    return quad::integrate(integrand, a, b, abs_tol).value;
}

inline double damage_quadrature_tolerance(double harvest) { return 1e-10 * std::max(1.0, std::abs(harvest)); }

/// Land value parts given a precomputed \int_0^T D(t) lambda e^{-lambda t} dt.
inline LandValueParts land_value_parts(const RotationProblem& p, double T, double damage_term)
{
    if (!(T >= min_rotation) || !std::isfinite(T))
        throw NumericalError("land_value: rotation length below 1e-6 yr makes the divisor underflow");
    const double lambda = p.damage_rate;
    const double r = p.econ.r;
    LandValueParts parts;
    parts.harvest = harvest_revenue(p, T);
    parts.harvest_term = parts.harvest * std::exp(-lambda * T);
    parts.damage_term = damage_term;
    parts.divisor = r / (lambda + r) * -std::expm1(-(lambda + r) * T);
    if (!std::isfinite(parts.value())) throw NumericalError("land_value: non-finite result");
    return parts;
}

inline LandValueParts land_value_parts(const RotationProblem& p, double T)
{
    if (!(T >= min_rotation) || !std::isfinite(T))
        throw NumericalError("land_value: rotation length below 1e-6 yr makes the divisor underflow");
    const double tol = damage_quadrature_tolerance(harvest_revenue(p, T));
    return land_value_parts(p, T, expected_damage_revenue(p, 0.0, T, tol));
}

/// V(T): expected NPV of an infinite chain of rotations of length T from bare land.
inline double land_value(const RotationProblem& p, double T) { return land_value_parts(p, T).value(); }

/// lim_{T -> inf} V(T): the value of never harvesting.
inline double land_value_limit(const RotationProblem& p)
{
    const double lambda = p.damage_rate;
    const double r = p.econ.r;
    const double a_pc = p.carbon.alpha * p.econ.p_c;
    const double lr = lambda + r;
    const double growth_npv = discounted_increment_total(p.growth, lr);
    // \int_0^inf lambda e^{-lambda t} D(t) dt, by parts for the polynomial-exponential terms
    double expected = a_pc * growth_npv - (1.0 - p.carbon.gamma) * a_pc * lambda / lr * growth_npv
                    - lambda / lr * p.econ.regen_cost;
    if (lambda > 0.0 && p.econ.salvage_fraction > 0.0) {
        auto salvage = [&](double t) {
            return lambda * std::exp(-lr * t) * p.econ.salvage_fraction * timber_price(p.price, t)
                 * stem_volume(p.growth, t);
        };
        const double cutoff = 45.0 / lr; // e^{-45} relative tail
        expected += quad::integrate(salvage, 0.0, cutoff, 1e-10 * std::max(1.0, std::abs(expected))).value;
    }
    return expected * lr / r;
}

/// Left-hand side of the first-order condition dV/dT = 0 under exponential damage
/// arrivals, extended with the salvage term (which vanishes for delta = 0).
///
/// Equals (lambda+r)/r e^{(lambda+r)T} divisor(T)^2 V'(T), so it has the sign of V'.
inline double foc_residual(const RotationProblem& p, double T, const LandValueParts& parts)
{
    const auto& e = p.econ;
    const double lambda = p.damage_rate;
    const double r = e.r;
    const double lr = lambda + r;
    const double a_pc = p.carbon.alpha * e.p_c;
    const double beta = p.carbon.beta;
    const double gamma = p.carbon.gamma;
    const double E = std::exp(-lr * T);
    const double one_minus_E = -std::expm1(-lr * T);
    const double price = timber_price(p.price, T);
    const double v = stem_volume(p.growth, T);
    const double dv = stem_increment(p.growth, T);
    const double growth_npv = discounted_increment_integral(p.growth, T, r);

    double residual = (one_minus_E * timber_price_slope(p.price, T) - lr * price
                       - a_pc * (r * (beta - 1.0) + lambda * (beta - gamma) - lambda * (1.0 - gamma) * E))
                        * v;
    residual += one_minus_E * (a_pc * beta + price) * dv;
    residual -= a_pc * lr * std::exp(-lambda * T) * growth_npv;
    residual -= lr * parts.damage_term;
    residual += (r + lambda * E) * e.regen_cost;
    residual += one_minus_E * lambda * e.salvage_fraction * price * v;
    return residual;
}

inline double foc_residual(const RotationProblem& p, double T)
{
    if (!(T >= min_rotation) || !std::isfinite(T))
        throw NumericalError("foc_residual: rotation length below 1e-6 yr");
    return foc_residual(p, T, land_value_parts(p, T));
}

/// Scale making foc_residual comparable across parameters: (lambda+r)(alpha P_c + P_max) v(T).
inline double foc_scale(const RotationProblem& p, double T)
{
    const double s = (p.damage_rate + p.econ.r) * (p.carbon.alpha * p.econ.p_c + p.price.ceiling())
                   * stem_volume(p.growth, T);
    return s > 0.0 ? s : 1.0;
}

inline double normalized_foc_residual(const RotationProblem& p, double T)
{
    return foc_residual(p, T) / foc_scale(p, T);
}

/// Land value and normalized first-order residual sharing one quadrature.
struct RotationEvaluation {
    double lev = 0.0;
    double foc = 0.0; ///< normalized
};

inline RotationEvaluation evaluate_rotation(const RotationProblem& p, double T, const LandValueParts& parts)
{
    return {parts.value(), foc_residual(p, T, parts) / foc_scale(p, T)};
}

inline RotationEvaluation evaluate_rotation(const RotationProblem& p, double T)
{
    return evaluate_rotation(p, T, land_value_parts(p, T));
}

} // namespace forestrot
