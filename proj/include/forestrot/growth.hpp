#pragma once

#include <cmath>
#include <optional>
#include <string>

#include <fmt/format.h>

#include "forestrot/error.hpp"

namespace forestrot {

namespace detail {

inline void require_age(double t, const char* what)
{
    if (!std::isfinite(t)) throw DomainError(fmt::format("{}: age must be finite", what));
    if (t < 0.0) throw DomainError(fmt::format("{}: age must be non-negative (got {})", what, t));
}

/// \int_0^t s^n e^{a s} ds.
///
/// Uses the power series in (a t) when |a t| < 0.5, where the closed form loses
/// digits to cancellation (about 1e-13 relative for n = 4 at the switch), and the closed form
///   e^{a t} \sum_j (-1)^j n!/(n-j)! t^{n-j} / a^{j+1} - (-1)^n n! / a^{n+1}
/// otherwise.
inline double poly_exp_integral(int n, double a, double t)
{
    if (t == 0.0) return 0.0;
    const double x = a * t;
    if (std::abs(x) < 0.5) {
        // t^{n+1} \sum_k x^k / (k! (n + k + 1))
        double term = 1.0; // x^k / k!
        double sum = 1.0 / (n + 1);
        for (int k = 1; k < 60; ++k) {
            term *= x / k;
            const double add = term / (n + k + 1);
            sum += add;
            if (std::abs(add) < 1e-18 * std::abs(sum)) break;
        }
        double tp = t;
        for (int k = 0; k < n; ++k) tp *= t;
        return tp * sum;
    }
    // Horner in t: poly = \sum_j coeff_j t^{n-j}
    double poly = 0.0;
    double coeff = 1.0 / a; // (-1)^j n!/(n-j)! / a^{j+1}
    for (int j = 0;; ++j) {
        poly = poly * t + coeff;
        if (j == n) break;
        coeff *= -static_cast<double>(n - j) / a;
    }
    // coeff now holds (-1)^n n!/a^{n+1}, the negated constant of integration
    return std::exp(x) * poly - coeff;
}

} // namespace detail

/// Stem-volume growth curve with increment v'(t) = v1 t e^{v2 t} + v3 t^3 e^{v4 t}.
///
/// The volume v(t) is the antiderivative with v(0) = 0; the configured
/// integration constant v5 is only checked, never used (see
/// `check_integration_constant`).
struct GrowthCurve {
    double v1 = 0.0; ///< m3/ha/yr^2
    double v2 = 0.0; ///< 1/yr, negative
    double v3 = 0.0; ///< m3/ha/yr^4
    double v4 = 0.0; ///< 1/yr, negative

    static GrowthCurve make(double v1, double v2, double v3, double v4)
    {
        detail::require(std::isfinite(v1) && std::isfinite(v2) && std::isfinite(v3) && std::isfinite(v4),
                        "growth curve: parameters must be finite");
        detail::require(v2 < 0.0, "growth curve: v2 must be negative");
        detail::require(v4 < 0.0, "growth curve: v4 must be negative");
        detail::require(v1 >= 0.0, "growth curve: v1 must be non-negative");
        detail::require(v3 >= 0.0, "growth curve: v3 must be non-negative");
        return {v1, v2, v3, v4};
    }

    /// v1/v2^2 + 6 v3/v4^4: the negated integration constant, equal to v(inf).
    double integration_constant() const { return v1 / (v2 * v2) + 6.0 * v3 / (v4 * v4 * v4 * v4); }

    friend bool operator==(const GrowthCurve&, const GrowthCurve&) = default;
};

inline GrowthCurve scots_pine_growth() { return {0.0632, -0.0153, 0.00414, -0.104}; }
inline GrowthCurve norway_spruce_growth() { return {0.235, -0.0153, 0.00621, -0.109}; }

/// v'(t) in m3/ha/yr.
inline double stem_increment(const GrowthCurve& c, double t)
{
    detail::require_age(t, "stem_increment");
    return c.v1 * t * std::exp(c.v2 * t) + c.v3 * t * t * t * std::exp(c.v4 * t);
}

/// \int_0^t e^{-r s} v'(s) ds. With r = 0 this is exactly stem_volume.
inline double discounted_increment_integral(const GrowthCurve& c, double t, double r)
{
    detail::require_age(t, "discounted_increment_integral");
    if (!(r >= 0.0)) throw DomainError("discounted_increment_integral: discount rate must be non-negative");
    const double a2 = c.v2 - r;
    const double a4 = c.v4 - r;
    if (a2 >= 0.0 || a4 >= 0.0)
        throw DomainError("discounted_increment_integral: shifted exponents must stay negative");
    return c.v1 * detail::poly_exp_integral(1, a2, t) + c.v3 * detail::poly_exp_integral(3, a4, t);
}

/// v(t) in m3/ha, with v(0) = 0.
inline double stem_volume(const GrowthCurve& c, double t)
{
    detail::require_age(t, "stem_volume");
    return c.v1 * detail::poly_exp_integral(1, c.v2, t) + c.v3 * detail::poly_exp_integral(3, c.v4, t);
}

/// \int_0^t v(s) ds (m3 yr/ha), used for time-averaged standing stock.
inline double stem_volume_integral(const GrowthCurve& c, double t)
{
    detail::require_age(t, "stem_volume_integral");
    // \int_0^t v = t v(t) - \int_0^t s v'(s) ds
    return t * stem_volume(c, t) - c.v1 * detail::poly_exp_integral(2, c.v2, t)
         - c.v3 * detail::poly_exp_integral(4, c.v4, t);
}

/// Warning text when a configured v5 does not match the exact constant.
///
/// Returns nothing when |v5| is within `rel_tol` of the exact constant and
/// carries the negative sign. A positive v5 of the right magnitude still
/// warns, since the sign convention of the tabulated constant is ambiguous.
inline std::optional<std::string> check_integration_constant(const GrowthCurve& c, double configured_v5,
                                                             double rel_tol = 0.005)
{
    const double exact = -c.integration_constant();
    const double magnitude_dev = std::abs(std::abs(configured_v5) - std::abs(exact)) / std::abs(exact);
    if (magnitude_dev <= rel_tol && configured_v5 < 0.0) return std::nullopt;
    if (magnitude_dev <= rel_tol)
        return fmt::format("v5 = {} has the magnitude of the exact integration constant {:.6g} but the "
                           "opposite sign; the sign convention of v5 is ambiguous, so the exact constant "
                           "(making v(0) = 0) is used",
                           configured_v5, exact);
    return fmt::format("v5 = {} deviates by {:.3g}% from the exact integration constant {:.6g} implied by "
                       "v1..v4 (v5 is read as the constant making v(0) = 0; its sign convention is "
                       "ambiguous); the exact constant is used",
                       configured_v5, 100.0 * magnitude_dev, exact);
}

enum class PriceKind { age_dependent, constant };

/// Timber price by stand age at final felling.
struct PriceSchedule {
    PriceKind kind = PriceKind::age_dependent;
    double mu = 0.015;     ///< 1/yr, age-dependent shape rate
    double p_f_max = 60.0; ///< EUR/m3, asymptotic price
    double p_const = 0.0;  ///< EUR/m3, used by the constant kind

    static PriceSchedule age_dependent(double mu = 0.015, double p_f_max = 60.0)
    {
        detail::require(std::isfinite(mu) && mu > 0.0, "price schedule: mu must be positive");
        detail::require(std::isfinite(p_f_max) && p_f_max >= 0.0, "price schedule: p_f_max must be non-negative");
        return {PriceKind::age_dependent, mu, p_f_max, 0.0};
    }

    static PriceSchedule constant(double price)
    {
        detail::require(std::isfinite(price) && price >= 0.0, "price schedule: constant price must be non-negative");
        return {PriceKind::constant, 0.0, price, price};
    }

    /// Upper bound of the price over all ages.
    double ceiling() const { return kind == PriceKind::constant ? p_const : p_f_max; }

    friend bool operator==(const PriceSchedule&, const PriceSchedule&) = default;
};

/// P_f(t) = (mu t)^2 e^{mu t} / (1 + (mu t)^2 e^{mu t}) P_max, or the constant price.
inline double timber_price(const PriceSchedule& s, double t)
{
    detail::require_age(t, "timber_price");
    if (s.kind == PriceKind::constant) return s.p_const;
    const double mt = s.mu * t;
    const double x = mt * mt * std::exp(mt);
    return s.p_f_max / (1.0 + 1.0 / x); // x = 0 gives 0, x = inf gives p_max
}

/// dP_f/dt.
inline double timber_price_slope(const PriceSchedule& s, double t)
{
    detail::require_age(t, "timber_price_slope");
    if (s.kind == PriceKind::constant || t == 0.0) return 0.0;
    const double mt = s.mu * t;
    const double x = mt * mt * std::exp(mt);
    // d/dt x/(1+x) = (x'/x) * x/(1+x) * 1/(1+x), with x'/x = 2/t + mu
    return s.p_f_max * (2.0 / t + s.mu) / (1.0 + 1.0 / x) / (1.0 + x);
}

} // namespace forestrot
