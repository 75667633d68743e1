#pragma once

#include <cmath>
#include <queue>
#include <vector>

#include "forestrot/error.hpp"

namespace forestrot::quad {

struct Estimate {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
};

namespace detail {

// 7-point Gauss / 15-point Kronrod abscissae and weights on [-1, 1].
inline constexpr double kronrod_nodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr double kronrod_weights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

inline constexpr double gauss_weights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& other) const { return error < other.error; }
};

template <class F>
Segment gk15(const F& f, double a, double b)
{
    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(centre);
    double kronrod = kronrod_weights[7] * fc;
    double gauss = gauss_weights[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = half * kronrod_nodes[i];
        const double pair = f(centre - dx) + f(centre + dx);
        kronrod += kronrod_weights[i] * pair;
        if (i % 2 == 1) gauss += gauss_weights[i / 2] * pair;
    }
    kronrod *= half;
    gauss *= half;
    return {a, b, kronrod, std::abs(kronrod - gauss)};
}

} // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) quadrature of f over [a, b].
///
/// Bisects the segment with the largest error estimate until the summed
/// estimate falls below `abs_tol`. Throws NumericalError when `max_segments`
/// is exhausted or the integrand produces a non-finite value.
template <class F>
Estimate integrate(const F& f, double a, double b, double abs_tol, int max_segments = 4000)
{
    if (a == b) return {};
    if (!(std::isfinite(a) && std::isfinite(b)))
        throw NumericalError("quadrature: non-finite integration limits");

    std::priority_queue<detail::Segment> heap;
    auto first = detail::gk15(f, a, b);
    double total = first.value;
    double total_error = first.error;
    heap.push(first);

    while (total_error > abs_tol) {
        if (static_cast<int>(heap.size()) >= max_segments)
            throw NumericalError("quadrature: segment limit reached before tolerance");
        const auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const auto left = detail::gk15(f, worst.a, mid);
        const auto right = detail::gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // Segments too small to split further in double precision.
        if (mid == worst.a || mid == worst.b) break;
    }

    // Re-sum from the leaves to avoid drift from the running updates.
    double value = 0.0, error = 0.0;
    const int count = static_cast<int>(heap.size());
    while (!heap.empty()) {
        value += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    if (!std::isfinite(value)) throw NumericalError("quadrature: non-finite integrand");
    return {value, error, count};
}

} // namespace forestrot::quad
