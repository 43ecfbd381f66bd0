#pragma once

// Cylinder functions of order 0 and 1 for positive real argument.
//
// For x <= 12 the ascending power series is summed in extended precision; the
// order-one functions are obtained by termwise differentiation of the
// order-zero series (J1 = -J0', Y1 = -Y0').  Beyond the switch point the
// Hankel asymptotic expansion is summed up to its smallest term.

#include <cmath>
#include <complex>
#include <numbers>

#include "wavesrc/types.hpp"

namespace wavesrc {

/// J0, J1, Y0, Y1 evaluated together at one argument.
struct CylinderFunctions {
    double j0 = 0.0;
    double j1 = 0.0;
    double y0 = 0.0;
    double y1 = 0.0;

    cdouble h0() const { return {j0, y0}; }
    cdouble h1() const { return {j1, y1}; }
};

inline constexpr double bessel_series_limit = 12.0;
inline constexpr double euler_gamma = std::numbers::egamma;

namespace detail {

inline CylinderFunctions cylinder_series(double x)
{
    using ld = long double;
    const ld half = static_cast<ld>(x) / 2;
    const ld q = -half * half;
    const ld log_term = std::log(half) + static_cast<ld>(euler_gamma);

    // t_k = (-x^2/4)^k / (k!)^2 ; harmonic H_k accumulates 1/k.
    ld t = 1;
    ld harmonic = 0;
    ld j0 = 1;
    ld y0 = log_term;
    ld j0_deriv = 0;  // sum 2k t_k
    ld y0_deriv = 1;  // sum t_k (2k (log_term - H_k) + 1)
    for (int k = 1; k < 200; ++k) {
        t *= q / (static_cast<ld>(k) * k);
        harmonic += static_cast<ld>(1) / k;
        const ld shifted = log_term - harmonic;
        j0 += t;
        y0 += t * shifted;
        j0_deriv += 2 * k * t;
        y0_deriv += t * (2 * k * shifted + 1);
        constexpr ld eps = 1e-19L;
        const ld at = std::fabs(t);
        if (k > 2 && at <= eps * std::fabs(j0) && 2 * k * at <= eps * std::fabs(j0_deriv)
            && at * std::fabs(shifted) <= eps * std::fabs(y0)
            && at * std::fabs(2 * k * shifted + 1) <= eps * std::fabs(y0_deriv)) {
            break;
        }
    }
    const ld two_over_pi = 2 / std::numbers::pi_v<long double>;
    const ld xl = x;
    CylinderFunctions out;
    out.j0 = static_cast<double>(j0);
    out.y0 = static_cast<double>(two_over_pi * y0);
    out.j1 = static_cast<double>(-j0_deriv / xl);
    out.y1 = static_cast<double>(-two_over_pi * y0_deriv / xl);
    return out;
}

// H_nu^(1)(x) ~ sqrt(2/(pi x)) e^{i(x - nu pi/2 - pi/4)} sum_k i^k a_k(nu) / x^k
inline cdouble hankel_asymptotic(int order, double x)
{
    const double mu = 4.0 * order * order;
    cdouble sum = 1.0;
    cdouble term = 1.0;
    double previous = 1.0;
    for (int k = 1; k < 60; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= I * ((mu - odd * odd) / (8.0 * k * x));
        const double magnitude = std::abs(term);
        if (magnitude > previous) {
            break;  // the expansion has started to diverge
        }
        sum += term;
        previous = magnitude;
        if (magnitude < 1e-17) {
            break;
        }
    }
    const double phase = x - order * pi / 2.0 - pi / 4.0;
    return std::sqrt(2.0 / (pi * x)) * std::exp(I * phase) * sum;
}

} // namespace detail

/// J0, J1, Y0 and Y1 at x > 0.
inline CylinderFunctions cylinder_functions(double x)
{
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw InvalidArgument("cylinder functions require a finite positive argument (Y0 is singular at 0)");
    }
    if (x <= bessel_series_limit) {
        return detail::cylinder_series(x);
    }
    const cdouble h0 = detail::hankel_asymptotic(0, x);
    const cdouble h1 = detail::hankel_asymptotic(1, x);
    return {h0.real(), h1.real(), h0.imag(), h1.imag()};
}

/// Hankel function of the first kind H_order^(1)(x), order 0 or 1, x > 0.
inline cdouble hankel1(int order, double x)
{
    if (order != 0 && order != 1) {
        throw InvalidArgument("hankel1 supports orders 0 and 1 only");
    }
    const CylinderFunctions c = cylinder_functions(x);
    return order == 0 ? c.h0() : c.h1();
}

} // namespace wavesrc
