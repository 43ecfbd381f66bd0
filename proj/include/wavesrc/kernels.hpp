#pragma once

// Helmholtz fundamental solutions g_d(x, y; kappa) with analytic x-derivatives,
// and the low-frequency series for the elastic correction term
//     omega^{-2} grad grad^T (g_d(kappa_s) - g_d(kappa_p)).
//
// Every kernel here is radial in r = |x - y|.  Derivatives are carried as the
// radial derivatives F, F', F'', F''' and expanded into Cartesian tensors by
// radial_hessian() / radial_third().

#include <cmath>
#include <iostream>

#include "wavesrc/bessel.hpp"
#include "wavesrc/types.hpp"

namespace wavesrc {

/// F(r) and its first three derivatives in r.
struct RadialDerivatives {
    cdouble f0 = 0.0;
    cdouble f1 = 0.0;
    cdouble f2 = 0.0;
    cdouble f3 = 0.0;

    RadialDerivatives& operator-=(const RadialDerivatives& o)
    {
        f0 -= o.f0;
        f1 -= o.f1;
        f2 -= o.f2;
        f3 -= o.f3;
        return *this;
    }

    RadialDerivatives& operator*=(double s)
    {
        f0 *= s;
        f1 *= s;
        f2 *= s;
        f3 *= s;
        return *this;
    }
};

/// Value, x-gradient and x-Hessian of a scalar kernel.
template <int D>
struct KernelEval {
    cdouble value = 0.0;
    CVector<D> gradient = CVector<D>::Zero();
    CMatrix<D> hessian = CMatrix<D>::Zero();
};

/// Radial derivatives of g_D(r; kappa).  D = 3 admits kappa = 0.
template <int D>
RadialDerivatives helmholtz_radial(double kappa, double r)
{
    check_dimension<D>();
    if (!(r > 0.0)) {
        throw InvalidArgument("fundamental solution evaluated at coincident points");
    }
    if (kappa < 0.0) {
        throw InvalidArgument("wavenumber must be nonnegative");
    }
    RadialDerivatives d;
    if constexpr (D == 2) {
        if (!(kappa > 0.0)) {
            throw InvalidArgument("two-dimensional fundamental solution requires kappa > 0");
        }
        const double z = kappa * r;
        const CylinderFunctions c = cylinder_functions(z);
        const cdouble h0 = c.h0();
        const cdouble h1 = c.h1();
        const cdouble s = 0.25 * I;
        // H0' = -H1, H1' = H0 - H1/z
        d.f0 = s * h0;
        d.f1 = -s * kappa * h1;
        d.f2 = -s * kappa * kappa * (h0 - h1 / z);
        d.f3 = -s * kappa * kappa * kappa * (-h1 - h0 / z + 2.0 * h1 / (z * z));
    } else {
        const cdouble g = std::exp(I * kappa * r) / (4.0 * pi * r);
        const cdouble a = I * kappa - 1.0 / r;
        const double r2 = r * r;
        d.f0 = g;
        d.f1 = g * a;
        d.f2 = g * (a * a + 1.0 / r2);
        d.f3 = g * (a * a * a + 3.0 * a / r2 - 2.0 / (r2 * r));
    }
    return d;
}

/// Cartesian gradient of a radial function at offset z = x - y.
template <int D>
CVector<D> radial_gradient(const RadialDerivatives& d, const Point<D>& z)
{
    const double r = z.norm();
    return (d.f1 / r) * z.template cast<cdouble>();
}

/// Cartesian Hessian: F'' rr^T + (F'/r)(I - rr^T).
template <int D>
CMatrix<D> radial_hessian(const RadialDerivatives& d, const Point<D>& z)
{
    const double r = z.norm();
    const Point<D> u = z / r;
    const cdouble p = d.f2 - d.f1 / r;
    const cdouble q = d.f1 / r;
    CMatrix<D> h = q * CMatrix<D>::Identity();
    h += p * (u * u.transpose()).template cast<cdouble>();
    return h;
}

/// Coefficients of the third-derivative tensor
///     d_k d_i d_j F = alpha u_i u_j u_k + beta (delta_ik u_j + delta_jk u_i + delta_ij u_k).
struct ThirdDerivativeCoefficients {
    cdouble alpha;
    cdouble beta;
};

inline ThirdDerivativeCoefficients radial_third_coefficients(const RadialDerivatives& d, double r)
{
    const cdouble p = d.f2 - d.f1 / r;
    const cdouble dp = d.f3 - d.f2 / r + d.f1 / (r * r);
    return {dp - 2.0 * p / r, p / r};
}

/// Full third-derivative tensor: entry [k](i, j) = d_k d_i d_j F.
template <int D>
CMatrixGradient<D> radial_third(const RadialDerivatives& d, const Point<D>& z)
{
    const double r = z.norm();
    const Point<D> u = z / r;
    const auto [alpha, beta] = radial_third_coefficients(d, r);
    CMatrixGradient<D> t;
    for (int k = 0; k < D; ++k) {
        for (int i = 0; i < D; ++i) {
            for (int j = 0; j < D; ++j) {
                cdouble v = alpha * u[i] * u[j] * u[k];
                if (i == k) v += beta * u[j];
                if (j == k) v += beta * u[i];
                if (i == j) v += beta * u[k];
                t[k](i, j) = v;
            }
        }
    }
    return t;
}

/// g_2 = (i/4) H0(kappa |x-y|), g_3 = e^{i kappa |x-y|} / (4 pi |x-y|).
template <int D>
cdouble fundamental_solution(const Point<D>& x, const Point<D>& y, double kappa)
{
    return helmholtz_radial<D>(kappa, (x - y).norm()).f0;
}

template <int D>
KernelEval<D> fundamental_derivatives(const Point<D>& x, const Point<D>& y, double kappa)
{
    const Point<D> z = x - y;
    const RadialDerivatives d = helmholtz_radial<D>(kappa, z.norm());
    return {d.f0, radial_gradient<D>(d, z), radial_hessian<D>(d, z)};
}

/// Speeds and frequency entering the elastic correction term.
struct CorrectionParameters {
    double omega;
    double c_p;
    double c_s;
};

inline constexpr double correction_series_switch = 1.0;
inline constexpr double correction_series_warn = 6.0;

/// Radial derivatives of omega^{-2} (g_D(r; c_s omega) - g_D(r; c_p omega)) summed
/// from the power series in omega, up to a function of omega alone (which drops
/// out of every derivative).  Finite as omega -> 0 in 3D; in 2D the constant
/// Hessian part grows like log(omega), so omega = 0 is rejected.
template <int D>
RadialDerivatives correction_series_radial(const CorrectionParameters& p, double r)
{
    check_dimension<D>();
    if (!(r > 0.0)) {
        throw InvalidArgument("correction series evaluated at coincident points");
    }
    if (p.omega < 0.0) {
        throw InvalidArgument("frequency must be nonnegative");
    }
    const double ks_r = p.c_s * p.omega * r;
    if (ks_r > correction_series_warn) {
        std::cerr << "wavesrc: correction series used outside its practical range (kappa_s r = " << ks_r << ")\n";
    }

    RadialDerivatives out;
    // A term c r^p (a + b log r) and its first three r-derivatives.
    const double log_r = std::log(r);
    auto accumulate = [&](int power, cdouble a, cdouble b) -> double {
        double pw = power;
        cdouble ca = a;
        cdouble cb = b;
        // value
        const cdouble v0 = std::pow(r, pw) * (ca + cb * log_r);
        std::array<cdouble, 3> der{};
        for (int n = 0; n < 3; ++n) {
            const cdouble na = pw * ca + cb;
            const cdouble nb = pw * cb;
            ca = na;
            cb = nb;
            pw -= 1.0;
            der[n] = std::pow(r, pw) * (ca + cb * log_r);
        }
        out.f0 += v0;
        out.f1 += der[0];
        out.f2 += der[1];
        out.f3 += der[2];
        return std::max({std::abs(der[0]), std::abs(der[1]), std::abs(der[2])});
    };
    auto converged = [&](double contribution) {
        const double scale = std::max({std::abs(out.f1), std::abs(out.f2), std::abs(out.f3)});
        return contribution <= 1e-17 * scale;
    };

    if constexpr (D == 2) {
        if (!(p.omega > 0.0)) {
            throw InvalidArgument("two-dimensional correction term diverges logarithmically at omega = 0");
        }
        // g_2 = sum_k a_k kappa^{2k} r^{2k} [i/4 - (log(kappa/2) + gamma - H_k)/(2 pi) - log(r)/(2 pi)]
        // with a_k = (-1/4)^k / (k!)^2; the k = 0 term is constant in r.
        const double log_s = std::log(p.c_s * p.omega / 2.0);
        const double log_p = std::log(p.c_p * p.omega / 2.0);
        double a_k = 1.0;
        double harmonic = 0.0;
        double cs_pow = 1.0;
        double cp_pow = 1.0;
        double om_pow = 1.0;  // omega^{2k-2}
        for (int k = 1; k < 200; ++k) {
            a_k *= -0.25 / (static_cast<double>(k) * k);
            harmonic += 1.0 / k;
            cs_pow *= p.c_s * p.c_s;
            cp_pow *= p.c_p * p.c_p;
            if (k > 1) {
                om_pow *= p.omega * p.omega;
            }
            const double inv2pi = 1.0 / (2.0 * pi);
            const cdouble a = a_k * om_pow
                * (cs_pow * (0.25 * I - inv2pi * (log_s + euler_gamma - harmonic))
                   - cp_pow * (0.25 * I - inv2pi * (log_p + euler_gamma - harmonic)));
            const cdouble b = -inv2pi * a_k * om_pow * (cs_pow - cp_pow);
            const double c = accumulate(2 * k, a, b);
            if (k > 2 && converged(c)) {
                break;
            }
        }
    } else {
        // g_3 = (1/4 pi) sum_m (i kappa)^m r^{m-1} / m!; m = 0, 1 terms are r-constant
        // after taking the difference.
        cdouble i_pow = -1.0;  // i^2
        double fact = 2.0;
        double cs_pow = p.c_s * p.c_s;
        double cp_pow = p.c_p * p.c_p;
        double om_pow = 1.0;  // omega^{m-2}
        for (int m = 2; m < 200; ++m) {
            if (m > 2) {
                i_pow *= I;
                fact *= m;
                cs_pow *= p.c_s;
                cp_pow *= p.c_p;
                om_pow *= p.omega;
            }
            const cdouble a = i_pow * (cs_pow - cp_pow) * om_pow / (fact * 4.0 * pi);
            const double c = accumulate(m - 1, a, 0.0);
            if (m > 4 && (converged(c) || om_pow == 0.0)) {
                break;
            }
        }
    }
    return out;
}

/// Radial derivatives of omega^{-2}(g(kappa_s) - g(kappa_p)) by direct differencing.
template <int D>
RadialDerivatives correction_direct_radial(const CorrectionParameters& p, double r)
{
    RadialDerivatives d = helmholtz_radial<D>(p.c_s * p.omega, r);
    d -= helmholtz_radial<D>(p.c_p * p.omega, r);
    d *= 1.0 / (p.omega * p.omega);
    return d;
}

/// Switches between the series (kappa_s r < 1) and the direct difference.
template <int D>
RadialDerivatives correction_radial(const CorrectionParameters& p, double r)
{
    if (p.c_s * p.omega * r < correction_series_switch) {
        return correction_series_radial<D>(p, r);
    }
    return correction_direct_radial<D>(p, r);
}

/// omega^{-2} grad_x grad_x^T (g_D(kappa_s) - g_D(kappa_p)) from the power series.
template <int D>
CMatrix<D> tensor_correction_series(const Point<D>& x, const Point<D>& y, const CorrectionParameters& p)
{
    const Point<D> z = x - y;
    if (p.c_s == p.c_p) {
        return CMatrix<D>::Zero();
    }
    return radial_hessian<D>(correction_series_radial<D>(p, z.norm()), z);
}

} // namespace wavesrc
