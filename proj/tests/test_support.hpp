#pragma once

// Shared fixtures and finite-difference oracles for the test suites.

#include <array>
#include <cmath>
#include <functional>

#include "wavesrc/wavesrc.hpp"

namespace wavesrc::testing {

template <int D>
SmoothVectorField<D> bump_field(const Point<D>& center, double radius, const CVector<D>& amplitude,
                                const Point<D>& linear = Point<D>::Zero())
{
    SmoothVectorField<D> f;
    BumpTerm<D> t;
    t.center = center;
    t.radius = radius;
    t.amplitude = amplitude;
    t.polynomial.linear = linear;
    f.terms.push_back(t);
    return f;
}

/// Real zero-mean bump in B_{0.5}: the canonical 2D test source.
inline SourceDescriptor<2> canonical_bump_2d()
{
    const Point<2> c = Point<2>::Zero();
    auto f = bump_field<2>(c, 0.5, CVector<2>(1.0, -0.5), Point<2>(1.6, 0.6));
    auto s = make_source(make_zero_mean(f, c, 0.5), c, 0.5);
    s.zero_mean = true;
    return s;
}

/// Bump with int f = (1, 0).
inline SourceDescriptor<2> unit_moment_bump_2d(const Point<2>& c = Point<2>::Zero(), double rho = 0.4)
{
    return make_source(bump_field<2>(c, rho, CVector<2>(1.0 / bump_integral<2>(rho), 0.0)), c, rho);
}

/// Divergence-free bump current J = curl A in B_{0.45}.
inline SourceDescriptor<3> curl_bump_3d()
{
    const Point<3> c(0.02, -0.03, 0.01);
    return make_curl_source(bump_field<3>(c, 0.45, CVector<3>(0.3, -0.5, 1.0), Point<3>(0.5, 0.2, -0.4)), c, 0.45);
}

/// Generic (non-solenoidal) bump current in B_{0.45}.
inline SourceDescriptor<3> plain_bump_3d()
{
    const Point<3> c(0.02, -0.03, 0.01);
    return make_source(bump_field<3>(c, 0.45, CVector<3>(1.0, -0.5, 0.25), Point<3>(0.8, 0.3, -0.2)), c, 0.45);
}

template <int D>
using MatrixField = std::function<CMatrix<D>(const Point<D>&)>;

/// d_a d_b F(x) by central differences of order 2 or 4.
template <int D>
CMatrix<D> fd_mixed(const MatrixField<D>& F, const Point<D>& x, int a, int b, double h, int order)
{
    auto at = [&](double sa, double sb) {
        Point<D> p = x;
        p[a] += sa;
        p[b] += sb;
        return F(p);
    };
    if (order == 2) {
        if (a == b) return (at(h, 0) - 2.0 * at(0, 0) + at(-h, 0)) / (h * h);
        return (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h);
    }
    if (a == b) {
        return (-at(2 * h, 0) + 16.0 * at(h, 0) - 30.0 * at(0, 0) + 16.0 * at(-h, 0) - at(-2 * h, 0)) / (12.0 * h * h);
    }
    static constexpr double c[4] = {1.0, -8.0, 8.0, -1.0};
    static constexpr double s[4] = {-2.0, -1.0, 1.0, 2.0};
    CMatrix<D> sum = CMatrix<D>::Zero();
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            sum += (c[i] * c[j]) * at(s[i] * h, s[j] * h);
        }
    }
    return sum / (144.0 * h * h);
}

/// d_a F(x) by central differences of order 2 or 4.
template <int D>
CMatrix<D> fd_first(const MatrixField<D>& F, const Point<D>& x, int a, double h, int order)
{
    auto at = [&](double s) {
        Point<D> p = x;
        p[a] += s;
        return F(p);
    };
    if (order == 2) return (at(h) - at(-h)) / (2.0 * h);
    return (-at(2 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2 * h)) / (12.0 * h);
}

/// Relative residual of (mu Lap + (lambda + mu) grad div + omega^2) applied column-wise to G_N(., y).
template <int D>
double navier_fd_residual(const Point<D>& x, const Point<D>& y, const ElasticFrequency& f, const ElasticMedium& m,
                          double h, int order)
{
    const MatrixField<D> G = [&](const Point<D>& p) { return navier_green<D>(p, y, f, m).matrix; };
    std::array<std::array<CMatrix<D>, D>, D> d2;
    for (int a = 0; a < D; ++a) {
        for (int b = a; b < D; ++b) {
            d2[a][b] = fd_mixed<D>(G, x, a, b, h, order);
            d2[b][a] = d2[a][b];
        }
    }
    const CMatrix<D> g = G(x);
    CMatrix<D> res = f.omega * f.omega * g;
    CMatrix<D> scale = CMatrix<D>::Zero();
    for (int j = 0; j < D; ++j) {       // column
        for (int i = 0; i < D; ++i) {   // component
            cdouble lap = 0.0, gd = 0.0;
            for (int k = 0; k < D; ++k) {
                lap += d2[k][k](i, j);
                gd += d2[i][k](k, j);
            }
            res(i, j) += m.mu * lap + (m.lambda + m.mu) * gd;
        }
    }
    return res.norm() / (f.omega * f.omega * g.norm());
}

/// Relative residual of (curl curl - kappa^2) applied column-wise to G_M(., y).
inline double double_curl_fd_residual(const Point<3>& x, const Point<3>& y, double kappa, double h, int order)
{
    const MatrixField<3> G = [&](const Point<3>& p) { return maxwell_green(p, y, kappa); };
    std::array<std::array<CMatrix<3>, 3>, 3> d2;
    for (int a = 0; a < 3; ++a) {
        for (int b = a; b < 3; ++b) {
            d2[a][b] = fd_mixed<3>(G, x, a, b, h, order);
            d2[b][a] = d2[a][b];
        }
    }
    const CMatrix<3> g = G(x);
    CMatrix<3> res = -kappa * kappa * g;
    // curl curl v = grad div v - Lap v
    for (int j = 0; j < 3; ++j) {
        for (int i = 0; i < 3; ++i) {
            cdouble lap = 0.0, gd = 0.0;
            for (int k = 0; k < 3; ++k) {
                lap += d2[k][k](i, j);
                gd += d2[i][k](k, j);
            }
            res(i, j) += gd - lap;
        }
    }
    return res.norm() / (kappa * kappa * g.norm());
}

/// Observed order log2(e(h) / e(h/2)).
inline double observed_order(double coarse, double fine) { return std::log2(coarse / fine); }

/// Relative L2 norm of a - b over paired vectors.
template <int D>
double relative_difference(const std::vector<CVector<D>>& a, const std::vector<CVector<D>>& b)
{
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]).squaredNorm();
        den += b[i].squaredNorm();
    }
    return std::sqrt(num / (den > 0.0 ? den : 1.0));
}

} // namespace wavesrc::testing
