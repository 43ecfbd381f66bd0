#pragma once

// Analytic, exactly compactly supported vector sources.
//
// Building block: the C-infinity bump
//     b(x) = exp(1 - 1 / (1 - |x - c|^2 / rho^2))   for |x - c| < rho, 0 otherwise,
// multiplied by a quadratic polynomial and a complex amplitude vector.  Value
// and derivatives up to third order are carried in closed form by Jet.

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "wavesrc/core_grid.hpp"
#include "wavesrc/types.hpp"

namespace wavesrc {

/// Scalar function value with derivatives through third order.
template <int D>
struct Jet {
    cdouble value = 0.0;
    CVector<D> d1 = CVector<D>::Zero();
    CMatrix<D> d2 = CMatrix<D>::Zero();
    CMatrixGradient<D> d3 = zero_third();  ///< d3[k](i, j) = d_k d_i d_j

    static CMatrixGradient<D> zero_third()
    {
        CMatrixGradient<D> t;
        for (auto& m : t) {
            m.setZero();
        }
        return t;
    }

    Jet& operator+=(const Jet& o)
    {
        value += o.value;
        d1 += o.d1;
        d2 += o.d2;
        for (int k = 0; k < D; ++k) {
            d3[k] += o.d3[k];
        }
        return *this;
    }

    Jet& operator*=(cdouble s)
    {
        value *= s;
        d1 *= s;
        d2 *= s;
        for (auto& m : d3) {
            m *= s;
        }
        return *this;
    }

    /// Laplacian of the value.
    cdouble laplacian() const { return d2.trace(); }
};

/// Leibniz rule through third order.
template <int D>
Jet<D> operator*(const Jet<D>& f, const Jet<D>& g)
{
    Jet<D> h;
    h.value = f.value * g.value;
    h.d1 = f.d1 * g.value + f.value * g.d1;
    h.d2 = f.d2 * g.value + f.d1 * g.d1.transpose() + g.d1 * f.d1.transpose() + f.value * g.d2;
    for (int k = 0; k < D; ++k) {
        h.d3[k] = f.d3[k] * g.value + g.d3[k] * f.value + f.d2 * g.d1[k] + g.d2 * f.d1[k]
            + f.d2.col(k) * g.d1.transpose() + f.d1 * g.d2.row(k) + g.d2.col(k) * f.d1.transpose()
            + g.d1 * f.d2.row(k);
    }
    return h;
}

/// p(x) = a + b.x + x^T C x with symmetric C.
template <int D>
struct Polynomial {
    double constant = 1.0;
    Point<D> linear = Point<D>::Zero();
    RMatrix<D> quadratic = RMatrix<D>::Zero();

    static Polynomial one() { return {}; }

    Jet<D> jet(const Point<D>& x) const
    {
        const RMatrix<D> c = 0.5 * (quadratic + quadratic.transpose());
        Jet<D> j;
        j.value = constant + linear.dot(x) + x.dot(c * x);
        j.d1 = (linear + 2.0 * c * x).template cast<cdouble>();
        j.d2 = (2.0 * c).template cast<cdouble>();
        return j;
    }
};

/// Jet of the smooth bump of radius rho centred at c.
template <int D>
Jet<D> bump_jet(const Point<D>& x, const Point<D>& c, double rho)
{
    Jet<D> j;
    const Point<D> z = x - c;
    const double s = z.squaredNorm() / (rho * rho);
    if (s >= 1.0) {
        return j;
    }
    const double t = 1.0 - s;
    if (t < 1e-3) {
        // exp(1 - 1/t) and all its derivatives are below 1e-300 here
        return j;
    }
    // phi(s) = exp(h(s)), h = 1 - 1/(1 - s)
    const double h1 = -1.0 / (t * t);
    const double h2 = -2.0 / (t * t * t);
    const double h3 = -6.0 / (t * t * t * t);
    const double phi = std::exp(1.0 - 1.0 / t);
    const double p1 = phi * h1;
    const double p2 = phi * (h1 * h1 + h2);
    const double p3 = phi * (h1 * h1 * h1 + 3.0 * h1 * h2 + h3);
    // s_i = 2 z_i / rho^2, s_ij = 2 delta_ij / rho^2, s_ijk = 0
    const double inv = 1.0 / (rho * rho);
    const Point<D> si = 2.0 * inv * z;
    const double sii = 2.0 * inv;
    j.value = phi;
    j.d1 = (p1 * si).template cast<cdouble>();
    j.d2 = (p2 * si * si.transpose() + p1 * sii * RMatrix<D>::Identity()).template cast<cdouble>();
    for (int k = 0; k < D; ++k) {
        RMatrix<D> m = p3 * si[k] * si * si.transpose();
        // phi''(s_ij s_k + s_ik s_j + s_jk s_i)
        m += p2 * sii * si[k] * RMatrix<D>::Identity();
        m.col(k) += p2 * sii * si;
        m.row(k) += p2 * sii * si.transpose();
        j.d3[k] = m.template cast<cdouble>();
    }
    return j;
}

/// int b(x) dx for the bump of radius rho (radial Gauss-Legendre quadrature).
template <int D>
double bump_integral(double rho)
{
    check_dimension<D>();
    std::vector<double> t;
    std::vector<double> w;
    gauss_legendre(200, t, w);
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double r = 0.5 * (t[i] + 1.0);  // r / rho in (0, 1)
        const double q = 1.0 - r * r;
        const double b = q > 1e-3 ? std::exp(1.0 - 1.0 / q) : 0.0;
        s += 0.5 * w[i] * b * (D == 2 ? r : r * r);
    }
    const double shell = D == 2 ? 2.0 * pi : 4.0 * pi;
    return shell * s * std::pow(rho, D);
}

/// amplitude * p(x) * b(x; center, radius)
template <int D>
struct BumpTerm {
    CVector<D> amplitude = CVector<D>::Zero();
    Polynomial<D> polynomial;
    Point<D> center = Point<D>::Zero();
    double radius = 0.1;
};

/// Sum of bump terms; every component has derivatives through third order.
template <int D>
struct SmoothVectorField {
    std::vector<BumpTerm<D>> terms;

    /// jets[i] describes component i.
    std::array<Jet<D>, D> jets(const Point<D>& x) const
    {
        std::array<Jet<D>, D> out;
        for (const auto& term : terms) {
            if ((x - term.center).squaredNorm() >= term.radius * term.radius) {
                continue;
            }
            const Jet<D> base = term.polynomial.jet(x) * bump_jet<D>(x, term.center, term.radius);
            for (int i = 0; i < D; ++i) {
                if (term.amplitude[i] != 0.0) {
                    Jet<D> scaled = base;
                    scaled *= term.amplitude[i];
                    out[i] += scaled;
                }
            }
        }
        return out;
    }

    CVector<D> value(const Point<D>& x) const
    {
        CVector<D> v = CVector<D>::Zero();
        for (const auto& term : terms) {
            const double s = (x - term.center).squaredNorm() / (term.radius * term.radius);
            if (s >= 1.0 || 1.0 - s < 1e-3) continue;
            const double b = std::exp(1.0 - 1.0 / (1.0 - s));
            v += (b * term.polynomial.jet(x).value) * term.amplitude;
        }
        return v;
    }

    bool is_real() const
    {
        for (const auto& t : terms) {
            if (t.amplitude.imag().cwiseAbs().maxCoeff() != 0.0) {
                return false;
            }
        }
        return true;
    }

    /// Smallest ball about `center` containing every term.
    double enclosing_radius(const Point<D>& center) const
    {
        double r = 0.0;
        for (const auto& t : terms) {
            r = std::max(r, (t.center - center).norm() + t.radius);
        }
        return r;
    }
};

/// Value and Jacobian (J(i, j) = d_j f_i) of a vector source at one point.
template <int D>
struct FieldSample {
    CVector<D> value = CVector<D>::Zero();
    CMatrix<D> jacobian = CMatrix<D>::Zero();
};

/// A compactly supported vector source: the force f (elastic) or current J (EM).
///
/// All values and derivatives vanish outside the ball `support_center`,
/// `support_radius`.
template <int D>
struct SourceDescriptor {
    Point<D> support_center = Point<D>::Zero();
    double support_radius = 0.0;
    std::function<CVector<D>(const Point<D>&)> value;
    std::function<FieldSample<D>(const Point<D>&)> sample;  ///< empty when derivatives are unavailable
    int derivative_order = 0;
    bool real_valued = true;
    bool zero_mean = false;

    bool has_jacobian() const { return static_cast<bool>(sample) && derivative_order >= 1; }

    /// curl J in three dimensions.
    CVector<3> curl(const Point<3>& x) const
        requires(D == 3)
    {
        if (!has_jacobian()) {
            throw InvalidArgument("source has no analytic derivatives; curl unavailable");
        }
        const CMatrix<3> j = sample(x).jacobian;
        return CVector<3>(j(2, 1) - j(1, 2), j(0, 2) - j(2, 0), j(1, 0) - j(0, 1));
    }

    double distance_to_sphere(double R) const { return R - (support_center.norm() + support_radius); }
};

/// Source from a sum of bump terms, supported in the ball (center, radius).
template <int D>
SourceDescriptor<D> make_source(const SmoothVectorField<D>& field, const Point<D>& center, double radius)
{
    if (!(radius > 0.0)) {
        throw InvalidArgument("support radius must be positive");
    }
    if (field.enclosing_radius(center) > radius * (1.0 + 1e-12)) {
        throw InvalidArgument("bump terms extend outside the declared support ball");
    }
    auto shared = std::make_shared<const SmoothVectorField<D>>(field);
    SourceDescriptor<D> s;
    s.support_center = center;
    s.support_radius = radius;
    s.value = [shared](const Point<D>& x) { return shared->value(x); };
    s.sample = [shared](const Point<D>& x) {
        const auto jets = shared->jets(x);
        FieldSample<D> out;
        for (int i = 0; i < D; ++i) {
            out.value[i] = jets[i].value;
            out.jacobian.row(i) = jets[i].d1.transpose();
        }
        return out;
    };
    s.derivative_order = 3;
    s.real_valued = field.is_real();
    return s;
}

/// J = curl A for a bump potential A: divergence free, zero mean, purely transverse spectrum.
inline SourceDescriptor<3> make_curl_source(const SmoothVectorField<3>& potential, const Point<3>& center,
                                            double radius)
{
    if (potential.enclosing_radius(center) > radius * (1.0 + 1e-12)) {
        throw InvalidArgument("potential extends outside the declared support ball");
    }
    auto shared = std::make_shared<const SmoothVectorField<3>>(potential);
    SourceDescriptor<3> s;
    s.support_center = center;
    s.support_radius = radius;
    s.sample = [shared](const Point<3>& x) {
        const auto a = shared->jets(x);
        FieldSample<3> out;
        // (curl A)_i = eps_ijk d_j A_k
        out.value = CVector<3>(a[2].d1[1] - a[1].d1[2], a[0].d1[2] - a[2].d1[0], a[1].d1[0] - a[0].d1[1]);
        for (int l = 0; l < 3; ++l) {
            out.jacobian(0, l) = a[2].d2(1, l) - a[1].d2(2, l);
            out.jacobian(1, l) = a[0].d2(2, l) - a[2].d2(0, l);
            out.jacobian(2, l) = a[1].d2(0, l) - a[0].d2(1, l);
        }
        return out;
    };
    s.value = [sample = s.sample](const Point<3>& x) { return sample(x).value; };
    s.derivative_order = 2;
    s.real_valued = potential.is_real();
    s.zero_mean = true;
    return s;
}

// ---------------------------------------------------------------------------
// Sampling and the Fourier oracle
// ---------------------------------------------------------------------------

/// Cell-centred grid over the bounding box of the support ball.
template <int D>
BoxGrid<D> support_grid(const SourceDescriptor<D>& s, int m)
{
    return BoxGrid<D>(s.support_center, s.support_radius, m);
}

template <int D>
std::vector<CVector<D>> sample_values(const SourceDescriptor<D>& s, const BoxGrid<D>& grid)
{
    std::vector<CVector<D>> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out[i] = s.value(grid.node(i));
        if (!is_finite<D>(out[i])) {
            throw InvalidArgument("source produced non-finite values");
        }
    }
    return out;
}

/// Nonzero source samples with midpoint weights, ready for volume quadrature.
template <int D>
struct SourceQuadrature {
    std::vector<Point<D>> points;
    std::vector<CVector<D>> weighted_values;  ///< cell volume * f
    std::vector<CMatrix<D>> weighted_jacobians;  ///< filled when requested

    std::size_t size() const { return points.size(); }
};

template <int D>
SourceQuadrature<D> make_source_quadrature(const SourceDescriptor<D>& s, int m, bool with_jacobian = false)
{
    if (with_jacobian && !s.has_jacobian()) {
        throw InvalidArgument("source derivatives requested but unavailable");
    }
    const BoxGrid<D> grid = support_grid(s, m);
    const double vol = grid.cell_volume();
    SourceQuadrature<D> q;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Point<D> x = grid.node(i);
        if ((x - s.support_center).norm() >= s.support_radius) {
            continue;
        }
        if (with_jacobian) {
            const FieldSample<D> f = s.sample(x);
            if (f.value.isZero(0.0) && f.jacobian.isZero(0.0)) continue;
            q.points.push_back(x);
            q.weighted_values.push_back(vol * f.value);
            q.weighted_jacobians.push_back(vol * f.jacobian);
        } else {
            const CVector<D> v = s.value(x);
            if (v.isZero(0.0)) continue;
            q.points.push_back(x);
            q.weighted_values.push_back(vol * v);
        }
    }
    return q;
}

/// Options for the adaptive Fourier oracle.
struct OracleOptions {
    int initial_points = 32;
    int max_points = 1024;
    double tolerance = 1e-10;
};

namespace detail {

template <int D>
int oracle_cap(const OracleOptions& o)
{
    return D == 2 ? o.max_points : std::min(o.max_points, 192);
}

} // namespace detail

/// Box Fourier coefficients of an analytic source for |n| <= N, by midpoint
/// quadrature on the support box, doubling the resolution until two successive
/// levels agree to `tolerance` relative to the largest coefficient.
template <int D>
FourierLattice<D> fourier_oracle(const SourceDescriptor<D>& s, double R, int N, const OracleOptions& opt = {})
{
    if (s.support_center.cwiseAbs().maxCoeff() + s.support_radius > R) {
        throw InvalidArgument("source support leaves U_R");
    }
    std::optional<FourierLattice<D>> previous;
    for (int m = opt.initial_points; m <= detail::oracle_cap<D>(opt); m *= 2) {
        const BoxGrid<D> grid = support_grid(s, m);
        FourierLattice<D> current = fourier_lattice<D>(grid, sample_values(s, grid), R, N, true);
        if (previous) {
            double scale = 0.0;
            double diff = 0.0;
            for (const auto& [n, c] : current.coefficients) {
                scale = std::max(scale, c.norm());
                diff = std::max(diff, (c - previous->get(n)).norm());
            }
            if (diff <= opt.tolerance * scale || scale == 0.0) {
                return current;
            }
        }
        previous = std::move(current);
    }
    return *previous;
}

/// Single coefficient f_n from the adaptive oracle.
template <int D>
CVector<D> fourier_coefficient(const SourceDescriptor<D>& s, double R, const MultiIndex<D>& n,
                               const OracleOptions& opt = {})
{
    std::optional<CVector<D>> previous;
    const double norm = 1.0 / std::pow(2.0 * R, D);
    for (int m = opt.initial_points; m <= detail::oracle_cap<D>(opt); m *= 2) {
        const BoxGrid<D> grid = support_grid(s, m);
        const CVector<D> c = detail::grid_transform<D>(grid, sample_values(s, grid), R, {n}).at(n) * norm;
        if (previous && (c - *previous).norm() <= opt.tolerance * std::max(c.norm(), 1e-300)) {
            return c;
        }
        if (previous && c.norm() == 0.0) {
            return c;
        }
        previous = c;
    }
    return *previous;
}

/// Unnormalised transform int f(x) e^{-i xi.x} dx at arbitrary xi, adaptively refined.
template <int D>
CVector<D> fourier_transform(const SourceDescriptor<D>& s, const Point<D>& xi, const OracleOptions& opt = {})
{
    std::optional<CVector<D>> previous;
    for (int m = opt.initial_points; m <= detail::oracle_cap<D>(opt); m *= 2) {
        const BoxGrid<D> grid = support_grid(s, m);
        const CVector<D> c = grid_fourier_transform<D>(grid, sample_values(s, grid), xi);
        if (previous && (c - *previous).norm() <= opt.tolerance * std::max(c.norm(), 1e-300)) {
            return c;
        }
        if (previous && c.norm() == 0.0) {
            return c;
        }
        previous = c;
    }
    return *previous;
}

/// ||f||^2_{L2} and int f dx, adaptively refined.
template <int D>
struct SourceMoments {
    double l2_squared = 0.0;
    double l1 = 0.0;
    CVector<D> integral = CVector<D>::Zero();
};

template <int D>
SourceMoments<D> source_moments(const SourceDescriptor<D>& s, const OracleOptions& opt = {})
{
    std::optional<SourceMoments<D>> previous;
    for (int m = opt.initial_points; m <= detail::oracle_cap<D>(opt); m *= 2) {
        const BoxGrid<D> grid = support_grid(s, m);
        SourceMoments<D> cur;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const CVector<D> v = s.value(grid.node(i));
            cur.l2_squared += v.squaredNorm();
            cur.l1 += v.norm();
            cur.integral += v;
        }
        cur.l2_squared *= grid.cell_volume();
        cur.l1 *= grid.cell_volume();
        cur.integral *= grid.cell_volume();
        if (previous && std::abs(cur.l2_squared - previous->l2_squared) <= opt.tolerance * cur.l2_squared
            && (cur.integral - previous->integral).norm() <= opt.tolerance * std::max(cur.l1, 1e-300)) {
            return cur;
        }
        previous = cur;
    }
    return *previous;
}

/// Subtract (int f) times a normalised bump filling the support ball, so the
/// result is smooth, keeps the same support and has zero mean.
template <int D>
SmoothVectorField<D> make_zero_mean(const SmoothVectorField<D>& field, const Point<D>& center, double radius)
{
    SourceDescriptor<D> s = make_source(field, center, radius);
    const CVector<D> moment = source_moments(s).integral;
    SmoothVectorField<D> out = field;
    BumpTerm<D> ref;
    ref.center = center;
    ref.radius = radius;
    ref.amplitude = -moment / bump_integral<D>(radius);
    out.terms.push_back(ref);
    return out;
}

} // namespace wavesrc
