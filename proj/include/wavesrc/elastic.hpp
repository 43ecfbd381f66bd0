#pragma once

// Time-harmonic Navier equation in a homogeneous isotropic medium:
//     mu Lap u + (lambda + mu) grad div u + omega^2 u = -f,
// with the radiating solution u = int G_N(x, y) f(y) dy and
//     G_N = (1/mu) g(kappa_s) I + omega^{-2} grad grad^T (g(kappa_s) - g(kappa_p)).
//
// Neumann data on Gamma_R is the traction Du = mu d_nu u + (lambda + mu)(div u) nu,
// evaluated from the analytic kernel gradient; for radiating fields this is the
// transparent-boundary (DtN) image of the Dirichlet data.

#include <cmath>
#include <memory>
#include <vector>

#include "wavesrc/core_grid.hpp"
#include "wavesrc/kernels.hpp"
#include "wavesrc/source.hpp"
#include "wavesrc/types.hpp"

namespace wavesrc {

struct ElasticMedium {
    double lambda = 1.0;
    double mu = 1.0;

    void validate() const
    {
        if (!(mu > 0.0) || !(lambda + mu > 0.0)) {
            throw InvalidArgument("Lame constants must satisfy mu > 0 and lambda + mu > 0");
        }
    }
};

struct WaveSpeeds {
    double c_p = 0.0;  ///< (lambda + 2 mu)^{-1/2}
    double c_s = 0.0;  ///< mu^{-1/2}
};

inline WaveSpeeds elastic_speeds(const ElasticMedium& m)
{
    m.validate();
    return {1.0 / std::sqrt(m.lambda + 2.0 * m.mu), 1.0 / std::sqrt(m.mu)};
}

/// Angular frequency together with the derived wavenumbers.
struct ElasticFrequency {
    double omega = 0.0;
    double c_p = 0.0;
    double c_s = 0.0;

    ElasticFrequency() = default;
    ElasticFrequency(double omega_, const ElasticMedium& m) : omega(omega_)
    {
        if (omega_ < 0.0) {
            throw InvalidArgument("frequency must be nonnegative");
        }
        const WaveSpeeds s = elastic_speeds(m);
        c_p = s.c_p;
        c_s = s.c_s;
    }

    double kappa_p() const { return c_p * omega; }
    double kappa_s() const { return c_s * omega; }
    CorrectionParameters correction() const { return {omega, c_p, c_s}; }
};

/// omega_{p,n} = n pi / (c_p R)
inline double compressional_lattice_frequency(double n, double R, const ElasticMedium& m)
{
    return n * pi / (elastic_speeds(m).c_p * R);
}

/// omega_{s,n} = n pi / (c_s R)
inline double shear_lattice_frequency(double n, double R, const ElasticMedium& m)
{
    return n * pi / (elastic_speeds(m).c_s * R);
}

// ---------------------------------------------------------------------------
// Green's tensor
// ---------------------------------------------------------------------------

/// Radial ingredients of G_N at one distance.
struct NavierRadial {
    RadialDerivatives shear;       ///< g(kappa_s)
    RadialDerivatives correction;  ///< omega^{-2}(g(kappa_s) - g(kappa_p))
};

template <int D>
NavierRadial navier_radial(double r, const ElasticFrequency& f)
{
    NavierRadial nr;
    const CorrectionParameters p = f.correction();
    if (f.kappa_s() * r < correction_series_switch) {
        nr.correction = correction_series_radial<D>(p, r);
        if constexpr (D == 3) {
            nr.shear = helmholtz_radial<3>(f.kappa_s(), r);
        } else {
            nr.shear = helmholtz_radial<2>(f.kappa_s(), r);
        }
    } else {
        nr.shear = helmholtz_radial<D>(f.kappa_s(), r);
        RadialDerivatives gp = helmholtz_radial<D>(f.kappa_p(), r);
        nr.correction = nr.shear;
        nr.correction -= gp;
        nr.correction *= 1.0 / (f.omega * f.omega);
    }
    return nr;
}

template <int D>
struct NavierGreen {
    CMatrix<D> matrix;
    CMatrixGradient<D> gradient;  ///< gradient[k](i, j) = d/dx_k G_ij
};

template <int D>
NavierGreen<D> navier_green(const Point<D>& x, const Point<D>& y, const ElasticFrequency& f, const ElasticMedium& m)
{
    const Point<D> z = x - y;
    const double r = z.norm();
    if (!(r > 0.0)) {
        throw InvalidArgument("Navier Green's tensor evaluated at coincident points");
    }
    const NavierRadial nr = navier_radial<D>(r, f);
    NavierGreen<D> g;
    g.matrix = (nr.shear.f0 / m.mu) * CMatrix<D>::Identity() + radial_hessian<D>(nr.correction, z);
    g.gradient = radial_third<D>(nr.correction, z);
    const CVector<D> gs = radial_gradient<D>(nr.shear, z);
    for (int k = 0; k < D; ++k) {
        g.gradient[k] += (gs[k] / m.mu) * CMatrix<D>::Identity();
    }
    return g;
}

// ---------------------------------------------------------------------------
// Forward problem
// ---------------------------------------------------------------------------

struct ElasticForwardOptions {
    int source_grid = 0;       ///< midpoint points per axis; 0 selects 64 (2D) / 32 (3D)
    double min_margin = -1.0;  ///< required target distance from the support; < 0 selects 0.2 * radius

    template <int D>
    int grid() const
    {
        return source_grid > 0 ? source_grid : (D == 2 ? 64 : 32);
    }

    double margin(double support_radius) const { return min_margin >= 0.0 ? min_margin : 0.2 * support_radius; }
};

/// Displacement and displacement gradient at one target.
template <int D>
struct DisplacementJet {
    CVector<D> u = CVector<D>::Zero();
    CMatrix<D> grad = CMatrix<D>::Zero();  ///< grad(i, k) = d_k u_i
};

template <int D>
DisplacementJet<D> displacement_at(const SourceQuadrature<D>& q, const Point<D>& x, const ElasticFrequency& f,
                                   const ElasticMedium& m, bool with_gradient)
{
    DisplacementJet<D> out;
    for (std::size_t s = 0; s < q.size(); ++s) {
        const Point<D> z = x - q.points[s];
        const double r = z.norm();
        const Point<D> u = z / r;
        const CVector<D>& w = q.weighted_values[s];
        const NavierRadial nr = navier_radial<D>(r, f);
        const cdouble uw = u.template cast<cdouble>().dot(w);  // no conjugation: real u
        // Hessian of the correction: P u u^T + Q I
        const cdouble P = nr.correction.f2 - nr.correction.f1 / r;
        const cdouble Q = nr.correction.f1 / r;
        out.u += (nr.shear.f0 / m.mu + Q) * w + (P * uw) * u.template cast<cdouble>();
        if (with_gradient) {
            const auto [alpha, beta] = radial_third_coefficients(nr.correction, r);
            const Eigen::Matrix<cdouble, D, 1> uc = u.template cast<cdouble>();
            // d_k (H_ij w_j) = alpha u_i u_k (u.w) + beta (delta_ik (u.w) + u_i w_k + w_i u_k)
            out.grad += (alpha * uw) * (uc * uc.transpose()) + (beta * uw) * CMatrix<D>::Identity()
                + beta * (uc * w.transpose() + w * uc.transpose());
            out.grad += (nr.shear.f1 / m.mu) * (w * uc.transpose());
        }
    }
    return out;
}

template <int D>
void check_targets(const SourceDescriptor<D>& s, const std::vector<Point<D>>& targets, double margin)
{
    for (const auto& x : targets) {
        if ((x - s.support_center).norm() < s.support_radius + margin) {
            throw InvalidArgument("target lies inside the source support margin");
        }
    }
}

/// u(x) = int G_N(x, y) f(y) dy at each target.
template <int D>
VectorFieldSamples<D> forward_displacement(const SourceDescriptor<D>& source, const ElasticFrequency& f,
                                           const ElasticMedium& m, const std::vector<Point<D>>& targets,
                                           const ElasticForwardOptions& opt = {})
{
    m.validate();
    check_targets(source, targets, opt.margin(source.support_radius));
    const SourceQuadrature<D> q = make_source_quadrature(source, opt.template grid<D>());
    VectorFieldSamples<D> out;
    out.points = targets;
    out.units = "displacement";
    out.values.reserve(targets.size());
    for (const auto& x : targets) {
        out.values.push_back(displacement_at<D>(q, x, f, m, false).u);
    }
    return out;
}

/// Du = mu (grad u) nu + (lambda + mu)(div u) nu
template <int D>
CVector<D> traction(const CMatrix<D>& u_gradient, cdouble div_u, const Point<D>& nu, const ElasticMedium& m)
{
    if (std::abs(nu.norm() - 1.0) > 1e-12) {
        throw InvalidArgument("traction requires a unit normal");
    }
    const CVector<D> n = nu.template cast<cdouble>();
    return m.mu * (u_gradient * n) + ((m.lambda + m.mu) * div_u) * n;
}

/// Dirichlet and Neumann samples (u, Du) on Gamma_R at one frequency.
template <int D>
struct ElasticBoundaryRecord {
    ElasticFrequency frequency;
    std::shared_ptr<const SurfaceQuadrature<D>> quadrature;
    std::vector<CVector<D>> u;
    std::vector<CVector<D>> du;

    std::size_t size() const { return u.size(); }

    void validate() const
    {
        if (!quadrature || u.size() != quadrature->size() || du.size() != quadrature->size()) {
            throw InvalidArgument("boundary record does not match its quadrature");
        }
        for (std::size_t i = 0; i < u.size(); ++i) {
            if (!is_finite<D>(u[i]) || !is_finite<D>(du[i])) {
                throw InvalidArgument("boundary record has non-finite entries");
            }
        }
    }
};

/// Sum of two records on the same quadrature and frequency.
template <int D>
ElasticBoundaryRecord<D> operator+(const ElasticBoundaryRecord<D>& a, const ElasticBoundaryRecord<D>& b)
{
    if (a.quadrature != b.quadrature || a.frequency.omega != b.frequency.omega || a.size() != b.size()) {
        throw InvalidArgument("records differ in quadrature or frequency");
    }
    ElasticBoundaryRecord<D> c = a;
    for (std::size_t i = 0; i < c.size(); ++i) {
        c.u[i] += b.u[i];
        c.du[i] += b.du[i];
    }
    return c;
}

template <int D>
ElasticBoundaryRecord<D> elastic_boundary_data(const SourceDescriptor<D>& source, const ElasticFrequency& f,
                                               const ElasticMedium& m,
                                               std::shared_ptr<const SurfaceQuadrature<D>> q,
                                               const ElasticForwardOptions& opt = {})
{
    m.validate();
    if (!q) {
        throw InvalidArgument("missing surface quadrature");
    }
    if (source.distance_to_sphere(q->radius) < opt.margin(source.support_radius)) {
        throw InvalidArgument("source support too close to the measurement surface");
    }
    const SourceQuadrature<D> sq = make_source_quadrature(source, opt.template grid<D>());
    ElasticBoundaryRecord<D> rec;
    rec.frequency = f;
    rec.quadrature = q;
    rec.u.resize(q->size());
    rec.du.resize(q->size());
    for (std::size_t i = 0; i < q->size(); ++i) {
        const DisplacementJet<D> j = displacement_at<D>(sq, q->nodes[i], f, m, true);
        rec.u[i] = j.u;
        rec.du[i] = traction<D>(j.grad, j.grad.trace(), q->normals[i], m);
    }
    return rec;
}

// ---------------------------------------------------------------------------
// Plane waves
// ---------------------------------------------------------------------------

enum class ElasticWave { compressional, shear };

/// u = pol e^{-i kappa d.x} with kappa = kappa_p (pol = d) or kappa_s (pol . d = 0).
template <int D>
struct ElasticPlaneWave {
    ElasticWave kind;
    Point<D> direction;
    Point<D> polarization;
    double kappa;

    ElasticPlaneWave(ElasticWave kind_, const Point<D>& d, const Point<D>& pol, const ElasticFrequency& f)
        : kind(kind_), direction(d), polarization(pol)
    {
        if (std::abs(d.norm() - 1.0) > 1e-12 || std::abs(pol.norm() - 1.0) > 1e-12) {
            throw InvalidArgument("plane wave direction and polarization must be unit vectors");
        }
        if (kind == ElasticWave::compressional && (pol - d).norm() > 1e-12) {
            throw InvalidArgument("compressional polarization must equal the direction");
        }
        if (kind == ElasticWave::shear && std::abs(pol.dot(d)) > 1e-12) {
            throw InvalidArgument("shear polarization must be orthogonal to the direction");
        }
        kappa = kind == ElasticWave::compressional ? f.kappa_p() : f.kappa_s();
    }

    cdouble phase(const Point<D>& x) const { return std::exp(-I * (kappa * direction.dot(x))); }

    CVector<D> value(const Point<D>& x) const { return phase(x) * polarization.template cast<cdouble>(); }

    /// -i kappa (mu (d.nu) pol + (lambda + mu)(pol.d) nu) e^{-i kappa d.x}
    CVector<D> traction(const Point<D>& x, const Point<D>& nu, const ElasticMedium& m) const
    {
        const Point<D> t = m.mu * direction.dot(nu) * polarization + (m.lambda + m.mu) * polarization.dot(direction) * nu;
        return (-I * kappa) * phase(x) * t.template cast<cdouble>();
    }

    /// mu Lap u + (lambda + mu) grad div u + omega^2 u, assembled in closed form.
    CVector<D> navier_residual(const Point<D>& x, const ElasticFrequency& f, const ElasticMedium& m) const
    {
        const double k2 = kappa * kappa;
        const Point<D> r = -m.mu * k2 * polarization - (m.lambda + m.mu) * k2 * polarization.dot(direction) * direction
            + f.omega * f.omega * polarization;
        return phase(x) * r.template cast<cdouble>();
    }
};

// ---------------------------------------------------------------------------
// Measurement norms
// ---------------------------------------------------------------------------

/// int (|Du|^2 + w^2 |u|^2) dgamma
template <int D>
double elastic_measurement_norm(const ElasticBoundaryRecord<D>& rec, double weight)
{
    rec.validate();
    std::vector<double> integrand(rec.size());
    for (std::size_t i = 0; i < rec.size(); ++i) {
        integrand[i] = rec.du[i].squaredNorm() + weight * weight * rec.u[i].squaredNorm();
    }
    return surface_integrate<D>(*rec.quadrature, integrand);
}

/// Continuous-frequency norm: weight omega.
template <int D>
double elastic_measurement_norm(const ElasticBoundaryRecord<D>& rec)
{
    return elastic_measurement_norm<D>(rec, rec.frequency.omega);
}

// ---------------------------------------------------------------------------
// Helmholtz decomposition outside the support
// ---------------------------------------------------------------------------

template <int D>
struct HelmholtzParts {
    std::vector<CVector<D>> compressional;
    std::vector<CVector<D>> shear;
    std::vector<bool> one_sided;  ///< stencil touched the grid boundary layer
};

/// u_p = -kappa_p^{-2} grad div u, u_s = kappa_s^{-2} curl curl u on a local grid.
template <int D>
HelmholtzParts<D> helmholtz_split(const BoxGrid<D>& grid, const std::vector<CVector<D>>& u,
                                  const ElasticFrequency& f, const SourceDescriptor<D>* source = nullptr)
{
    if (source) {
        const double reach = grid.half_width() * std::sqrt(static_cast<double>(D));
        if ((grid.center() - source->support_center).norm() < source->support_radius + reach) {
            throw InvalidArgument("decomposition grid overlaps the source support");
        }
    }
    const GridSamples<cdouble> div = divergence<D>(grid, u);
    const GridSamples<CVector<D>> grad_div = gradient<D>(grid, div.values);
    HelmholtzParts<D> out;
    out.compressional.resize(u.size());
    out.shear.resize(u.size());
    out.one_sided.resize(u.size());
    const double kp2 = f.kappa_p() * f.kappa_p();
    const double ks2 = f.kappa_s() * f.kappa_s();
    std::vector<CVector<D>> curl_curl;
    std::vector<bool> cc_flag;
    if constexpr (D == 2) {
        const GridSamples<cdouble> c = scalar_curl(grid, u);
        const GridSamples<CVector<2>> cc = vector_curl(grid, c.values);
        curl_curl = cc.values;
        cc_flag.resize(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            cc_flag[i] = c.one_sided[i] || cc.one_sided[i];
        }
    } else {
        const GridSamples<CVector<3>> c = curl(grid, u);
        const GridSamples<CVector<3>> cc = curl(grid, c.values);
        curl_curl = cc.values;
        cc_flag.resize(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            cc_flag[i] = c.one_sided[i] || cc.one_sided[i];
        }
    }
    for (std::size_t i = 0; i < u.size(); ++i) {
        out.compressional[i] = -grad_div.values[i] / kp2;
        out.shear[i] = curl_curl[i] / ks2;
        out.one_sided[i] = div.one_sided[i] || grad_div.one_sided[i] || cc_flag[i];
    }
    return out;
}

} // namespace wavesrc
