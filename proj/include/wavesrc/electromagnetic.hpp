#pragma once

// Time-harmonic Maxwell system in free space (three dimensions):
//     curl E - i kappa H = 0,   curl H + i kappa E = J,
// with E = int G_M(x, y) J(y) dy,  G_M = i kappa g I + (i / kappa) grad grad^T g,
// and H = (i kappa)^{-1} curl E = int g(x, y) curl J(y) dy.

#include <cmath>
#include <memory>
#include <vector>

#include "wavesrc/core_grid.hpp"
#include "wavesrc/kernels.hpp"
#include "wavesrc/source.hpp"
#include "wavesrc/types.hpp"

namespace wavesrc {

using CurrentDescriptor = SourceDescriptor<3>;

inline void check_wavenumber(double kappa)
{
    if (!(kappa > 0.0) || !std::isfinite(kappa)) {
        throw InvalidArgument("wavenumber must be positive");
    }
}

/// kappa_n = n pi / R
inline double em_lattice_wavenumber(double n, double R) { return n * pi / R; }

/// Dyadic Green's tensor G_M(x, y; kappa).
inline CMatrix<3> maxwell_green(const Point<3>& x, const Point<3>& y, double kappa)
{
    check_wavenumber(kappa);
    const Point<3> z = x - y;
    const double r = z.norm();
    if (!(r > 0.0)) {
        throw InvalidArgument("Maxwell Green's tensor evaluated at coincident points");
    }
    const RadialDerivatives d = helmholtz_radial<3>(kappa, r);
    return (I * kappa * d.f0) * CMatrix<3>::Identity() + (I / kappa) * radial_hessian<3>(d, z);
}

struct EMForwardOptions {
    int source_grid = 32;
    double min_margin = -1.0;  ///< < 0 selects 0.2 * support radius

    double margin(double support_radius) const { return min_margin >= 0.0 ? min_margin : 0.2 * support_radius; }
};

/// E and H at one target from a prepared source quadrature.
struct EMFieldPair {
    CVector<3> e = CVector<3>::Zero();
    CVector<3> h = CVector<3>::Zero();
};

inline CVector<3> jacobian_curl(const CMatrix<3>& j)
{
    return CVector<3>(j(2, 1) - j(1, 2), j(0, 2) - j(2, 0), j(1, 0) - j(0, 1));
}

inline EMFieldPair em_fields_at(const SourceQuadrature<3>& q, const Point<3>& x, double kappa, bool electric,
                                bool magnetic)
{
    EMFieldPair out;
    for (std::size_t s = 0; s < q.size(); ++s) {
        const Point<3> z = x - q.points[s];
        const double r = z.norm();
        const RadialDerivatives d = helmholtz_radial<3>(kappa, r);
        if (electric) {
            const CVector<3>& w = q.weighted_values[s];
            const Eigen::Matrix<cdouble, 3, 1> u = (z / r).cast<cdouble>();
            const cdouble P = d.f2 - d.f1 / r;
            const cdouble Q = d.f1 / r;
            out.e += (I * kappa * d.f0 + (I / kappa) * Q) * w + ((I / kappa) * P * u.dot(w)) * u;
        }
        if (magnetic) {
            out.h += d.f0 * jacobian_curl(q.weighted_jacobians[s]);
        }
    }
    return out;
}

template <typename Targets>
void check_em_targets(const CurrentDescriptor& j, const Targets& targets, double margin)
{
    for (const auto& x : targets) {
        if ((x - j.support_center).norm() < j.support_radius + margin) {
            throw InvalidArgument("target lies inside the source support margin");
        }
    }
}

inline VectorFieldSamples<3> forward_electric(const CurrentDescriptor& j, double kappa,
                                              const std::vector<Point<3>>& targets, const EMForwardOptions& opt = {})
{
    check_wavenumber(kappa);
    check_em_targets(j, targets, opt.margin(j.support_radius));
    const SourceQuadrature<3> q = make_source_quadrature(j, opt.source_grid);
    VectorFieldSamples<3> out;
    out.points = targets;
    out.units = "electric field";
    for (const auto& x : targets) {
        out.values.push_back(em_fields_at(q, x, kappa, true, false).e);
    }
    return out;
}

/// H = int g curl J dy, using the analytic curl of J.
inline VectorFieldSamples<3> forward_magnetic(const CurrentDescriptor& j, double kappa,
                                              const std::vector<Point<3>>& targets, const EMForwardOptions& opt = {})
{
    check_wavenumber(kappa);
    if (!j.has_jacobian()) {
        throw InvalidArgument("current has no analytic curl");
    }
    check_em_targets(j, targets, opt.margin(j.support_radius));
    const SourceQuadrature<3> q = make_source_quadrature(j, opt.source_grid, true);
    VectorFieldSamples<3> out;
    out.points = targets;
    out.units = "magnetic field";
    for (const auto& x : targets) {
        out.values.push_back(em_fields_at(q, x, kappa, false, true).h);
    }
    return out;
}

/// Tangential traces E x nu and H x nu = T_M(E x nu) on Gamma_R.
struct EMBoundaryRecord {
    double kappa = 0.0;
    std::shared_ptr<const SurfaceQuadrature<3>> quadrature;
    std::vector<CVector<3>> e_cross_nu;
    std::vector<CVector<3>> h_cross_nu;
    std::vector<cdouble> e_dot_nu;  ///< normal trace, kept for diagnostics

    std::size_t size() const { return e_cross_nu.size(); }

    void validate() const
    {
        if (!quadrature || e_cross_nu.size() != quadrature->size() || h_cross_nu.size() != quadrature->size()) {
            throw InvalidArgument("boundary record does not match its quadrature");
        }
        for (std::size_t i = 0; i < size(); ++i) {
            if (!is_finite<3>(e_cross_nu[i]) || !is_finite<3>(h_cross_nu[i])) {
                throw InvalidArgument("boundary record has non-finite entries");
            }
        }
    }

    /// Largest |(a x nu) . nu| over both channels, relative to the channel size.
    double tangency_defect() const
    {
        double worst = 0.0;
        for (std::size_t i = 0; i < size(); ++i) {
            const CVector<3> n = quadrature->normals[i].cast<cdouble>();
            const double se = std::max(e_cross_nu[i].norm(), 1e-300);
            const double sh = std::max(h_cross_nu[i].norm(), 1e-300);
            worst = std::max(worst, std::abs(e_cross_nu[i].dot(n)) / se);
            worst = std::max(worst, std::abs(h_cross_nu[i].dot(n)) / sh);
        }
        return worst;
    }
};

inline EMBoundaryRecord operator+(const EMBoundaryRecord& a, const EMBoundaryRecord& b)
{
    if (a.quadrature != b.quadrature || a.kappa != b.kappa || a.size() != b.size()) {
        throw InvalidArgument("records differ in quadrature or wavenumber");
    }
    EMBoundaryRecord c = a;
    for (std::size_t i = 0; i < c.size(); ++i) {
        c.e_cross_nu[i] += b.e_cross_nu[i];
        c.h_cross_nu[i] += b.h_cross_nu[i];
        if (i < c.e_dot_nu.size() && i < b.e_dot_nu.size()) {
            c.e_dot_nu[i] += b.e_dot_nu[i];
        }
    }
    return c;
}

inline CVector<3> cross(const CVector<3>& a, const Point<3>& n)
{
    return cross(a, CVector<3>(n.cast<cdouble>()));
}

inline EMBoundaryRecord em_boundary_data(const CurrentDescriptor& j, double kappa,
                                         std::shared_ptr<const SurfaceQuadrature<3>> q,
                                         const EMForwardOptions& opt = {})
{
    check_wavenumber(kappa);
    if (!q) {
        throw InvalidArgument("missing surface quadrature");
    }
    if (j.distance_to_sphere(q->radius) < opt.margin(j.support_radius)) {
        throw InvalidArgument("source support too close to the measurement surface");
    }
    const SourceQuadrature<3> sq = make_source_quadrature(j, opt.source_grid, true);
    EMBoundaryRecord rec;
    rec.kappa = kappa;
    rec.quadrature = q;
    rec.e_cross_nu.resize(q->size());
    rec.h_cross_nu.resize(q->size());
    rec.e_dot_nu.resize(q->size());
    for (std::size_t i = 0; i < q->size(); ++i) {
        const EMFieldPair f = em_fields_at(sq, q->nodes[i], kappa, true, true);
        const Point<3>& n = q->normals[i];
        rec.e_cross_nu[i] = cross(f.e, n);
        rec.h_cross_nu[i] = cross(f.h, n);
        rec.e_dot_nu[i] = bilinear<3>(f.e, n.cast<cdouble>());
    }
    return rec;
}

/// E^inc = pol e^{-i kappa d.x}
struct EMPlaneWave {
    Point<3> direction;
    Point<3> polarization;
    double kappa;

    EMPlaneWave(const Point<3>& d, const Point<3>& pol, double kappa_) : direction(d), polarization(pol), kappa(kappa_)
    {
        check_wavenumber(kappa_);
        if (std::abs(d.norm() - 1.0) > 1e-12 || std::abs(pol.norm() - 1.0) > 1e-12) {
            throw InvalidArgument("plane wave direction and polarization must be unit vectors");
        }
        if (std::abs(pol.dot(d)) > 1e-12) {
            throw InvalidArgument("electromagnetic polarization must be transverse to the direction");
        }
    }

    cdouble phase(const Point<3>& x) const { return std::exp(-I * (kappa * direction.dot(x))); }

    CVector<3> value(const Point<3>& x) const { return phase(x) * polarization.cast<cdouble>(); }

    /// curl E^inc = -i kappa d x pol e^{-i kappa d.x}
    CVector<3> curl(const Point<3>& x) const
    {
        return (-I * kappa) * phase(x) * direction.cross(polarization).cast<cdouble>();
    }

    /// curl curl E^inc - kappa^2 E^inc in closed form.
    CVector<3> double_curl_residual(const Point<3>& x) const
    {
        // curl curl (pol e^{-i k d.x}) = k^2 (pol - (d.pol) d) e^{...}
        const Point<3> cc = kappa * kappa * (polarization - direction.dot(polarization) * direction);
        return phase(x) * (cc - kappa * kappa * polarization).cast<cdouble>();
    }
};

/// phi = curl curl psi - kappa^2 psi for a bump potential psi.  Its field is
/// E = i kappa psi, which vanishes outside supp psi.
inline CurrentDescriptor nonradiating_source(const SmoothVectorField<3>& psi, const Point<3>& center, double radius,
                                             double kappa)
{
    check_wavenumber(kappa);
    if (psi.enclosing_radius(center) > radius * (1.0 + 1e-12)) {
        throw InvalidArgument("potential extends outside the declared support ball");
    }
    auto shared = std::make_shared<const SmoothVectorField<3>>(psi);
    const double k2 = kappa * kappa;
    CurrentDescriptor s;
    s.support_center = center;
    s.support_radius = radius;
    s.sample = [shared, k2](const Point<3>& x) {
        const auto p = shared->jets(x);
        FieldSample<3> out;
        // phi_i = d_i (d_j psi_j) - Lap psi_i - k^2 psi_i
        for (int i = 0; i < 3; ++i) {
            cdouble grad_div = 0.0;
            for (int j = 0; j < 3; ++j) {
                grad_div += p[j].d2(i, j);
            }
            out.value[i] = grad_div - p[i].laplacian() - k2 * p[i].value;
            for (int l = 0; l < 3; ++l) {
                cdouble v = -k2 * p[i].d1[l];
                for (int j = 0; j < 3; ++j) {
                    v += p[j].d3[l](i, j) - p[i].d3[l](j, j);
                }
                out.jacobian(i, l) = v;
            }
        }
        return out;
    };
    s.value = [sample = s.sample](const Point<3>& x) { return sample(x).value; };
    s.derivative_order = 1;
    s.real_valued = psi.is_real();
    return s;
}

/// int (|H x nu|^2 + |E x nu|^2) dgamma
inline double em_measurement_norm(const EMBoundaryRecord& rec)
{
    rec.validate();
    std::vector<double> integrand(rec.size());
    for (std::size_t i = 0; i < rec.size(); ++i) {
        integrand[i] = rec.h_cross_nu[i].squaredNorm() + rec.e_cross_nu[i].squaredNorm();
    }
    return surface_integrate<3>(*rec.quadrature, integrand);
}

/// int |E.nu|^2 dgamma
inline double em_normal_trace_norm(const EMBoundaryRecord& rec)
{
    rec.validate();
    std::vector<double> integrand(rec.size());
    for (std::size_t i = 0; i < rec.size(); ++i) {
        integrand[i] = std::norm(rec.e_dot_nu[i]);
    }
    return surface_integrate<3>(*rec.quadrature, integrand);
}

} // namespace wavesrc
