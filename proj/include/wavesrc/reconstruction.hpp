#pragma once

// Fourier coefficients of the source from boundary data.
//
// Elastic probe (Betti's formula against an incident plane wave v):
//     pol . f^(xi) = int_Gamma (u . Dv - v . Du) dgamma,   xi = kappa d,
// Electromagnetic probe (vector Green's identity against E^inc):
//     i kappa pol . J^(xi) = -int_Gamma (i kappa (H x nu) . E^inc + (E x nu) . curl E^inc) dgamma,
// with f^(xi) = int f e^{-i xi.x} dx.  Lattice coefficients divide by (2R)^d.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "wavesrc/core_grid.hpp"
#include "wavesrc/elastic.hpp"
#include "wavesrc/electromagnetic.hpp"
#include "wavesrc/source.hpp"
#include "wavesrc/types.hpp"

namespace wavesrc {

enum class ProbeKind { elastic_p, elastic_s, em };

/// Incident plane wave used as a probe; `frequency` is omega (elastic) or kappa (em).
template <int D>
struct ProbeSpec {
    ProbeKind kind = ProbeKind::elastic_p;
    Point<D> direction = Point<D>::UnitX();
    Point<D> polarization = Point<D>::UnitX();
    double frequency = 0.0;

    void validate() const
    {
        if (std::abs(direction.norm() - 1.0) > 1e-12 || std::abs(polarization.norm() - 1.0) > 1e-12) {
            throw InvalidArgument("probe direction and polarization must be unit vectors");
        }
        if (kind == ProbeKind::elastic_p && (polarization - direction).norm() > 1e-12) {
            throw InvalidArgument("compressional probe polarization must equal its direction");
        }
        if (kind != ProbeKind::elastic_p && std::abs(polarization.dot(direction)) > 1e-12) {
            throw InvalidArgument("transverse probe polarization must be orthogonal to its direction");
        }
        if (kind == ProbeKind::em && D != 3) {
            throw InvalidArgument("electromagnetic probes are three-dimensional");
        }
    }
};

/// Orthonormal completion of a unit direction: {q} in 2D, {q1, q2} in 3D.
///
/// In 3D, with d = (sin t cos p, sin t sin p, cos t), q1 = (cos t cos p, cos t sin p, -sin t)
/// and q2 = d x q1; at the poles the frame is (e1, e2) (up to the sign of q2).
template <int D>
std::vector<Point<D>> transverse_frame(const Point<D>& d)
{
    if constexpr (D == 2) {
        return {Point<2>(-d[1], d[0])};
    } else {
        const double st = std::hypot(d[0], d[1]);
        Point<3> q1;
        if (st < 1e-14) {
            q1 = Point<3>::UnitX();
        } else {
            const double ct = d[2];
            q1 = Point<3>(ct * d[0] / st, ct * d[1] / st, -st);
        }
        Point<3> q2 = d.cross(q1);
        return {q1, q2};
    }
}

// ---------------------------------------------------------------------------
// Elastic probes
// ---------------------------------------------------------------------------

inline void check_frequency_match(double a, double b)
{
    if (std::abs(a - b) > 1e-10 * std::max({1.0, std::abs(a), std::abs(b)})) {
        throw InvalidArgument("probe frequency does not match the record");
    }
}

/// pol . f^(xi) from one elastic record.
template <int D>
cdouble elastic_probe(const ElasticBoundaryRecord<D>& rec, const ProbeSpec<D>& spec, const ElasticMedium& medium)
{
    spec.validate();
    if (spec.kind == ProbeKind::em) {
        throw InvalidArgument("elastic probe needs an elastic wave kind");
    }
    check_frequency_match(rec.frequency.omega, spec.frequency);
    const ElasticFrequency f(spec.frequency, medium);
    const ElasticPlaneWave<D> wave(spec.kind == ProbeKind::elastic_p ? ElasticWave::compressional : ElasticWave::shear,
                                   spec.direction, spec.polarization, f);
    const SurfaceQuadrature<D>& q = *rec.quadrature;
    std::vector<cdouble> integrand(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        integrand[i] = bilinear<D>(rec.u[i], wave.traction(q.nodes[i], q.normals[i], medium))
            - bilinear<D>(wave.value(q.nodes[i]), rec.du[i]);
    }
    return surface_integrate<D>(q, integrand);
}

/// Records at the lattice frequencies, keyed by |n|^2.
template <int D>
struct ElasticLatticeRecords {
    double R = 1.0;
    ElasticMedium medium;
    std::map<int, ElasticBoundaryRecord<D>> compressional;  ///< omega_{p,|n|}
    std::map<int, ElasticBoundaryRecord<D>> shear;          ///< omega_{s,|n|}

    int max_shell() const
    {
        int s = 0;
        for (const auto& [k, r] : compressional) {
            if (shear.count(k)) s = std::max(s, k);
        }
        return s;
    }
};

template <int D>
ElasticLatticeRecords<D> elastic_lattice_records(const SourceDescriptor<D>& source, const ElasticMedium& medium,
                                                 double R, int N, std::shared_ptr<const SurfaceQuadrature<D>> q,
                                                 const ElasticForwardOptions& opt = {})
{
    ElasticLatticeRecords<D> out;
    out.R = R;
    out.medium = medium;
    for (int s : lattice_shells<D>(N)) {
        const double n = std::sqrt(static_cast<double>(s));
        out.compressional.emplace(
            s, elastic_boundary_data<D>(source, ElasticFrequency(compressional_lattice_frequency(n, R, medium), medium),
                                        medium, q, opt));
        out.shear.emplace(s, elastic_boundary_data<D>(
                                 source, ElasticFrequency(shear_lattice_frequency(n, R, medium), medium), medium, q, opt));
    }
    return out;
}

/// f_n for 0 < |n| <= N from p- and s-probes along n/|n|; f_0 is left unset.
template <int D>
FourierLattice<D> elastic_lattice_recover(const ElasticLatticeRecords<D>& records, int N)
{
    if (N < 1) {
        throw InvalidArgument("lattice truncation must be at least 1");
    }
    const double R = records.R;
    const double scale = 1.0 / std::pow(2.0 * R, D);
    FourierLattice<D> lattice;
    lattice.half_width = R;
    lattice.truncation = N;
    for (const auto& n : enumerate_lattice<D>(N, false)) {
        const int s = squared_norm<D>(n);
        const auto ip = records.compressional.find(s);
        const auto is = records.shear.find(s);
        if (ip == records.compressional.end() || is == records.shear.end()) {
            throw InvalidArgument("missing lattice frequency record for |n|^2 = " + std::to_string(s));
        }
        const Point<D> d = to_point<D>(n).normalized();
        CVector<D> c = CVector<D>::Zero();
        ProbeSpec<D> p{ProbeKind::elastic_p, d, d, ip->second.frequency.omega};
        c += elastic_probe<D>(ip->second, p, records.medium) * d.template cast<cdouble>();
        for (const Point<D>& pol : transverse_frame<D>(d)) {
            ProbeSpec<D> sp{ProbeKind::elastic_s, d, pol, is->second.frequency.omega};
            c += elastic_probe<D>(is->second, sp, records.medium) * pol.template cast<cdouble>();
        }
        lattice.set(n, c * scale);
    }
    return lattice;
}

/// Frequencies of the two low-frequency records used for the static mean.
inline constexpr std::array<double, 2> static_frequencies{1e-2, 5e-3};

template <int D>
struct StaticMeanResult {
    CVector<D> integral = CVector<D>::Zero();  ///< extrapolated int f dx
    double disagreement = 0.0;                 ///< |extrapolated - finer| / scale
};

/// int f dx = -lim_{omega -> 0} int_Gamma Du dgamma, with Richardson extrapolation in omega^2.
template <int D>
StaticMeanResult<D> static_mean_recover(const ElasticBoundaryRecord<D>& coarse, const ElasticBoundaryRecord<D>& fine,
                                        double tolerance = 1e-3)
{
    coarse.validate();
    fine.validate();
    const double w1 = coarse.frequency.omega;
    const double w2 = fine.frequency.omega;
    if (!(w2 > 0.0) || !(w1 > w2)) {
        throw InvalidArgument("static mean needs two decreasing positive frequencies");
    }
    const CVector<D> t1 = -surface_integrate<D>(*coarse.quadrature, coarse.du);
    const CVector<D> t2 = -surface_integrate<D>(*fine.quadrature, fine.du);
    const double a = w1 * w1;
    const double b = w2 * w2;
    StaticMeanResult<D> out;
    out.integral = (a * t2 - b * t1) / (a - b);
    std::vector<double> mag(fine.size());
    for (std::size_t i = 0; i < fine.size(); ++i) {
        mag[i] = fine.du[i].norm();
    }
    const double scale = std::max(out.integral.norm(), surface_integrate<D>(*fine.quadrature, mag));
    out.disagreement = scale > 0.0 ? (out.integral - t2).norm() / scale : 0.0;
    if (out.disagreement > tolerance) {
        throw NumericError("static mean extrapolation disagrees beyond tolerance");
    }
    return out;
}

template <int D>
StaticMeanResult<D> static_mean_recover(const SourceDescriptor<D>& source, const ElasticMedium& medium,
                                        std::shared_ptr<const SurfaceQuadrature<D>> q,
                                        const ElasticForwardOptions& opt = {})
{
    const auto coarse = elastic_boundary_data<D>(source, ElasticFrequency(static_frequencies[0], medium), medium, q, opt);
    const auto fine = elastic_boundary_data<D>(source, ElasticFrequency(static_frequencies[1], medium), medium, q, opt);
    return static_mean_recover<D>(coarse, fine);
}

// ---------------------------------------------------------------------------
// Electromagnetic probes
// ---------------------------------------------------------------------------

/// pol . J^(xi) from one electromagnetic record.
inline cdouble em_probe(const EMBoundaryRecord& rec, const ProbeSpec<3>& spec)
{
    if (spec.kind != ProbeKind::em) {
        throw InvalidArgument("electromagnetic probe needs the em wave kind");
    }
    if (std::abs(spec.polarization.dot(spec.direction)) > 1e-12) {
        throw InvalidArgument("longitudinal components are not determined by electromagnetic boundary data");
    }
    spec.validate();
    check_frequency_match(rec.kappa, spec.frequency);
    const double k = spec.frequency;
    const EMPlaneWave wave(spec.direction, spec.polarization, k);
    const SurfaceQuadrature<3>& q = *rec.quadrature;
    std::vector<cdouble> integrand(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        integrand[i] = -(I * k * bilinear<3>(rec.h_cross_nu[i], wave.value(q.nodes[i]))
                         + bilinear<3>(rec.e_cross_nu[i], wave.curl(q.nodes[i])));
    }
    return surface_integrate<3>(q, integrand) / (I * k);
}

struct EMLatticeRecords {
    double R = 1.0;
    std::map<int, EMBoundaryRecord> records;  ///< kappa_{|n|}, keyed by |n|^2

    int max_shell() const { return records.empty() ? 0 : records.rbegin()->first; }
};

inline EMLatticeRecords em_lattice_records(const CurrentDescriptor& j, double R, int N,
                                           std::shared_ptr<const SurfaceQuadrature<3>> q,
                                           const EMForwardOptions& opt = {})
{
    EMLatticeRecords out;
    out.R = R;
    for (int s : lattice_shells<3>(N)) {
        out.records.emplace(s, em_boundary_data(j, em_lattice_wavenumber(std::sqrt(static_cast<double>(s)), R), q, opt));
    }
    return out;
}

/// Transverse part (I - n n^T) J_n for 0 < |n| <= N; the longitudinal part is set to zero.
inline FourierLattice<3> em_lattice_recover(const EMLatticeRecords& records, int N)
{
    if (N < 1) {
        throw InvalidArgument("lattice truncation must be at least 1");
    }
    const double scale = 1.0 / std::pow(2.0 * records.R, 3);
    FourierLattice<3> lattice;
    lattice.half_width = records.R;
    lattice.truncation = N;
    for (const auto& n : enumerate_lattice<3>(N, false)) {
        const int s = squared_norm<3>(n);
        const auto it = records.records.find(s);
        if (it == records.records.end()) {
            throw InvalidArgument("missing lattice wavenumber record for |n|^2 = " + std::to_string(s));
        }
        const Point<3> d = to_point<3>(n).normalized();
        CVector<3> c = CVector<3>::Zero();
        for (const Point<3>& pol : transverse_frame<3>(d)) {
            c += em_probe(it->second, {ProbeKind::em, d, pol, it->second.kappa}) * pol.cast<cdouble>();
        }
        // remove the rounding-level longitudinal residue
        c -= bilinear<3>(d.cast<cdouble>(), c) * d.cast<cdouble>();
        lattice.set(n, c * scale);
    }
    return lattice;
}

/// max |n.J_n| / |J_n| over a lattice.
inline double longitudinal_defect(const FourierLattice<3>& lattice)
{
    double worst = 0.0;
    for (const auto& [n, c] : lattice.coefficients) {
        if (squared_norm<3>(n) == 0 || c.norm() == 0.0) continue;
        const Point<3> d = to_point<3>(n).normalized();
        worst = std::max(worst, std::abs(bilinear<3>(d.cast<cdouble>(), c)) / c.norm());
    }
    return worst;
}

/// (I - n n^T) applied to every coefficient; the n = 0 slot is dropped.
inline FourierLattice<3> transverse_projection(const FourierLattice<3>& lattice)
{
    FourierLattice<3> out;
    out.half_width = lattice.half_width;
    out.truncation = lattice.truncation;
    for (const auto& [n, c] : lattice.coefficients) {
        if (squared_norm<3>(n) == 0) continue;
        const CVector<3> d = to_point<3>(n).normalized().cast<cdouble>();
        out.coefficients[n] = c - bilinear<3>(d, c) * d;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reconstruction report
// ---------------------------------------------------------------------------

template <int D>
struct ReconstructionReport {
    FourierLattice<D> recovered;
    FourierLattice<D> truth;
    double relative_l2 = 0.0;         ///< ||S_N f_rec - f|| / ||f|| on the grid
    double truncation_tail = 0.0;     ///< sqrt((2R)^d sum_{|n|>N} |f_n|^2) / ||f||
    double coefficient_error = 0.0;   ///< sqrt((2R)^d sum_{|n|<=N} |f_n^rec - f_n|^2) / ||f||
    std::map<MultiIndex<D>, double> index_errors;  ///< |f_n^rec - f_n|
    double grid_coefficient_error = 0.0;  ///< ||S_N f_rec - S_N f|| / ||f|| on the grid
    double grid_truncation_tail = 0.0;    ///< ||f - S_N f|| / ||f|| on the grid

    /// Total error bounded by the synthesised coefficient error plus the truncation tail, both on the grid.
    bool decomposition_holds(double slack = 1e-12) const
    {
        return relative_l2 <= (grid_coefficient_error + grid_truncation_tail) * (1.0 + slack) + slack;
    }
};

/// Synthesises `lattice` on `grid` and compares with the truth source.
///
/// The truth lattice comes from the adaptive Fourier oracle; the tail uses
/// Parseval, (2R)^d sum_{|n|>N} |f_n|^2 = ||f||^2 - (2R)^d sum_{|n|<=N} |f_n|^2.
template <int D>
ReconstructionReport<D> reconstruct(const FourierLattice<D>& lattice, const BoxGrid<D>& grid,
                                    const SourceDescriptor<D>& truth, const OracleOptions& oracle = {})
{
    const double R = lattice.half_width;
    const int N = lattice.truncation;
    ReconstructionReport<D> rep;
    rep.recovered = lattice;
    rep.truth = fourier_oracle<D>(truth, R, N, oracle);
    const double box = std::pow(2.0 * R, D);
    const double f2 = source_moments<D>(truth, oracle).l2_squared;
    const std::vector<CVector<D>> samples = sample_values(truth, grid);
    const double g2 = grid_l2_squared<D>(grid, samples);
    const double ref2 = g2 > 0.0 ? g2 : 1.0;

    const std::vector<Point<D>> nodes = grid.nodes();
    const std::vector<CVector<D>> recovered = fourier_synthesize<D>(lattice, nodes).values;
    const std::vector<CVector<D>> partial = fourier_synthesize<D>(rep.truth, nodes).values;
    std::vector<CVector<D>> diff(nodes.size()), coef(nodes.size()), tail(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        diff[i] = recovered[i] - samples[i];
        coef[i] = recovered[i] - partial[i];
        tail[i] = samples[i] - partial[i];
    }
    rep.relative_l2 = std::sqrt(grid_l2_squared<D>(grid, diff) / ref2);
    rep.grid_coefficient_error = std::sqrt(grid_l2_squared<D>(grid, coef) / ref2);
    rep.grid_truncation_tail = std::sqrt(grid_l2_squared<D>(grid, tail) / ref2);

    double inside = 0.0;
    double err2 = 0.0;
    for (const auto& [n, c] : rep.truth.coefficients) {
        inside += c.squaredNorm();
        const double e = (lattice.get(n) - c).norm();
        rep.index_errors[n] = e;
        err2 += e * e;
    }
    for (const auto& [n, c] : lattice.coefficients) {
        if (!rep.truth.contains(n)) {
            rep.index_errors[n] = c.norm();
            err2 += c.squaredNorm();
        }
    }
    const double fref = f2 > 0.0 ? f2 : 1.0;
    rep.truncation_tail = std::sqrt(std::max(0.0, f2 - box * inside) / fref);
    rep.coefficient_error = std::sqrt(box * err2 / fref);
    return rep;
}

// ---------------------------------------------------------------------------
// Data functionals
// ---------------------------------------------------------------------------

enum class EpsilonKind { e1, e2, e3, e4, e5, e6 };

inline std::string to_string(EpsilonKind k)
{
    static const char* names[] = {"eps1", "eps2", "eps3", "eps4", "eps5", "eps6"};
    return names[static_cast<int>(k)];
}

struct EpsilonSummary {
    EpsilonKind kind = EpsilonKind::e1;
    double value = 0.0;
    double bandwidth = 0.0;  ///< K or N
    std::vector<double> frequencies;
};

/// `count` geometric samples of (0, upper], from upper * lowest_ratio up to upper.
inline std::vector<double> low_band_frequencies(double upper, int count = 32, double lowest_ratio = 1e-2)
{
    if (!(upper > 0.0) || count < 2 || !(lowest_ratio > 0.0 && lowest_ratio < 1.0)) {
        throw InvalidArgument("invalid low-band sampling parameters");
    }
    std::vector<double> out(count);
    for (int j = 0; j < count; ++j) {
        out[j] = upper * std::pow(lowest_ratio, 1.0 - static_cast<double>(j) / (count - 1));
    }
    out.back() = upper;
    return out;
}

namespace detail {

// (int_0^K w(s) dw)^{1/2} by the trapezoid rule over samples, with w(0) = 0.
inline double band_integral(const std::vector<std::pair<double, double>>& samples, double K)
{
    std::vector<std::pair<double, double>> pts;
    pts.emplace_back(0.0, 0.0);
    for (const auto& p : samples) {
        if (p.first > 0.0 && p.first <= K * (1.0 + 1e-12)) {
            pts.push_back(p);
        }
    }
    std::sort(pts.begin(), pts.end());
    if (pts.size() < 2 || pts.back().first < K * (1.0 - 1e-12)) {
        throw InvalidArgument("frequency samples do not cover the requested band");
    }
    double s = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        s += 0.5 * (pts[i].first - pts[i - 1].first) * (pts[i].second + pts[i - 1].second);
    }
    return std::sqrt(s);
}

inline void check_low_band(const std::vector<double>& freqs, double upper)
{
    if (freqs.size() < 32) {
        throw InvalidArgument("low-band supremum needs at least 32 frequency samples");
    }
    for (double w : freqs) {
        if (!(w > 0.0) || w > upper * (1.0 + 1e-12)) {
            throw InvalidArgument("low-band sample outside (0, upper]");
        }
    }
}

} // namespace detail

/// eps1 = (int_0^K omega^{d-1} ||u(., omega)||^2 domega)^{1/2}
template <int D>
EpsilonSummary epsilon1(const std::vector<ElasticBoundaryRecord<D>>& records, double K)
{
    EpsilonSummary out{EpsilonKind::e1, 0.0, K, {}};
    std::vector<std::pair<double, double>> samples;
    for (const auto& r : records) {
        const double w = r.frequency.omega;
        samples.emplace_back(w, std::pow(w, D - 1) * elastic_measurement_norm<D>(r));
        out.frequencies.push_back(w);
    }
    out.value = detail::band_integral(samples, K);
    return out;
}

/// eps2 = (sum_{0<|n|<=N} ||u(omega_{p,n})||^2 + ||u(omega_{s,n})||^2)^{1/2}, discrete weight |n|.
template <int D>
EpsilonSummary epsilon2(const ElasticLatticeRecords<D>& records, int N)
{
    EpsilonSummary out{EpsilonKind::e2, 0.0, static_cast<double>(N), {}};
    double s = 0.0;
    for (int shell : lattice_shells<D>(N)) {
        const auto ip = records.compressional.find(shell);
        const auto is = records.shear.find(shell);
        if (ip == records.compressional.end() || is == records.shear.end()) {
            throw InvalidArgument("missing lattice frequency record");
        }
        const double n = std::sqrt(static_cast<double>(shell));
        s += elastic_measurement_norm<D>(ip->second, n) + elastic_measurement_norm<D>(is->second, n);
        out.frequencies.push_back(ip->second.frequency.omega);
        out.frequencies.push_back(is->second.frequency.omega);
    }
    out.value = std::sqrt(s);
    return out;
}

/// eps3 = max over samples in (0, pi/(c_p R)] of ||u(., omega)||.
template <int D>
EpsilonSummary epsilon3(const std::vector<ElasticBoundaryRecord<D>>& records, double R, const ElasticMedium& medium)
{
    const double upper = compressional_lattice_frequency(1.0, R, medium);
    EpsilonSummary out{EpsilonKind::e3, 0.0, upper, {}};
    for (const auto& r : records) {
        out.frequencies.push_back(r.frequency.omega);
        out.value = std::max(out.value, std::sqrt(elastic_measurement_norm<D>(r)));
    }
    detail::check_low_band(out.frequencies, upper);
    return out;
}

/// eps4 = (int_0^K kappa^2 ||E x nu||^2 dkappa)^{1/2}
inline EpsilonSummary epsilon4(const std::vector<EMBoundaryRecord>& records, double K)
{
    EpsilonSummary out{EpsilonKind::e4, 0.0, K, {}};
    std::vector<std::pair<double, double>> samples;
    for (const auto& r : records) {
        samples.emplace_back(r.kappa, r.kappa * r.kappa * em_measurement_norm(r));
        out.frequencies.push_back(r.kappa);
    }
    out.value = detail::band_integral(samples, K);
    return out;
}

/// eps5 = (sum_{0<|n|<=N} ||E(., kappa_n) x nu||^2)^{1/2}
inline EpsilonSummary epsilon5(const EMLatticeRecords& records, int N)
{
    EpsilonSummary out{EpsilonKind::e5, 0.0, static_cast<double>(N), {}};
    double s = 0.0;
    for (int shell : lattice_shells<3>(N)) {
        const auto it = records.records.find(shell);
        if (it == records.records.end()) {
            throw InvalidArgument("missing lattice wavenumber record");
        }
        s += em_measurement_norm(it->second);
        out.frequencies.push_back(it->second.kappa);
    }
    out.value = std::sqrt(s);
    return out;
}

/// eps6 = max over samples in (0, pi/R] of ||E x nu||.
inline EpsilonSummary epsilon6(const std::vector<EMBoundaryRecord>& records, double R)
{
    const double upper = em_lattice_wavenumber(1.0, R);
    EpsilonSummary out{EpsilonKind::e6, 0.0, upper, {}};
    for (const auto& r : records) {
        out.frequencies.push_back(r.kappa);
        out.value = std::max(out.value, std::sqrt(em_measurement_norm(r)));
    }
    detail::check_low_band(out.frequencies, upper);
    return out;
}

} // namespace wavesrc
