#pragma once

// Fast invariant checks run by `wavesrc_lab selftest`.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "wavesrc/lab.hpp"

namespace wavesrc {

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

namespace detail {

inline CheckResult run_check(const std::string& name, double tolerance, const std::function<double()>& f)
{
    CheckResult r{name, false, 0.0, tolerance, {}};
    try {
        r.value = f();
        r.passed = std::isfinite(r.value) && r.value <= tolerance;
    } catch (const std::exception& e) {
        r.detail = e.what();
    }
    return r;
}

inline SourceDescriptor<2> selftest_bump()
{
    SmoothVectorField<2> f;
    BumpTerm<2> t;
    t.center = Point<2>(0.05, -0.02);
    t.radius = 0.4;
    t.amplitude = CVector<2>(1.0, -0.5);
    t.polynomial.linear = Point<2>(2.0, 0.75);
    f.terms.push_back(t);
    return make_source(make_zero_mean(f, t.center, t.radius), t.center, t.radius);
}

} // namespace detail

inline std::vector<CheckResult> run_selftest()
{
    std::vector<CheckResult> out;

    out.push_back(detail::run_check("parseval_band_limited", 1e-10, [] {
        FourierLattice<2> lat{1.0, 3, {}};
        for (const auto& n : enumerate_lattice<2>(3, true)) {
            lat.set(n, CVector<2>(cdouble(1.0 / (1 + n[0] * n[0]), 0.1 * n[1]), cdouble(0.2 * n[0], -0.3)));
        }
        const BoxGrid<2> g = make_box_grid<2>(1.0, 32);
        const auto s = fourier_synthesize<2>(lat, g.nodes()).values;
        const ParsevalSides p = parseval_check<2>(g, s, lat);
        return std::abs(p.lhs - p.rhs) / p.rhs;
    }));

    out.push_back(detail::run_check("elastic_plane_wave_residual", 1e-12, [] {
        const ElasticMedium m;
        const ElasticFrequency f(2.5, m);
        const Point<2> d(0.6, 0.8);
        ElasticPlaneWave<2> p(ElasticWave::compressional, d, d, f);
        ElasticPlaneWave<2> s(ElasticWave::shear, d, Point<2>(-0.8, 0.6), f);
        const Point<2> x(0.3, -0.7);
        return std::max(p.navier_residual(x, f, m).norm(), s.navier_residual(x, f, m).norm());
    }));

    out.push_back(detail::run_check("em_plane_wave_residual", 1e-12, [] {
        EMPlaneWave w(Point<3>(0, 0, 1), Point<3>(1, 0, 0), 3.0);
        return w.double_curl_residual(Point<3>(0.2, 0.1, -0.4)).norm();
    }));

    out.push_back(detail::run_check("navier_green_symmetry", 1e-12, [] {
        const ElasticMedium m;
        const ElasticFrequency f(3.0, m);
        const auto g = navier_green<2>(Point<2>(0.9, 0.1), Point<2>(-0.2, 0.3), f, m).matrix;
        return (g - g.transpose()).norm() / g.norm();
    }));

    out.push_back(detail::run_check("elastic_probe_vs_oracle", 1e-2, [] {
        const ElasticMedium m;
        const auto src = detail::selftest_bump();
        auto q = std::make_shared<const SurfaceQuadrature<2>>(make_circle_quadrature(1.0, 96));
        ElasticForwardOptions opt;
        opt.source_grid = 48;
        const ElasticFrequency f(pi, m);
        const auto rec = elastic_boundary_data<2>(src, f, m, q, opt);
        const Point<2> d(std::cos(0.3), std::sin(0.3));
        ProbeSpec<2> spec{ProbeKind::elastic_p, d, d, pi};
        const cdouble probe = elastic_probe<2>(rec, spec, m);
        const cdouble truth = bilinear<2>(fourier_transform<2>(src, f.kappa_p() * d), d.cast<cdouble>());
        return std::abs(probe - truth) / std::abs(truth);
    }));

    out.push_back(detail::run_check("em_transversality", 1e-14, [] {
        SmoothVectorField<3> a;
        BumpTerm<3> t;
        t.radius = 0.45;
        t.amplitude = CVector<3>(0.3, -0.5, 1.0);
        a.terms.push_back(t);
        const auto j = make_curl_source(a, t.center, t.radius);
        auto q = std::make_shared<const SurfaceQuadrature<3>>(make_sphere_quadrature(1.0, 8, 16));
        EMForwardOptions opt;
        opt.source_grid = 12;
        const auto recs = em_lattice_records(j, 1.0, 1, q, opt);
        return longitudinal_defect(em_lattice_recover(recs, 1));
    }));

    out.push_back(detail::run_check("noise_level_zero_identity", 0.0, [] {
        const auto src = detail::selftest_bump();
        const ElasticMedium m;
        auto q = std::make_shared<const SurfaceQuadrature<2>>(make_circle_quadrature(1.0, 32));
        ElasticForwardOptions opt;
        opt.source_grid = 16;
        const auto rec = elastic_boundary_data<2>(src, ElasticFrequency(2.0, m), m, q, opt);
        const auto noisy = add_noise<2>(rec, 0.0, 7);
        double diff = 0.0;
        for (std::size_t i = 0; i < rec.size(); ++i) {
            diff += (rec.u[i] - noisy.u[i]).norm() + (rec.du[i] - noisy.du[i]).norm();
        }
        return diff;
    }));

    out.push_back(detail::run_check("config_round_trip", 0.0, [] {
        ExperimentConfig c;
        c.physics = "em";
        c.N = {1, 3};
        c.seed = 42;
        c.source.center = {0.1, 0.0, -0.1};
        const ExperimentConfig back = config_from_json(json::parse(to_json(c).dump()));
        return back == c ? 0.0 : 1.0;
    }));

    out.push_back(detail::run_check("sweep_determinism", 0.0, [] {
        ExperimentConfig c;
        c.N = {1, 2};
        c.noise = {0.0, 0.01};
        c.resolution.preset = "custom";
        c.resolution.surface = {48};
        c.resolution.source_grid = 16;
        c.resolution.recon_grid = 32;
        const std::string a = sweep_csv(run_stability_sweep(c));
        const std::string b = sweep_csv(run_stability_sweep(c));
        return a == b ? 0.0 : 1.0;
    }));

    return out;
}

} // namespace wavesrc
