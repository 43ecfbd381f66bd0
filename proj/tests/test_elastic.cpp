#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace wavesrc;
using namespace wavesrc::testing;

namespace {

std::shared_ptr<const SurfaceQuadrature<2>> circle(double R, int M)
{
    return std::make_shared<const SurfaceQuadrature<2>>(make_circle_quadrature(R, M));
}

ElasticForwardOptions grid_options(int m)
{
    ElasticForwardOptions o;
    o.source_grid = m;
    return o;
}

} // namespace

TEST(ElasticSpeeds, Examples)
{
    const auto a = elastic_speeds({1.0, 1.0});
    EXPECT_NEAR(a.c_p, 1.0 / std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(a.c_s, 1.0, 1e-15);
    const auto b = elastic_speeds({0.0, 1.0});
    EXPECT_NEAR(b.c_p, 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_LT(b.c_p, b.c_s);
    const ElasticMedium m{2.0, 0.5};
    const auto c = elastic_speeds(m);
    EXPECT_NEAR(c.c_p, 1.0 / std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(c.c_s, std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(compressional_lattice_frequency(1.0, 1.0, m), pi * std::sqrt(3.0), 1e-12);
}

TEST(ElasticSpeeds, CompressionalBelowShearForRandomMedia)
{
    std::mt19937 gen(5);
    std::uniform_real_distribution<double> u(0.01, 10.0);
    for (int i = 0; i < 100; ++i) {
        const ElasticMedium m{u(gen) - 0.005, u(gen)};
        const auto s = elastic_speeds(m);
        EXPECT_LT(s.c_p, s.c_s);
    }
}

TEST(ElasticMedium, RejectsInvalid)
{
    EXPECT_THROW(elastic_speeds({1.0, 0.0}), InvalidArgument);
    EXPECT_THROW(elastic_speeds({-2.0, 1.0}), InvalidArgument);
}

TEST(NavierGreen, ReciprocityOnRandomPairs)
{
    std::mt19937 gen(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const ElasticMedium m{1.3, 0.8};
    for (int t = 0; t < 100; ++t) {
        const ElasticFrequency f(0.5 + 4.0 * (u(gen) + 1.0), m);
        const Point<2> x(u(gen), u(gen)), y(u(gen), u(gen));
        const auto a = navier_green<2>(x, y, f, m).matrix;
        const auto b = navier_green<2>(y, x, f, m).matrix;
        EXPECT_LE((a - b.transpose()).norm() / a.norm(), 1e-10);
        const Point<3> x3(u(gen), u(gen), u(gen)), y3(u(gen), u(gen), u(gen));
        const auto c = navier_green<3>(x3, y3, f, m).matrix;
        const auto d = navier_green<3>(y3, x3, f, m).matrix;
        EXPECT_LE((c - d.transpose()).norm() / c.norm(), 1e-10);
    }
}

TEST(NavierGreen, FourthOrderResidual)
{
    const ElasticMedium m;
    const ElasticFrequency f(5.0, m);  // kappa_s = 5
    const Point<2> x(0.6, 0.8);
    const Point<3> x3(0.6, 0.0, 0.8);
    EXPECT_LE(navier_fd_residual<2>(x, Point<2>::Zero(), f, m, 1e-3, 4), 1e-5);
    EXPECT_LE(navier_fd_residual<3>(x3, Point<3>::Zero(), f, m, 1e-3, 4), 1e-5);
}

TEST(NavierGreen, ResidualConvergesSecondOrder)
{
    const ElasticMedium m;
    const ElasticFrequency f(5.0, m);
    const Point<2> x(0.6, 0.8);
    const double e1 = navier_fd_residual<2>(x, Point<2>::Zero(), f, m, 1e-2, 2);
    const double e2 = navier_fd_residual<2>(x, Point<2>::Zero(), f, m, 5e-3, 2);
    EXPECT_GE(observed_order(e1, e2), 1.9);
}

TEST(NavierGreen, LowFrequencyBranchSatisfiesEquation)
{
    // kappa_s r < 1 exercises the series branch
    const ElasticMedium m;
    const ElasticFrequency f(0.5, m);
    EXPECT_LE(navier_fd_residual<3>(Point<3>(0.3, 0.4, 0.5), Point<3>::Zero(), f, m, 1e-3, 4), 1e-5);
    EXPECT_LE(navier_fd_residual<2>(Point<2>(0.3, 0.4), Point<2>::Zero(), f, m, 1e-3, 4), 1e-5);
}

TEST(NavierGreen, GradientMatchesFiniteDifferences)
{
    const ElasticMedium m{0.7, 1.2};
    const ElasticFrequency f(3.0, m);
    const Point<3> x(0.5, -0.6, 0.3), y(-0.1, 0.2, 0.0);
    const auto g = navier_green<3>(x, y, f, m);
    const MatrixField<3> G = [&](const Point<3>& p) { return navier_green<3>(p, y, f, m).matrix; };
    for (int k = 0; k < 3; ++k) {
        EXPECT_LE((g.gradient[k] - fd_first<3>(G, x, k, 1e-3, 4)).norm() / g.gradient[k].norm(), 1e-6);
    }
    const Point<2> x2(0.5, -0.6), y2(-0.1, 0.2);
    const auto g2 = navier_green<2>(x2, y2, f, m);
    const MatrixField<2> G2 = [&](const Point<2>& p) { return navier_green<2>(p, y2, f, m).matrix; };
    for (int k = 0; k < 2; ++k) {
        EXPECT_LE((g2.gradient[k] - fd_first<2>(G2, x2, k, 1e-3, 4)).norm() / g2.gradient[k].norm(), 1e-6);
    }
}

TEST(NavierGreen, RadiationEnvelope)
{
    // longitudinal column along its own axis is a pure p-wave far away
    const ElasticMedium m;
    const ElasticFrequency f(3.0, m);
    auto env = [&](double r) {
        return std::sqrt(r) * std::abs(navier_green<2>(Point<2>(r, 0.0), Point<2>::Zero(), f, m).matrix(0, 0));
    };
    EXPECT_NEAR(env(40.0) / env(20.0), 1.0, 0.05);
    auto env3 = [&](double r) {
        return r * std::abs(navier_green<3>(Point<3>(r, 0.0, 0.0), Point<3>::Zero(), f, m).matrix(0, 0));
    };
    EXPECT_NEAR(env3(40.0) / env3(20.0), 1.0, 0.05);
}

TEST(ForwardDisplacement, ZeroSource)
{
    const auto s = make_source(bump_field<2>(Point<2>::Zero(), 0.3, CVector<2>::Zero()), Point<2>(0.0, 0.0), 0.3);
    const auto u = forward_displacement<2>(s, ElasticFrequency(2.0, {}), {}, {Point<2>(1.0, 0.0)}, grid_options(16));
    EXPECT_EQ(u.values[0].norm(), 0.0);
}

TEST(ForwardDisplacement, Linearity)
{
    const auto f = bump_field<2>(Point<2>(0.1, 0.0), 0.3, CVector<2>(1.0, 2.0), Point<2>(0.5, -1.0));
    auto g = f;
    g.terms[0].amplitude *= cdouble(0.3, -1.7);
    const auto a = make_source(f, Point<2>(0.1, 0.0), 0.3);
    const auto b = make_source(g, Point<2>(0.1, 0.0), 0.3);
    const std::vector<Point<2>> x{Point<2>(1.0, 0.2), Point<2>(-0.3, 0.9)};
    const ElasticFrequency fr(3.0, {});
    const auto ua = forward_displacement<2>(a, fr, {}, x, grid_options(24));
    const auto ub = forward_displacement<2>(b, fr, {}, x, grid_options(24));
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_LE((ub.values[i] - cdouble(0.3, -1.7) * ua.values[i]).norm(), 1e-12 * ub.values[i].norm());
    }
}

TEST(ForwardDisplacement, PointSourceLimit)
{
    const Point<2> y0(0.1, -0.2);
    const auto s = unit_moment_bump_2d(y0, 0.05);
    const Point<2> x = y0 + Point<2>(1.2, 1.6);
    const ElasticMedium m;
    const ElasticFrequency f(2.0, m);
    const auto u = forward_displacement<2>(s, f, m, {x}, grid_options(32));
    const CVector<2> ref = navier_green<2>(x, y0, f, m).matrix.col(0);
    EXPECT_LE((u.values[0] - ref).norm() / ref.norm(), 1e-2);
}

TEST(ForwardDisplacement, TargetInsideSupportRejected)
{
    const auto s = unit_moment_bump_2d();
    EXPECT_THROW(forward_displacement<2>(s, ElasticFrequency(1.0, {}), {}, {Point<2>(0.1, 0.0)}), InvalidArgument);
}

TEST(Traction, PlugInExamples)
{
    const ElasticMedium m;
    const CVector<2> t = traction<2>(CMatrix<2>::Identity(), 2.0, Point<2>(1.0, 0.0), m);
    EXPECT_NEAR(std::abs(t[0] - 5.0), 0.0, 1e-15);
    EXPECT_EQ(std::abs(t[1]), 0.0);
    EXPECT_EQ(traction<2>(CMatrix<2>::Zero(), 0.0, Point<2>(0.0, 1.0), m).norm(), 0.0);
    EXPECT_THROW(traction<2>(CMatrix<2>::Zero(), 0.0, Point<2>(2.0, 0.0), m), InvalidArgument);
}

TEST(PlaneWave, CompressionalTractionMagnitude)
{
    const ElasticMedium m;
    const ElasticFrequency f(4.0, m);
    const Point<2> d(0.6, 0.8);
    ElasticPlaneWave<2> p(ElasticWave::compressional, d, d, f);
    const Point<2> x(0.2, -0.5);
    EXPECT_NEAR(p.traction(x, d, m).norm(), 3.0 * f.kappa_p(), 1e-12);
    // closed form against the generic traction of the analytic gradient
    const CMatrix<2> grad = (-I * p.kappa) * p.phase(x) * (d * d.transpose()).cast<cdouble>();
    EXPECT_LE((p.traction(x, d, m) - traction<2>(grad, grad.trace(), d, m)).norm(), 1e-12);
}

TEST(PlaneWave, ResidualsVanish)
{
    const ElasticMedium m{0.4, 2.0};
    const ElasticFrequency f(3.3, m);
    const Point<3> d = Point<3>(1.0, 2.0, -2.0) / 3.0;
    const Point<3> q = transverse_frame<3>(d)[0];
    ElasticPlaneWave<3> p(ElasticWave::compressional, d, d, f);
    ElasticPlaneWave<3> s(ElasticWave::shear, d, q, f);
    const Point<3> x(0.3, 0.1, -0.2);
    EXPECT_LE(p.navier_residual(x, f, m).norm(), 1e-12);
    EXPECT_LE(s.navier_residual(x, f, m).norm(), 1e-12);
    EXPECT_NEAR((m.lambda + 2.0 * m.mu) * p.kappa * p.kappa, f.omega * f.omega, 1e-12);
    EXPECT_NEAR(m.mu * s.kappa * s.kappa, f.omega * f.omega, 1e-12);
}

TEST(PlaneWave, RejectsBadPolarization)
{
    const ElasticFrequency f(1.0, {});
    EXPECT_THROW(ElasticPlaneWave<2>(ElasticWave::compressional, Point<2>(1, 0), Point<2>(0, 1), f), InvalidArgument);
    EXPECT_THROW(ElasticPlaneWave<2>(ElasticWave::shear, Point<2>(1, 0), Point<2>(1, 0), f), InvalidArgument);
}

TEST(BoundaryData, ZeroSourceGivesZeroRecord)
{
    const auto s = make_source(bump_field<2>(Point<2>::Zero(), 0.3, CVector<2>::Zero()), Point<2>(0.0, 0.0), 0.3);
    const auto rec = elastic_boundary_data<2>(s, ElasticFrequency(2.0, {}), {}, circle(1.0, 16), grid_options(16));
    for (std::size_t i = 0; i < rec.size(); ++i) {
        EXPECT_EQ(rec.u[i].norm() + rec.du[i].norm(), 0.0);
    }
}

TEST(BoundaryData, TractionMatchesFiniteDifferences)
{
    const auto s = canonical_bump_2d();
    const ElasticMedium m{1.5, 0.7};
    const ElasticFrequency f(3.0, m);
    const auto q = circle(1.0, 8);
    const auto opt = grid_options(32);
    const auto rec = elastic_boundary_data<2>(s, f, m, q, opt);
    const double h = 1e-3;
    for (std::size_t i = 0; i < q->size(); ++i) {
        const Point<2> x = q->nodes[i];
        std::vector<Point<2>> pts;
        for (int k = 0; k < 2; ++k) {
            for (double sh : {2 * h, h, -h, -2 * h}) {
                Point<2> p = x;
                p[k] += sh;
                pts.push_back(p);
            }
        }
        const auto u = forward_displacement<2>(s, f, m, pts, opt).values;
        CMatrix<2> grad;
        for (int k = 0; k < 2; ++k) {
            const CVector<2> d = (-u[4 * k] + 8.0 * u[4 * k + 1] - 8.0 * u[4 * k + 2] + u[4 * k + 3]) / (12.0 * h);
            grad.col(k) = d;
        }
        const CVector<2> t = traction<2>(grad, grad.trace(), q->normals[i], m);
        EXPECT_LE((t - rec.du[i]).norm() / rec.du[i].norm(), 1e-4) << i;
    }
}

TEST(BoundaryData, LinearInSource)
{
    const Point<2> c(0.05, 0.0);
    const auto f1 = bump_field<2>(c, 0.4, CVector<2>(1.0, 0.0), Point<2>(1.0, 0.0));
    const auto f2 = bump_field<2>(c, 0.4, CVector<2>(0.0, cdouble(0.0, 2.0)), Point<2>(0.0, -1.0));
    auto f12 = f1;
    f12.terms.push_back(f2.terms[0]);
    const auto q = circle(1.0, 24);
    const ElasticFrequency f(4.0, {});
    const auto opt = grid_options(24);
    const auto a = elastic_boundary_data<2>(make_source(f1, c, 0.4), f, {}, q, opt);
    const auto b = elastic_boundary_data<2>(make_source(f2, c, 0.4), f, {}, q, opt);
    const auto ab = elastic_boundary_data<2>(make_source(f12, c, 0.4), f, {}, q, opt);
    const auto sum = a + b;
    for (std::size_t i = 0; i < q->size(); ++i) {
        EXPECT_LE((ab.u[i] - sum.u[i]).norm(), 1e-12 * (1.0 + ab.u[i].norm()));
        EXPECT_LE((ab.du[i] - sum.du[i]).norm(), 1e-12 * (1.0 + ab.du[i].norm()));
    }
}

TEST(BoundaryData, BoundedByKernelMagnitude)
{
    const auto s = canonical_bump_2d();
    const ElasticMedium m;
    const ElasticFrequency f(6.0, m);
    const auto rec = elastic_boundary_data<2>(s, f, m, circle(1.0, 32), grid_options(32));
    const double l1 = source_moments<2>(s).l1;
    // |G_N| <= 1 at distance >= 0.5 for these parameters
    double gmax = 0.0;
    for (double r = 0.5; r <= 1.5; r += 0.01) {
        gmax = std::max(gmax, navier_green<2>(Point<2>(r, 0.0), Point<2>::Zero(), f, m).matrix.norm());
    }
    for (std::size_t i = 0; i < rec.size(); ++i) {
        EXPECT_TRUE(is_finite<2>(rec.u[i]) && is_finite<2>(rec.du[i]));
        EXPECT_LE(rec.u[i].norm(), 2.0 * gmax * l1);
    }
}

TEST(BoundaryData, SupportTooCloseRejected)
{
    const auto s = unit_moment_bump_2d(Point<2>(0.5, 0.0), 0.45);
    EXPECT_THROW(elastic_boundary_data<2>(s, ElasticFrequency(1.0, {}), {}, circle(1.0, 16)), InvalidArgument);
}

TEST(MeasurementNorm, ZeroAndScaling)
{
    const auto s = canonical_bump_2d();
    auto rec = elastic_boundary_data<2>(s, ElasticFrequency(2.0, {}), {}, circle(1.0, 32), grid_options(24));
    const double n1 = elastic_measurement_norm<2>(rec);
    auto doubled = rec;
    for (std::size_t i = 0; i < rec.size(); ++i) {
        doubled.u[i] *= 2.0;
        doubled.du[i] *= 2.0;
        rec.u[i].setZero();
        rec.du[i].setZero();
    }
    EXPECT_NEAR(elastic_measurement_norm<2>(doubled) / n1, 4.0, 1e-12);
    EXPECT_EQ(elastic_measurement_norm<2>(rec), 0.0);
}

TEST(MeasurementNorm, MatchesRefinedQuadrature)
{
    const auto s = canonical_bump_2d();
    const ElasticMedium m;
    const ElasticFrequency f(5.0, m);
    const auto a = elastic_boundary_data<2>(s, f, m, circle(2.0, 128), grid_options(32));
    const auto b = elastic_boundary_data<2>(s, f, m, circle(2.0, 256), grid_options(32));
    EXPECT_LE(std::abs(elastic_measurement_norm<2>(a) / elastic_measurement_norm<2>(b) - 1.0), 1e-8);
}

TEST(HelmholtzSplit, RecomposesRadiatedField)
{
    const auto s = canonical_bump_2d();
    const ElasticMedium m;
    const ElasticFrequency f(4.0, m);
    const BoxGrid<2> g(Point<2>(0.75, 0.1), 0.1, 20);  // h = 0.01
    const auto u = forward_displacement<2>(s, f, m, g.nodes(), grid_options(48)).values;
    const auto parts = helmholtz_split<2>(g, u, f, &s);
    std::vector<CVector<2>> sum, ref, up, us;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto ijk = g.unflatten(i);
        bool inner = true;
        for (int a = 0; a < 2; ++a) inner = inner && ijk[a] >= 2 && ijk[a] <= 17;
        if (!inner) continue;
        sum.push_back(parts.compressional[i] + parts.shear[i]);
        ref.push_back(u[i]);
    }
    EXPECT_LE(relative_difference<2>(sum, ref), 5e-3);
    // each part is curl-free / divergence-free to round-off of the discrete identities
    const auto c = scalar_curl(g, parts.compressional);
    const auto d = divergence<2>(g, parts.shear);
    double cmax = 0.0, dmax = 0.0, umax = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto ijk = g.unflatten(i);
        bool inner = true;
        for (int a = 0; a < 2; ++a) inner = inner && ijk[a] >= 3 && ijk[a] <= 16;
        if (!inner) continue;
        cmax = std::max(cmax, std::abs(c.values[i]));
        dmax = std::max(dmax, std::abs(d.values[i]));
        umax = std::max(umax, u[i].norm());
    }
    EXPECT_LE(cmax, 1e-6 * umax * f.kappa_s());
    EXPECT_LE(dmax, 1e-6 * umax * f.kappa_s());
}

TEST(HelmholtzSplit, OverlappingGridRejected)
{
    const auto s = canonical_bump_2d();
    const BoxGrid<2> g(Point<2>(0.3, 0.0), 0.1, 8);
    std::vector<CVector<2>> u(g.size(), CVector<2>::Zero());
    EXPECT_THROW(helmholtz_split<2>(g, u, ElasticFrequency(1.0, {}), &s), InvalidArgument);
}
