#pragma once

// Geometry and quadrature shared by the physics modules: cell-centred box
// grids, quadrature on the measurement circle/sphere, box Fourier analysis and
// synthesis, and second-order finite-difference operators.
//
// Fourier convention on U_R = (-R, R)^D:
//     f_n = (2R)^{-D} int_{U_R} f(x) e^{-i (pi/R) x.n} dx,
//     f(x) = sum_n f_n e^{i (pi/R) x.n}.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "wavesrc/types.hpp"

namespace wavesrc {

// ---------------------------------------------------------------------------
// Box grids
// ---------------------------------------------------------------------------

/// Uniform cell-centred grid on center + (-half_width, half_width)^D.
template <int D>
class BoxGrid {
public:
    BoxGrid(const Point<D>& center, double half_width, int points_per_axis)
        : center_(center), half_width_(half_width), m_(points_per_axis)
    {
        check_dimension<D>();
        if (!(half_width > 0.0)) {
            throw InvalidArgument("box grid half width must be positive");
        }
        if (points_per_axis < 4) {
            throw InvalidArgument("box grid needs at least 4 points per axis");
        }
        size_ = 1;
        for (int i = 0; i < D; ++i) {
            size_ *= static_cast<std::size_t>(m_);
        }
    }

    const Point<D>& center() const { return center_; }
    double half_width() const { return half_width_; }
    int points_per_axis() const { return m_; }
    std::size_t size() const { return size_; }
    double spacing() const { return 2.0 * half_width_ / m_; }
    double cell_volume() const { return std::pow(spacing(), D); }

    /// Coordinate of the i-th cell centre along any axis, relative to the origin.
    double coordinate(int axis, int i) const
    {
        return center_[axis] - half_width_ + (i + 0.5) * spacing();
    }

    std::array<int, D> unflatten(std::size_t index) const
    {
        std::array<int, D> ijk{};
        for (int a = 0; a < D; ++a) {
            ijk[a] = static_cast<int>(index % m_);
            index /= m_;
        }
        return ijk;
    }

    std::size_t flatten(const std::array<int, D>& ijk) const
    {
        std::size_t index = 0;
        for (int a = D - 1; a >= 0; --a) {
            index = index * m_ + static_cast<std::size_t>(ijk[a]);
        }
        return index;
    }

    Point<D> node(std::size_t index) const
    {
        const auto ijk = unflatten(index);
        Point<D> p;
        for (int a = 0; a < D; ++a) {
            p[a] = coordinate(a, ijk[a]);
        }
        return p;
    }

    std::vector<Point<D>> nodes() const
    {
        std::vector<Point<D>> out;
        out.reserve(size_);
        for (std::size_t i = 0; i < size_; ++i) {
            out.push_back(node(i));
        }
        return out;
    }

private:
    Point<D> center_;
    double half_width_;
    int m_;
    std::size_t size_ = 0;
};

/// Grid covering U_R = (-R, R)^D.
template <int D>
BoxGrid<D> make_box_grid(double R, int m)
{
    return BoxGrid<D>(Point<D>::Zero(), R, m);
}

// ---------------------------------------------------------------------------
// Surface quadrature on Gamma_R
// ---------------------------------------------------------------------------

/// Gauss-Legendre nodes and weights on [-1, 1].
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights)
{
    if (n < 1) {
        throw InvalidArgument("Gauss-Legendre rule needs at least one node");
    }
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) {
                p0 = 1.0;
                p1 = x;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-16) {
                break;
            }
        }
        // recompute derivative at the converged node
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
}

/// Nodes, outward unit normals and weights on the circle/sphere of radius R.
template <int D>
struct SurfaceQuadrature {
    double radius = 0.0;
    std::vector<Point<D>> nodes;
    std::vector<Point<D>> normals;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

/// Equispaced trapezoid rule with `nodes` points on the circle |x| = R.
inline SurfaceQuadrature<2> make_circle_quadrature(double R, int nodes)
{
    if (!(R > 0.0)) {
        throw InvalidArgument("quadrature radius must be positive");
    }
    if (nodes < 8) {
        throw InvalidArgument("circle quadrature needs at least 8 nodes");
    }
    SurfaceQuadrature<2> q;
    q.radius = R;
    for (int j = 0; j < nodes; ++j) {
        const double theta = 2.0 * pi * j / nodes;
        const Point<2> n(std::cos(theta), std::sin(theta));
        q.normals.push_back(n);
        q.nodes.push_back(R * n);
        q.weights.push_back(2.0 * pi * R / nodes);
    }
    return q;
}

/// Gauss-Legendre in cos(polar angle) times trapezoid in azimuth on |x| = R.
inline SurfaceQuadrature<3> make_sphere_quadrature(double R, int polar, int azimuth)
{
    if (!(R > 0.0)) {
        throw InvalidArgument("quadrature radius must be positive");
    }
    if (polar < 8 || azimuth < 8) {
        throw InvalidArgument("sphere quadrature needs at least 8 nodes per angular direction");
    }
    std::vector<double> t;
    std::vector<double> w;
    gauss_legendre(polar, t, w);
    SurfaceQuadrature<3> q;
    q.radius = R;
    for (int i = 0; i < polar; ++i) {
        const double c = t[i];
        const double s = std::sqrt(1.0 - c * c);
        const double w_phi = w[i];
        for (int j = 0; j < azimuth; ++j) {
            const double theta = 2.0 * pi * j / azimuth;
            const Point<3> n(s * std::cos(theta), s * std::sin(theta), c);
            q.normals.push_back(n);
            q.nodes.push_back(R * n);
            q.weights.push_back(R * R * w_phi * 2.0 * pi / azimuth);
        }
    }
    return q;
}

/// Angular resolution: `first` nodes on the circle, or polar x azimuth on the sphere.
struct SurfaceResolution {
    int first = 64;
    int second = 0;
};

template <int D>
SurfaceQuadrature<D> make_surface_quadrature(double R, const SurfaceResolution& res)
{
    check_dimension<D>();
    if constexpr (D == 2) {
        return make_circle_quadrature(R, res.first);
    } else {
        return make_sphere_quadrature(R, res.first, res.second);
    }
}

/// sum_i w_i samples_i
template <int D, typename T>
T surface_integrate(const SurfaceQuadrature<D>& q, const std::vector<T>& samples)
{
    if (samples.size() != q.size()) {
        throw InvalidArgument("surface samples do not match the quadrature nodes");
    }
    T sum = samples.empty() ? T{} : T(samples[0] * 0.0);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        sum += q.weights[i] * samples[i];
    }
    return sum;
}

// ---------------------------------------------------------------------------
// Sampled vector fields
// ---------------------------------------------------------------------------

template <int D>
struct VectorFieldSamples {
    std::vector<Point<D>> points;
    std::vector<CVector<D>> values;
    std::string units;

    std::size_t size() const { return points.size(); }

    void validate() const
    {
        if (points.size() != values.size()) {
            throw InvalidArgument("field samples: points and values differ in length");
        }
        for (const auto& v : values) {
            if (!is_finite<D>(v)) {
                throw InvalidArgument("field samples contain non-finite entries");
            }
        }
    }
};

// ---------------------------------------------------------------------------
// Fourier lattice
// ---------------------------------------------------------------------------

/// All n in Z^D with |n| <= N (Euclidean), ordered by |n|^2 then lexicographically.
template <int D>
std::vector<MultiIndex<D>> enumerate_lattice(int N, bool include_zero)
{
    check_dimension<D>();
    if (N < 0) {
        throw InvalidArgument("lattice truncation must be nonnegative");
    }
    std::vector<MultiIndex<D>> out;
    MultiIndex<D> n{};
    const int n2max = N * N;
    std::function<void(int)> rec = [&](int axis) {
        if (axis == D) {
            const int s = squared_norm<D>(n);
            if (s <= n2max && (include_zero || s > 0)) {
                out.push_back(n);
            }
            return;
        }
        for (int v = -N; v <= N; ++v) {
            n[axis] = v;
            rec(axis + 1);
        }
    };
    rec(0);
    std::stable_sort(out.begin(), out.end(), [](const MultiIndex<D>& a, const MultiIndex<D>& b) {
        const int sa = squared_norm<D>(a);
        const int sb = squared_norm<D>(b);
        return sa != sb ? sa < sb : a < b;
    });
    return out;
}

/// Distinct values of |n|^2 over 0 < |n| <= N.
template <int D>
std::vector<int> lattice_shells(int N)
{
    std::set<int> shells;
    for (const auto& n : enumerate_lattice<D>(N, false)) {
        shells.insert(squared_norm<D>(n));
    }
    return {shells.begin(), shells.end()};
}

/// Complex vector coefficients f_n for |n| <= N; the n = 0 slot is optional.
template <int D>
struct FourierLattice {
    double half_width = 1.0;
    int truncation = 0;
    std::map<MultiIndex<D>, CVector<D>> coefficients;

    bool empty() const { return coefficients.empty(); }
    std::size_t size() const { return coefficients.size(); }

    void set(const MultiIndex<D>& n, const CVector<D>& c)
    {
        if (squared_norm<D>(n) > truncation * truncation) {
            throw InvalidArgument("lattice index outside the truncation radius");
        }
        coefficients[n] = c;
    }

    CVector<D> get(const MultiIndex<D>& n) const
    {
        const auto it = coefficients.find(n);
        return it == coefficients.end() ? CVector<D>::Zero() : it->second;
    }

    bool contains(const MultiIndex<D>& n) const { return coefficients.count(n) > 0; }

    /// max |f_{-n} - conj(f_n)| over the stored pairs.
    double conjugate_symmetry_defect() const
    {
        double worst = 0.0;
        for (const auto& [n, c] : coefficients) {
            MultiIndex<D> m;
            for (int i = 0; i < D; ++i) {
                m[i] = -n[i];
            }
            const auto it = coefficients.find(m);
            if (it != coefficients.end()) {
                worst = std::max(worst, (it->second - c.conjugate()).norm());
            }
        }
        return worst;
    }
};

namespace detail {

// Separable evaluation of sum_x w f(x) e^{-i (pi/R) x.n} on a box grid for
// all indices in `wanted`, given samples in the grid's flattened order.
template <int D>
std::map<MultiIndex<D>, CVector<D>> grid_transform(const BoxGrid<D>& grid, const std::vector<CVector<D>>& samples,
                                                    double R, const std::vector<MultiIndex<D>>& wanted)
{
    if (samples.size() != grid.size()) {
        throw InvalidArgument("samples do not match the grid");
    }
    for (const auto& v : samples) {
        if (!is_finite<D>(v)) {
            throw InvalidArgument("non-finite field values in Fourier analysis");
        }
    }
    int nmax = 0;
    for (const auto& n : wanted) {
        for (int v : n) {
            nmax = std::max(nmax, std::abs(v));
        }
    }
    const int m = grid.points_per_axis();
    const int width = 2 * nmax + 1;
    // phase[a][(n + nmax) * m + i] = e^{-i pi n x_a(i) / R}
    std::array<std::vector<cdouble>, D> phase;
    for (int a = 0; a < D; ++a) {
        phase[a].resize(static_cast<std::size_t>(width) * m);
        for (int n = -nmax; n <= nmax; ++n) {
            for (int i = 0; i < m; ++i) {
                phase[a][(n + nmax) * m + i] = std::exp(-I * (pi / R) * (n * grid.coordinate(a, i)));
            }
        }
    }
    const double vol = grid.cell_volume();
    std::map<MultiIndex<D>, CVector<D>> out;
    if constexpr (D == 2) {
        // t(n0, i1) = sum_i0 f(i0, i1) phase0(n0, i0)
        std::vector<CVector<2>> t(static_cast<std::size_t>(width) * m, CVector<2>::Zero());
        for (int i1 = 0; i1 < m; ++i1) {
            for (int i0 = 0; i0 < m; ++i0) {
                const CVector<2>& f = samples[grid.flatten({i0, i1})];
                if (f.isZero(0.0)) continue;
                for (int n0 = 0; n0 < width; ++n0) {
                    t[n0 * m + i1] += phase[0][n0 * m + i0] * f;
                }
            }
        }
        for (const auto& n : wanted) {
            CVector<2> s = CVector<2>::Zero();
            const int n0 = n[0] + nmax;
            for (int i1 = 0; i1 < m; ++i1) {
                s += phase[1][(n[1] + nmax) * m + i1] * t[n0 * m + i1];
            }
            out[n] = s * vol;
        }
    } else {
        // t1(n0, i1, i2), then t2(n0, n1, i2)
        std::vector<CVector<3>> t1(static_cast<std::size_t>(width) * m * m, CVector<3>::Zero());
        for (int i2 = 0; i2 < m; ++i2) {
            for (int i1 = 0; i1 < m; ++i1) {
                for (int i0 = 0; i0 < m; ++i0) {
                    const CVector<3>& f = samples[grid.flatten({i0, i1, i2})];
                    if (f.isZero(0.0)) continue;
                    for (int n0 = 0; n0 < width; ++n0) {
                        t1[(static_cast<std::size_t>(n0) * m + i1) * m + i2] += phase[0][n0 * m + i0] * f;
                    }
                }
            }
        }
        std::vector<CVector<3>> t2(static_cast<std::size_t>(width) * width * m, CVector<3>::Zero());
        for (int n0 = 0; n0 < width; ++n0) {
            for (int n1 = 0; n1 < width; ++n1) {
                for (int i2 = 0; i2 < m; ++i2) {
                    CVector<3> s = CVector<3>::Zero();
                    for (int i1 = 0; i1 < m; ++i1) {
                        s += phase[1][n1 * m + i1] * t1[(static_cast<std::size_t>(n0) * m + i1) * m + i2];
                    }
                    t2[(static_cast<std::size_t>(n0) * width + n1) * m + i2] = s;
                }
            }
        }
        for (const auto& n : wanted) {
            CVector<3> s = CVector<3>::Zero();
            const std::size_t base = (static_cast<std::size_t>(n[0] + nmax) * width + (n[1] + nmax)) * m;
            for (int i2 = 0; i2 < m; ++i2) {
                s += phase[2][(n[2] + nmax) * m + i2] * t2[base + i2];
            }
            out[n] = s * vol;
        }
    }
    return out;
}

} // namespace detail

/// Unnormalised transform int f(x) e^{-i xi.x} dx by the midpoint rule at an arbitrary xi.
template <int D>
CVector<D> grid_fourier_transform(const BoxGrid<D>& grid, const std::vector<CVector<D>>& samples, const Point<D>& xi)
{
    if (samples.size() != grid.size()) {
        throw InvalidArgument("samples do not match the grid");
    }
    CVector<D> s = CVector<D>::Zero();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].isZero(0.0)) continue;
        if (!is_finite<D>(samples[i])) {
            throw InvalidArgument("non-finite field values in Fourier analysis");
        }
        s += std::exp(-I * xi.dot(grid.node(i))) * samples[i];
    }
    return s * grid.cell_volume();
}

/// Box Fourier coefficient f_n of samples on a grid lying inside U_R (zero elsewhere).
template <int D>
CVector<D> fourier_coefficient(const BoxGrid<D>& grid, const std::vector<CVector<D>>& samples, double R,
                               const MultiIndex<D>& n)
{
    return detail::grid_transform<D>(grid, samples, R, {n}).at(n) / std::pow(2.0 * R, D);
}

/// Box Fourier coefficients for every index in `indices`.
template <int D>
FourierLattice<D> fourier_lattice(const BoxGrid<D>& grid, const std::vector<CVector<D>>& samples, double R, int N,
                                  bool include_zero = true)
{
    FourierLattice<D> lattice;
    lattice.half_width = R;
    lattice.truncation = N;
    const auto indices = enumerate_lattice<D>(N, include_zero);
    const double norm = 1.0 / std::pow(2.0 * R, D);
    for (const auto& [n, c] : detail::grid_transform<D>(grid, samples, R, indices)) {
        lattice.coefficients[n] = c * norm;
    }
    return lattice;
}

/// sum_{|n| <= N} f_n e^{i (pi/R) x.n} at each point.
template <int D>
VectorFieldSamples<D> fourier_synthesize(const FourierLattice<D>& lattice, const std::vector<Point<D>>& points)
{
    VectorFieldSamples<D> out;
    out.points = points;
    out.values.assign(points.size(), CVector<D>::Zero());
    const double k = pi / lattice.half_width;
    for (std::size_t i = 0; i < points.size(); ++i) {
        CVector<D> s = CVector<D>::Zero();
        for (const auto& [n, c] : lattice.coefficients) {
            s += std::exp(I * (k * to_point<D>(n).dot(points[i]))) * c;
        }
        out.values[i] = s;
    }
    return out;
}

/// Midpoint L2 norm squared of grid samples.
template <int D>
double grid_l2_squared(const BoxGrid<D>& grid, const std::vector<CVector<D>>& samples)
{
    double s = 0.0;
    for (const auto& v : samples) {
        s += v.squaredNorm();
    }
    return s * grid.cell_volume();
}

struct ParsevalSides {
    double lhs = 0.0;  ///< ||f||^2 over U_R
    double rhs = 0.0;  ///< (2R)^D sum |f_n|^2
};

template <int D>
ParsevalSides parseval_check(const BoxGrid<D>& grid, const std::vector<CVector<D>>& samples,
                             const FourierLattice<D>& lattice)
{
    ParsevalSides s;
    s.lhs = grid_l2_squared<D>(grid, samples);
    for (const auto& [n, c] : lattice.coefficients) {
        s.rhs += c.squaredNorm();
    }
    s.rhs *= std::pow(2.0 * lattice.half_width, D);
    return s;
}

// ---------------------------------------------------------------------------
// Finite differences on box grids
// ---------------------------------------------------------------------------

/// Samples produced by a difference operator; `one_sided` marks boundary-layer
/// nodes where a first-order one-sided stencil was used.
template <typename T>
struct GridSamples {
    std::vector<T> values;
    std::vector<bool> one_sided;
};

namespace detail {

// d/dx_axis of a sampled quantity at one node.
template <int D, typename T>
T grid_derivative(const BoxGrid<D>& grid, const std::vector<T>& f, std::size_t index, int axis, bool& one_sided)
{
    auto ijk = grid.unflatten(index);
    const int m = grid.points_per_axis();
    const double h = grid.spacing();
    const int i = ijk[axis];
    auto at = [&](int j) {
        auto p = ijk;
        p[axis] = j;
        return f[grid.flatten(p)];
    };
    if (i == 0) {
        one_sided = true;
        return T((at(1) - at(0)) / h);
    }
    if (i == m - 1) {
        one_sided = true;
        return T((at(m - 1) - at(m - 2)) / h);
    }
    return T((at(i + 1) - at(i - 1)) / (2.0 * h));
}

template <int D>
void check_fd_grid(const BoxGrid<D>& grid, std::size_t n)
{
    if (grid.points_per_axis() < 4) {
        throw InvalidArgument("grid too coarse for finite differences");
    }
    if (n != grid.size()) {
        throw InvalidArgument("samples do not match the grid");
    }
}

} // namespace detail

template <int D>
GridSamples<CVector<D>> gradient(const BoxGrid<D>& grid, const std::vector<cdouble>& u)
{
    detail::check_fd_grid(grid, u.size());
    GridSamples<CVector<D>> out;
    out.values.resize(u.size());
    out.one_sided.assign(u.size(), false);
    for (std::size_t i = 0; i < u.size(); ++i) {
        bool flag = false;
        for (int a = 0; a < D; ++a) {
            out.values[i][a] = detail::grid_derivative<D>(grid, u, i, a, flag);
        }
        out.one_sided[i] = flag;
    }
    return out;
}

template <int D>
GridSamples<cdouble> divergence(const BoxGrid<D>& grid, const std::vector<CVector<D>>& u)
{
    detail::check_fd_grid(grid, u.size());
    GridSamples<cdouble> out;
    out.values.assign(u.size(), 0.0);
    out.one_sided.assign(u.size(), false);
    for (int a = 0; a < D; ++a) {
        std::vector<cdouble> comp(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            comp[i] = u[i][a];
        }
        for (std::size_t i = 0; i < u.size(); ++i) {
            bool flag = false;
            out.values[i] += detail::grid_derivative<D>(grid, comp, i, a, flag);
            out.one_sided[i] = out.one_sided[i] || flag;
        }
    }
    return out;
}

/// curl u = d1 u2 - d2 u1 (two dimensions).
inline GridSamples<cdouble> scalar_curl(const BoxGrid<2>& grid, const std::vector<CVector<2>>& u)
{
    detail::check_fd_grid(grid, u.size());
    std::vector<cdouble> u1(u.size());
    std::vector<cdouble> u2(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        u1[i] = u[i][0];
        u2[i] = u[i][1];
    }
    GridSamples<cdouble> out;
    out.values.resize(u.size());
    out.one_sided.assign(u.size(), false);
    for (std::size_t i = 0; i < u.size(); ++i) {
        bool flag = false;
        out.values[i] = detail::grid_derivative<2>(grid, u2, i, 0, flag) - detail::grid_derivative<2>(grid, u1, i, 1, flag);
        out.one_sided[i] = flag;
    }
    return out;
}

/// curl u = (d2 u, -d1 u) for a scalar u (two dimensions).
inline GridSamples<CVector<2>> vector_curl(const BoxGrid<2>& grid, const std::vector<cdouble>& u)
{
    detail::check_fd_grid(grid, u.size());
    GridSamples<CVector<2>> out;
    out.values.resize(u.size());
    out.one_sided.assign(u.size(), false);
    for (std::size_t i = 0; i < u.size(); ++i) {
        bool flag = false;
        out.values[i] = CVector<2>(detail::grid_derivative<2>(grid, u, i, 1, flag),
                                   -detail::grid_derivative<2>(grid, u, i, 0, flag));
        out.one_sided[i] = flag;
    }
    return out;
}

/// Three-dimensional curl.
inline GridSamples<CVector<3>> curl(const BoxGrid<3>& grid, const std::vector<CVector<3>>& u)
{
    detail::check_fd_grid(grid, u.size());
    std::array<std::vector<cdouble>, 3> c;
    for (int a = 0; a < 3; ++a) {
        c[a].resize(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            c[a][i] = u[i][a];
        }
    }
    GridSamples<CVector<3>> out;
    out.values.resize(u.size());
    out.one_sided.assign(u.size(), false);
    for (std::size_t i = 0; i < u.size(); ++i) {
        bool flag = false;
        auto d = [&](int comp, int axis) { return detail::grid_derivative<3>(grid, c[comp], i, axis, flag); };
        out.values[i] = CVector<3>(d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1));
        out.one_sided[i] = flag;
    }
    return out;
}

/// Restrict samples to nodes that used only central stencils.
template <typename T>
std::vector<T> interior_values(const GridSamples<T>& s)
{
    std::vector<T> out;
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        if (!s.one_sided[i]) {
            out.push_back(s.values[i]);
        }
    }
    return out;
}

} // namespace wavesrc
