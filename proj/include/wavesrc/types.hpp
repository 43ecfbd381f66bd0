#pragma once

// Shared vocabulary types: fixed-size real/complex vectors and matrices,
// integer multi-indices and the error hierarchy used across the library.

#include <array>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace wavesrc {

using cdouble = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cdouble I{0.0, 1.0};

template <int D>
using Point = Eigen::Matrix<double, D, 1>;

template <int D>
using CVector = Eigen::Matrix<cdouble, D, 1>;

template <int D>
using CMatrix = Eigen::Matrix<cdouble, D, D>;

template <int D>
using RMatrix = Eigen::Matrix<double, D, D>;

/// Derivative of a matrix field: entry [k](i, j) is d/dx_k of M(i, j).
template <int D>
using CMatrixGradient = std::array<CMatrix<D>, D>;

/// Integer lattice index n in Z^D.
template <int D>
using MultiIndex = std::array<int, D>;

template <int D>
constexpr void check_dimension()
{
    static_assert(D == 2 || D == 3, "only two- and three-dimensional problems are supported");
}

/// Precondition violation on user-supplied input.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation could not meet its numerical contract (divergent series,
/// failed extrapolation, tolerance check in self tests).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(field)
    {
    }

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

template <int D>
Point<D> to_point(const MultiIndex<D>& n)
{
    Point<D> p;
    for (int i = 0; i < D; ++i) {
        p[i] = static_cast<double>(n[i]);
    }
    return p;
}

template <int D>
int squared_norm(const MultiIndex<D>& n)
{
    int s = 0;
    for (int v : n) {
        s += v * v;
    }
    return s;
}

template <int D>
bool is_finite(const CVector<D>& v)
{
    for (int i = 0; i < D; ++i) {
        if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag())) {
            return false;
        }
    }
    return true;
}

/// Bilinear product sum_i a_i b_i (Eigen's dot() conjugates its left operand).
template <int D>
cdouble bilinear(const CVector<D>& a, const CVector<D>& b)
{
    return (a.transpose() * b)(0);
}

/// a x b without conjugation (Eigen's cross() conjugates complex results).
inline CVector<3> cross(const CVector<3>& a, const CVector<3>& b)
{
    return CVector<3>(a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]);
}

} // namespace wavesrc
