// mat2.hpp - fixed-size 2x2 complex and real matrices
//
// The whole model lives in a two-dimensional phase space, so drift Jacobians,
// diffusion matrices, noise factors and spectral matrices are all 2x2. A tiny
// value type keeps the resolvent arithmetic explicit and allocation free.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

namespace sqz {

using cplx = std::complex<double>;

inline constexpr cplx I_unit{0.0, 1.0};

struct ComplexMat2 {
    cplx m11{}, m12{}, m21{}, m22{};

    static constexpr ComplexMat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static constexpr ComplexMat2 diag(cplx a, cplx b) { return {a, 0.0, 0.0, b}; }

    cplx& operator()(int i, int j) { return i == 0 ? (j == 0 ? m11 : m12) : (j == 0 ? m21 : m22); }
    cplx operator()(int i, int j) const { return i == 0 ? (j == 0 ? m11 : m12) : (j == 0 ? m21 : m22); }

    constexpr ComplexMat2 transpose() const { return {m11, m21, m12, m22}; }
    cplx det() const { return m11 * m22 - m12 * m21; }
    cplx trace() const { return m11 + m22; }

    // Plain cofactor inverse; callers check det() against their own scale.
    ComplexMat2 inverse() const
    {
        const cplx d = det();
        return {m22 / d, -m12 / d, -m21 / d, m11 / d};
    }

    double max_abs() const
    {
        return std::max({std::abs(m11), std::abs(m12), std::abs(m21), std::abs(m22)});
    }

    ComplexMat2& operator+=(const ComplexMat2& o)
    {
        m11 += o.m11; m12 += o.m12; m21 += o.m21; m22 += o.m22;
        return *this;
    }
    ComplexMat2& operator-=(const ComplexMat2& o)
    {
        m11 -= o.m11; m12 -= o.m12; m21 -= o.m21; m22 -= o.m22;
        return *this;
    }
    ComplexMat2& operator*=(cplx a)
    {
        m11 *= a; m12 *= a; m21 *= a; m22 *= a;
        return *this;
    }

    friend ComplexMat2 operator+(ComplexMat2 a, const ComplexMat2& b) { return a += b; }
    friend ComplexMat2 operator-(ComplexMat2 a, const ComplexMat2& b) { return a -= b; }
    friend ComplexMat2 operator*(ComplexMat2 a, cplx s) { return a *= s; }
    friend ComplexMat2 operator*(cplx s, ComplexMat2 a) { return a *= s; }
    friend ComplexMat2 operator*(double s, ComplexMat2 a) { return a *= cplx(s); }

    friend ComplexMat2 operator*(const ComplexMat2& a, const ComplexMat2& b)
    {
        return {a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22,
                a.m21 * b.m11 + a.m22 * b.m21, a.m21 * b.m12 + a.m22 * b.m22};
    }

    friend bool operator==(const ComplexMat2&, const ComplexMat2&) = default;
};

using CVec2 = std::array<cplx, 2>;

inline CVec2 operator*(const ComplexMat2& a, const CVec2& v)
{
    return {a.m11 * v[0] + a.m12 * v[1], a.m21 * v[0] + a.m22 * v[1]};
}

// Largest entrywise modulus of the difference.
inline double max_abs_diff(const ComplexMat2& a, const ComplexMat2& b) { return (a - b).max_abs(); }

// Largest entrywise |a_ij - b_ij| / |b_ij|; entries where b_ij == 0 compare absolutely.
inline double max_rel_diff(const ComplexMat2& a, const ComplexMat2& b)
{
    double worst = 0.0;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const double diff = std::abs(a(i, j) - b(i, j));
            const double ref = std::abs(b(i, j));
            worst = std::max(worst, ref > 0.0 ? diff / ref : diff);
        }
    }
    return worst;
}

struct RealMat2 {
    double m11{}, m12{}, m21{}, m22{};

    constexpr RealMat2 transpose() const { return {m11, m21, m12, m22}; }
    double trace() const { return m11 + m22; }
    double det() const { return m11 * m22 - m12 * m21; }
    double max_abs() const
    {
        return std::max({std::abs(m11), std::abs(m12), std::abs(m21), std::abs(m22)});
    }

    friend RealMat2 operator*(const RealMat2& a, const RealMat2& b)
    {
        return {a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22,
                a.m21 * b.m11 + a.m22 * b.m21, a.m21 * b.m12 + a.m22 * b.m22};
    }
    friend RealMat2 operator-(const RealMat2& a, const RealMat2& b)
    {
        return {a.m11 - b.m11, a.m12 - b.m12, a.m21 - b.m21, a.m22 - b.m22};
    }

    friend bool operator==(const RealMat2&, const RealMat2&) = default;
};

// Eigenvalues of a real symmetric 2x2 matrix, larger first.
inline std::array<double, 2> symmetric_eigenvalues(const RealMat2& m)
{
    const double mean = 0.5 * (m.m11 + m.m22);
    const double half_diff = 0.5 * (m.m11 - m.m22);
    const double radius = std::hypot(half_diff, m.m12);
    return {mean + radius, mean - radius};
}

// Eigenvalues of a general complex 2x2 matrix.
inline std::array<cplx, 2> eigenvalues(const ComplexMat2& m)
{
    const cplx half_tr = 0.5 * m.trace();
    const cplx disc = std::sqrt(half_tr * half_tr - m.det());
    return {half_tr + disc, half_tr - disc};
}

} // namespace sqz
