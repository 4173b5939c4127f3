// phase_space.hpp - drift, s-ordered diffusion and noise factorisation
//
// The truncated Fokker-Planck equation for the s-ordered distribution W_s has
// the s-independent drift (A1, A2) and the diffusion matrix
//
//     D^(s) = [ i s g a^2        (1-s) gamma/2 ]
//             [ (1-s) gamma/2    -i s g conj(a)^2 ]
//
// In the generalized-P representation conj(a) is replaced by an independent
// coordinate b and s = +1.

#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <string>
#include <string_view>
#include <utility>

#include "sqz/error.hpp"
#include "sqz/mat2.hpp"
#include "sqz/model.hpp"

namespace sqz {

// Either an s-ordered distribution with s in [-1, 1] or the generalized P
// representation (doubled phase space, s = +1 with an independent second coordinate).
class Ordering {
public:
    static Ordering s_ordered(double s)
    {
        ensure(std::isfinite(s) && s >= -1.0 && s <= 1.0, ErrorCode::InvalidConfig,
               "ordering parameter must lie in [-1, 1]");
        return Ordering(s, false);
    }
    static Ordering generalized_p() { return Ordering(1.0, true); }
    static Ordering glauber_p() { return s_ordered(1.0); }
    static Ordering wigner() { return s_ordered(0.0); }
    static Ordering husimi_q() { return s_ordered(-1.0); }

    // "P" selects the generalized P representation, anything else is s.
    static Ordering parse(std::string_view text)
    {
        if (text == "P" || text == "p") {
            return generalized_p();
        }
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(std::string(text), &used);
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidConfig, "cannot parse ordering '" + std::string(text) + "'");
        }
        ensure(used == text.size(), ErrorCode::InvalidConfig,
               "cannot parse ordering '" + std::string(text) + "'");
        return s_ordered(value);
    }

    bool is_generalized_p() const { return generalized_p_; }
    double s() const { return s_; }

    std::string label() const
    {
        if (generalized_p_) {
            return "P";
        }
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", s_);
        return buf;
    }

    friend bool operator==(const Ordering&, const Ordering&) = default;

private:
    Ordering(double s, bool gp) : s_(s), generalized_p_(gp) {}

    double s_;
    bool generalized_p_;
};

enum class NoiseMode { RealConjugate, ComplexDoubled };

// Truncated drift with the second coordinate equal to conj(alpha).
inline CVec2 drift(cplx alpha, const SystemParams& p)
{
    const cplx a1 = p.E0 - cplx(p.gamma / 2.0, p.theta) * alpha
        + I_unit * p.g * alpha * alpha * std::conj(alpha);
    return {a1, std::conj(a1)};
}

// Truncated drift on the doubled phase space (alpha, beta).
inline CVec2 drift(cplx alpha, cplx beta, const SystemParams& p)
{
    const cplx a1 = p.E0 - cplx(p.gamma / 2.0, p.theta) * alpha + I_unit * p.g * alpha * alpha * beta;
    const cplx a2 = p.E0 - cplx(p.gamma / 2.0, -p.theta) * beta - I_unit * p.g * alpha * beta * beta;
    return {a1, a2};
}

// Untruncated s-dependent drift; the detuning is shifted to theta - s g.
inline CVec2 drift_s_exact(cplx alpha, const SystemParams& p, const Ordering& ord)
{
    SystemParams shifted = p;
    shifted.theta = p.theta - ord.s() * p.g;
    return drift(alpha, shifted);
}

// Jacobian d(A1, A2)/d(alpha, conj alpha) at a point of the conjugate manifold.
inline ComplexMat2 drift_jacobian_at(cplx alpha, const SystemParams& p)
{
    const cplx a11 = -cplx(p.gamma / 2.0, p.theta) + 2.0 * I_unit * p.g * std::norm(alpha);
    const cplx a12 = I_unit * p.g * alpha * alpha;
    return {a11, a12, std::conj(a12), std::conj(a11)};
}

// Jacobian on the doubled phase space at (alpha, beta).
inline ComplexMat2 drift_jacobian_at(cplx alpha, cplx beta, const SystemParams& p)
{
    const cplx a11 = -cplx(p.gamma / 2.0, p.theta) + 2.0 * I_unit * p.g * alpha * beta;
    const cplx a12 = I_unit * p.g * alpha * alpha;
    const cplx a21 = -I_unit * p.g * beta * beta;
    const cplx a22 = -cplx(p.gamma / 2.0, -p.theta) - 2.0 * I_unit * p.g * alpha * beta;
    return {a11, a12, a21, a22};
}

inline ComplexMat2 drift_jacobian(const SteadyState& ss, const SystemParams& p)
{
    return drift_jacobian_at(amplitude(ss, p), p);
}

// max Re eig(A) < 0
inline bool jacobian_is_stable(const ComplexMat2& a)
{
    const auto ev = eigenvalues(a);
    return std::max(ev[0].real(), ev[1].real()) < 0.0;
}

inline ComplexMat2 diffusion(const Ordering& ord, cplx alpha, cplx beta, const SystemParams& p)
{
    const double s = ord.s();
    const cplx off = (1.0 - s) * p.gamma / 2.0;
    return {I_unit * s * p.g * alpha * alpha, off, off, -I_unit * s * p.g * beta * beta};
}

inline ComplexMat2 diffusion(const Ordering& ord, cplx alpha, const SystemParams& p)
{
    return diffusion(ord, alpha, std::conj(alpha), p);
}

// Weights (w, w') with D^(1) = w D^(s) + w' D^(s').
inline std::pair<double, double> combination_weights(const Ordering& s, const Ordering& s_prime)
{
    const double a = s.s();
    const double b = s_prime.s();
    ensure(a != b, ErrorCode::EqualOrderings, "orderings must differ");
    return {(1.0 - b) / (a - b), (1.0 - a) / (b - a)};
}

inline ComplexMat2 combine_diffusion(const Ordering& s, const Ordering& s_prime, const ComplexMat2& ds,
                                     const ComplexMat2& ds_prime)
{
    const auto [w, w_prime] = combination_weights(s, s_prime);
    return w * ds + w_prime * ds_prime;
}

// Diffusion matrix for x = Re alpha, y = Im alpha.
inline RealMat2 diffusion_real(const Ordering& ord, double x, double y, const SystemParams& p)
{
    const double s = ord.s();
    const double iso = (1.0 - s) * p.gamma / 4.0;
    const double sgxy = s * p.g * x * y;
    const double off = 0.5 * s * p.g * (x * x - y * y);
    return {iso - sgxy, off, off, iso + sgxy};
}

// (d_plus, d_minus) = (1-s) gamma/4 +- |s g| |alpha|^2 / 2
inline std::pair<double, double> diffusion_eigenvalues(const Ordering& ord, cplx alpha, const SystemParams& p)
{
    const double s = ord.s();
    const double iso = (1.0 - s) * p.gamma / 4.0;
    const double spread = 0.5 * std::abs(s * p.g) * std::norm(alpha);
    return {iso + spread, iso - spread};
}

inline bool is_psd(const Ordering& ord, cplx alpha, const SystemParams& p)
{
    return diffusion_eigenvalues(ord, alpha, p).second >= -1e-12 * p.gamma;
}

// Lower-triangular real C with C C^T = D_xy. Requires D_xy PSD.
inline RealMat2 noise_factor_real(const Ordering& ord, cplx alpha, const SystemParams& p)
{
    ensure(is_psd(ord, alpha, p), ErrorCode::NonPositiveDiffusion,
           "diffusion matrix is not positive semidefinite at this amplitude (ordering s = "
               + ord.label() + ")");
    const RealMat2 d = diffusion_real(ord, alpha.real(), alpha.imag(), p);
    const double c11 = std::sqrt(std::max(d.m11, 0.0));
    const double c21 = c11 > 0.0 ? d.m21 / c11 : 0.0;
    const double c22 = std::sqrt(std::max(d.m22 - c21 * c21, 0.0));
    return {c11, 0.0, c21, c22};
}

// B with B B^T = D for complex symmetric D (transpose without conjugation),
// principal square roots throughout. Lower-triangular when |D11| is not small
// against the off-diagonal, upper-triangular (permuted pivot) when |D22| is;
// when both diagonals are small a balanced factor [[p, i q], [p, -i q']] keeps
// the entries of order sqrt|D12| instead of blowing up as 1/sqrt|D11|.
inline ComplexMat2 factor_symmetric(const ComplexMat2& d, double scale)
{
    const bool finite = std::isfinite(std::abs(d.m11)) && std::isfinite(std::abs(d.m12))
        && std::isfinite(std::abs(d.m21)) && std::isfinite(std::abs(d.m22));
    ensure(finite && scale > 0.0, ErrorCode::SingularPivot, "non-finite diffusion matrix");
    const cplx a = d.m11;
    const cplx c = 0.5 * (d.m12 + d.m21);
    const cplx e = d.m22;
    if (std::abs(c) <= 1e-14 * scale) {
        return ComplexMat2::diag(std::sqrt(a), std::sqrt(e));
    }
    const double pivot_floor = 0.1 * std::abs(c);
    if (std::abs(a) >= pivot_floor) {
        const cplx b11 = std::sqrt(a);
        const cplx b21 = c / b11;
        return {b11, 0.0, b21, std::sqrt(e - b21 * b21)};
    }
    if (std::abs(e) >= pivot_floor) {
        const cplx b22 = std::sqrt(e);
        const cplx b12 = c / b22;
        return {std::sqrt(a - b12 * b12), b12, 0.0, b22};
    }
    const cplx x = (c * c - a * e) / (2.0 * c - a - e);
    const cplx pp = std::sqrt(x);
    const cplx q = std::sqrt(x - a);
    ensure(std::abs(q) > 0.0, ErrorCode::SingularPivot, "degenerate diffusion matrix");
    const cplx q_prime = (c - x) / q;
    return {pp, I_unit * q, pp, -I_unit * q_prime};
}

// Noise factor B with B B^T = D^(s)(alpha). RealConjugate maps the real
// Cholesky factor of D_xy back to (alpha, conj alpha): row 1 is C_x + i C_y,
// row 2 its conjugate.
inline ComplexMat2 noise_factor(const Ordering& ord, cplx alpha, const SystemParams& p, NoiseMode mode)
{
    if (mode == NoiseMode::RealConjugate) {
        const RealMat2 c = noise_factor_real(ord, alpha, p);
        const cplx r1(c.m11, c.m21);
        const cplx r2(c.m12, c.m22);
        return {r1, r2, std::conj(r1), std::conj(r2)};
    }
    return factor_symmetric(diffusion(ord, alpha, p), p.gamma);
}

} // namespace sqz
