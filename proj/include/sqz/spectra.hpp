// spectra.hpp - linearized spectral matrices, squeezing spectra, intracavity variance
//
// The spectral matrix of ordering s is the resolvent product
//
//     S^(s)(w) = (A + i w)^-1 D^(s) (A^T - i w)^-1
//
// with A the drift Jacobian and D^(s) the diffusion matrix at the steady state.
// Quadrature spectra follow from
//
//     V_s(w, phi) = 1/4 [S11 e^{-2i phi} + S22 e^{2i phi} + S12 + S21]
//
// and the output squeezing spectrum is S_out = 1/4 + gamma_out V_P. Because
// D^(1) is an affine combination of any two D^(s), the same affine
// combination of two s-ordered spectra reproduces V_P exactly.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sqz/error.hpp"
#include "sqz/mat2.hpp"
#include "sqz/model.hpp"
#include "sqz/phase_space.hpp"
#include "sqz/quadrature.hpp"

namespace sqz {

struct SpectralMatrix {
    double omega{0.0};
    ComplexMat2 m{};
    Ordering ordering{Ordering::generalized_p()};

    cplx S11() const { return m.m11; }
    cplx S12() const { return m.m12; }
    cplx S21() const { return m.m21; }
    cplx S22() const { return m.m22; }
};

enum class Provenance { Analytic, ClosedForm, Simulated };

// A spectral matrix sampled on a frequency grid.
struct SpectrumSeries {
    std::vector<double> omega;
    std::vector<ComplexMat2> values;
    Ordering ordering{Ordering::generalized_p()};
    SystemParams params{};
    Provenance provenance{Provenance::Analytic};
};

// (gamma/2)^-2 det(A): equals 3 I^2 - 4 Delta I + Delta^2 + 1 in scaled units.
inline double stability_factor(const ComplexMat2& jac, double gamma)
{
    return jac.det().real() / (0.25 * gamma * gamma);
}

inline void require_not_unstable(const SteadyState& ss)
{
    ensure(ss.stability != Stability::Unstable, ErrorCode::UnstableState,
           "no stationary spectrum on the unstable branch (I = " + std::to_string(ss.I) + ")");
}

// Resolvent product, valid for any SystemParams including g = 0.
inline SpectralMatrix spectral_matrix_numeric(const Ordering& ord, const SteadyState& ss, const SystemParams& p,
                                              double omega)
{
    validate(p);
    require_not_unstable(ss);
    const cplx a = amplitude(ss, p);
    const ComplexMat2 jac = drift_jacobian_at(a, p);
    ensure(ss.stability == Stability::Marginal || jacobian_is_stable(jac), ErrorCode::UnstableState,
           "drift Jacobian has an eigenvalue with nonnegative real part");
    const ComplexMat2 diff = diffusion(ord, a, std::conj(a), p);

    const cplx iw = I_unit * omega;
    const ComplexMat2 left = jac + ComplexMat2::diag(iw, iw);
    const ComplexMat2 right = jac.transpose() - ComplexMat2::diag(iw, iw);
    const double scale = std::max(jac.max_abs(), std::abs(omega));
    ensure(std::abs(left.det()) > 1e-15 * scale * scale, ErrorCode::SingularResolvent,
           "A + i w I is singular (marginal state at w = 0)");
    return {omega, left.inverse() * diff * right.inverse(), ord};
}

// Closed form in scaled units; Omega = 2 w / gamma. The generalized-P
// ordering uses s = 1. Divergent entries come back as inf/nan at a fold with Omega = 0.
inline SpectralMatrix spectral_matrix_closed(const Ordering& ord, const ScaledParams& sp, double I, double Omega,
                                             double gamma)
{
    const double s = ord.s();
    const double Delta = sp.Delta;
    const double eta = sp.eta;
    const double stab = stability_factor(I, Delta);
    const double pref = 2.0 / gamma;
    const cplx phase = std::polar(1.0, 2.0 * steady_state_phase(I, Delta, sp.eta));

    const auto denominator = [&](double w) {
        const double t = w * w - stab;
        return t * t + 4.0 * w * w;
    };
    const auto s12 = [&](double w) {
        return pref * (2.0 * I * I + (1.0 - s) * (w * w + stab - 2.0 * eta * w * (2.0 * I - Delta)))
            / denominator(w);
    };
    const cplx s11 = pref * I * phase
        * cplx(2.0 * (Delta - 2.0 * I), eta * (2.0 + s * (Omega * Omega - stab))) / denominator(Omega);

    return {gamma * Omega / 2.0, {s11, s12(Omega), s12(-Omega), std::conj(s11)}, ord};
}

// Affine combination of two s-ordered spectra; reproduces the generalized-P spectrum.
inline SpectralMatrix combine_spectra(const Ordering& s, const Ordering& s_prime, const SpectralMatrix& ss,
                                      const SpectralMatrix& ss_prime)
{
    ensure(ss.omega == ss_prime.omega, ErrorCode::InvalidConfig, "spectra must share the frequency");
    const auto [w, w_prime] = combination_weights(s, s_prime);
    return {ss.omega, w * ss.m + w_prime * ss_prime.m, Ordering::generalized_p()};
}

inline SpectrumSeries analytic_series(const Ordering& ord, const SteadyState& ss, const SystemParams& p,
                                      const std::vector<double>& omegas)
{
    SpectrumSeries out;
    out.omega = omegas;
    out.ordering = ord;
    out.params = p;
    out.values.reserve(omegas.size());
    for (const double w : omegas) {
        out.values.push_back(spectral_matrix_numeric(ord, ss, p, w).m);
    }
    return out;
}

// --- quadrature spectra --------------------------------------------------

struct QuadratureValue {
    double omega{0.0};
    double value{0.0};     // V_s(w, phi), real
    double imag_part{0.0}; // discarded imaginary part of the complex expression
    double phi{0.0};       // local-oscillator phase
    double psi{0.0};       // 2 (phi_ss - phi)
};

inline cplx quadrature_complex(const ComplexMat2& s, double phi)
{
    const cplx rot = std::polar(1.0, -2.0 * phi);
    return 0.25 * (s.m11 * rot + s.m22 * std::conj(rot) + s.m12 + s.m21);
}

inline QuadratureValue quadrature_from_matrix(const SpectralMatrix& sm, double phi, double phi_ss)
{
    const cplx v = quadrature_complex(sm.m, phi);
    return {sm.omega, v.real(), v.imag(), phi, 2.0 * (phi_ss - phi)};
}

// Matrix path: V_s(w, phi) from the resolvent spectral matrix.
inline QuadratureValue quadrature_spectrum(const Ordering& ord, const SteadyState& ss, const SystemParams& p,
                                           double phi, double omega)
{
    return quadrature_from_matrix(spectral_matrix_numeric(ord, ss, p, omega), phi, ss.phi);
}

// Closed form of gamma * V_s in scaled units as a function of psi and Omega.
inline double gamma_quadrature_closed(double s, const ScaledParams& sp, double I, double psi, double Omega)
{
    const double Delta = sp.Delta;
    const double stab = stability_factor(I, Delta);
    const double w2 = Omega * Omega;
    const double den = (w2 - stab) * (w2 - stab) + 4.0 * w2;
    const double num = 2.0 * I * (Delta - 2.0 * I) * std::cos(psi)
        - sp.eta * I * (2.0 + s * (w2 - stab)) * std::sin(psi) + 2.0 * I * I + (1.0 - s) * (w2 + stab);
    return num / den;
}

// V(psi) = a cos psi + b sin psi + c
struct PhaseDecomposition {
    double a{0.0};
    double b{0.0};
    double c{0.0};

    double at(double psi) const { return a * std::cos(psi) + b * std::sin(psi) + c; }
};

struct PhaseMinimum {
    double psi_opt{0.0};
    double value{0.0};
};

inline PhaseMinimum min_over_phase(double a, double b, double c)
{
    if (a == 0.0 && b == 0.0) {
        return {0.0, c};
    }
    return {std::atan2(-b, -a), c - std::hypot(a, b)};
}

inline PhaseMinimum min_over_phase(const PhaseDecomposition& d) { return min_over_phase(d.a, d.b, d.c); }

// psi-decomposition of V_s(w, .) from a spectral matrix: with
// T = S11 e^{-2i phi_ss}, V = Re(T e^{i psi})/2 + (S12 + S21)/4.
inline PhaseDecomposition phase_decomposition(const ComplexMat2& s, double phi_ss)
{
    const cplx t = s.m11 * std::polar(1.0, -2.0 * phi_ss);
    return {0.5 * t.real(), -0.5 * t.imag(), 0.25 * (s.m12 + s.m21).real()};
}

// Local-oscillator phase realising a given psi.
inline double lo_phase_from_psi(double psi, double phi_ss) { return phi_ss - 0.5 * psi; }

// --- output squeezing ----------------------------------------------------

struct DirectP {};
struct OrderingPair {
    Ordering s;
    Ordering s_prime;
};
using SqueezingRoute = std::variant<DirectP, OrderingPair>;

inline double squeezing_spectrum_out(const SteadyState& ss, const SystemParams& p, double phi, double omega,
                                     const SqueezingRoute& route = DirectP{})
{
    double v_p = 0.0;
    if (const auto* pair = std::get_if<OrderingPair>(&route)) {
        const auto [w, w_prime] = combination_weights(pair->s, pair->s_prime);
        v_p = w * quadrature_spectrum(pair->s, ss, p, phi, omega).value
            + w_prime * quadrature_spectrum(pair->s_prime, ss, p, phi, omega).value;
    } else {
        v_p = quadrature_spectrum(Ordering::generalized_p(), ss, p, phi, omega).value;
    }
    return 0.25 + p.gamma_out() * v_p;
}

// min over phi of S_out at one frequency.
inline PhaseMinimum squeezing_envelope(const SteadyState& ss, const SystemParams& p, double omega)
{
    const auto sm = spectral_matrix_numeric(Ordering::generalized_p(), ss, p, omega);
    PhaseDecomposition d = phase_decomposition(sm.m, ss.phi);
    d.a *= p.gamma_out();
    d.b *= p.gamma_out();
    d.c = 0.25 + p.gamma_out() * d.c;
    return min_over_phase(d);
}

// --- intracavity variance ------------------------------------------------

inline constexpr double kTurningPointGuard = 1e-6;
inline constexpr double kOmegaMaxScaled = 1e3;

// Frequency-integrated psi-decomposition of V_s(phi) = (1/2 pi) int dw V_s(w, phi),
// plus the ordering shift so that V(phi) = V_s(phi) + s/4.
struct IntracavityProfile {
    PhaseDecomposition vs{};
    double s{0.0};
    double phi_ss{0.0};
    double quadrature_error{0.0};

    double V_s(double phi) const { return vs.at(2.0 * (phi_ss - phi)); }
    double V(double phi) const { return V_s(phi) + s / 4.0; }

    // min over phi of V, with the optimal local-oscillator phase
    PhaseMinimum minimum() const
    {
        PhaseMinimum m = min_over_phase(vs);
        m.value += s / 4.0;
        return m;
    }
    double optimal_lo_phase() const { return lo_phase_from_psi(min_over_phase(vs).psi_opt, phi_ss); }
};

inline IntracavityProfile intracavity_profile(const Ordering& ord, const SteadyState& ss, const SystemParams& p)
{
    validate(p);
    require_not_unstable(ss);
    const cplx a = amplitude(ss, p);
    const ComplexMat2 jac = drift_jacobian_at(a, p);
    const double stab = stability_factor(jac, p.gamma);
    ensure(std::abs(stab) >= kTurningPointGuard, ErrorCode::DivergentIntegral,
           "integrand diverges at w = 0 near a turning point (stability factor = " + std::to_string(stab) + ")");

    const double half_gamma = 0.5 * p.gamma;
    const double w_max = half_gamma * kOmegaMaxScaled;

    // Geometric breakpoints resolve the low-frequency peak of width ~ sqrt(stab).
    std::vector<double> breaks{0.0};
    for (double b = half_gamma * std::min(1.0, std::sqrt(std::abs(stab))) / 16.0; b < w_max; b *= 4.0) {
        breaks.push_back(b);
    }
    breaks.push_back(w_max);

    // Both half-lines at once: V(w) != V(-w) in general.
    const auto integrand = [&](double w) {
        const PhaseDecomposition hi = phase_decomposition(spectral_matrix_numeric(ord, ss, p, w).m, ss.phi);
        const PhaseDecomposition lo = phase_decomposition(spectral_matrix_numeric(ord, ss, p, -w).m, ss.phi);
        return std::array<double, 3>{hi.a + lo.a, hi.b + lo.b, hi.c + lo.c};
    };
    const auto r = integrate_piecewise<3>(integrand, breaks);

    // Tail beyond w_max: S -> D / w^2, so each component decays as its D-value / w^2.
    const PhaseDecomposition tail = phase_decomposition(diffusion(ord, a, std::conj(a), p), ss.phi);
    const double norm = 1.0 / (2.0 * std::numbers::pi);

    IntracavityProfile out;
    out.s = ord.s();
    out.phi_ss = ss.phi;
    out.vs.a = (r.value[0] + 2.0 * tail.a / w_max) * norm;
    out.vs.b = (r.value[1] + 2.0 * tail.b / w_max) * norm;
    out.vs.c = (r.value[2] + 2.0 * tail.c / w_max) * norm;
    out.quadrature_error = r.error * norm;
    return out;
}

struct IntracavityVariance {
    double V_s{0.0};
    double V{0.0};
};

inline IntracavityVariance intracavity_variance(const Ordering& ord, const SteadyState& ss, const SystemParams& p,
                                                double phi)
{
    const IntracavityProfile prof = intracavity_profile(ord, ss, p);
    return {prof.V_s(phi), prof.V(phi)};
}

// --- approach to the upper turning point ---------------------------------

struct TurningPointSample {
    double delta{0.0};            // relative offset I / I_plus - 1
    double I{0.0};
    double stability_factor{0.0};
    double V_min{0.0};            // min over phi of the intracavity V
    double psi_opt{0.0};
    double S11_zero{0.0};         // |S11(w = 0)|
};

struct TurningPointApproach {
    std::vector<TurningPointSample> samples;
    double V_min_limit{0.0}; // polynomial extrapolation of V_min to delta = 0
};

// Neville evaluation at x = 0 of the interpolating polynomial through (x_k, y_k).
inline double extrapolate_to_zero(std::span<const double> x, std::span<const double> y)
{
    ensure(x.size() == y.size() && !x.empty(), ErrorCode::InsufficientData, "need matching samples");
    std::vector<double> t(y.begin(), y.end());
    for (std::size_t m = 1; m < t.size(); ++m) {
        for (std::size_t k = 0; k + m < t.size(); ++k) {
            t[k] = (x[k + m] * t[k] - x[k] * t[k + 1]) / (x[k + m] - x[k]);
        }
    }
    return t.front();
}

// Stable upper-branch states I = I_plus (1 + delta) for each delta > 0.
inline TurningPointApproach approach_turning_point(double Delta, int eta, double gamma, std::span<const double> deltas,
                                                   const Ordering& ord = Ordering::wigner(), double g_abs = 1e-3)
{
    const auto tp = turning_points(Delta);
    ensure(tp.has_value(), ErrorCode::InvalidConfig, "no turning points for Delta < sqrt(3)");
    ensure(!deltas.empty(), ErrorCode::InsufficientData, "empty offset sequence");
    TurningPointApproach out;
    std::vector<double> xs;
    std::vector<double> ys;
    for (const double delta : deltas) {
        ensure(delta > 0.0, ErrorCode::InvalidConfig, "offsets must be > 0");
        const double I = tp->second * (1.0 + delta);
        const SystemParams p = physical_params(Delta, I, eta, gamma, g_abs);
        const SteadyState ss = steady_state_at(I, p);
        const PhaseMinimum m = intracavity_profile(ord, ss, p).minimum();
        const double s11 = std::abs(spectral_matrix_numeric(ord, ss, p, 0.0).S11());
        out.samples.push_back({delta, I, stability_factor(I, Delta), m.value, m.psi_opt, s11});
        xs.push_back(delta);
        ys.push_back(m.value);
    }
    out.V_min_limit = extrapolate_to_zero(xs, ys);
    return out;
}

} // namespace sqz
