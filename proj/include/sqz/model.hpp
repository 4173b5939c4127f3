// model.hpp - dispersive optical bistability: parameters, scaling, steady states
//
// A single-ended Kerr cavity driven by a coherent pump. Physical parameters
// are (gamma, theta, g, E0); the steady-state analysis is done in the scaled
// coordinates (Delta, mu, eta) where the intensity characteristic reads
//     mu = I * (1 + (I - Delta)^2).

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "sqz/error.hpp"
#include "sqz/mat2.hpp"

namespace sqz {

// Cavity parameters in physical units (all rates in 1/time).
struct SystemParams {
    double gamma{2.0}; // intensity loss rate, equal to the output coupling rate
    double theta{0.0}; // cavity-pump detuning omega_c - omega
    double g{0.0};     // Kerr coupling, signed
    double E0{0.0};    // pump amplitude

    double gamma_out() const { return gamma; }
};

inline void validate(const SystemParams& p)
{
    ensure(p.gamma > 0.0 && std::isfinite(p.gamma), ErrorCode::NonPositiveInput, "gamma must be > 0");
    ensure(p.E0 >= 0.0 && std::isfinite(p.E0), ErrorCode::NonPositiveInput, "E0 must be >= 0");
    ensure(std::isfinite(p.theta) && std::isfinite(p.g), ErrorCode::NonPositiveInput,
           "theta and g must be finite");
}

// SI material constants entering the Kerr coupling.
struct PhysicalConstants {
    double chi{};      // third-order susceptibility (m^2/V^2), signed
    double epsilon{};  // dielectric constant of the medium (F/m)
    double epsilon0{8.8541878128e-12};
    double omega_c{};  // cavity angular frequency (rad/s)
    double V{};        // quantization volume (m^3)
    double hbar{1.054571817e-34};
};

// g = 3 eps0 hbar omega_c^2 chi / (eps^2 V), in 1/s.
inline double estimate_coupling(const PhysicalConstants& c)
{
    ensure(c.V > 0.0, ErrorCode::NonPositiveInput, "quantization volume must be > 0");
    ensure(c.epsilon > 0.0, ErrorCode::NonPositiveInput, "dielectric constant must be > 0");
    ensure(c.omega_c > 0.0, ErrorCode::NonPositiveInput, "cavity frequency must be > 0");
    ensure(c.epsilon0 > 0.0 && c.hbar > 0.0, ErrorCode::NonPositiveInput,
           "epsilon0 and hbar must be > 0");
    return 3.0 * c.epsilon0 * c.hbar * c.omega_c * c.omega_c * c.chi / (c.epsilon * c.epsilon * c.V);
}

struct ScaledParams {
    double Delta{0.0}; // 2 eta theta / gamma
    double mu{0.0};    // (2/gamma)^3 |g| E0^2
    int eta{1};        // sign(g)
};

inline ScaledParams scale_params(const SystemParams& p)
{
    validate(p);
    ensure(p.g != 0.0, ErrorCode::ZeroCoupling, "scaled coordinates need g != 0");
    const int eta = p.g > 0.0 ? 1 : -1;
    const double two_over_gamma = 2.0 / p.gamma;
    return {2.0 * eta * p.theta / p.gamma,
            two_over_gamma * two_over_gamma * two_over_gamma * std::abs(p.g) * p.E0 * p.E0, eta};
}

inline double state_equation_mu(double I, double Delta)
{
    ensure(I >= 0.0, ErrorCode::NegativeIntensity, "scaled intensity must be >= 0");
    const double detuned = I - Delta;
    return I * (1.0 + detuned * detuned);
}

// 3 I^2 - 4 Delta I + Delta^2 + 1, i.e. det(A)/(gamma/2)^2 of the drift Jacobian.
// Evaluated from the polynomial so it stays real for Delta^2 < 3.
inline double stability_factor(double I, double Delta)
{
    return 3.0 * I * I - 4.0 * Delta * I + Delta * Delta + 1.0;
}

// Intensities (I_minus, I_plus) at the folds of the characteristic. Present
// only for Delta >= sqrt(3); for Delta <= -sqrt(3) both folds would sit at
// negative intensity, so they are reported absent as well.
inline std::optional<std::pair<double, double>> turning_points(double Delta)
{
    const double disc = Delta * Delta - 3.0;
    // a few ulps of slack so that Delta = sqrt(3) still yields the fold
    if (disc < -8.0 * std::numeric_limits<double>::epsilon() || Delta < 0.0) {
        return std::nullopt;
    }
    const double root = std::sqrt(std::max(disc, 0.0));
    return std::pair{(2.0 * Delta - root) / 3.0, (2.0 * Delta + root) / 3.0};
}

enum class Stability { Stable, Unstable, Marginal };

constexpr const char* to_string(Stability s)
{
    switch (s) {
    case Stability::Stable: return "Stable";
    case Stability::Unstable: return "Unstable";
    case Stability::Marginal: return "Marginal";
    }
    return "?";
}

// Roots closer than this (in scaled intensity) are a tangency.
inline constexpr double kTangencyTolerance = 1e-8;

inline Stability classify_stability(double I, double Delta)
{
    ensure(I >= 0.0, ErrorCode::NegativeIntensity, "scaled intensity must be >= 0");
    const auto tp = turning_points(Delta);
    if (!tp) {
        return Stability::Stable;
    }
    const auto [lo, hi] = *tp;
    if (std::abs(I - lo) <= kTangencyTolerance || std::abs(I - hi) <= kTangencyTolerance) {
        return Stability::Marginal;
    }
    return (I > lo && I < hi) ? Stability::Unstable : Stability::Stable;
}

struct SteadyState {
    double I{0.0};   // scaled intensity 2|g| |alpha|^2 / gamma
    double phi{0.0}; // phase of alpha_bar, in (-pi, pi]
    // Unscaled amplitude; absent when only scaled parameters were supplied.
    std::optional<cplx> alpha_bar{};
    Stability stability{Stability::Stable};
    int multiplicity{1}; // 2 for a merged tangency root
};

// phi = atan2(eta (I - Delta), 1)
inline double steady_state_phase(double I, double Delta, int eta)
{
    return std::atan2(eta * (I - Delta), 1.0);
}

namespace detail {

// Real roots of I^3 - 2 Delta I^2 + (1 + Delta^2) I - mu = 0, unpolished.
inline std::vector<double> characteristic_roots(double Delta, double mu)
{
    const double shift = 2.0 * Delta / 3.0;
    const double p = 1.0 - Delta * Delta / 3.0;
    const double q = 2.0 * Delta * Delta * Delta / 27.0 + 2.0 * Delta / 3.0 - mu;
    const double disc = q * q / 4.0 + p * p * p / 27.0;

    std::vector<double> roots;
    if (disc > 0.0 || p >= 0.0) {
        const double sq = std::sqrt(std::max(disc, 0.0));
        const double a = -std::copysign(std::cbrt(std::abs(q) / 2.0 + sq), q);
        const double t = a != 0.0 ? a - p / (3.0 * a) : 0.0;
        roots.push_back(t + shift);
    } else {
        const double r = 2.0 * std::sqrt(-p / 3.0);
        const double arg = std::clamp(3.0 * q / (p * r), -1.0, 1.0);
        const double base = std::acos(arg) / 3.0;
        for (int k = 0; k < 3; ++k) {
            roots.push_back(r * std::cos(base - 2.0 * std::numbers::pi * k / 3.0) + shift);
        }
    }
    return roots;
}

inline double polish_root(double I, double Delta, double mu)
{
    for (int step = 0; step < 2; ++step) {
        const double detuned = I - Delta;
        const double f = I * (1.0 + detuned * detuned) - mu;
        const double df = stability_factor(I, Delta);
        if (std::abs(df) < 1e-10) {
            break;
        }
        const double next = I - f / df;
        const double dn = next - Delta;
        if (std::abs(next * (1.0 + dn * dn) - mu) > std::abs(f)) {
            break;
        }
        I = next;
    }
    return I;
}

} // namespace detail

inline SteadyState make_steady_state(double I, const ScaledParams& sp)
{
    SteadyState st;
    st.I = I;
    st.phi = steady_state_phase(I, sp.Delta, sp.eta);
    st.stability = classify_stability(I, sp.Delta);
    return st;
}

// All nonnegative roots of the characteristic, ascending. A tangency is
// reported once with multiplicity 2 and Marginal stability.
inline std::vector<SteadyState> steady_states(const ScaledParams& sp)
{
    ensure(sp.mu >= 0.0 && std::isfinite(sp.mu), ErrorCode::NonPositiveInput, "mu must be >= 0");
    ensure(sp.eta == 1 || sp.eta == -1, ErrorCode::InvalidConfig, "eta must be +1 or -1");
    const double Delta = sp.Delta;
    const double mu = sp.mu;

    std::vector<SteadyState> out;

    // Exact tangency: mu sits on a fold of the characteristic.
    if (const auto tp = turning_points(Delta)) {
        for (const double fold : {tp->first, tp->second}) {
            const double mu_fold = state_equation_mu(fold, Delta);
            if (std::abs(mu - mu_fold) <= 1e-12 * std::max(1.0, mu)) {
                const double simple = 2.0 * Delta - 2.0 * fold; // roots sum to 2 Delta
                SteadyState dbl = make_steady_state(fold, sp);
                dbl.stability = Stability::Marginal;
                dbl.multiplicity = 2;
                out.push_back(dbl);
                if (std::abs(simple - fold) > kTangencyTolerance && simple >= 0.0) {
                    out.push_back(make_steady_state(detail::polish_root(simple, Delta, mu), sp));
                }
                std::sort(out.begin(), out.end(),
                          [](const SteadyState& a, const SteadyState& b) { return a.I < b.I; });
                return out;
            }
        }
    }

    std::vector<double> roots;
    for (double r : detail::characteristic_roots(Delta, mu)) {
        r = detail::polish_root(r, Delta, mu);
        if (r < -1e-12) {
            continue;
        }
        roots.push_back(std::max(r, 0.0));
    }
    std::sort(roots.begin(), roots.end());

    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (i + 1 < roots.size() && roots[i + 1] - roots[i] < kTangencyTolerance) {
            SteadyState dbl = make_steady_state(0.5 * (roots[i] + roots[i + 1]), sp);
            dbl.stability = Stability::Marginal;
            dbl.multiplicity = 2;
            out.push_back(dbl);
            ++i;
            continue;
        }
        out.push_back(make_steady_state(roots[i], sp));
    }
    return out;
}

// Unscaled amplitude of a steady state: stored value, or reconstructed as
// sqrt(I gamma / (2|g|)) e^{i phi}.
inline cplx amplitude(const SteadyState& st, const SystemParams& p)
{
    if (st.alpha_bar) {
        return *st.alpha_bar;
    }
    ensure(p.g != 0.0, ErrorCode::ZeroCoupling, "cannot reconstruct amplitude with g = 0");
    return std::sqrt(st.I * p.gamma / (2.0 * std::abs(p.g))) * std::polar(1.0, st.phi);
}

// Steady states of the physical model. For g = 0 the cavity is linear and the
// unique state is alpha = E0 / (gamma/2 + i theta).
inline std::vector<SteadyState> steady_states(const SystemParams& p)
{
    validate(p);
    if (p.g == 0.0) {
        SteadyState st;
        const cplx a = p.E0 / cplx(p.gamma / 2.0, p.theta);
        st.alpha_bar = a;
        st.phi = p.E0 > 0.0 ? std::arg(a) : std::atan2(-p.theta, p.gamma / 2.0);
        return {st};
    }
    auto states = steady_states(scale_params(p));
    for (auto& st : states) {
        st.alpha_bar = amplitude(st, p);
    }
    return states;
}

// Physical parameters realising scaled (Delta, I, eta) for a given gamma and
// coupling magnitude. Spectra do not depend on |g|; amplitudes scale as 1/sqrt|g|.
inline SystemParams physical_params(double Delta, double I, int eta, double gamma, double g_abs)
{
    ensure(gamma > 0.0, ErrorCode::NonPositiveInput, "gamma must be > 0");
    ensure(g_abs > 0.0, ErrorCode::NonPositiveInput, "|g| must be > 0");
    ensure(eta == 1 || eta == -1, ErrorCode::InvalidConfig, "eta must be +1 or -1");
    const double mu = state_equation_mu(I, Delta);
    SystemParams p;
    p.gamma = gamma;
    p.theta = eta * Delta * gamma / 2.0;
    p.g = eta * g_abs;
    p.E0 = std::sqrt(mu * gamma * gamma * gamma / (8.0 * g_abs));
    return p;
}

// The steady state with scaled intensity I under physical parameters p,
// which must realise mu(I) (as produced by physical_params).
inline SteadyState steady_state_at(double I, const SystemParams& p)
{
    const ScaledParams sp = scale_params(p);
    SteadyState st = make_steady_state(I, sp);
    st.alpha_bar = amplitude(st, p);
    return st;
}

} // namespace sqz
