// identities.hpp - randomized battery of the exact algebraic identities

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "sqz/model.hpp"
#include "sqz/phase_space.hpp"
#include "sqz/spectra.hpp"

namespace sqz::cli {

struct IdentityResult {
    std::string name;
    double tolerance{0.0};
    double max_residual{0.0};
    int trials{0};

    bool passed() const { return max_residual <= tolerance; }
};

// One random stable configuration.
struct Sample {
    double Delta{0.0};
    int eta{1};
    double I{0.0};
    double gamma{2.0};
    Ordering s{Ordering::wigner()};
    Ordering s_prime{Ordering::husimi_q()};
    double Omega{0.0};
    SystemParams p{};
    SteadyState ss{};
};

class SampleGenerator {
public:
    explicit SampleGenerator(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

    Sample next()
    {
        Sample x;
        x.Delta = uniform(0.0, 4.0);
        x.eta = uniform(0.0, 1.0) < 0.5 ? 1 : -1;
        x.gamma = uniform(0.5, 4.0);
        do {
            x.I = uniform(0.05, 4.0);
        } while (classify_stability(x.I, x.Delta) != Stability::Stable
                 || stability_factor(x.I, x.Delta) < 1e-2);
        const double s = uniform(-1.0, 1.0);
        double s_prime = uniform(-1.0, 1.0);
        while (std::abs(s_prime - s) < 1e-3) {
            s_prime = uniform(-1.0, 1.0);
        }
        x.s = Ordering::s_ordered(s);
        x.s_prime = Ordering::s_ordered(s_prime);
        x.Omega = uniform(-20.0, 20.0);
        x.p = physical_params(x.Delta, x.I, x.eta, x.gamma, uniform(1e-4, 1e-1));
        x.ss = steady_state_at(x.I, x.p);
        return x;
    }

private:
    std::mt19937_64 rng_;
};

inline double rel_to(double residual, double scale) { return scale > 0.0 ? residual / scale : residual; }

// Runs every identity over `trials` random samples; tolerances are multiplied by tol_scale.
inline std::vector<IdentityResult> run_identity_battery(int trials, std::uint64_t seed, double tol_scale = 1.0)
{
    std::vector<IdentityResult> out{
        {"cross_ordering_combination", 1e-10 * tol_scale, 0.0, trials},
        {"closed_form_vs_resolvent", 1e-10 * tol_scale, 0.0, trials},
        {"diffusion_combination", 1e-14 * tol_scale, 0.0, trials},
        {"conjugate_structure", 1e-12 * tol_scale, 0.0, trials},
        {"diffusion_eigenvalues", 1e-12 * tol_scale, 0.0, trials},
        {"quadrature_closed_form", 1e-10 * tol_scale, 0.0, trials},
        {"quadrature_reality", 1e-10 * tol_scale, 0.0, trials},
    };
    const auto bump = [&](std::size_t k, double r) { out[k].max_residual = std::max(out[k].max_residual, r); };

    SampleGenerator gen(seed);
    const Ordering P = Ordering::generalized_p();
    for (int t = 0; t < trials; ++t) {
        const Sample x = gen.next();
        const double w = x.gamma * x.Omega / 2.0;
        const auto sp = scale_params(x.p);

        const auto S_s = spectral_matrix_numeric(x.s, x.ss, x.p, w);
        const auto S_sp = spectral_matrix_numeric(x.s_prime, x.ss, x.p, w);
        const auto S_P = spectral_matrix_numeric(P, x.ss, x.p, w);
        bump(0, max_rel_diff(combine_spectra(x.s, x.s_prime, S_s, S_sp).m, S_P.m));

        for (const auto* o : {&x.s, &P}) {
            const auto closed = spectral_matrix_closed(*o, sp, x.I, x.Omega, x.gamma);
            bump(1, max_rel_diff(closed.m, spectral_matrix_numeric(*o, x.ss, x.p, w).m));
        }

        const cplx a = amplitude(x.ss, x.p);
        const auto D_s = diffusion(x.s, a, x.p);
        const auto D_sp = diffusion(x.s_prime, a, x.p);
        const auto [cw, cw_prime] = combination_weights(x.s, x.s_prime);
        const double magnitude = std::abs(cw) * D_s.max_abs() + std::abs(cw_prime) * D_sp.max_abs();
        bump(2, rel_to(max_abs_diff(combine_diffusion(x.s, x.s_prime, D_s, D_sp), diffusion(P, a, x.p)),
                       magnitude));

        const auto S_minus = spectral_matrix_numeric(x.s, x.ss, x.p, -w);
        bump(3, std::abs(S_s.m.m22 - std::conj(S_s.m.m11)) / std::abs(S_s.m.m11));
        bump(3, std::abs(S_s.m.m21 - S_minus.m.m12) / std::abs(S_minus.m.m12));

        const RealMat2 dxy = diffusion_real(x.s, a.real(), a.imag(), x.p);
        Eigen::Matrix2d m;
        m << dxy.m11, dxy.m12, dxy.m21, dxy.m22;
        const Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(m).eigenvalues();
        const auto [d_plus, d_minus] = diffusion_eigenvalues(x.s, a, x.p);
        const double escale = std::max(std::abs(ev(0)), std::abs(ev(1)));
        bump(4, rel_to(std::max(std::abs(d_plus - ev(1)), std::abs(d_minus - ev(0))), escale));

        const double psi = gen.uniform(-std::numbers::pi, std::numbers::pi);
        const double phi = lo_phase_from_psi(psi, x.ss.phi);
        const QuadratureValue q = quadrature_from_matrix(S_s, phi, x.ss.phi);
        const PhaseDecomposition d = phase_decomposition(S_s.m, x.ss.phi);
        const double qscale = x.gamma * (std::abs(d.a) + std::abs(d.b) + std::abs(d.c));
        bump(5, rel_to(std::abs(gamma_quadrature_closed(x.s.s(), sp, x.I, psi, x.Omega) - x.gamma * q.value), qscale));
        bump(6, rel_to(x.gamma * std::abs(q.imag_part), qscale));
    }
    return out;
}

} // namespace sqz::cli
