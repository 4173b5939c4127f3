// langevin.hpp - Euler-Maruyama integration of the Ito Langevin equations
//
// Linearized regime:  d(dv) = A dv dt + B dW     (A, B frozen at the steady state)
// Nonlinear regime:   dv    = A(v) dt + B(v) dW
//
// RealConjugate keeps the second coordinate equal to conj(alpha) and draws
// real noise from the Cholesky factor of the (x, y) diffusion matrix, which
// therefore has to be positive semidefinite. ComplexDoubled evolves (alpha, beta)
// as independent complex coordinates with B B^T = D (no conjugation).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "sqz/error.hpp"
#include "sqz/mat2.hpp"
#include "sqz/model.hpp"
#include "sqz/phase_space.hpp"
#include "sqz/rng.hpp"

namespace sqz {

enum class Regime { Linearized, Nonlinear };

constexpr const char* to_string(Regime r) { return r == Regime::Linearized ? "linearized" : "nonlinear"; }
constexpr const char* to_string(NoiseMode m) { return m == NoiseMode::RealConjugate ? "real" : "complex"; }

struct SimConfig {
    double dt{0.01};
    std::int64_t n_steps{0};  // total steps, burn-in included
    std::int64_t n_burnin{0}; // leading steps discarded
    std::int64_t n_trajectories{1};
    std::uint64_t seed{0};
    NoiseMode mode{NoiseMode::RealConjugate};
    Regime regime{Regime::Linearized};
    Ordering ordering{Ordering::wigner()};

    std::int64_t n_recorded() const { return n_steps - n_burnin; }
};

// Defaults tied to the cavity linewidth: dt = 0.01 (2/gamma), burn-in of ten segments.
inline SimConfig default_sim_config(double gamma, std::int64_t segment_len = 4096)
{
    SimConfig cfg;
    cfg.dt = 0.01 * 2.0 / gamma;
    cfg.n_burnin = 10 * segment_len;
    cfg.n_steps = cfg.n_burnin + 128 * segment_len;
    cfg.n_trajectories = 16;
    return cfg;
}

// Checks the configuration invariants against the linearization at the steady state.
inline void validate(const SimConfig& cfg, const ComplexMat2& jacobian)
{
    ensure(cfg.dt > 0.0 && std::isfinite(cfg.dt), ErrorCode::InvalidConfig, "dt must be > 0");
    ensure(cfg.n_steps > 0, ErrorCode::InvalidConfig, "n_steps must be > 0");
    ensure(cfg.n_burnin >= 0 && cfg.n_burnin < cfg.n_steps, ErrorCode::InvalidConfig,
           "n_burnin must lie in [0, n_steps)");
    ensure(cfg.n_trajectories > 0, ErrorCode::InvalidConfig, "n_trajectories must be > 0");

    const auto ev = eigenvalues(jacobian);
    const double rate = std::max(std::abs(ev[0]), std::abs(ev[1]));
    ensure(cfg.dt * rate < 0.1, ErrorCode::InvalidConfig,
           "dt * max|eig(A)| = " + std::to_string(cfg.dt * rate) + " violates the stability guard (< 0.1)");

    if (cfg.ordering.is_generalized_p()) {
        ensure(cfg.mode == NoiseMode::ComplexDoubled, ErrorCode::InvalidConfig,
               "the generalized P representation needs the doubled (complex) noise mode");
    }
    if (cfg.regime == Regime::Nonlinear) {
        const bool wigner_real = !cfg.ordering.is_generalized_p() && cfg.ordering.s() == 0.0
            && cfg.mode == NoiseMode::RealConjugate;
        const bool positive_p = cfg.ordering.is_generalized_p() && cfg.mode == NoiseMode::ComplexDoubled;
        ensure(wigner_real || positive_p, ErrorCode::InvalidConfig,
               "nonlinear simulation is only defined for s = 0 with real noise (diffusion PSD everywhere) or "
               "the generalized P representation with complex noise; ordering s = "
                   + cfg.ordering.label() + " is rejected");
    }
}

struct Trajectory {
    SimConfig config{};
    std::uint64_t substream{0};
    // (alpha, second coordinate) per step after burn-in. Fluctuations about the
    // steady state in the linearized regime, full amplitudes in the nonlinear one.
    std::vector<CVec2> samples;

    double dt() const { return config.dt; }
};

namespace detail {

inline void check_bounded(const CVec2& v, double bound, std::int64_t step)
{
    const bool ok = std::isfinite(v[0].real()) && std::isfinite(v[0].imag()) && std::isfinite(v[1].real())
        && std::isfinite(v[1].imag()) && std::abs(v[0]) <= bound && std::abs(v[1]) <= bound;
    ensure(ok, ErrorCode::TrajectoryDiverged,
           "trajectory left the linearization basin at step " + std::to_string(step));
}

} // namespace detail

// One trajectory from substream `index` of cfg.seed.
inline Trajectory simulate(const SimConfig& cfg, const SteadyState& ss, const SystemParams& p,
                           std::uint64_t index = 0)
{
    validate(p);
    const cplx abar = amplitude(ss, p);
    const ComplexMat2 jac = drift_jacobian_at(abar, p);
    validate(cfg, jac);

    Trajectory traj;
    traj.config = cfg;
    traj.substream = index;
    traj.samples.reserve(static_cast<std::size_t>(cfg.n_recorded()));

    NormalStream rng(cfg.seed, index);
    const double sqdt = std::sqrt(cfg.dt);
    const double dt = cfg.dt;
    const double bound = 1e3 * std::max(std::abs(abar), 1.0);
    const Ordering& ord = cfg.ordering;

    const auto record = [&](std::int64_t step, const CVec2& v) {
        if (step >= cfg.n_burnin) {
            traj.samples.push_back(v);
        }
    };

    if (cfg.regime == Regime::Linearized) {
        if (cfg.mode == NoiseMode::RealConjugate) {
            const RealMat2 c = noise_factor_real(ord, abar, p);
            const cplx b1(c.m11, c.m21);
            const cplx b2(c.m12, c.m22);
            cplx d{0.0};
            for (std::int64_t n = 0; n < cfg.n_steps; ++n) {
                const auto [xi1, xi2] = rng.normal_pair();
                d += (jac.m11 * d + jac.m12 * std::conj(d)) * dt + (b1 * xi1 + b2 * xi2) * sqdt;
                const CVec2 v{d, std::conj(d)};
                if ((n & 1023) == 0) {
                    detail::check_bounded(v, bound, n);
                }
                record(n, v);
            }
        } else {
            const ComplexMat2 b = noise_factor(ord, abar, p, NoiseMode::ComplexDoubled);
            CVec2 d{0.0, 0.0};
            for (std::int64_t n = 0; n < cfg.n_steps; ++n) {
                const auto [xi1, xi2] = rng.normal_pair();
                const CVec2 drift_part = jac * d;
                d[0] += drift_part[0] * dt + (b.m11 * xi1 + b.m12 * xi2) * sqdt;
                d[1] += drift_part[1] * dt + (b.m21 * xi1 + b.m22 * xi2) * sqdt;
                if ((n & 1023) == 0) {
                    detail::check_bounded(d, bound, n);
                }
                record(n, d);
            }
        }
    } else if (cfg.mode == NoiseMode::RealConjugate) {
        cplx a = abar;
        for (std::int64_t n = 0; n < cfg.n_steps; ++n) {
            const RealMat2 c = noise_factor_real(ord, a, p); // throws once D_xy loses PSD
            const auto [xi1, xi2] = rng.normal_pair();
            const cplx noise(c.m11 * xi1 + c.m12 * xi2, c.m21 * xi1 + c.m22 * xi2);
            a += drift(a, p)[0] * dt + noise * sqdt;
            const CVec2 v{a, std::conj(a)};
            detail::check_bounded(v, bound, n);
            record(n, v);
        }
    } else {
        CVec2 v{abar, std::conj(abar)};
        for (std::int64_t n = 0; n < cfg.n_steps; ++n) {
            const ComplexMat2 b = factor_symmetric(diffusion(ord, v[0], v[1], p), p.gamma);
            const CVec2 f = drift(v[0], v[1], p);
            const auto [xi1, xi2] = rng.normal_pair();
            v[0] += f[0] * dt + (b.m11 * xi1 + b.m12 * xi2) * sqdt;
            v[1] += f[1] * dt + (b.m21 * xi1 + b.m22 * xi2) * sqdt;
            detail::check_bounded(v, bound, n);
            record(n, v);
        }
    }
    return traj;
}

inline unsigned default_thread_count()
{
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

// Simulates trajectories 0..n_trajectories-1 and applies fn to each. Results
// are indexed by trajectory, so the outcome does not depend on the thread count.
template <class Fn>
auto map_trajectories(const SimConfig& cfg, const SteadyState& ss, const SystemParams& p, Fn&& fn,
                      unsigned threads = 0) -> std::vector<std::invoke_result_t<Fn&, Trajectory&&>>
{
    using Result = std::invoke_result_t<Fn&, Trajectory&&>;
    const auto count = static_cast<std::size_t>(cfg.n_trajectories);
    std::vector<Result> results(count);
    std::vector<std::exception_ptr> errors(count);

    if (threads == 0) {
        threads = default_thread_count();
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));

    const auto work = [&](unsigned worker) {
        for (std::size_t k = worker; k < count; k += threads) {
            try {
                results[k] = fn(simulate(cfg, ss, p, k));
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };

    if (threads <= 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back(work, w);
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return results;
}

inline std::vector<Trajectory> simulate_ensemble(const SimConfig& cfg, const SteadyState& ss,
                                                 const SystemParams& p, unsigned threads = 0)
{
    return map_trajectories(cfg, ss, p, [](Trajectory&& t) { return std::move(t); }, threads);
}

} // namespace sqz
