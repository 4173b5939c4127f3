// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "cli.hpp"
#include "identities.hpp"
#include "sqz/estimation.hpp"
#include "sqz/model.hpp"
#include "sqz/phase_space.hpp"
#include "sqz/spectra.hpp"

using namespace sqz;

namespace {

constexpr std::uint64_t kSeed = 20240601;

class Clock {
public:
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_{std::chrono::steady_clock::now()};
};

int failures = 0;

void report(const std::string& id, bool pass, const std::string& detail, double seconds, double limit)
{
    const bool in_time = seconds < limit;
    const bool ok = pass && in_time;
    failures += ok ? 0 : 1;
    char timing[96];
    std::snprintf(timing, sizeof timing, "%.2f s, limit %.0f s%s", seconds, limit, in_time ? "" : " EXCEEDED");
    std::cout << (ok ? "PASS " : "FAIL ") << '[' << id << "] " << detail << " (" << timing << ")" << std::endl;
}

void info(const std::string& id, const std::string& detail) { std::cout << "INFO [" << id << "] " << detail << std::endl; }

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

struct Bench {
    SystemParams p;
    SteadyState ss;
};

Bench benchmark()
{
    const SystemParams p = physical_params(0.0, 1.0, 1, 2.0, 1e-3);
    return {p, steady_state_at(1.0, p)};
}

// 1. combine_spectra against the generalized-P resolvent
void cross_ordering()
{
    Clock clock;
    cli::SampleGenerator gen(kSeed);
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
        const auto x = gen.next();
        const double w = x.gamma * x.Omega / 2.0;
        const auto a = spectral_matrix_numeric(x.s, x.ss, x.p, w);
        const auto b = spectral_matrix_numeric(x.s_prime, x.ss, x.p, w);
        const auto P = spectral_matrix_numeric(Ordering::generalized_p(), x.ss, x.p, w);
        worst = std::max(worst, max_rel_diff(combine_spectra(x.s, x.s_prime, a, b).m, P.m));
    }
    report("1", worst <= 1e-10, "cross-ordering combination, 200 tuples: max relative residual " + num(worst)
                                    + " <= 1e-10",
           clock.seconds(), 1.0);
}

// 2. closed forms against the resolvent on the same sample
void closed_form()
{
    Clock clock;
    cli::SampleGenerator gen(kSeed);
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
        const auto x = gen.next();
        const auto sp = scale_params(x.p);
        for (const Ordering& o : {x.s, x.s_prime, Ordering::generalized_p()}) {
            const auto closed = spectral_matrix_closed(o, sp, x.I, x.Omega, x.gamma);
            const auto numeric = spectral_matrix_numeric(o, x.ss, x.p, x.gamma * x.Omega / 2.0);
            worst = std::max(worst, max_rel_diff(closed.m, numeric.m));
        }
    }
    report("2", worst <= 1e-10, "closed form vs resolvent: max relative residual " + num(worst) + " <= 1e-10",
           clock.seconds(), 1.0);
}

// 3. diffusion combination, eigenvalues and the positivity truth table
void diffusion_identities()
{
    Clock clock;
    cli::SampleGenerator gen(kSeed);
    double comb = 0.0;
    double eig = 0.0;
    bool table = true;
    for (int t = 0; t < 200; ++t) {
        const auto x = gen.next();
        const cplx a = amplitude(x.ss, x.p) * std::polar(gen.uniform(0.0, 2.0), gen.uniform(-3.0, 3.0));
        const auto Ds = diffusion(x.s, a, x.p);
        const auto Dsp = diffusion(x.s_prime, a, x.p);
        const auto [w, wp] = combination_weights(x.s, x.s_prime);
        const double scale = std::abs(w) * Ds.max_abs() + std::abs(wp) * Dsp.max_abs();
        comb = std::max(comb, max_abs_diff(combine_diffusion(x.s, x.s_prime, Ds, Dsp),
                                           diffusion(Ordering::generalized_p(), a, x.p))
                                  / scale);

        const RealMat2 r = diffusion_real(x.s, a.real(), a.imag(), x.p);
        Eigen::Matrix2d m;
        m << r.m11, r.m12, r.m21, r.m22;
        const Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(m).eigenvalues();
        const auto [dp, dm] = diffusion_eigenvalues(x.s, a, x.p);
        const double escale = std::max(std::abs(ev(0)), std::abs(ev(1)));
        eig = std::max(eig, std::max(std::abs(dp - ev(1)), std::abs(dm - ev(0))) / escale);

        table = table && is_psd(Ordering::wigner(), a, x.p);
        table = table && !is_psd(Ordering::glauber_p(), a, x.p);
        const double edge = x.p.gamma / std::abs(x.p.g);
        table = table && is_psd(Ordering::husimi_q(), std::sqrt(edge * (1.0 - 1e-9)), x.p);
        table = table && !is_psd(Ordering::husimi_q(), std::sqrt(edge * (1.0 + 1e-9)), x.p);
    }
    report("3", comb <= 1e-14 && eig <= 1e-12 && table,
           "diffusion combination " + num(comb) + " <= 1e-14, eigenvalues " + num(eig)
               + " <= 1e-12, positivity truth table " + (table ? "holds" : "violated"),
           clock.seconds(), 1.0);
}

// 4. V = V_s + s/4 independent of s
void ordering_independence()
{
    Clock clock;
    const Bench b = benchmark();
    std::vector<IntracavityProfile> profiles;
    for (const double s : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
        profiles.push_back(intracavity_profile(Ordering::s_ordered(s), b.ss, b.p));
    }
    double spread = 0.0;
    for (int k = 0; k < 8; ++k) {
        const double phi = std::numbers::pi * k / 8.0;
        double lo = profiles.front().V(phi);
        double hi = lo;
        for (const auto& prof : profiles) {
            lo = std::min(lo, prof.V(phi));
            hi = std::max(hi, prof.V(phi));
        }
        spread = std::max(spread, hi - lo);
    }
    report("4", spread <= 1e-6, "intracavity V across s in {-1,-0.5,0,0.5,1}, 8 phases: max spread " + num(spread)
                                    + " <= 1e-6",
           clock.seconds(), 10.0);
}

// 5. min V -> 1/8 at the upper turning point
void bifurcation_limit()
{
    Clock clock;
    const std::vector<double> deltas{1e-1, 1e-2, 1e-3};
    const auto approach = approach_turning_point(2.0, 1, 2.0, deltas);
    std::string seq;
    for (const auto& s : approach.samples) {
        seq += (seq.empty() ? "" : ", ") + num(s.V_min);
    }
    report("5", std::abs(approach.V_min_limit - 0.125) <= 1e-3,
           "min V along delta = 1e-1, 1e-2, 1e-3: " + seq + "; extrapolated " + num(approach.V_min_limit)
               + " = 0.125 +- 1e-3",
           clock.seconds(), 30.0);
}

// 6. |S11(0)| grows monotonically toward the fold
void divergence()
{
    Clock clock;
    const double Delta = 2.0;
    const auto tp = turning_points(Delta);
    // offset at which the stability factor equals 1e-3
    const double I_star = (2.0 * Delta + std::sqrt(Delta * Delta - 3.0 + 3e-3)) / 3.0;
    std::vector<double> deltas{1e-1, 1e-2, 1e-3, I_star / tp->second - 1.0};
    std::sort(deltas.rbegin(), deltas.rend());
    std::vector<double> values;
    std::string seq;
    for (const double d : deltas) {
        const double I = tp->second * (1.0 + d);
        const SystemParams p = physical_params(Delta, I, 1, 2.0, 1e-3);
        const SteadyState ss = steady_state_at(I, p);
        values.push_back(std::abs(spectral_matrix_numeric(Ordering::wigner(), ss, p, 0.0).S11()));
        seq += (seq.empty() ? "" : ", ") + num(values.back());
    }
    const bool monotone = std::is_sorted(values.begin(), values.end()) && std::adjacent_find(values.begin(), values.end()) == values.end();
    const double at_star = values.back();
    report("6", monotone && at_star > 1e6,
           "|S11(0)| at delta = 1e-1, 1e-2, 1e-3 and stability factor 1e-3: " + seq + "; monotone "
               + (monotone ? "yes" : "no") + ", last > 1e6",
           clock.seconds(), 10.0);
}

// 7. Monte-Carlo spectrum and variance on the benchmark
void monte_carlo()
{
    Clock clock;
    const Bench b = benchmark();
    SimConfig cfg = default_sim_config(2.0);
    cfg.n_steps = cfg.n_burnin + 256 * 4096;
    cfg.n_trajectories = 16;
    cfg.seed = kSeed;
    const IntracavityProfile prof = intracavity_profile(Ordering::wigner(), b.ss, b.p);
    const double phi = prof.optimal_lo_phase();
    const std::vector<double> phis{phi};
    const auto stats = simulate_statistics(cfg, b.ss, b.p, {4096, 0, Window::Hann}, phis);
    const double seconds = clock.seconds();

    const auto ref = [&](double w) { return spectral_matrix_numeric(Ordering::wigner(), b.ss, b.p, w).m; };
    const double rms11 = rms_relative_deviation(stats.spectrum, 0, 5.0, ref);
    const double rms12 = rms_relative_deviation(stats.spectrum, 1, 5.0, ref);
    report("7a", rms11 <= 0.05 && rms12 <= 0.05,
           std::to_string(stats.spectrum.n_segments) + " segments of 4096 steps, dt = 0.01: RMS deviation S11 "
               + num(rms11) + ", S12 " + num(rms12) + " <= 0.05 over |Omega| <= 5",
           seconds, 120.0);

    const auto& v = stats.variances.front();
    const double analytic = prof.V_s(phi);
    const double z = (v.value - analytic) / v.std_error;
    report("7b", std::abs(z) <= 3.0,
           "V_s(phi_opt) estimate " + num(v.value) + " +- " + num(v.std_error) + " vs analytic " + num(analytic)
               + ": |z| = " + num(std::abs(z)) + " <= 3",
           seconds, 120.0);

    // stationary variance of the discrete Euler-Maruyama recursion itself
    const cplx a = amplitude(b.ss, b.p);
    const ComplexMat2 A = drift_jacobian_at(a, b.p);
    const ComplexMat2 D = diffusion(Ordering::wigner(), a, b.p);
    Eigen::Matrix2cd M;
    M << 1.0 + A.m11 * cfg.dt, A.m12 * cfg.dt, A.m21 * cfg.dt, 1.0 + A.m22 * cfg.dt;
    Eigen::Matrix4cd k = Eigen::Matrix4cd::Identity();
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            k.block<2, 2>(2 * i, 2 * j) -= M(i, j) * M;
        }
    }
    Eigen::Vector4cd rhs;
    rhs << D.m11 * cfg.dt, D.m21 * cfg.dt, D.m12 * cfg.dt, D.m22 * cfg.dt;
    const Eigen::Vector4cd c = k.partialPivLu().solve(rhs);
    const double discrete = quadrature_complex({c(0), c(2), c(1), c(3)}, phi).real();
    info("7b", "Euler-Maruyama stationary variance at this dt is " + num(discrete) + " (step bias "
                   + num(discrete - analytic) + "); estimate differs from it by "
                   + num((v.value - discrete) / v.std_error) + " standard errors");
}

// 8. 2 S^(0) - S^(-1) from independent runs against the generalized-P resolvent
void simulated_combination()
{
    Clock clock;
    const Bench b = benchmark();
    SimConfig cfg = default_sim_config(2.0);
    cfg.n_steps = cfg.n_burnin + 64 * 4096;
    cfg.n_trajectories = 16;
    const WelchOptions wopts{4096, 0, Window::Hann};

    cfg.ordering = Ordering::wigner();
    cfg.seed = kSeed + 1;
    const auto w = simulate_statistics(cfg, b.ss, b.p, wopts).spectrum;
    cfg.ordering = Ordering::husimi_q();
    cfg.seed = kSeed + 2;
    const auto q = simulate_statistics(cfg, b.ss, b.p, wopts).spectrum;

    int inside = 0;
    int total = 0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        if (std::abs(w.omega[k]) > 5.0) {
            continue;
        }
        const ComplexMat2 P = spectral_matrix_numeric(Ordering::generalized_p(), b.ss, b.p, w.omega[k]).m;
        for (const int e : {0, 1}) {
            const cplx est = 2.0 * entry_of(w.value[k], e) - entry_of(q.value[k], e);
            const double se0 = w.std_error(k, e);
            const double se1 = q.std_error(k, e);
            const double band = 3.0 * std::sqrt(4.0 * se0 * se0 + se1 * se1);
            inside += std::abs(est - entry_of(P, e)) <= band;
            ++total;
        }
    }
    const double frac = static_cast<double>(inside) / static_cast<double>(total);
    report("8", frac >= 0.9,
           "2 S^(0) - S^(-1) inside 3-standard-error bands of S^(P) at " + num(100.0 * frac) + "% of " + std::to_string(total)
               + " (frequency, entry) points >= 90%",
           clock.seconds(), 240.0);
}

// 9. coupling constant for the quoted material numbers
void coupling()
{
    Clock clock;
    PhysicalConstants c;
    c.V = 1e-6;
    c.chi = 5e-23;
    c.epsilon = 4.0 * c.epsilon0;
    c.omega_c = 3e15;
    const double g = std::abs(estimate_coupling(c));
    const double ratio = 1e9 / g;
    const bool ok = g > 1e-9 / 3.0 && g < 3e-9 && ratio > 1e18 / 3.0 && ratio < 3e18;
    report("9", ok, "|g| = " + num(g) + " 1/s within x3 of 1e-9; gamma/|g| = " + num(ratio) + " within x3 of 1e18",
           clock.seconds(), 1.0);
}

// 10. byte-identical output files from two identical simulate invocations
void determinism()
{
    Clock clock;
    const auto dir = std::filesystem::temp_directory_path() / "sqz_acceptance";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const auto run_once = [&](const std::string& name) {
        std::ostringstream out;
        std::ostringstream err;
        const int code = cli::run({"sqz", "simulate", "--Delta", "0", "--I", "1", "--seed", "42", "--trajectories",
                                   "4", "--steps", "200000", "--segment", "2048", "--burnin", "8192", "--out",
                                   (dir / name).string(), "--dump-trajectory", (dir / ("traj_" + name)).string()},
                                  out, err);
        std::ifstream a(dir / name, std::ios::binary);
        std::ifstream t(dir / ("traj_" + name), std::ios::binary);
        std::string text((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
        text.append((std::istreambuf_iterator<char>(t)), std::istreambuf_iterator<char>());
        return std::pair{code, text};
    };
    const auto first = run_once("a.csv");
    const auto second = run_once("b.csv");
    std::filesystem::remove_all(dir);
    const bool same = first.first == 0 && second.first == 0 && !first.second.empty() && first.second == second.second;
    report("10", same, "simulate --seed 42 twice: output and trajectory files " + std::string(same ? "byte-identical" : "differ"),
           clock.seconds(), 60.0);
}

} // namespace

int main()
{
    try {
        cross_ordering();
        closed_form();
        diffusion_identities();
        ordering_independence();
        bifurcation_limit();
        divergence();
        monte_carlo();
        simulated_combination();
        coupling();
        determinism();
    } catch (const std::exception& e) {
        std::cout << "FAIL [error] " << e.what() << std::endl;
        return 1;
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion line(s) failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
