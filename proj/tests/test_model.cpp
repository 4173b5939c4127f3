#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "sqz/model.hpp"
#include "sqz/phase_space.hpp"

using namespace sqz;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Independent root finder: scan the characteristic on a fine grid and bisect
// every sign change of mu(I) - mu.
std::vector<double> bracketed_roots(double Delta, double mu)
{
    const auto f = [&](double I) { return I * (1.0 + (I - Delta) * (I - Delta)) - mu; };
    std::vector<double> roots;
    const double top = std::max(4.0 * std::abs(Delta), 2.0 * std::cbrt(mu)) + 2.0;
    const int n = 200000;
    double prev_x = 0.0;
    double prev_f = f(0.0);
    if (prev_f == 0.0) {
        roots.push_back(0.0);
    }
    for (int k = 1; k <= n; ++k) {
        const double x = top * k / n;
        const double fx = f(x);
        if (fx == 0.0) {
            roots.push_back(x);
        } else if (prev_f * fx < 0.0) {
            double lo = prev_x;
            double hi = x;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                (f(lo) * f(mid) <= 0.0 ? hi : lo) = mid;
            }
            roots.push_back(0.5 * (lo + hi));
        }
        prev_x = x;
        prev_f = fx;
    }
    return roots;
}

} // namespace

TEST_CASE("coupling constant from material parameters", "[model]")
{
    PhysicalConstants c;
    c.V = 1e-6;
    c.chi = 5e-23;
    c.epsilon = 4.0 * c.epsilon0;
    c.omega_c = 3e15;
    const double g = estimate_coupling(c);
    CHECK(g > 1e-9 / 3.0);
    CHECK(g < 1e-9 * 3.0);

    PhysicalConstants zero = c;
    zero.chi = 0.0;
    CHECK(estimate_coupling(zero) == 0.0);

    PhysicalConstants twice = c;
    twice.V = 2.0 * c.V;
    CHECK_THAT(estimate_coupling(twice), WithinRel(g / 2.0, 1e-15));

    PhysicalConstants negative = c;
    negative.chi = -c.chi;
    CHECK(estimate_coupling(negative) == -g);

    for (double PhysicalConstants::*field : {&PhysicalConstants::V, &PhysicalConstants::epsilon,
                                              &PhysicalConstants::omega_c}) {
        PhysicalConstants bad = c;
        bad.*field = 0.0;
        CHECK_THROWS_AS(estimate_coupling(bad), Error);
        try {
            estimate_coupling(bad);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NonPositiveInput);
        }
    }
}

TEST_CASE("scaled parameters", "[model]")
{
    const double e = 0.37;
    const ScaledParams a = scale_params({2.0, 0.0, 1.0, e});
    CHECK(a.Delta == 0.0);
    CHECK_THAT(a.mu, WithinRel(e * e, 1e-15));
    CHECK(a.eta == 1);

    const ScaledParams b = scale_params({2.0, 2.0, -1.0, 1.0});
    CHECK(b.Delta == -2.0);
    CHECK(b.mu == 1.0);
    CHECK(b.eta == -1);

    try {
        scale_params({2.0, 0.0, 0.0, 1.0});
        FAIL("expected ZeroCoupling");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::ZeroCoupling);
    }
    CHECK_THROWS_AS(scale_params({-1.0, 0.0, 1.0, 1.0}), Error);
}

TEST_CASE("state equation", "[model]")
{
    CHECK(state_equation_mu(0.0, 3.1) == 0.0);
    CHECK(state_equation_mu(1.0, 2.0) == 2.0);
    CHECK(state_equation_mu(2.5, 2.5) == 2.5);
    try {
        state_equation_mu(-0.1, 0.0);
        FAIL("expected NegativeIntensity");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::NegativeIntensity);
    }
}

TEST_CASE("steady states at the documented points", "[model]")
{
    SECTION("single root")
    {
        const auto st = steady_states(ScaledParams{0.0, 2.0, 1});
        REQUIRE(st.size() == 1);
        CHECK_THAT(st[0].I, WithinAbs(1.0, 1e-14));
        CHECK_THAT(st[0].phi, WithinAbs(std::numbers::pi / 4.0, 1e-14));
        CHECK(st[0].stability == Stability::Stable);
    }
    SECTION("tangency (I-1)^2 (I-2)")
    {
        const auto st = steady_states(ScaledParams{2.0, 2.0, 1});
        REQUIRE(st.size() == 2);
        CHECK_THAT(st[0].I, WithinAbs(1.0, 1e-12));
        CHECK(st[0].multiplicity == 2);
        CHECK(st[0].stability == Stability::Marginal);
        CHECK_THAT(st[1].I, WithinAbs(2.0, 1e-12));
        CHECK(st[1].multiplicity == 1);
        CHECK(st[1].stability == Stability::Stable);
    }
    SECTION("empty cavity")
    {
        for (const int eta : {1, -1}) {
            const auto st = steady_states(ScaledParams{1.3, 0.0, eta});
            REQUIRE(st.size() == 1);
            CHECK(st[0].I == 0.0);
            CHECK(st[0].phi == std::atan2(-eta * 1.3, 1.0));
        }
    }
    SECTION("three branches")
    {
        const auto st = steady_states(ScaledParams{3.0, state_equation_mu(1.0, 3.0), 1});
        REQUIRE(st.size() == 3);
        CHECK(st[0].stability == Stability::Stable);
        CHECK(st[1].stability == Stability::Unstable);
        CHECK(st[2].stability == Stability::Stable);
    }
}

TEST_CASE("turning points and stability classes", "[model]")
{
    const auto tp = turning_points(2.0);
    REQUIRE(tp);
    CHECK_THAT(tp->first, WithinAbs(1.0, 1e-15));
    CHECK_THAT(tp->second, WithinAbs(5.0 / 3.0, 1e-15));

    const auto fold = turning_points(std::sqrt(3.0));
    REQUIRE(fold);
    CHECK_THAT(fold->first, WithinAbs(2.0 * std::sqrt(3.0) / 3.0, 1e-7));
    CHECK_THAT(fold->second, WithinAbs(2.0 * std::sqrt(3.0) / 3.0, 1e-7));

    CHECK_FALSE(turning_points(0.0));
    CHECK_FALSE(turning_points(1.7));
    CHECK_FALSE(turning_points(-2.0));

    CHECK(classify_stability(1.2, 2.0) == Stability::Unstable);
    CHECK(classify_stability(2.0, 2.0) == Stability::Stable);
    CHECK(classify_stability(0.5, 2.0) == Stability::Stable);
    CHECK(classify_stability(5.0 / 3.0, 2.0) == Stability::Marginal);
    for (double I = 0.0; I < 5.0; I += 0.37) {
        CHECK(classify_stability(I, 0.0) == Stability::Stable);
    }
}

TEST_CASE("roots agree with a bracketing oracle", "[model][property]")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> delta(-1.0, 5.0);
    std::uniform_real_distribution<double> intensity(0.0, 6.0);
    for (int trial = 0; trial < 300; ++trial) {
        const double Delta = delta(rng);
        // mu drawn through the characteristic so that three-root cases occur often
        const double mu = state_equation_mu(intensity(rng), Delta);
        const auto states = steady_states(ScaledParams{Delta, mu, 1});
        const auto oracle = bracketed_roots(Delta, mu);

        std::vector<double> found;
        for (const auto& st : states) {
            for (int m = 0; m < st.multiplicity; ++m) {
                found.push_back(st.I);
            }
            CHECK_THAT(state_equation_mu(st.I, Delta), WithinRel(mu, 1e-10));
            const cplx e = std::polar(1.0, st.phi);
            CHECK_THAT(std::norm(e), WithinAbs(1.0, 4.0 * std::numeric_limits<double>::epsilon()));
            CHECK(st.phi > -std::numbers::pi);
            CHECK(st.phi <= std::numbers::pi);
        }
        if (oracle.size() == found.size()) {
            for (std::size_t k = 0; k < oracle.size(); ++k) {
                CHECK_THAT(found[k], WithinAbs(oracle[k], 1e-9 * std::max(1.0, oracle[k])));
            }
        } else {
            // a grazing double root can be missed by the sign scan
            CHECK(found.size() > oracle.size());
        }
    }
}

TEST_CASE("characteristic extrema sit at the turning points", "[model][property]")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> delta(std::sqrt(3.0) + 0.05, 6.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double Delta = delta(rng);
        const auto [lo, hi] = *turning_points(Delta);
        const double h = 1e-5;
        const auto slope = [&](double I) {
            return (state_equation_mu(I + h, Delta) - state_equation_mu(I - h, Delta)) / (2.0 * h);
        };
        CHECK_THAT(slope(lo), WithinAbs(0.0, 1e-8));
        CHECK_THAT(slope(hi), WithinAbs(0.0, 1e-8));
        // local maximum at I_minus, local minimum at I_plus
        const double d = 1e-3 * (hi - lo);
        CHECK(state_equation_mu(lo, Delta) > state_equation_mu(lo - d, Delta));
        CHECK(state_equation_mu(lo, Delta) > state_equation_mu(lo + d, Delta));
        CHECK(state_equation_mu(hi, Delta) < state_equation_mu(hi - d, Delta));
        CHECK(state_equation_mu(hi, Delta) < state_equation_mu(hi + d, Delta));
    }
}

TEST_CASE("stability factor factorises through the turning points", "[model][property]")
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> delta(std::sqrt(3.0), 8.0);
    std::uniform_real_distribution<double> intensity(-2.0, 10.0);
    for (int trial = 0; trial < 500; ++trial) {
        const double Delta = delta(rng);
        const double I = intensity(rng);
        const auto [lo, hi] = *turning_points(Delta);
        const double factored = 3.0 * (I - hi) * (I - lo);
        const double scale = 3.0 * I * I + 4.0 * std::abs(Delta * I) + Delta * Delta + 1.0;
        CHECK(std::abs(stability_factor(I, Delta) - factored) <= 1e-12 * scale);
    }
}

TEST_CASE("classification agrees with the Jacobian spectrum", "[model][property]")
{
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> delta(-1.0, 5.0);
    std::uniform_real_distribution<double> intensity(0.01, 5.0);
    std::uniform_real_distribution<double> gamma(0.3, 5.0);
    int unstable = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const double Delta = delta(rng);
        const double I = intensity(rng);
        if (std::abs(stability_factor(I, Delta)) < 1e-6) {
            continue;
        }
        const int eta = trial % 2 ? 1 : -1;
        const SystemParams p = physical_params(Delta, I, eta, gamma(rng), 1e-2);
        const SteadyState st = steady_state_at(I, p);
        const bool stable = jacobian_is_stable(drift_jacobian(st, p));
        CHECK(stable == (st.stability == Stability::Stable));
        unstable += st.stability == Stability::Unstable;
    }
    CHECK(unstable > 10);
}

TEST_CASE("reconstructed amplitudes are fixed points of the drift", "[model][property]")
{
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> theta(-4.0, 4.0);
    std::uniform_real_distribution<double> g(-0.5, 0.5);
    std::uniform_real_distribution<double> e0(0.0, 6.0);
    std::uniform_real_distribution<double> gamma(0.2, 4.0);
    for (int trial = 0; trial < 300; ++trial) {
        const SystemParams p{gamma(rng), theta(rng), g(rng), e0(rng)};
        for (const auto& st : steady_states(p)) {
            REQUIRE(st.alpha_bar);
            const cplx residual = drift(*st.alpha_bar, p)[0];
            CHECK(std::abs(residual) <= 1e-9 * std::max(p.gamma, p.E0));
        }
    }
}

TEST_CASE("linear cavity steady state", "[model]")
{
    const SystemParams p{2.0, 0.5, 0.0, 1.5};
    const auto st = steady_states(p);
    REQUIRE(st.size() == 1);
    REQUIRE(st[0].alpha_bar);
    const cplx expected = 1.5 / cplx(1.0, 0.5);
    CHECK(std::abs(*st[0].alpha_bar - expected) < 1e-15);
    CHECK_THROWS_AS(amplitude(SteadyState{}, p), Error);
}
