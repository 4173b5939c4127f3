// quadrature.hpp - adaptive Gauss-Kronrod over a list of breakpoints
//
// Each interval is bisected until the 15/31-point Kronrod error estimate of
// every component drops below an absolute tolerance, split evenly between
// the two halves, or below the rounding floor of the integrand.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace sqz {

struct QuadratureOptions {
    double abs_tol{1e-11};
    unsigned max_depth{24};
};

template <std::size_t N>
struct QuadratureResult {
    std::array<double, N> value{};
    double error{0.0};
    std::size_t intervals{0};
};

namespace detail {

template <std::size_t N, class F>
void gk_adaptive(F& f, double a, double b, double tol, unsigned depth, QuadratureResult<N>& acc)
{
    using gk = boost::math::quadrature::gauss_kronrod<double, 31>;
    const auto& x = gk::abscissa();
    const auto& wk = gk::weights();
    const auto& wg = boost::math::quadrature::gauss<double, 15>::weights();

    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    std::array<double, N> kron{};
    std::array<double, N> gauss{};
    double l1 = 0.0;
    // Even abscissa indices (the centre included) are the embedded Gauss nodes.
    for (std::size_t k = 0; k < x.size(); ++k) {
        const auto add = [&](const std::array<double, N>& v) {
            for (std::size_t c = 0; c < N; ++c) {
                kron[c] += wk[k] * v[c];
                l1 += wk[k] * std::abs(v[c]);
                if (k % 2 == 0) {
                    gauss[c] += wg[k / 2] * v[c];
                }
            }
        };
        if (k == 0) {
            add(f(mid));
        } else {
            add(f(mid - half * x[k]));
            add(f(mid + half * x[k]));
        }
    }
    double err = 0.0;
    for (std::size_t c = 0; c < N; ++c) {
        kron[c] *= half;
        gauss[c] *= half;
        err = std::max(err, std::abs(kron[c] - gauss[c]));
    }
    // Below the rounding floor of the integrand further bisection cannot help.
    const double floor = 100.0 * std::numeric_limits<double>::epsilon() * half * l1;
    if (err <= std::max(tol, floor) || depth == 0) {
        for (std::size_t c = 0; c < N; ++c) {
            acc.value[c] += kron[c];
        }
        acc.error += err;
        ++acc.intervals;
        return;
    }
    gk_adaptive<N>(f, a, mid, 0.5 * tol, depth - 1, acc);
    gk_adaptive<N>(f, mid, b, 0.5 * tol, depth - 1, acc);
}

} // namespace detail

// Integrates a vector-valued f (returning std::array<double, N>) over the
// consecutive intervals of an ascending list of breakpoints. The tolerance is
// shared between intervals in proportion to their count.
template <std::size_t N, class F>
QuadratureResult<N> integrate_piecewise(F&& f, std::span<const double> breaks, QuadratureOptions opts = {})
{
    QuadratureResult<N> acc;
    if (breaks.size() < 2) {
        return acc;
    }
    const double tol = opts.abs_tol / static_cast<double>(breaks.size() - 1);
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        detail::gk_adaptive<N>(f, breaks[k], breaks[k + 1], tol, opts.max_depth, acc);
    }
    return acc;
}

} // namespace sqz
