// estimation.hpp - Welch cross-spectra and quadrature variances from trajectories
//
// Per segment of L samples with window w and windowed DFT F_i(w_k):
//
//     S_ij(w_k) = dt / sum(w^2) * F_i(-w_k) F_j(w_k)
//
// averaged over segments of every trajectory. The kernel sign matches the
// resolvent (A + i w)^-1 D (A^T - i w)^-1 used by the analytic routines.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "sqz/error.hpp"
#include "sqz/langevin.hpp"
#include "sqz/mat2.hpp"

namespace sqz {

enum class Window { Hann, Rect };

constexpr const char* to_string(Window w) { return w == Window::Hann ? "hann" : "rect"; }

struct WelchOptions {
    std::size_t segment_len{4096};
    std::size_t overlap{0}; // samples shared by consecutive segments
    Window window{Window::Hann};
};

inline constexpr std::size_t kMinSegments = 8;

// Periodic Hann or rectangular taper.
inline std::vector<double> make_window(Window w, std::size_t n)
{
    std::vector<double> out(n, 1.0);
    if (w == Window::Hann) {
        for (std::size_t k = 0; k < n; ++k) {
            const double c = std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
            out[k] = 0.5 * (1.0 - c);
        }
    }
    return out;
}

// Index pairs (row, col) in storage order: 11, 12, 21, 22.
inline constexpr std::array<std::array<int, 2>, 4> kEntries{{{0, 0}, {0, 1}, {1, 0}, {1, 1}}};

struct EstimatedSpectrum {
    double dt{0.0};
    std::size_t segment_len{0};
    std::size_t n_segments{0};
    std::vector<double> omega; // ascending DFT frequencies
    std::vector<ComplexMat2> value;
    // standard error of each entry: real part and imaginary part separately
    std::vector<std::array<double, 4>> se_re;
    std::vector<std::array<double, 4>> se_im;

    std::size_t size() const { return omega.size(); }

    // sqrt(se_re^2 + se_im^2), the scatter of the complex estimate
    double std_error(std::size_t k, int entry) const
    {
        return std::hypot(se_re[k][static_cast<std::size_t>(entry)], se_im[k][static_cast<std::size_t>(entry)]);
    }
};

inline cplx entry_of(const ComplexMat2& m, int entry)
{
    switch (entry) {
    case 0: return m.m11;
    case 1: return m.m12;
    case 2: return m.m21;
    default: return m.m22;
    }
}

class WelchAccumulator {
public:
    WelchAccumulator() = default;
    WelchAccumulator(double dt, WelchOptions opts) : dt_(dt), opts_(opts)
    {
        ensure(dt > 0.0, ErrorCode::InvalidConfig, "dt must be > 0");
        ensure(opts.segment_len >= 2, ErrorCode::InvalidConfig, "segment length must be >= 2");
        ensure(opts.overlap < opts.segment_len, ErrorCode::InvalidConfig, "overlap must be < segment length");
        window_ = make_window(opts.window, opts.segment_len);
        for (const double v : window_) {
            power_ += v * v;
        }
        const std::size_t n = opts.segment_len;
        sum_.assign(n, {});
        sq_re_.assign(n, {});
        sq_im_.assign(n, {});
    }

    std::size_t segments() const { return count_; }
    const WelchOptions& options() const { return opts_; }

    // Adds every full segment of one trajectory after removing its sample mean.
    void add(std::span<const CVec2> samples)
    {
        const std::size_t n = opts_.segment_len;
        if (samples.size() < n) {
            return;
        }
        CVec2 mean{0.0, 0.0};
        for (const auto& v : samples) {
            mean[0] += v[0];
            mean[1] += v[1];
        }
        mean[0] /= static_cast<double>(samples.size());
        mean[1] /= static_cast<double>(samples.size());

        Eigen::FFT<double> fft;
        std::vector<cplx> in1(n), in2(n), out1(n), out2(n);
        const std::size_t step = n - opts_.overlap;
        const double norm = dt_ / power_;
        for (std::size_t start = 0; start + n <= samples.size(); start += step) {
            for (std::size_t k = 0; k < n; ++k) {
                const auto& v = samples[start + k];
                in1[k] = window_[k] * (v[0] - mean[0]);
                in2[k] = window_[k] * (v[1] - mean[1]);
            }
            fft.fwd(out1, in1);
            fft.fwd(out2, in2);
            const std::array<const std::vector<cplx>*, 2> f{&out1, &out2};
            for (std::size_t m = 0; m < n; ++m) {
                const std::size_t neg = (n - m) % n;
                for (std::size_t e = 0; e < 4; ++e) {
                    const auto [i, j] = kEntries[e];
                    const cplx est = norm * (*f[static_cast<std::size_t>(i)])[neg] * (*f[static_cast<std::size_t>(j)])[m];
                    sum_[m][e] += est;
                    sq_re_[m][e] += est.real() * est.real();
                    sq_im_[m][e] += est.imag() * est.imag();
                }
            }
            ++count_;
        }
    }

    void add(const Trajectory& t) { add(std::span<const CVec2>(t.samples)); }

    void merge(const WelchAccumulator& other)
    {
        if (other.count_ == 0) {
            return;
        }
        if (count_ == 0 && sum_.empty()) {
            *this = other;
            return;
        }
        ensure(other.opts_.segment_len == opts_.segment_len && other.dt_ == dt_, ErrorCode::InvalidConfig,
               "cannot merge estimates with different grids");
        for (std::size_t m = 0; m < sum_.size(); ++m) {
            for (std::size_t e = 0; e < 4; ++e) {
                sum_[m][e] += other.sum_[m][e];
                sq_re_[m][e] += other.sq_re_[m][e];
                sq_im_[m][e] += other.sq_im_[m][e];
            }
        }
        count_ += other.count_;
    }

    EstimatedSpectrum result() const
    {
        ensure(count_ >= kMinSegments, ErrorCode::InsufficientData,
               "need at least " + std::to_string(kMinSegments) + " segments, have " + std::to_string(count_));
        const std::size_t n = opts_.segment_len;
        const auto kcount = static_cast<double>(count_);
        EstimatedSpectrum out;
        out.dt = dt_;
        out.segment_len = n;
        out.n_segments = count_;
        out.omega.resize(n);
        out.value.resize(n);
        out.se_re.resize(n);
        out.se_im.resize(n);
        const auto half = static_cast<std::ptrdiff_t>(n / 2);
        for (std::size_t idx = 0; idx < n; ++idx) {
            const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(idx) - half;
            const std::size_t m = static_cast<std::size_t>((k + static_cast<std::ptrdiff_t>(n)) % static_cast<std::ptrdiff_t>(n));
            out.omega[idx] = 2.0 * std::numbers::pi * static_cast<double>(k) / (static_cast<double>(n) * dt_);
            std::array<cplx, 4> mean{};
            for (std::size_t e = 0; e < 4; ++e) {
                mean[e] = sum_[m][e] / kcount;
                const double var_re = std::max(sq_re_[m][e] / kcount - mean[e].real() * mean[e].real(), 0.0);
                const double var_im = std::max(sq_im_[m][e] / kcount - mean[e].imag() * mean[e].imag(), 0.0);
                const double bessel = kcount / (kcount - 1.0);
                out.se_re[idx][e] = std::sqrt(var_re * bessel / kcount);
                out.se_im[idx][e] = std::sqrt(var_im * bessel / kcount);
            }
            out.value[idx] = {mean[0], mean[1], mean[2], mean[3]};
        }
        return out;
    }

private:
    double dt_{0.0};
    WelchOptions opts_{};
    std::vector<double> window_;
    double power_{0.0};
    std::size_t count_{0};
    std::vector<std::array<cplx, 4>> sum_;
    std::vector<std::array<double, 4>> sq_re_;
    std::vector<std::array<double, 4>> sq_im_;
};

inline EstimatedSpectrum estimate_spectral_matrix(const Trajectory& traj, std::size_t segment_len,
                                                  Window window = Window::Hann)
{
    ensure(segment_len <= traj.samples.size(), ErrorCode::InsufficientData,
           "segment longer than the recorded trajectory");
    WelchAccumulator acc(traj.dt(), {segment_len, 0, window});
    acc.add(traj);
    return acc.result();
}

inline EstimatedSpectrum estimate_spectral_matrix(std::span<const Trajectory> trajs, WelchOptions opts)
{
    ensure(!trajs.empty(), ErrorCode::InsufficientData, "no trajectories");
    WelchAccumulator acc(trajs.front().dt(), opts);
    for (const auto& t : trajs) {
        acc.add(t);
    }
    return acc.result();
}

// --- quadrature variance -------------------------------------------------

struct VarianceEstimate {
    double value{0.0};
    double std_error{0.0};
    std::size_t n_batches{0};
};

inline cplx quadrature_sample(const CVec2& v, double phi)
{
    return 0.5 * (v[0] * std::polar(1.0, -phi) + v[1] * std::polar(1.0, phi));
}

// Batched means: each trajectory is cut into a fixed number of contiguous
// batches; the variance of X_phi about the trajectory mean is averaged per
// batch and the scatter of the batch values gives the standard error.
// For the doubled phase space X_phi is complex and the real part of
// <(X - <X>)^2> is the s-ordered moment.
class VarianceAccumulator {
public:
    explicit VarianceAccumulator(double phi = 0.0, std::size_t batches_per_trajectory = 32)
        : phi_(phi), batches_(batches_per_trajectory)
    {
        ensure(batches_per_trajectory >= 2, ErrorCode::InvalidConfig, "need at least two batches");
    }

    double phi() const { return phi_; }

    void add(std::span<const CVec2> samples)
    {
        const std::size_t len = samples.size() / batches_;
        ensure(len >= 2, ErrorCode::InsufficientData, "trajectory too short for batched variance");
        cplx mean{0.0};
        for (const auto& v : samples) {
            mean += quadrature_sample(v, phi_);
        }
        mean /= static_cast<double>(samples.size());
        for (std::size_t b = 0; b < batches_; ++b) {
            double acc = 0.0;
            for (std::size_t k = b * len; k < (b + 1) * len; ++k) {
                const cplx d = quadrature_sample(samples[k], phi_) - mean;
                acc += (d * d).real();
            }
            values_.push_back(acc / static_cast<double>(len));
        }
    }

    void add(const Trajectory& t) { add(std::span<const CVec2>(t.samples)); }

    void merge(const VarianceAccumulator& other)
    {
        values_.insert(values_.end(), other.values_.begin(), other.values_.end());
    }

    VarianceEstimate result() const
    {
        ensure(values_.size() >= 2, ErrorCode::InsufficientData, "no batches accumulated");
        const auto nb = static_cast<double>(values_.size());
        double mean = 0.0;
        for (const double v : values_) {
            mean += v;
        }
        mean /= nb;
        double ss = 0.0;
        for (const double v : values_) {
            ss += (v - mean) * (v - mean);
        }
        return {mean, std::sqrt(ss / (nb - 1.0) / nb), values_.size()};
    }

private:
    double phi_;
    std::size_t batches_;
    std::vector<double> values_;
};

inline VarianceEstimate estimate_quadrature_variance(const Trajectory& traj, double phi)
{
    VarianceAccumulator acc(phi);
    acc.add(traj);
    return acc.result();
}

// --- streaming ensemble statistics --------------------------------------

struct EnsembleStatistics {
    EstimatedSpectrum spectrum;
    std::vector<VarianceEstimate> variances; // one per requested phase
};

// Simulates every trajectory of cfg and reduces it on the fly, so memory stays
// at one trajectory per worker. The reduction order is the trajectory index.
inline EnsembleStatistics simulate_statistics(const SimConfig& cfg, const SteadyState& ss, const SystemParams& p,
                                              WelchOptions opts, std::span<const double> phis = {},
                                              unsigned threads = 0)
{
    struct Partial {
        WelchAccumulator welch;
        std::vector<VarianceAccumulator> var;
    };
    std::vector<double> phi_list(phis.begin(), phis.end());
    auto parts = map_trajectories(
        cfg, ss, p,
        [&](Trajectory&& t) {
            Partial part{WelchAccumulator(cfg.dt, opts), {}};
            part.welch.add(t);
            for (const double phi : phi_list) {
                part.var.emplace_back(phi);
                part.var.back().add(t);
            }
            return part;
        },
        threads);

    WelchAccumulator welch(cfg.dt, opts);
    std::vector<VarianceAccumulator> var;
    for (const double phi : phi_list) {
        var.emplace_back(phi);
    }
    for (const auto& part : parts) {
        welch.merge(part.welch);
        for (std::size_t k = 0; k < var.size(); ++k) {
            var[k].merge(part.var[k]);
        }
    }
    EnsembleStatistics out;
    out.spectrum = welch.result();
    for (const auto& v : var) {
        out.variances.push_back(v.result());
    }
    return out;
}

// --- comparison with an analytic oracle ---------------------------------

// sqrt(sum |est - ref|^2 / sum |ref|^2) over grid points with |omega| <= omega_max.
template <class Ref>
double rms_relative_deviation(const EstimatedSpectrum& est, int entry, double omega_max, Ref&& reference)
{
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < est.size(); ++k) {
        if (std::abs(est.omega[k]) > omega_max) {
            continue;
        }
        const cplx ref = entry_of(reference(est.omega[k]), entry);
        num += std::norm(entry_of(est.value[k], entry) - ref);
        den += std::norm(ref);
    }
    ensure(den > 0.0, ErrorCode::InsufficientData, "no grid points inside the comparison band");
    return std::sqrt(num / den);
}

} // namespace sqz
