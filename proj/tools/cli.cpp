#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "identities.hpp"
#include "sqz/error.hpp"
#include "sqz/estimation.hpp"
#include "sqz/io.hpp"
#include "sqz/langevin.hpp"
#include "sqz/model.hpp"
#include "sqz/phase_space.hpp"
#include "sqz/spectra.hpp"

namespace sqz::cli {
namespace {

struct ParamBlock {
    double gamma{2.0};
    std::optional<double> Delta, mu, I;
    std::optional<double> theta, g, E0;
    int eta{1};
    double g_abs{1e-3};
    std::optional<int> root;
};

struct GridSpec {
    std::vector<double> points;
    std::optional<double> wmin, wmax;
    int count{0};
    bool physical{false};
};

struct RunConfig {
    std::string command;
    ParamBlock params;
    GridSpec grid;
    std::vector<std::string> orderings;
    std::optional<double> phi, psi;
    bool optimize_phase{false};
    bool closed_form{false};
    std::string route{"P"};
    bool approach{false};
    std::vector<double> deltas{1e-1, 1e-2, 1e-3};
    std::string out_path;
    std::string format{"csv"};

    // simulate
    double dt{0.0};
    std::int64_t steps{0}, burnin{-1}, trajectories{16};
    std::uint64_t seed{1};
    std::string mode{"real"}, regime{"linearized"}, window{"hann"};
    std::size_t segment{4096}, overlap{0};
    unsigned threads{0};
    bool compare{false}, strict{false};
    double rms_threshold{0.05};
    double omega_max{5.0};
    std::string dump_path;

    // verify
    int trials{200};
    double tol_scale{1.0};
};

// The resolved physical problem.
struct Problem {
    SystemParams p;
    std::optional<ScaledParams> sp;
    std::vector<SteadyState> states;
};

[[noreturn]] void usage_error(const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); }

Problem resolve(const ParamBlock& b)
{
    const bool physical = b.theta || b.g || b.E0;
    const bool scaled = b.Delta || b.mu || b.I;
    if (physical && scaled) {
        usage_error("give either physical (--theta/--g/--E0) or scaled (--Delta/--mu/--I) parameters, not both");
    }
    Problem pr;
    if (physical) {
        if (!b.g || !b.E0) {
            usage_error("physical parameters need --g and --E0");
        }
        pr.p = {b.gamma, b.theta.value_or(0.0), *b.g, *b.E0};
        validate(pr.p);
        if (pr.p.g != 0.0) {
            pr.sp = scale_params(pr.p);
        }
        pr.states = steady_states(pr.p);
        return pr;
    }
    if (!b.Delta) {
        usage_error("missing --Delta");
    }
    if (b.mu.has_value() == b.I.has_value()) {
        usage_error("give exactly one of --mu or --I");
    }
    if (b.eta != 1 && b.eta != -1) {
        usage_error("--eta must be +1 or -1");
    }
    if (b.I) {
        pr.p = physical_params(*b.Delta, *b.I, b.eta, b.gamma, b.g_abs);
        pr.sp = scale_params(pr.p);
        pr.sp->Delta = *b.Delta;
        pr.states = {steady_state_at(*b.I, pr.p)};
        return pr;
    }
    ensure(*b.mu >= 0.0, ErrorCode::NonPositiveInput, "--mu must be >= 0");
    pr.sp = ScaledParams{*b.Delta, *b.mu, b.eta};
    pr.p.gamma = b.gamma;
    pr.p.theta = b.eta * *b.Delta * b.gamma / 2.0;
    pr.p.g = b.eta * b.g_abs;
    pr.p.E0 = std::sqrt(*b.mu * b.gamma * b.gamma * b.gamma / (8.0 * b.g_abs));
    validate(pr.p);
    pr.states = steady_states(*pr.sp);
    for (auto& st : pr.states) {
        st.alpha_bar = amplitude(st, pr.p);
    }
    return pr;
}

const SteadyState& pick_state(const Problem& pr, std::optional<int> root)
{
    if (root) {
        if (*root < 0 || static_cast<std::size_t>(*root) >= pr.states.size()) {
            usage_error("--root out of range (" + std::to_string(pr.states.size()) + " steady states)");
        }
        return pr.states[static_cast<std::size_t>(*root)];
    }
    if (pr.states.size() != 1) {
        usage_error(std::to_string(pr.states.size()) + " steady states; select one with --root");
    }
    return pr.states.front();
}

// Angular frequencies of the requested grid.
std::vector<double> omega_grid(const GridSpec& g, double gamma)
{
    const double to_omega = g.physical ? 1.0 : gamma / 2.0;
    std::vector<double> out;
    if (!g.points.empty()) {
        for (const double x : g.points) {
            out.push_back(x * to_omega);
        }
        return out;
    }
    if (!g.wmin || !g.wmax) {
        usage_error("empty frequency grid: give --Omega or --wmin/--wmax/--count");
    }
    if (g.count < 2) {
        usage_error("--count must be >= 2");
    }
    for (int k = 0; k < g.count; ++k) {
        const double x = *g.wmin + (*g.wmax - *g.wmin) * k / (g.count - 1);
        out.push_back(x * to_omega);
    }
    return out;
}

std::vector<Ordering> parse_orderings(const std::vector<std::string>& labels, const char* fallback)
{
    std::vector<Ordering> out;
    for (const auto& l : labels.empty() ? std::vector<std::string>{fallback} : labels) {
        out.push_back(Ordering::parse(l));
    }
    return out;
}

std::string ordering_tag(const Ordering& o) { return o.is_generalized_p() ? "P" : "s=" + o.label(); }

std::vector<std::pair<std::string, std::string>> echo_params(const RunConfig& c, const Problem& pr)
{
    std::vector<std::pair<std::string, std::string>> out{{"command", c.command},
                                                         {"gamma", format_number(pr.p.gamma)},
                                                         {"theta", format_number(pr.p.theta)},
                                                         {"g", format_number(pr.p.g)},
                                                         {"E0", format_number(pr.p.E0)}};
    if (pr.sp) {
        out.emplace_back("Delta", format_number(pr.sp->Delta));
        out.emplace_back("mu", format_number(pr.sp->mu));
        out.emplace_back("eta", std::to_string(pr.sp->eta));
    }
    return out;
}

void emit(const RunConfig& c, const Table& t, std::ostream& out)
{
    const Format f = parse_format(c.format);
    if (c.out_path.empty()) {
        write_table(out, t, f);
        return;
    }
    std::filesystem::path path(c.out_path);
    if (path.is_relative()) {
        if (const char* dir = std::getenv("SQZ_OUTPUT_DIR"); dir && *dir) {
            path = std::filesystem::path(dir) / path;
        }
    }
    save_table(path.string(), t, f);
}

// --- commands ------------------------------------------------------------------

int cmd_steady(const RunConfig& c, std::ostream& out)
{
    const Problem pr = resolve(c.params);
    Table t;
    t.config = echo_params(c, pr);
    t.columns = {"root", "I", "phi", "mu", "stability", "multiplicity", "I_minus", "I_plus"};
    const double Delta = pr.sp ? pr.sp->Delta : 0.0;
    const auto tp = pr.sp ? turning_points(Delta) : std::nullopt;
    const Cell lo = tp ? Cell{tp->first} : Cell{std::string("none")};
    const Cell hi = tp ? Cell{tp->second} : Cell{std::string("none")};
    // One row per root counted with multiplicity.
    for (std::size_t k = 0; k < pr.states.size(); ++k) {
        const auto& st = pr.states[k];
        const double mu = pr.sp ? state_equation_mu(st.I, Delta) : 0.0;
        for (int m = 0; m < st.multiplicity; ++m) {
            t.add_row({static_cast<double>(k), st.I, st.phi, mu, std::string(to_string(st.stability)),
                       static_cast<double>(st.multiplicity), lo, hi});
        }
    }
    emit(c, t, out);
    return kOk;
}

ComplexMat2 matrix_at(const RunConfig& c, const Problem& pr, const SteadyState& ss, const Ordering& o, double w)
{
    if (c.closed_form) {
        if (!pr.sp) {
            usage_error("--closed-form needs nonzero coupling");
        }
        return spectral_matrix_closed(o, *pr.sp, ss.I, 2.0 * w / pr.p.gamma, pr.p.gamma).m;
    }
    return spectral_matrix_numeric(o, ss, pr.p, w).m;
}

int cmd_spectrum(const RunConfig& c, std::ostream& out)
{
    const Problem pr = resolve(c.params);
    const SteadyState& ss = pick_state(pr, c.params.root);
    const auto omegas = omega_grid(c.grid, pr.p.gamma);
    const auto ords = parse_orderings(c.orderings, "P");

    // Combination check when P and two distinct s-orderings are requested.
    std::optional<Ordering> s1, s2;
    bool has_p = false;
    for (const auto& o : ords) {
        if (o.is_generalized_p()) {
            has_p = true;
        } else if (!s1) {
            s1 = o;
        } else if (!s2 && o.s() != s1->s()) {
            s2 = o;
        }
    }
    const bool residual = has_p && s2.has_value();

    Table t;
    t.config = echo_params(c, pr);
    t.config.emplace_back("I", format_number(ss.I));
    t.config.emplace_back("path", c.closed_form ? "closed_form" : "resolvent");
    t.columns = {"ordering", "Omega", "omega", "S11_re", "S11_im", "S12_re", "S12_im",
                 "S21_re", "S21_im", "S22_re", "S22_im"};
    if (residual) {
        t.columns.push_back("combination_residual");
    }
    for (const auto& o : ords) {
        for (const double w : omegas) {
            const ComplexMat2 m = matrix_at(c, pr, ss, o, w);
            std::vector<Cell> row{ordering_tag(o), 2.0 * w / pr.p.gamma, w};
            for (const cplx v : {m.m11, m.m12, m.m21, m.m22}) {
                row.emplace_back(v.real());
                row.emplace_back(v.imag());
            }
            if (residual) {
                const SpectralMatrix a{w, matrix_at(c, pr, ss, *s1, w), *s1};
                const SpectralMatrix b{w, matrix_at(c, pr, ss, *s2, w), *s2};
                const ComplexMat2 p = matrix_at(c, pr, ss, Ordering::generalized_p(), w);
                row.emplace_back(max_abs_diff(combine_spectra(*s1, *s2, a, b).m, p));
            }
            t.add_row(std::move(row));
        }
    }
    emit(c, t, out);
    return kOk;
}

SqueezingRoute parse_route(const std::string& r)
{
    if (r == "P" || r == "p") {
        return DirectP{};
    }
    const auto comma = r.find(',');
    if (comma == std::string::npos) {
        usage_error("--route is P or a pair 's,s2'");
    }
    OrderingPair pair{Ordering::parse(r.substr(0, comma)), Ordering::parse(r.substr(comma + 1))};
    combination_weights(pair.s, pair.s_prime);
    return pair;
}

int cmd_approach(const RunConfig& c, std::ostream& out, std::ostream& err)
{
    if (!c.params.Delta) {
        usage_error("--approach-turning-point needs --Delta");
    }
    const auto ords = parse_orderings(c.orderings, "0");
    const auto res = approach_turning_point(*c.params.Delta, c.params.eta, c.params.gamma, c.deltas, ords.front(),
                                            c.params.g_abs);
    Table t;
    t.config = {{"command", c.command},
                {"Delta", format_number(*c.params.Delta)},
                {"eta", std::to_string(c.params.eta)},
                {"gamma", format_number(c.params.gamma)},
                {"ordering", ordering_tag(ords.front())},
                {"V_min_extrapolated", format_number(res.V_min_limit)}};
    t.columns = {"delta", "I", "stability_factor", "V_min", "psi_opt", "S11_zero_abs"};
    for (const auto& s : res.samples) {
        t.add_row({s.delta, s.I, s.stability_factor, s.V_min, s.psi_opt, s.S11_zero});
    }
    err << "extrapolated min V at the turning point: " << format_number(res.V_min_limit) << '\n';
    emit(c, t, out);
    return kOk;
}

int cmd_squeeze(const RunConfig& c, std::ostream& out, std::ostream& err)
{
    if (c.approach) {
        return cmd_approach(c, out, err);
    }
    const Problem pr = resolve(c.params);
    const SteadyState& ss = pick_state(pr, c.params.root);
    const auto omegas = omega_grid(c.grid, pr.p.gamma);
    const SqueezingRoute route = parse_route(c.route);
    if (c.phi && c.psi) {
        usage_error("give --phi or --psi, not both");
    }
    const double phi = c.phi ? *c.phi : lo_phase_from_psi(c.psi.value_or(0.0), ss.phi);

    Table t;
    t.config = echo_params(c, pr);
    t.config.emplace_back("I", format_number(ss.I));
    t.config.emplace_back("route", c.route);

    const auto ords = parse_orderings(c.orderings, "0");
    const IntracavityProfile prof = intracavity_profile(ords.front(), ss, pr.p);
    const PhaseMinimum vmin = prof.minimum();
    t.config.emplace_back("variance_ordering", ordering_tag(ords.front()));
    t.config.emplace_back("V_s", format_number(prof.V_s(phi)));
    t.config.emplace_back("V", format_number(prof.V(phi)));
    t.config.emplace_back("V_min", format_number(vmin.value));
    t.config.emplace_back("phi_opt_variance", format_number(prof.optimal_lo_phase()));

    t.columns = {"Omega", "omega", "phi", "psi", "S_out"};
    if (c.optimize_phase) {
        t.columns.insert(t.columns.end(), {"psi_opt", "phi_opt", "S_out_min"});
    }
    for (const double w : omegas) {
        std::vector<Cell> row{2.0 * w / pr.p.gamma, w, phi, 2.0 * (ss.phi - phi),
                              squeezing_spectrum_out(ss, pr.p, phi, w, route)};
        if (c.optimize_phase) {
            const PhaseMinimum m = squeezing_envelope(ss, pr.p, w);
            row.emplace_back(m.psi_opt);
            row.emplace_back(lo_phase_from_psi(m.psi_opt, ss.phi));
            row.emplace_back(m.value);
        }
        t.add_row(std::move(row));
    }
    err << "intracavity (" << ordering_tag(ords.front()) << "): V_s = " << format_number(prof.V_s(phi))
        << ", V = " << format_number(prof.V(phi)) << ", min V = " << format_number(vmin.value) << '\n';
    emit(c, t, out);
    return kOk;
}

int cmd_simulate(const RunConfig& c, std::ostream& out, std::ostream& err)
{
    const Problem pr = resolve(c.params);
    const SteadyState& ss = pick_state(pr, c.params.root);
    const auto ords = parse_orderings(c.orderings, "0");
    if (ords.size() != 1) {
        usage_error("simulate takes a single --s");
    }

    SimConfig cfg = default_sim_config(pr.p.gamma, static_cast<std::int64_t>(c.segment));
    if (c.dt > 0.0) {
        cfg.dt = c.dt;
    }
    if (c.burnin >= 0) {
        cfg.n_burnin = c.burnin;
    }
    if (c.steps > 0) {
        cfg.n_steps = c.steps;
    } else {
        cfg.n_steps = cfg.n_burnin + (cfg.n_steps - 10 * static_cast<std::int64_t>(c.segment));
    }
    cfg.n_trajectories = c.trajectories;
    cfg.seed = c.seed;
    cfg.ordering = ords.front();
    if (c.mode != "real" && c.mode != "complex") {
        usage_error("--mode is real or complex");
    }
    if (c.regime != "linearized" && c.regime != "nonlinear") {
        usage_error("--regime is linearized or nonlinear");
    }
    if (c.window != "hann" && c.window != "rect") {
        usage_error("--window is hann or rect");
    }
    cfg.mode = c.mode == "complex" ? NoiseMode::ComplexDoubled : NoiseMode::RealConjugate;
    cfg.regime = c.regime == "nonlinear" ? Regime::Nonlinear : Regime::Linearized;
    validate(cfg, drift_jacobian_at(amplitude(ss, pr.p), pr.p));

    const WelchOptions wopts{c.segment, c.overlap, c.window == "rect" ? Window::Rect : Window::Hann};

    std::optional<IntracavityProfile> prof;
    if (c.compare || !c.phi) {
        prof = intracavity_profile(cfg.ordering, ss, pr.p);
    }
    const double phi = c.phi ? *c.phi : prof->optimal_lo_phase();
    const std::vector<double> phis{phi};
    const EnsembleStatistics stats = simulate_statistics(cfg, ss, pr.p, wopts, phis, c.threads);
    const EstimatedSpectrum& est = stats.spectrum;

    if (!c.dump_path.empty()) {
        std::filesystem::path path(c.dump_path);
        if (const char* dir = std::getenv("SQZ_OUTPUT_DIR"); path.is_relative() && dir && *dir) {
            path = std::filesystem::path(dir) / path;
        }
        std::ofstream os(path, std::ios::binary);
        ensure(static_cast<bool>(os), ErrorCode::InvalidConfig, "cannot open '" + path.string() + "'");
        write_trajectory(os, simulate(cfg, ss, pr.p, 0));
    }

    Table t;
    t.config = echo_params(c, pr);
    t.config.emplace_back("I", format_number(ss.I));
    for (const auto& kv : describe(cfg)) {
        t.config.push_back(kv);
    }
    t.config.emplace_back("segment_len", std::to_string(wopts.segment_len));
    t.config.emplace_back("overlap", std::to_string(wopts.overlap));
    t.config.emplace_back("window", to_string(wopts.window));
    t.config.emplace_back("n_segments", std::to_string(est.n_segments));
    t.config.emplace_back("phi", format_number(phi));
    t.config.emplace_back("V_s_estimate", format_number(stats.variances.front().value));
    t.config.emplace_back("V_s_std_error", format_number(stats.variances.front().std_error));

    static const char* names[4] = {"S11", "S12", "S21", "S22"};
    t.columns = {"omega", "Omega"};
    for (const char* n : names) {
        t.columns.insert(t.columns.end(), {std::string(n) + "_re", std::string(n) + "_im", std::string(n) + "_se"});
    }
    if (c.compare) {
        for (const char* n : names) {
            t.columns.insert(t.columns.end(),
                             {std::string(n) + "_analytic_re", std::string(n) + "_analytic_im", std::string(n) + "_z"});
        }
    }
    for (std::size_t k = 0; k < est.size(); ++k) {
        const double w = est.omega[k];
        std::vector<Cell> row{w, 2.0 * w / pr.p.gamma};
        for (int e = 0; e < 4; ++e) {
            const cplx v = entry_of(est.value[k], e);
            row.emplace_back(v.real());
            row.emplace_back(v.imag());
            row.emplace_back(est.std_error(k, e));
        }
        if (c.compare) {
            const ComplexMat2 ref = spectral_matrix_numeric(cfg.ordering, ss, pr.p, w).m;
            for (int e = 0; e < 4; ++e) {
                const cplx r = entry_of(ref, e);
                row.emplace_back(r.real());
                row.emplace_back(r.imag());
                row.emplace_back(std::abs(entry_of(est.value[k], e) - r) / est.std_error(k, e));
            }
        }
        t.add_row(std::move(row));
    }

    int status = kOk;
    if (c.compare) {
        const auto ref = [&](double w) { return spectral_matrix_numeric(cfg.ordering, ss, pr.p, w).m; };
        const double band = c.omega_max * pr.p.gamma / 2.0;
        const double rms11 = rms_relative_deviation(est, 0, band, ref);
        const double rms12 = rms_relative_deviation(est, 1, band, ref);
        const double v_an = prof->V_s(phi);
        const auto& v = stats.variances.front();
        const double z = (v.value - v_an) / v.std_error;
        t.config.emplace_back("rms_S11", format_number(rms11));
        t.config.emplace_back("rms_S12", format_number(rms12));
        t.config.emplace_back("V_s_analytic", format_number(v_an));
        t.config.emplace_back("V_s_z", format_number(z));
        err << "segments " << est.n_segments << ", RMS relative deviation over |Omega| <= "
            << format_number(c.omega_max) << ": S11 " << format_number(rms11) << ", S12 " << format_number(rms12)
            << "; V_s " << format_number(v.value) << " +- " << format_number(v.std_error) << " vs "
            << format_number(v_an) << " (z = " << format_number(z) << ")\n";
        if (c.strict && std::max(rms11, rms12) > c.rms_threshold) {
            err << "RMS deviation above threshold " << format_number(c.rms_threshold) << '\n';
            status = kVerifyFailed;
        }
    }
    emit(c, t, out);
    return status;
}

int cmd_verify(const RunConfig& c, std::ostream& out)
{
    if (c.trials < 1) {
        usage_error("--trials must be >= 1");
    }
    const auto results = run_identity_battery(c.trials, c.seed, c.tol_scale);
    Table t;
    t.config = {{"command", "verify"},
                {"trials", std::to_string(c.trials)},
                {"seed", std::to_string(c.seed)},
                {"tol_scale", format_number(c.tol_scale)}};
    t.columns = {"identity", "trials", "max_residual", "tolerance", "status"};
    bool ok = true;
    for (const auto& r : results) {
        t.add_row({r.name, static_cast<double>(r.trials), r.max_residual, r.tolerance,
                   std::string(r.passed() ? "pass" : "FAIL")});
        ok = ok && r.passed();
    }
    emit(c, t, out);
    return ok ? kOk : kVerifyFailed;
}

// --- argument handling ---------------------------------------------------------

// Flat "key = value" lines; '#' starts a comment; a key may repeat for list options.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path)
{
    std::ifstream is(path);
    ensure(static_cast<bool>(is), ErrorCode::InvalidConfig, "cannot open config file '" + path + "'");
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    const auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(is, line)) {
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        ensure(eq != std::string::npos, ErrorCode::InvalidConfig, "config line without '=': " + line);
        out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return out;
}

// Splices config-file entries in front of the user's flags; a key given on the
// command line drops every config entry of the same key.
std::vector<std::string> expand_config(const std::vector<std::string>& args, CLI::App& app)
{
    std::string path;
    std::vector<std::string> rest;
    for (std::size_t k = 0; k < args.size(); ++k) {
        if (args[k] == "--config" && k + 1 < args.size()) {
            path = args[++k];
        } else if (args[k].rfind("--config=", 0) == 0) {
            path = args[k].substr(9);
        } else {
            rest.push_back(args[k]);
        }
    }
    if (path.empty() || rest.size() < 2) {
        return rest;
    }
    CLI::App* sub = app.get_subcommand_no_throw(rest[1]);
    if (sub == nullptr) {
        return rest;
    }
    const auto given = [&](const std::string& key) {
        for (std::size_t k = 2; k < rest.size(); ++k) {
            if (rest[k] == "--" + key || rest[k].rfind("--" + key + "=", 0) == 0) {
                return true;
            }
        }
        return false;
    };
    std::vector<std::string> spliced(rest.begin(), rest.begin() + 2);
    for (const auto& [key, value] : read_config_file(path)) {
        const CLI::Option* opt = sub->get_option_no_throw("--" + key);
        ensure(opt != nullptr, ErrorCode::InvalidConfig, "unknown config key '" + key + "' for " + rest[1]);
        if (given(key)) {
            continue;
        }
        if (opt->get_expected_max() == 0) {
            if (value == "true" || value == "1") {
                spliced.push_back("--" + key);
            }
            continue;
        }
        spliced.push_back("--" + key + "=" + value);
    }
    spliced.insert(spliced.end(), rest.begin() + 2, rest.end());
    return spliced;
}

void add_param_options(CLI::App* sub, RunConfig& c)
{
    auto& b = c.params;
    sub->add_option("--gamma", b.gamma, "cavity loss rate gamma (1/s)")->capture_default_str();
    sub->add_option("--Delta", b.Delta, "scaled detuning 2 eta theta / gamma");
    sub->add_option("--mu", b.mu, "scaled pump (2/gamma)^3 |g| E0^2");
    sub->add_option("--I", b.I, "scaled intracavity intensity (selects one steady state)");
    sub->add_option("--eta", b.eta, "sign of the Kerr coupling, +1 or -1")->capture_default_str();
    sub->add_option("--g-abs", b.g_abs, "coupling magnitude |g| (1/s) used with scaled parameters")
        ->capture_default_str();
    sub->add_option("--theta", b.theta, "cavity-pump detuning theta (rad/s)");
    sub->add_option("--g", b.g, "signed Kerr coupling g (1/s)");
    sub->add_option("--E0", b.E0, "pump amplitude E0 (1/s)");
    sub->add_option("--root", b.root, "index of the steady state when several exist");
}

void add_output_options(CLI::App* sub, RunConfig& c)
{
    sub->add_option("--out", c.out_path, "output file (relative paths resolve against $SQZ_OUTPUT_DIR)");
    sub->add_option("--format", c.format, "csv or json")->capture_default_str();
}

void add_grid_options(CLI::App* sub, RunConfig& c)
{
    sub->add_option("--Omega", c.grid.points, "frequency point, scaled 2 omega / gamma (repeatable)");
    sub->add_option("--wmin", c.grid.wmin, "grid start (scaled unless --physical-omega)");
    sub->add_option("--wmax", c.grid.wmax, "grid end");
    sub->add_option("--count", c.grid.count, "grid size (>= 2)");
    sub->add_flag("--physical-omega", c.grid.physical, "grid values are angular frequencies in rad/s");
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    RunConfig c;
    CLI::App app{"Squeezing spectra of a driven Kerr cavity from s-ordered phase-space distributions"};
    app.require_subcommand(1);
    app.add_option("--config", "flat key = value file; command-line flags take precedence");

    auto* steady = app.add_subcommand("steady", "steady states of the intensity characteristic");
    add_param_options(steady, c);
    add_output_options(steady, c);

    auto* spectrum = app.add_subcommand("spectrum", "spectral matrix S_ij(omega) for each ordering");
    add_param_options(spectrum, c);
    add_grid_options(spectrum, c);
    add_output_options(spectrum, c);
    spectrum->add_option("--s", c.orderings, "ordering: number in [-1, 1] or P (repeatable)");
    spectrum->add_flag("--closed-form", c.closed_form, "use the closed-form expressions instead of the resolvent");

    auto* squeeze = app.add_subcommand("squeeze", "output squeezing spectrum and intracavity variance");
    add_param_options(squeeze, c);
    add_grid_options(squeeze, c);
    add_output_options(squeeze, c);
    squeeze->add_option("--s", c.orderings, "ordering used for the intracavity variance");
    squeeze->add_option("--phi", c.phi, "local-oscillator phase (rad)");
    squeeze->add_option("--psi", c.psi, "relative phase 2 (phi_ss - phi) (rad)");
    squeeze->add_flag("--optimize-phase", c.optimize_phase, "also report the optimal phase per frequency");
    squeeze->add_option("--route", c.route, "P, or a pair 's,s2' combined into the generalized P spectrum")
        ->capture_default_str();
    squeeze->add_flag("--approach-turning-point", c.approach,
                      "min V along I = I_plus (1 + delta) and its extrapolation to the fold");
    squeeze->add_option("--delta", c.deltas, "relative offsets from I_plus (repeatable)");

    auto* simulate_cmd = app.add_subcommand("simulate", "Langevin simulation and spectral estimation");
    add_param_options(simulate_cmd, c);
    add_output_options(simulate_cmd, c);
    simulate_cmd->add_option("--s", c.orderings, "ordering: number in [-1, 1] or P");
    simulate_cmd->add_option("--dt", c.dt, "time step (s); default 0.01 (2/gamma)");
    simulate_cmd->add_option("--steps", c.steps, "steps per trajectory including burn-in");
    simulate_cmd->add_option("--burnin", c.burnin, "discarded leading steps; default 10 segments");
    simulate_cmd->add_option("--trajectories", c.trajectories)->capture_default_str();
    simulate_cmd->add_option("--seed", c.seed)->capture_default_str();
    simulate_cmd->add_option("--mode", c.mode, "real (conjugate pair) or complex (doubled phase space)")
        ->capture_default_str();
    simulate_cmd->add_option("--regime", c.regime, "linearized or nonlinear")->capture_default_str();
    simulate_cmd->add_option("--segment", c.segment, "Welch segment length")->capture_default_str();
    simulate_cmd->add_option("--overlap", c.overlap, "samples shared by consecutive segments")
        ->capture_default_str();
    simulate_cmd->add_option("--window", c.window, "hann or rect")->capture_default_str();
    simulate_cmd->add_option("--threads", c.threads, "worker threads, 0 = hardware concurrency");
    simulate_cmd->add_option("--phi", c.phi, "quadrature phase for the variance estimate (default: optimal)");
    simulate_cmd->add_flag("--compare-analytic", c.compare, "z-scores and RMS deviation against the resolvent");
    simulate_cmd->add_flag("--strict", c.strict, "exit 1 when the RMS deviation exceeds --rms-threshold");
    simulate_cmd->add_option("--rms-threshold", c.rms_threshold)->capture_default_str();
    simulate_cmd->add_option("--omega-max", c.omega_max, "comparison band |Omega| <= value (scaled)")
        ->capture_default_str();
    simulate_cmd->add_option("--dump-trajectory", c.dump_path, "write trajectory 0 as CSV");

    auto* verify = app.add_subcommand("verify", "randomized check of the exact identities");
    verify->add_option("--trials", c.trials)->capture_default_str();
    verify->add_option("--seed", c.seed)->capture_default_str();
    verify->add_option("--tol-scale", c.tol_scale, "multiplies every tolerance")->capture_default_str();
    add_output_options(verify, c);

    try {
        std::vector<std::string> expanded = expand_config(args, app);
        std::vector<std::string> reversed(expanded.rbegin(), expanded.rend() - 1);
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return kUsage;
    } catch (const Error& e) {
        err << e.what() << '\n';
        return kUsage;
    }

    CLI::App* sub = app.get_subcommands().front();
    c.command = sub->get_name();
    try {
        if (sub == steady) {
            return cmd_steady(c, out);
        }
        if (sub == spectrum) {
            return cmd_spectrum(c, out);
        }
        if (sub == squeeze) {
            return cmd_squeeze(c, out, err);
        }
        if (sub == simulate_cmd) {
            return cmd_simulate(c, out, err);
        }
        return cmd_verify(c, out);
    } catch (const Error& e) {
        err << e.what() << '\n';
        switch (e.code()) {
        case ErrorCode::NonPositiveInput:
        case ErrorCode::ZeroCoupling:
        case ErrorCode::NegativeIntensity:
        case ErrorCode::EqualOrderings:
        case ErrorCode::InvalidConfig:
        case ErrorCode::InsufficientData:
            return kUsage;
        default:
            return kNumeric;
        }
    }
}

} // namespace sqz::cli
