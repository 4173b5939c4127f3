// io.hpp - tabular output (CSV / JSON) and trajectory dumps

#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sqz/error.hpp"
#include "sqz/langevin.hpp"

namespace sqz {

using Cell = std::variant<double, std::string>;

struct Table {
    std::vector<std::pair<std::string, std::string>> config; // echoed run parameters
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row)
    {
        ensure(row.size() == columns.size(), ErrorCode::InvalidConfig, "row width does not match the header");
        rows.push_back(std::move(row));
    }

    std::size_t column(const std::string& name) const
    {
        for (std::size_t k = 0; k < columns.size(); ++k) {
            if (columns[k] == name) {
                return k;
            }
        }
        throw Error(ErrorCode::InvalidConfig, "no column '" + name + "'");
    }

    double number(std::size_t row, const std::string& name) const { return std::get<double>(rows[row][column(name)]); }

    friend bool operator==(const Table&, const Table&) = default;
};

enum class Format { Csv, Json };

inline Format parse_format(const std::string& s)
{
    if (s == "csv") {
        return Format::Csv;
    }
    if (s == "json") {
        return Format::Json;
    }
    throw Error(ErrorCode::InvalidConfig, "unknown format '" + s + "' (csv or json)");
}

// 17 significant digits: parses back to the same double.
inline std::string format_number(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_csv(std::ostream& os, const Table& t)
{
    for (std::size_t k = 0; k < t.columns.size(); ++k) {
        os << (k ? "," : "") << t.columns[k];
    }
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (k) {
                os << ',';
            }
            if (const double* d = std::get_if<double>(&row[k])) {
                os << format_number(*d);
            } else {
                os << std::get<std::string>(row[k]);
            }
        }
        os << '\n';
    }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        out.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

inline Cell parse_cell(const std::string& text)
{
    if (text.empty()) {
        return text;
    }
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() + text.size()) {
        return v;
    }
    return text;
}

} // namespace detail

inline Table read_csv(std::istream& is)
{
    Table t;
    std::string line;
    ensure(static_cast<bool>(std::getline(is, line)), ErrorCode::InvalidConfig, "empty CSV");
    t.columns = detail::split_csv_line(line);
    while (std::getline(is, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<Cell> row;
        for (const auto& f : detail::split_csv_line(line)) {
            row.push_back(detail::parse_cell(f));
        }
        t.add_row(std::move(row));
    }
    return t;
}

inline nlohmann::ordered_json to_json(const Table& t)
{
    nlohmann::ordered_json j;
    j["config"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : t.config) {
        j["config"][k] = v;
    }
    j["columns"] = t.columns;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
        auto r = nlohmann::ordered_json::array();
        for (const auto& c : row) {
            if (const double* d = std::get_if<double>(&c)) {
                r.push_back(*d);
            } else {
                r.push_back(std::get<std::string>(c));
            }
        }
        j["rows"].push_back(std::move(r));
    }
    return j;
}

inline void write_json(std::ostream& os, const Table& t)
{
    os << to_json(t).dump(2) << '\n';
}

inline Table read_json(std::istream& is)
{
    const auto j = nlohmann::ordered_json::parse(is);
    Table t;
    for (const auto& [k, v] : j.at("config").items()) {
        t.config.emplace_back(k, v.get<std::string>());
    }
    t.columns = j.at("columns").get<std::vector<std::string>>();
    for (const auto& r : j.at("rows")) {
        std::vector<Cell> row;
        for (const auto& c : r) {
            if (c.is_string()) {
                row.emplace_back(c.get<std::string>());
            } else {
                row.emplace_back(c.get<double>());
            }
        }
        t.add_row(std::move(row));
    }
    return t;
}

inline void write_table(std::ostream& os, const Table& t, Format f)
{
    if (f == Format::Csv) {
        write_csv(os, t);
    } else {
        write_json(os, t);
    }
}

inline Table read_table(std::istream& is, Format f)
{
    return f == Format::Csv ? read_csv(is) : read_json(is);
}

inline void save_table(const std::string& path, const Table& t, Format f)
{
    std::ofstream os(path, std::ios::binary);
    ensure(static_cast<bool>(os), ErrorCode::InvalidConfig, "cannot open '" + path + "' for writing");
    write_table(os, t, f);
    ensure(static_cast<bool>(os), ErrorCode::InvalidConfig, "write to '" + path + "' failed");
}

inline Table load_table(const std::string& path, Format f)
{
    std::ifstream is(path, std::ios::binary);
    ensure(static_cast<bool>(is), ErrorCode::InvalidConfig, "cannot open '" + path + "'");
    return read_table(is, f);
}

// --- trajectory dump ---------------------------------------------------------
//
// '#'-prefixed "key=value" lines with the full configuration, then the column
// header and one row per recorded sample. Time starts at the first recorded step.

inline std::vector<std::pair<std::string, std::string>> describe(const SimConfig& cfg)
{
    return {{"dt", format_number(cfg.dt)},
            {"n_steps", std::to_string(cfg.n_steps)},
            {"n_burnin", std::to_string(cfg.n_burnin)},
            {"n_trajectories", std::to_string(cfg.n_trajectories)},
            {"seed", std::to_string(cfg.seed)},
            {"mode", to_string(cfg.mode)},
            {"regime", to_string(cfg.regime)},
            {"ordering", cfg.ordering.label()}};
}

inline void write_trajectory(std::ostream& os, const Trajectory& traj)
{
    for (const auto& [k, v] : describe(traj.config)) {
        os << "# " << k << '=' << v << '\n';
    }
    os << "# substream=" << traj.substream << '\n';
    const bool doubled = traj.config.mode == NoiseMode::ComplexDoubled;
    os << (doubled ? "t,re_alpha,im_alpha,re_beta,im_beta\n" : "t,re_alpha,im_alpha\n");
    for (std::size_t n = 0; n < traj.samples.size(); ++n) {
        const auto& v = traj.samples[n];
        os << format_number(static_cast<double>(n) * traj.config.dt) << ',' << format_number(v[0].real()) << ','
           << format_number(v[0].imag());
        if (doubled) {
            os << ',' << format_number(v[1].real()) << ',' << format_number(v[1].imag());
        }
        os << '\n';
    }
}

inline Trajectory read_trajectory(std::istream& is)
{
    std::map<std::string, std::string> header;
    std::string line;
    while (is.peek() == '#' && std::getline(is, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) {
            header[line.substr(2, eq - 2)] = line.substr(eq + 1);
        }
    }
    const auto get = [&](const std::string& key) {
        const auto it = header.find(key);
        ensure(it != header.end(), ErrorCode::InvalidConfig, "trajectory header lacks '" + key + "'");
        return it->second;
    };
    Trajectory t;
    t.config.dt = std::stod(get("dt"));
    t.config.n_steps = std::stoll(get("n_steps"));
    t.config.n_burnin = std::stoll(get("n_burnin"));
    t.config.n_trajectories = std::stoll(get("n_trajectories"));
    t.config.seed = std::stoull(get("seed"));
    t.config.mode = get("mode") == "complex" ? NoiseMode::ComplexDoubled : NoiseMode::RealConjugate;
    t.config.regime = get("regime") == "nonlinear" ? Regime::Nonlinear : Regime::Linearized;
    t.config.ordering = Ordering::parse(get("ordering"));
    t.substream = std::stoull(get("substream"));

    const Table body = read_csv(is);
    const bool doubled = body.columns.size() == 5;
    for (const auto& row : body.rows) {
        const cplx a(std::get<double>(row[1]), std::get<double>(row[2]));
        const cplx b = doubled ? cplx(std::get<double>(row[3]), std::get<double>(row[4])) : std::conj(a);
        t.samples.push_back({a, b});
    }
    return t;
}

} // namespace sqz
