#pragma once

#include <cerrno>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "state.hpp"
#include "stepper.hpp"

namespace barons2d {

/// Everything a simulation or sweep needs, as read from a config file and
/// command-line overrides. `resolve` turns it into a ValidatedConfig.
struct RunConfig {
    PhysicalParams physical{1.0, 0.0, 3.0, 0.1};
    RegularizationParams regularization;
    bool epsilon_auto = true;
    double c_eps = 0.1;
    bool m1_auto = true;
    bool m2_given = false;
    GridSpec grid{64, 64, 1.0, 1.0, WallMode::AllSlipWalls};
    double dt = 0.01;
    std::int64_t n_steps = 100;
    bool alpha_given = false;
    double alpha = 0.0;
    InitialSpec initial;
    std::string restart;
    StepperOptions stepper;
    double t_final = 0.2;
    std::vector<double> dts{0.02, 0.01, 0.005};
    std::vector<double> eps_schedule{1e-2, 1e-3, 1e-4};
    std::vector<double> tail_thresholds;  // empty: 0.8 m1
    std::string snapshot_format = "binary";
    std::int64_t snapshot_every = 0;
    int workers = 1;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
    const std::string t = trim(v);
    char* end = nullptr;
    errno = 0;
    const double x = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE)
        throw ConfigError(key, "expected a number, got '" + v + "'");
    return x;
}

inline std::int64_t parse_int(const std::string& key, const std::string& v) {
    const std::string t = trim(v);
    char* end = nullptr;
    errno = 0;
    const long long x = std::strtoll(t.c_str(), &end, 10);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE)
        throw ConfigError(key, "expected an integer, got '" + v + "'");
    return x;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    const std::string t = trim(v);
    char* end = nullptr;
    errno = 0;
    const unsigned long long x = std::strtoull(t.c_str(), &end, 10);
    if (t.empty() || t[0] == '-' || end != t.c_str() + t.size() || errno == ERANGE)
        throw ConfigError(key, "expected an unsigned integer, got '" + v + "'");
    return x;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!trim(item).empty()) out.push_back(parse_double(key, item));
    return out;
}

inline int parse_int32(const std::string& key, const std::string& v) {
    const std::int64_t x = parse_int(key, v);
    if (x < -2147483647 || x > 2147483647) throw ConfigError(key, "value out of range");
    return static_cast<int>(x);
}

}  // namespace detail

/// Applies one key = value assignment.
inline void apply_setting(RunConfig& c, const std::string& raw_key, const std::string& raw_value) {
    using namespace detail;
    const std::string key = trim(raw_key);
    const std::string v = trim(raw_value);
    if (key == "mu") c.physical.mu = parse_double(key, v);
    else if (key == "nu") c.physical.nu = parse_double(key, v);
    else if (key == "gamma") c.physical.gamma = parse_double(key, v);
    else if (key == "f_friction") c.physical.f_friction = parse_double(key, v);
    else if (key == "epsilon") {
        c.epsilon_auto = v == "auto";
        if (!c.epsilon_auto) c.regularization.epsilon = parse_double(key, v);
    } else if (key == "c_eps") c.c_eps = parse_double(key, v);
    else if (key == "m1") {
        c.m1_auto = v == "auto";
        if (!c.m1_auto) c.regularization.m1 = parse_double(key, v);
    } else if (key == "m2") {
        c.m2_given = true;
        c.regularization.m2 = parse_double(key, v);
    } else if (key == "cutoff_profile") c.regularization.cutoff_profile = parse_cutoff_profile(v);
    else if (key == "nx") c.grid.nx = parse_int32(key, v);
    else if (key == "ny") c.grid.ny = parse_int32(key, v);
    else if (key == "lx") c.grid.lx = parse_double(key, v);
    else if (key == "ly") c.grid.ly = parse_double(key, v);
    else if (key == "wall_mode") c.grid.wall_mode = parse_wall_mode(v);
    else if (key == "dt") c.dt = parse_double(key, v);
    else if (key == "n_steps") c.n_steps = parse_int(key, v);
    else if (key == "alpha") {
        c.alpha_given = true;
        c.alpha = parse_double(key, v);
    } else if (key == "preset") c.initial.kind = parse_initial_kind(v);
    else if (key == "rho_base") c.initial.rho_base = parse_double(key, v);
    else if (key == "bump_amplitude") c.initial.bump_amplitude = parse_double(key, v);
    else if (key == "bump_cx") c.initial.bump_cx = parse_double(key, v);
    else if (key == "bump_cy") c.initial.bump_cy = parse_double(key, v);
    else if (key == "bump_width") c.initial.bump_width = parse_double(key, v);
    else if (key == "velocity_amplitude") c.initial.velocity_amplitude = parse_double(key, v);
    else if (key == "modes") c.initial.modes = parse_int32(key, v);
    else if (key == "seed") c.initial.seed = parse_u64(key, v);
    else if (key == "restart") c.restart = v;
    else if (key == "tol_outer") c.stepper.tol_outer = parse_double(key, v);
    else if (key == "max_outer") c.stepper.max_outer = parse_int32(key, v);
    else if (key == "relax_theta") c.stepper.relax_theta = parse_double(key, v);
    else if (key == "tol_density") c.stepper.tol_density = parse_double(key, v);
    else if (key == "max_density_iters") c.stepper.max_density_iters = parse_int32(key, v);
    else if (key == "t_final") c.t_final = parse_double(key, v);
    else if (key == "dts") c.dts = parse_list(key, v);
    else if (key == "eps_schedule") c.eps_schedule = parse_list(key, v);
    else if (key == "tail_thresholds") c.tail_thresholds = parse_list(key, v);
    else if (key == "snapshot_format") {
        if (v != "binary" && v != "ascii") throw ConfigError(key, "expected binary|ascii");
        c.snapshot_format = v;
    } else if (key == "snapshot_every") c.snapshot_every = parse_int(key, v);
    else if (key == "workers") c.workers = parse_int32(key, v);
    else throw ConfigError(key, "unknown configuration key");
}

/// Parses "key = value" lines; "#" starts a comment.
inline void parse_config_text(RunConfig& c, const std::string& text) {
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno), "expected key = value");
        apply_setting(c, line.substr(0, eq), line.substr(eq + 1));
    }
}

inline RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    RunConfig c;
    parse_config_text(c, ss.str());
    return c;
}

/// Applies a "key=value" override.
inline void apply_override(RunConfig& c, const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError(kv, "override must have the form key=value");
    apply_setting(c, kv.substr(0, eq), kv.substr(eq + 1));
}

/// Fills automatic values from the initial data: m1 = 4 max rho0,
/// m2 = m1 + 1 (unless given), epsilon = c_eps * min(hx, hy)^2.
inline ValidatedConfig resolve(RunConfig& c, const ScalarField& rho0) {
    if (c.m1_auto) c.regularization.m1 = 4.0 * rho0.max();
    if (!c.m2_given) c.regularization.m2 = c.regularization.m1 + 1.0;
    if (c.epsilon_auto) {
        const double h = std::min(c.grid.lx / c.grid.nx, c.grid.ly / c.grid.ny);
        c.regularization.epsilon = c.c_eps * h * h;
    }
    TimeSpec t = TimeSpec::make(c.dt, c.n_steps);
    if (c.alpha_given) t.alpha = c.alpha;
    return validate(c.physical, c.regularization, c.grid, t);
}

inline std::vector<double> effective_thresholds(const RunConfig& c) {
    if (!c.tail_thresholds.empty()) return c.tail_thresholds;
    return {0.8 * c.regularization.m1};
}

}  // namespace barons2d
