#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "errors.hpp"

namespace barons2d {

/// Viscosities, adiabatic exponent and wall friction.
struct PhysicalParams {
    double mu = 1.0;
    double nu = 0.0;
    double gamma = 3.0;
    double f_friction = 0.0;

    bool operator==(const PhysicalParams&) const = default;
};

enum class CutoffProfile { Smoothstep, Smootherstep };

inline std::string to_string(CutoffProfile p) {
    return p == CutoffProfile::Smoothstep ? "smoothstep" : "smootherstep";
}

inline CutoffProfile parse_cutoff_profile(const std::string& s) {
    if (s == "smoothstep") return CutoffProfile::Smoothstep;
    if (s == "smootherstep") return CutoffProfile::Smootherstep;
    throw ConfigError("cutoff_profile", "unknown profile '" + s + "' (expected smoothstep|smootherstep)");
}

/// Artificial diffusion and the density cutoff window [m1, m2].
struct RegularizationParams {
    double epsilon = 1e-4;
    double m1 = 4.0;
    double m2 = 5.0;
    CutoffProfile cutoff_profile = CutoffProfile::Smoothstep;

    bool operator==(const RegularizationParams&) const = default;
};

enum class WallMode { AllSlipWalls, PeriodicXChannel };

inline std::string to_string(WallMode m) {
    return m == WallMode::AllSlipWalls ? "all-slip-walls" : "periodic-x-channel";
}

inline WallMode parse_wall_mode(const std::string& s) {
    if (s == "all-slip-walls") return WallMode::AllSlipWalls;
    if (s == "periodic-x-channel") return WallMode::PeriodicXChannel;
    throw ConfigError("wall_mode", "unknown mode '" + s + "' (expected all-slip-walls|periodic-x-channel)");
}

struct GridSpec {
    int nx = 32;
    int ny = 32;
    double lx = 1.0;
    double ly = 1.0;
    WallMode wall_mode = WallMode::AllSlipWalls;

    bool operator==(const GridSpec&) const = default;
};

struct TimeSpec {
    double dt = 0.01;
    std::int64_t n_steps = 0;
    double alpha = 100.0;  // 1/dt

    static TimeSpec make(double dt, std::int64_t n_steps) { return {dt, n_steps, 1.0 / dt}; }
    bool operator==(const TimeSpec&) const = default;
};

/// An immutable parameter set that has passed `validate`.
class ValidatedConfig {
public:
    const PhysicalParams& physical() const noexcept { return physical_; }
    const RegularizationParams& regularization() const noexcept { return reg_; }
    const GridSpec& grid() const noexcept { return grid_; }
    const TimeSpec& time() const noexcept { return time_; }

    bool operator==(const ValidatedConfig&) const = default;

private:
    friend ValidatedConfig validate(const PhysicalParams&, const RegularizationParams&, const GridSpec&,
                                    const TimeSpec&);
    ValidatedConfig(PhysicalParams p, RegularizationParams r, GridSpec g, TimeSpec t)
        : physical_(p), reg_(r), grid_(g), time_(t) {}

    PhysicalParams physical_;
    RegularizationParams reg_;
    GridSpec grid_;
    TimeSpec time_;
};

namespace detail {
inline void require(bool ok, const char* field, const std::string& message) {
    if (!ok) throw ConfigError(field, message);
}
inline bool finite(double x) { return std::isfinite(x); }
}  // namespace detail

/// Checks every parameter invariant in field-declaration order and throws a
/// ConfigError naming the first violation.
inline ValidatedConfig validate(const PhysicalParams& p, const RegularizationParams& r, const GridSpec& g,
                                const TimeSpec& t) {
    using detail::finite;
    using detail::require;

    require(finite(p.mu) && p.mu > 0.0, "mu", "mu must be positive");
    require(finite(p.nu) && 2.0 * p.mu + 3.0 * p.nu > 0.0, "nu", "2*mu + 3*nu must be positive");
    require(finite(p.gamma) && p.gamma > 2.0, "gamma", "gamma must exceed 2");
    require(finite(p.f_friction) && p.f_friction >= 0.0, "f_friction", "f_friction must be nonnegative");

    require(finite(r.epsilon) && r.epsilon > 0.0, "epsilon", "epsilon must be positive");
    require(finite(r.m1) && r.m1 > 0.0, "m1", "m1 must be positive");
    require(finite(r.m2) && std::abs(r.m2 - r.m1 - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(r.m2)),
            "m2", "m2 - m1 must equal 1");

    require(g.nx >= 4, "nx", "nx must be at least 4");
    require(g.ny >= 4, "ny", "ny must be at least 4");
    require(finite(g.lx) && g.lx > 0.0, "lx", "lx must be positive");
    require(finite(g.ly) && g.ly > 0.0, "ly", "ly must be positive");

    require(finite(t.dt) && t.dt > 0.0, "dt", "dt must be positive");
    require(t.n_steps >= 0, "n_steps", "n_steps must be nonnegative");
    require(std::abs(t.alpha * t.dt - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon(), "alpha",
            "alpha must equal 1/dt");

    return ValidatedConfig(p, r, g, t);
}

inline ValidatedConfig validate(const ValidatedConfig& c) {
    return validate(c.physical(), c.regularization(), c.grid(), c.time());
}

}  // namespace barons2d
