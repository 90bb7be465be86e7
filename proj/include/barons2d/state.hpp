#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "operators.hpp"

namespace barons2d {

/// Density and velocity at one time level.
struct FluidState {
    ScalarField rho;
    VectorField v;
    double time = 0.0;
    std::int64_t step_index = 0;
    double epsilon_used = 0.0;

    const Grid& grid() const noexcept { return rho.grid(); }
    bool operator==(const FluidState&) const = default;
};

/// Checks rho >= 0, rho <= m2 (when m2 > 0), v.n = 0 and finiteness.
inline void check_state(const FluidState& s, double m2) {
    require_same_grid(s.rho.grid(), s.v.grid(), "FluidState");
    if (!s.rho.finite() || !s.v.finite()) throw Error("state contains non-finite values");
    if (s.rho.min() < -1e-12) throw NegativeInput("state density is negative");
    if (m2 > 0.0 && s.rho.max() > m2 + 1e-12) throw Error("state density exceeds m2");
    if (!s.v.is_slip_compatible()) throw Error("state velocity is not slip-compatible");
}

enum class InitialKind { Uniform, Bump, RandomSmooth };

inline std::string to_string(InitialKind k) {
    switch (k) {
        case InitialKind::Uniform: return "uniform";
        case InitialKind::Bump: return "bump";
        default: return "random-smooth";
    }
}

inline InitialKind parse_initial_kind(const std::string& s) {
    if (s == "uniform") return InitialKind::Uniform;
    if (s == "bump") return InitialKind::Bump;
    if (s == "random-smooth") return InitialKind::RandomSmooth;
    throw ConfigError("preset", "unknown preset '" + s + "' (expected uniform|bump|random-smooth)");
}

/// Parameters of the built-in initial data generators.
struct InitialSpec {
    InitialKind kind = InitialKind::Bump;
    double rho_base = 1.0;
    double bump_amplitude = 0.5;
    double bump_cx = 0.5;  // fraction of lx
    double bump_cy = 0.5;  // fraction of ly
    double bump_width = 0.1;
    double velocity_amplitude = 0.5;  // random-smooth only
    int modes = 3;
    std::uint64_t seed = 1;

    bool operator==(const InitialSpec&) const = default;
};

namespace detail {
/// Uniform double in [0,1) from the top 53 bits (portable across standard libraries).
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Smooth stream function vanishing on every wall, sampled at nodes.
inline NodeField stream_function(const Grid& g, const std::vector<double>& coef, int modes) {
    using std::numbers::pi;
    NodeField a(g);
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) {
            const double x = g.xn(i) / g.lx(), y = g.yn(j) / g.ly();
            double s = 0.0;
            int k = 0;
            for (int m = 1; m <= modes; ++m)
                for (int n = 1; n <= modes; ++n, ++k) {
                    const double fx = g.periodic_x() ? std::cos(2.0 * pi * (m - 1) * x) : std::sin(m * pi * x);
                    s += coef[k] * fx * std::sin(n * pi * y);
                }
            a(i, j) = s;
        }
    if (g.periodic_x())
        for (int j = 0; j <= g.ny(); ++j) a(g.nx(), j) = a(0, j);
    return a;
}
}  // namespace detail

/// Builds initial data. The bump starts at rest. The random-smooth density
/// perturbation is scaled to relative amplitude `bump_amplitude`; its
/// velocity is the rotated gradient of a random low-mode stream function,
/// hence discretely divergence free and slip-compatible.
inline FluidState make_initial_state(const Grid& g, const InitialSpec& spec) {
    using std::numbers::pi;
    FluidState s{ScalarField(g, spec.rho_base), VectorField(g), 0.0, 0, 0.0};
    switch (spec.kind) {
        case InitialKind::Uniform: break;
        case InitialKind::Bump: {
            const double cx = spec.bump_cx * g.lx(), cy = spec.bump_cy * g.ly();
            const double w2 = 2.0 * spec.bump_width * spec.bump_width;
            s.rho = ScalarField::sample(g, [&](double x, double y) {
                const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                return spec.rho_base + spec.bump_amplitude * std::exp(-r2 / w2);
            });
            break;
        }
        case InitialKind::RandomSmooth: {
            std::mt19937_64 rng(spec.seed);
            const int nm = spec.modes * spec.modes;
            std::vector<double> a(nm), b(nm);
            for (auto& x : a) x = 2.0 * detail::unit_uniform(rng) - 1.0;
            for (auto& x : b) x = 2.0 * detail::unit_uniform(rng) - 1.0;
            ScalarField pert = ScalarField::sample(g, [&](double x, double y) {
                double acc = 0.0;
                int k = 0;
                for (int m = 0; m < spec.modes; ++m)
                    for (int n = 0; n < spec.modes; ++n, ++k) {
                        if (m == 0 && n == 0) continue;
                        const double fx = g.periodic_x() ? std::cos(2.0 * pi * m * x / g.lx()) : std::cos(m * pi * x / g.lx());
                        acc += a[k] * fx * std::cos(n * pi * y / g.ly()) / (m * m + n * n);
                    }
                return acc;
            });
            const double pmax = std::max(std::abs(pert.min()), std::abs(pert.max()));
            for (std::size_t c = 0; c < pert.size(); ++c)
                s.rho.data()[c] = spec.rho_base * (1.0 + (pmax > 0.0 ? spec.bump_amplitude * pert.data()[c] / pmax : 0.0));
            if (s.rho.min() < 0.0) throw ConfigError("bump_amplitude", "random-smooth density would be negative");
            s.v = perp_gradient(detail::stream_function(g, b, spec.modes));
            double vmax = 0.0;
            for (double x : s.v.u_data()) vmax = std::max(vmax, std::abs(x));
            for (double x : s.v.v_data()) vmax = std::max(vmax, std::abs(x));
            if (vmax > 0.0) s.v *= spec.velocity_amplitude / vmax;
            s.v.enforce_slip();
            break;
        }
    }
    return s;
}

}  // namespace barons2d
