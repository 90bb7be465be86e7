#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "config.hpp"
#include "density_solver.hpp"
#include "grid.hpp"
#include "lame_solver.hpp"
#include "operators.hpp"

namespace barons2d {

/// Errors of one manufactured solution over a sequence of doubled grids.
struct MmsResult {
    std::string name;
    WallMode wall_mode = WallMode::AllSlipWalls;
    std::vector<int> resolutions;
    std::vector<double> errors;
    std::vector<double> orders;  // log2(e_k / e_{k+1})
    double required_order = 0.0;

    double min_order() const {
        if (orders.empty()) return std::numeric_limits<double>::quiet_NaN();
        return *std::min_element(orders.begin(), orders.end());
    }
    bool passed() const { return !orders.empty() && min_order() >= required_order; }
};

inline MmsResult mms_study(const std::string& name, WallMode mode, const std::vector<int>& ns, double required,
                           const std::function<double(const Grid&)>& error_on) {
    MmsResult r{name, mode, ns, {}, {}, required};
    for (int n : ns) r.errors.push_back(error_on(Grid(GridSpec{n, n, 1.0, 1.0, mode})));
    for (std::size_t k = 0; k + 1 < r.errors.size(); ++k) r.orders.push_back(std::log2(r.errors[k] / r.errors[k + 1]));
    return r;
}

namespace detail {

/// Wavenumber in x: one half wave between walls, one full wave when periodic.
inline double kx(const Grid& g) { return (g.periodic_x() ? 2.0 : 1.0) * std::numbers::pi / g.lx(); }
inline double ky(const Grid& g) { return std::numbers::pi / g.ly(); }

inline double interior_node_error(const NodeField& a, const std::function<double(double, double)>& exact) {
    const Grid& g = a.grid();
    double s = 0.0;
    for (int j = 1; j < g.ny(); ++j)
        for (int i = 1; i < g.nx(); ++i) {
            const double d = a(i, j) - exact(g.xn(i), g.yn(j));
            s += d * d * g.cell_area();
        }
    return std::sqrt(s);
}

}  // namespace detail

/// divergence, gradient, laplacian_neumann, curl2d (interior nodes) and integrate.
inline std::vector<MmsResult> grid_ops_mms(WallMode mode, const std::vector<int>& ns = {16, 32, 64, 128}) {
    using detail::kx;
    using detail::ky;
    std::vector<MmsResult> out;
    // p = cos(kx x) cos(ky y) has zero normal derivative on every wall.
    auto p_of = [](const Grid& g) {
        const double a = kx(g), b = ky(g);
        return ScalarField::sample(g, [=](double x, double y) { return std::cos(a * x) * std::cos(b * y); });
    };
    // w = (sin(kx x) cos(ky y), 2 cos(kx x) sin(ky y)) is slip-compatible.
    auto w_of = [](const Grid& g) {
        const double a = kx(g), b = ky(g);
        VectorField w = VectorField::sample(
            g, [=](double x, double y) { return std::sin(a * x) * std::cos(b * y); },
            [=](double x, double y) { return 2.0 * std::cos(a * x) * std::sin(b * y); });
        w.enforce_slip();
        return w;
    };

    out.push_back(mms_study("divergence", mode, ns, 1.9, [&](const Grid& g) {
        const double a = kx(g), b = ky(g);
        const ScalarField exact =
            ScalarField::sample(g, [=](double x, double y) { return (a + 2.0 * b) * std::cos(a * x) * std::cos(b * y); });
        return l2_norm(divergence(w_of(g)) - exact);
    }));
    out.push_back(mms_study("gradient", mode, ns, 1.9, [&](const Grid& g) {
        const double a = kx(g), b = ky(g);
        VectorField exact = VectorField::sample(
            g, [=](double x, double y) { return -a * std::sin(a * x) * std::cos(b * y); },
            [=](double x, double y) { return -b * std::cos(a * x) * std::sin(b * y); });
        exact.enforce_slip();
        return l2_norm(gradient(p_of(g)) - exact);
    }));
    out.push_back(mms_study("laplacian_neumann", mode, ns, 1.9, [&](const Grid& g) {
        const double a = kx(g), b = ky(g);
        const ScalarField exact =
            ScalarField::sample(g, [=](double x, double y) { return -(a * a + b * b) * std::cos(a * x) * std::cos(b * y); });
        return l2_norm(laplacian_neumann(p_of(g)) - exact);
    }));
    out.push_back(mms_study("curl2d", mode, ns, 1.9, [&](const Grid& g) {
        const double a = kx(g), b = ky(g);
        // curl = dv/dx - du/dy
        return detail::interior_node_error(curl2d(w_of(g)), [=](double x, double y) {
            return (b - 2.0 * a) * std::sin(a * x) * std::sin(b * y);
        });
    }));
    out.push_back(mms_study("integrate", mode, ns, 1.9, [&](const Grid& g) {
        const ScalarField p = ScalarField::sample(g, [&](double x, double y) { const double t = y / g.ly(); return std::exp(x / g.lx()) * t * t; });
        const double exact = g.lx() * (std::exp(1.0) - 1.0) * g.ly() / 3.0;
        return std::abs(integrate(p) - exact);
    }));
    return out;
}

/// Lame system with the manufactured field w = (sin(kx x) (1 + (f/mu) y (1 - y)), 0),
/// which has zero normal component and satisfies the Robin condition on y-walls.
inline MmsResult lame_mms(WallMode mode, const PhysicalParams& p = {1.0, 0.3, 3.0, 0.7},
                          const std::vector<int>& ns = {16, 32, 64, 128}) {
    return mms_study("solve_lame", mode, ns, 1.5, [&](const Grid& g) {
        if (g.lx() != 1.0 || g.ly() != 1.0) throw ConfigError("grid", "lame MMS uses the unit box");
        const double a = detail::kx(g), mu = p.mu, nu = p.nu, r = p.f_friction / p.mu;
        auto gy = [=](double y) { return 1.0 + r * y * (1.0 - y); };
        auto gp = [=](double y) { return r * (1.0 - 2.0 * y); };
        VectorField exact = VectorField::sample(
            g, [=](double x, double y) { return std::sin(a * x) * gy(y); }, [](double, double) { return 0.0; });
        VectorField F = VectorField::sample(
            g,
            [=](double x, double y) {
                return mu * a * a * std::sin(a * x) * gy(y) + 2.0 * mu * r * std::sin(a * x) +
                       (mu + nu) * a * a * std::sin(a * x) * gy(y);
            },
            [=](double x, double y) { return -(mu + nu) * a * std::cos(a * x) * gp(y); });
        exact.enforce_slip();
        F.enforce_slip();
        const LameSystem L(g, p);
        return l2_norm(L.solve(F) - exact);
    });
}

/// Upwind density solve with rho* = 1 + 0.3 cos(kx x) cos(ky y), a slip-compatible
/// v* and the matching source h = rho* + (div(rho* v*) - eps lap rho*) / alpha.
/// The cutoff is inactive (m1 well above max rho*).
/// Sixteen cells per wavelength is still pre-asymptotic for first-order
/// upwinding, so the default sequence starts at 32.
inline MmsResult density_mms(WallMode mode, double alpha = 10.0, double epsilon = 1e-2,
                             const std::vector<int>& ns = {32, 64, 128, 256}) {
    return mms_study("solve_density", mode, ns, 0.9, [&](const Grid& g) {
        const double a = detail::kx(g), b = detail::ky(g);
        auto rho = [=](double x, double y) { return 1.0 + 0.3 * std::cos(a * x) * std::cos(b * y); };
        auto rx = [=](double x, double y) { return -0.3 * a * std::sin(a * x) * std::cos(b * y); };
        auto ry = [=](double x, double y) { return -0.3 * b * std::cos(a * x) * std::sin(b * y); };
        auto lap = [=](double x, double y) { return -(a * a + b * b) * 0.3 * std::cos(a * x) * std::cos(b * y); };
        auto u = [=](double x, double y) { return 0.5 * std::sin(a * x) * std::cos(b * y); };
        auto v = [=](double x, double y) { return 0.25 * std::sin(b * y) * (1.0 + std::sin(a * x)); };
        auto div_v = [=](double x, double y) {
            return 0.5 * a * std::cos(a * x) * std::cos(b * y) + 0.25 * b * std::cos(b * y) * (1.0 + std::sin(a * x));
        };
        VectorField vs = VectorField::sample(g, u, v);
        vs.enforce_slip();
        const ScalarField h = ScalarField::sample(g, [&](double x, double y) {
            const double flux = u(x, y) * rx(x, y) + v(x, y) * ry(x, y) + rho(x, y) * div_v(x, y);
            return rho(x, y) + (flux - epsilon * lap(x, y)) / alpha;
        });
        const RegularizationParams reg{epsilon, 4.0, 5.0};
        const DensitySolution sol = solve_density(vs, h, alpha, reg, 1e-10, 50);
        return l2_norm(sol.rho - ScalarField::sample(g, rho));
    });
}

/// Every suite in both wall modes.
inline std::vector<MmsResult> all_mms(const std::vector<int>& ns = {16, 32, 64, 128},
                                      const std::vector<int>& density_ns = {32, 64, 128, 256}) {
    std::vector<MmsResult> out;
    for (WallMode m : {WallMode::AllSlipWalls, WallMode::PeriodicXChannel}) {
        for (auto& r : grid_ops_mms(m, ns)) out.push_back(std::move(r));
        out.push_back(lame_mms(m, {1.0, 0.3, 3.0, 0.7}, ns));
        out.push_back(density_mms(m, 10.0, 1e-2, density_ns));
    }
    return out;
}

}  // namespace barons2d
