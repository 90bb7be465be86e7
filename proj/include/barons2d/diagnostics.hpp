#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <utility>
#include <vector>

#include "config.hpp"
#include "density_solver.hpp"
#include "eos.hpp"
#include "grid.hpp"
#include "lame_solver.hpp"
#include "linear.hpp"
#include "momentum.hpp"
#include "operators.hpp"
#include "state.hpp"

namespace barons2d {

// ---------------------------------------------------------------------------
// Energy, dissipation, entropy
// ---------------------------------------------------------------------------

/// int rho |v|^2 with the face density (no factor 1/2).
inline double rho_v2(const ScalarField& rho, const VectorField& v) {
    return inner(face_product(face_density(rho), v), v);
}

inline double kinetic_energy(const ScalarField& rho, const VectorField& v) { return 0.5 * rho_v2(rho, v); }

inline double internal_energy(const ScalarField& rho, const PressureLaw& law) {
    return lp_norm_pow(rho, law.gamma()) / (law.gamma() - 1.0);
}

/// 1/2 int rho |v|^2 + 1/(gamma-1) int rho^gamma.
inline double energy(const ScalarField& rho, const VectorField& v, const PressureLaw& law) {
    return kinetic_energy(rho, v) + internal_energy(rho, law);
}

/// f * sum over walls of (v.t)^2 |edge| with the Robin trace.
inline double boundary_friction_dissipation(const VectorField& v, const PhysicalParams& p) {
    if (p.f_friction == 0.0) return 0.0;
    return p.f_friction * boundary_integrate_tangential_sq(v, WallClosure::robin(p.f_friction / p.mu));
}

/// int (2 mu |D(v)|^2 + nu (div v)^2) + f int_walls (v.t)^2, computed with
/// grid operators (the Lame assembly evaluates the same form independently).
inline double dissipation(const VectorField& v, const PhysicalParams& p) {
    const WallClosure cl = WallClosure::robin(p.f_friction / p.mu);
    const ScalarField d = divergence(v);
    return 2.0 * p.mu * integrate(sym_grad_normsq(v, cl)) + p.nu * inner(d, d) + boundary_friction_dissipation(v, p);
}

inline double rho_log_rho(double r) { return r > 0.0 ? r * std::log(r) : 0.0; }

/// (1/dt) int (rho_k ln rho_k - rho_{k-1} ln rho_{k-1}) + int rho_k div v_k.
inline double entropy_residual(const FluidState& prev, const FluidState& cur, double dt) {
    require_same_grid(prev.grid(), cur.grid(), "entropy_residual");
    const ScalarField d = divergence(cur.v);
    double s = 0.0, t = 0.0;
    for (std::size_t c = 0; c < cur.rho.size(); ++c) {
        s += rho_log_rho(cur.rho.data()[c]) - rho_log_rho(prev.rho.data()[c]);
        t += cur.rho.data()[c] * d.data()[c];
    }
    return (s / dt + t) * cur.grid().cell_area();
}

// ---------------------------------------------------------------------------
// Helmholtz decomposition, effective viscous flux, tails
// ---------------------------------------------------------------------------

/// Solves the pure Neumann problem Lap phi = b (b must have zero mean up to
/// roundoff); returns the zero-mean solution.
inline ScalarField solve_neumann_poisson(const ScalarField& b) {
    const Grid& g = b.grid();
    const int n = static_cast<int>(g.n_cells());
    std::vector<Triplet> t;
    const double cx = 1.0 / (g.hx() * g.hx()), cy = 1.0 / (g.hy() * g.hy());
    auto link = [&](int a, int c, double w) {
        if (a == 0 || c == 0) {
            if (a != 0) t.emplace_back(a, a, w);
            if (c != 0) t.emplace_back(c, c, w);
            return;
        }
        t.emplace_back(a, a, w);
        t.emplace_back(c, c, w);
        t.emplace_back(a, c, -w);
        t.emplace_back(c, a, -w);
    };
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const int c = static_cast<int>(g.cell(i, j));
            if (g.xface_active(i)) link(static_cast<int>(g.cell(g.wrap(i - 1), j)), c, cx);
            if (j > 0) link(static_cast<int>(g.cell(i, j - 1)), c, cy);
        }
    t.emplace_back(0, 0, 1.0);
    SparseMatrix m(n, n);
    m.setFromTriplets(t.begin(), t.end());
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(m);
    if (ldlt.info() != Eigen::Success) throw SolverBreakdown("Neumann Poisson factorization failed");
    Vec rhs(n);
    const double mean = std::accumulate(b.data().begin(), b.data().end(), 0.0) / n;
    for (int k = 0; k < n; ++k) rhs[k] = -(b.data()[k] - mean);
    rhs[0] = 0.0;
    const Vec x = ldlt.solve(rhs);
    ScalarField phi(g);
    const double xm = x.mean();
    for (int k = 0; k < n; ++k) phi.data()[k] = x[k] - xm;
    return phi;
}

/// Solves the node Laplacian Lap A = w at interior nodes with A = 0 on the
/// walls (periodic in x in channel mode).
inline NodeField solve_dirichlet_node_poisson(const NodeField& w) {
    const Grid& g = w.grid();
    const int nx = g.nx(), ny = g.ny();
    const int i0 = g.periodic_x() ? 0 : 1, i1 = nx - 1;
    const int ncol = i1 - i0 + 1;
    auto id = [&](int i, int j) { return (j - 1) * ncol + (i - i0); };
    const int n = ncol * (ny - 1);
    const double cx = 1.0 / (g.hx() * g.hx()), cy = 1.0 / (g.hy() * g.hy());
    std::vector<Triplet> t;
    for (int j = 1; j < ny; ++j)
        for (int i = i0; i <= i1; ++i) {
            const int k = id(i, j);
            t.emplace_back(k, k, 2.0 * cx + 2.0 * cy);
            for (int di : {-1, 1}) {
                int ii = i + di;
                if (g.periodic_x()) ii = g.wrap(ii);
                if (ii >= i0 && ii <= i1) t.emplace_back(k, id(ii, j), -cx);
            }
            if (j > 1) t.emplace_back(k, id(i, j - 1), -cy);
            if (j < ny - 1) t.emplace_back(k, id(i, j + 1), -cy);
        }
    SparseMatrix m(n, n);
    m.setFromTriplets(t.begin(), t.end());
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(m);
    if (ldlt.info() != Eigen::Success) throw SolverBreakdown("node Poisson factorization failed");
    Vec rhs(n);
    for (int j = 1; j < ny; ++j)
        for (int i = i0; i <= i1; ++i) rhs[id(i, j)] = -w(i, j);
    const Vec x = ldlt.solve(rhs);
    NodeField a(g);
    for (int j = 1; j < ny; ++j)
        for (int i = i0; i <= i1; ++i) a(i, j) = x[id(i, j)];
    if (g.periodic_x())
        for (int j = 0; j <= ny; ++j) a(nx, j) = a(0, j);
    return a;
}

struct HelmholtzParts {
    ScalarField phi;           // cell potential, zero mean
    NodeField A;               // node stream function, zero on walls
    VectorField gradient_part; // grad phi
    VectorField rotation_part; // grad-perp A
    double reconstruction_error = 0.0;
};

/// v = grad phi + grad-perp A + remainder. The two parts are discretely
/// L2-orthogonal; on the all-walls rectangle the remainder vanishes to
/// roundoff, in channel mode it holds the harmonic (constant) x-flow.
inline HelmholtzParts helmholtz_decompose(const VectorField& v) {
    HelmholtzParts h;
    h.phi = solve_neumann_poisson(divergence(v));
    NodeField w = curl2d(v);
    h.A = solve_dirichlet_node_poisson(w);
    h.gradient_part = gradient(h.phi);
    h.rotation_part = perp_gradient(h.A);
    h.rotation_part.enforce_slip();
    const double vn = l2_norm(v);
    const VectorField r = v - h.gradient_part - h.rotation_part;
    h.reconstruction_error = vn > 0.0 ? l2_norm(r) / vn : l2_norm(r);
    return h;
}

/// G = P(rho) - (2 mu + nu) div v.
inline ScalarField effective_viscous_flux(const ScalarField& rho, const VectorField& v, const PressureLaw& law,
                                          const PhysicalParams& p, bool zero_mean = false) {
    ScalarField gf = apply_P(rho, law);
    const ScalarField d = divergence(v);
    for (std::size_t c = 0; c < gf.size(); ++c) gf.data()[c] -= (2.0 * p.mu + p.nu) * d.data()[c];
    if (zero_mean) {
        const double m = integrate(gf) / gf.grid().area();
        for (double& x : gf.data()) x -= m;
    }
    return gf;
}

/// Area of {rho > m}.
inline double tail_measure(const ScalarField& rho, double m) {
    if (!(m > 0.0)) throw ConfigError("tail_threshold", "threshold must be positive");
    std::size_t n = 0;
    for (double x : rho.data())
        if (x > m) ++n;
    return static_cast<double>(n) * rho.grid().cell_area();
}

// ---------------------------------------------------------------------------
// Weak-form residuals
// ---------------------------------------------------------------------------

/// Index pairs (m, n) ordered by m + n, then m.
inline std::vector<std::pair<int, int>> ordered_modes(int count, int min_index) {
    std::vector<std::pair<int, int>> out;
    for (int s = 2 * min_index; static_cast<int>(out.size()) < count; ++s)
        for (int m = min_index; m <= s - min_index && static_cast<int>(out.size()) < count; ++m)
            out.emplace_back(m, s - m);
    return out;
}

/// Scalar test functions cos(m pi x/lx) cos(n pi y/ly) at cells (x-period
/// lx/m in channel mode).
inline ScalarField scalar_test_function(const Grid& g, int m, int n) {
    using std::numbers::pi;
    const double kx = g.periodic_x() ? 2.0 * pi * m / g.lx() : pi * m / g.lx();
    return ScalarField::sample(g, [&](double x, double y) { return std::cos(kx * x) * std::cos(pi * n * y / g.ly()); });
}

/// Stream test functions vanishing on the walls, sampled at nodes.
inline NodeField stream_test_function(const Grid& g, int m, int n) {
    using std::numbers::pi;
    NodeField a(g);
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) {
            const double x = g.xn(i), y = g.yn(j);
            const double fx = g.periodic_x() ? std::cos(2.0 * pi * (m - 1) * x / g.lx()) : std::sin(pi * m * x / g.lx());
            a(i, j) = fx * std::sin(pi * n * y / g.ly());
        }
    if (!g.periodic_x())
        for (int j = 0; j <= g.ny(); ++j) a(0, j) = a(g.nx(), j) = 0.0;
    for (int i = 0; i <= g.nx(); ++i) a(i, 0) = a(i, g.ny()) = 0.0;
    return a;
}

/// The fixed test family: `count` scalar modes for the continuity equation;
/// for momentum, gradients of the non-constant scalar modes and rotated
/// gradients of stream modes, alternating, `count` in total.
struct TestFamily {
    std::vector<ScalarField> scalar;
    std::vector<VectorField> vector;
};

inline TestFamily make_test_family(const Grid& g, int count) {
    TestFamily f;
    for (auto [m, n] : ordered_modes(count, 0)) f.scalar.push_back(scalar_test_function(g, m, n));
    const auto grads = ordered_modes(count + 1, 0);
    const auto rots = ordered_modes(count, 1);
    std::size_t gi = 1, ri = 0;
    while (static_cast<int>(f.vector.size()) < count) {
        if (f.vector.size() % 2 == 0) {
            f.vector.push_back(gradient(scalar_test_function(g, grads[gi].first, grads[gi].second)));
            ++gi;
        } else {
            VectorField r = perp_gradient(stream_test_function(g, rots[ri].first, rots[ri].second));
            r.enforce_slip();
            f.vector.push_back(r);
            ++ri;
        }
    }
    return f;
}

struct WeakResiduals {
    double continuity = 0.0;
    double momentum = 0.0;
};

/// Maximum over the test family of |<defect, phi>| / ||phi||_H1, each
/// relative to the sum of the L2 norms of the terms of the equation.
inline WeakResiduals weakform_residuals(const FluidState& prev, const FluidState& cur, double dt,
                                        const PressureLaw& law, const LameSystem& lame, double epsilon,
                                        const TestFamily& family) {
    const Grid& g = cur.grid();
    require_same_grid(g, prev.grid(), "weakform_residuals");
    require_same_grid(g, lame.grid(), "weakform_residuals");
    const double alpha = 1.0 / dt;
    const ScalarField& rho = cur.rho;
    const VectorField& v = cur.v;

    // Continuity.
    const ScalarField k = apply_K(rho, law);
    const ScalarField flux = flux_divergence(upwind_mass_flux(rho, v, k));
    const ScalarField lap = laplacian_neumann(rho);
    ScalarField hk(g), r_cont(g);
    for (std::size_t c = 0; c < rho.size(); ++c) {
        hk.data()[c] = alpha * prev.rho.data()[c] * k.data()[c];
        r_cont.data()[c] = alpha * rho.data()[c] - hk.data()[c] + flux.data()[c] - epsilon * lap.data()[c];
    }
    const double s_cont = alpha * l2_norm(rho) + l2_norm(hk) + l2_norm(flux) + epsilon * l2_norm(lap);

    // Momentum.
    const MomentumTerms t = momentum_terms(rho, v, prev.rho, prev.v, alpha, epsilon, law, lame.closure());
    const VectorField av = lame.apply(v);
    VectorField r_mom = av;
    r_mom += t.inertia;
    r_mom -= t.previous;
    r_mom += t.convection;
    r_mom += t.pressure;
    r_mom += t.regularizing;
    const double s_mom = l2_norm(av) + l2_norm(t.inertia) + l2_norm(t.previous) + l2_norm(t.convection) +
                         l2_norm(t.pressure) + l2_norm(t.regularizing);

    WeakResiduals out;
    for (const auto& psi : family.scalar) {
        const double d = std::abs(inner(r_cont, psi)) / std::sqrt(h1_normsq(psi));
        out.continuity = std::max(out.continuity, d);
    }
    for (const auto& phi : family.vector) {
        const double d = std::abs(inner(r_mom, phi)) / std::sqrt(h1_normsq(phi));
        out.momentum = std::max(out.momentum, d);
    }
    if (out.continuity > 0.0) out.continuity /= s_cont;
    if (out.momentum > 0.0) out.momentum /= s_mom;
    return out;
}

// ---------------------------------------------------------------------------
// Time interpolants
// ---------------------------------------------------------------------------

struct Interpolants {
    FluidState hat;    // piecewise constant
    FluidState tilde;  // piecewise linear
};

/// States are taken at times t0 + k dt. hat(t) = state floor((t - t0)/dt),
/// tilde(t) = linear blend of the two neighbouring states.
inline Interpolants interpolants(const std::vector<FluidState>& traj, double dt, double t) {
    if (traj.empty()) throw Error("interpolants: empty trajectory");
    const double t0 = traj.front().time;
    const double s = (t - t0) / dt;
    const double last = static_cast<double>(traj.size() - 1);
    if (s < -1e-9 || s > last + 1e-9) throw Error("interpolants: time outside the trajectory span");
    double kf = std::floor(s + 1e-9);
    kf = std::clamp(kf, 0.0, last);
    const auto k = static_cast<std::size_t>(kf);
    double theta = std::clamp(s - kf, 0.0, 1.0);
    if (theta < 1e-9) theta = 0.0;
    Interpolants out{traj[k], traj[k]};
    if (theta > 0.0 && k + 1 < traj.size()) {
        const FluidState& b = traj[k + 1];
        out.tilde.rho = (1.0 - theta) * traj[k].rho + theta * b.rho;
        out.tilde.v = (1.0 - theta) * traj[k].v + theta * b.v;
    }
    out.tilde.time = t;
    out.hat.time = t;
    return out;
}

// ---------------------------------------------------------------------------
// Per-step record
// ---------------------------------------------------------------------------

struct DiagnosticsRecord {
    std::int64_t step_index = 0;
    double time = 0.0;
    double mass = 0.0;
    double energy = 0.0;
    double dissipation = 0.0;
    double boundary_friction_dissipation = 0.0;
    double entropy_residual = 0.0;
    double rho_gamma_norm = 0.0;       // int rho^gamma
    double rho_v2_norm = 0.0;          // int rho |v|^2
    double v_h1_normsq = 0.0;
    double rho_increment_gamma = 0.0;  // int |rho_k - rho_{k-1}|^gamma
    double pressure_l2 = 0.0;          // ||P(rho)||_2
    double rho_gammaplus1_norm = 0.0;  // int rho^(gamma+1)
    double max_rho = 0.0;
    double min_rho = 0.0;
    double weak_continuity = 0.0;
    double weak_momentum = 0.0;
    int outer_iters = 0;
    std::vector<std::pair<double, double>> tail_measures;  // (threshold, area)
};

/// Observables of a state alone (step 0 or any snapshot).
inline DiagnosticsRecord state_record(const FluidState& s, const PressureLaw& law, const PhysicalParams& p,
                                      const std::vector<double>& thresholds) {
    DiagnosticsRecord r;
    r.step_index = s.step_index;
    r.time = s.time;
    r.mass = integrate(s.rho);
    r.rho_v2_norm = rho_v2(s.rho, s.v);
    r.rho_gamma_norm = lp_norm_pow(s.rho, law.gamma());
    r.energy = 0.5 * r.rho_v2_norm + r.rho_gamma_norm / (law.gamma() - 1.0);
    r.boundary_friction_dissipation = boundary_friction_dissipation(s.v, p);
    r.dissipation = dissipation(s.v, p);
    r.v_h1_normsq = h1_normsq(s.v);
    r.pressure_l2 = l2_norm(apply_P(s.rho, law));
    r.rho_gammaplus1_norm = lp_norm_pow(s.rho, law.gamma() + 1.0);
    r.max_rho = s.rho.max();
    r.min_rho = s.rho.min();
    for (double m : thresholds) r.tail_measures.emplace_back(m, tail_measure(s.rho, m));
    return r;
}

/// Observables of an accepted step prev -> cur.
inline DiagnosticsRecord step_record(const FluidState& prev, const FluidState& cur, double dt, const PressureLaw& law,
                                     const LameSystem& lame, double epsilon, const TestFamily& family,
                                     const std::vector<double>& thresholds) {
    DiagnosticsRecord r = state_record(cur, law, lame.params(), thresholds);
    r.entropy_residual = entropy_residual(prev, cur, dt);
    r.rho_increment_gamma = lp_norm_pow(cur.rho - prev.rho, law.gamma());
    const WeakResiduals w = weakform_residuals(prev, cur, dt, law, lame, epsilon, family);
    r.weak_continuity = w.continuity;
    r.weak_momentum = w.momentum;
    return r;
}

}  // namespace barons2d
