#pragma once

#include <cmath>
#include <vector>

#include "grid.hpp"

namespace barons2d {

/// How tangential velocity is continued across a flat wall when a normal
/// derivative or a wall trace is needed.
///
/// `Extrapolate` uses one-sided quadratic extrapolation from the first three
/// interior rows (exact on quadratics; the right choice for arbitrary fields).
/// `Robin` uses the ghost value implied by mu d_n(v.t) + f (v.t) = 0 with
/// ratio = f/mu; this is the closure built into the Lame form, so diagnostics
/// of solver output that use it agree with the assembled operator exactly.
struct WallClosure {
    enum class Kind { Extrapolate, Robin };
    Kind kind = Kind::Extrapolate;
    double ratio = 0.0;

    static WallClosure extrapolate() { return {Kind::Extrapolate, 0.0}; }
    static WallClosure robin(double f_over_mu) { return {Kind::Robin, f_over_mu}; }

    /// Ghost/interior ratio r for a wall whose normal spacing is h.
    double ghost_factor(double h) const {
        const double b = 0.5 * ratio * h;
        return (1.0 - b) / (1.0 + b);
    }
};

// ---------------------------------------------------------------------------
// First-order operators
// ---------------------------------------------------------------------------

/// Conservative cell-centred divergence of a face field.
inline ScalarField divergence(const VectorField& w) {
    const Grid& g = w.grid();
    ScalarField d(g);
    const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            d(i, j) = (w.u_wrapped(i + 1, j) - w.u(i, j)) * ihx + (w.v(i, j + 1) - w.v(i, j)) * ihy;
    return d;
}

/// Face-located centred gradient; zero on wall faces so that it is the
/// negative adjoint of `divergence` on slip-compatible fields.
inline VectorField gradient(const ScalarField& p) {
    const Grid& g = p.grid();
    VectorField w(g);
    const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            if (g.xface_active(i)) w.u(i, j) = (p(i, j) - p(g.wrap(i - 1), j)) * ihx;
    for (int j = 1; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) w.v(i, j) = (p(i, j) - p(i, j - 1)) * ihy;
    w.enforce_slip();
    return w;
}

/// Rotated gradient (-dA/dy, dA/dx) of a node field onto faces. The result
/// is discretely divergence free; it is slip-compatible when A vanishes on
/// the walls.
inline VectorField perp_gradient(const NodeField& a) {
    const Grid& g = a.grid();
    VectorField w(g);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) w.u(i, j) = -(a(i, j + 1) - a(i, j)) / g.hy();
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) w.v(i, j) = (a(i + 1, j) - a(i, j)) / g.hx();
    return w;
}

/// Five-point Laplacian with homogeneous Neumann closure (zero wall flux).
inline ScalarField laplacian_neumann(const ScalarField& p) { return divergence(gradient(p)); }

// ---------------------------------------------------------------------------
// Velocity-gradient pieces at nodes
// ---------------------------------------------------------------------------

/// d(u)/dy and d(v)/dx at every node; interior nodes use centred differences,
/// wall nodes use the given closure. Duplicate periodic columns are filled.
struct NodeShear {
    NodeField dudy;
    NodeField dvdx;
};

inline NodeShear node_shear(const VectorField& w, const WallClosure& closure = WallClosure::extrapolate()) {
    const Grid& g = w.grid();
    const int nx = g.nx(), ny = g.ny();
    const double hx = g.hx(), hy = g.hy();
    NodeShear s{NodeField(g), NodeField(g)};
    const bool robin = closure.kind == WallClosure::Kind::Robin;
    const double ry = closure.ghost_factor(hy);
    const double rx = closure.ghost_factor(hx);

    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            if (!g.node_column_owned(i)) continue;
            // du/dy along x-face column i
            double dudy;
            if (j > 0 && j < ny) {
                dudy = (w.u(i, j) - w.u(i, j - 1)) / hy;
            } else if (j == 0) {
                dudy = robin ? (1.0 - ry) * w.u(i, 0) / hy
                             : (-2.0 * w.u(i, 0) + 3.0 * w.u(i, 1) - w.u(i, 2)) / hy;
            } else {
                dudy = robin ? -(1.0 - ry) * w.u(i, ny - 1) / hy
                             : (2.0 * w.u(i, ny - 1) - 3.0 * w.u(i, ny - 2) + w.u(i, ny - 3)) / hy;
            }
            // dv/dx along y-face row j
            double dvdx;
            if (g.periodic_x() || (i > 0 && i < nx)) {
                dvdx = (w.v(g.wrap(i), j) - w.v(g.wrap(i - 1), j)) / hx;
            } else if (i == 0) {
                dvdx = robin ? (1.0 - rx) * w.v(0, j) / hx
                             : (-2.0 * w.v(0, j) + 3.0 * w.v(1, j) - w.v(2, j)) / hx;
            } else {
                dvdx = robin ? -(1.0 - rx) * w.v(nx - 1, j) / hx
                             : (2.0 * w.v(nx - 1, j) - 3.0 * w.v(nx - 2, j) + w.v(nx - 3, j)) / hx;
            }
            s.dudy(i, j) = dudy;
            s.dvdx(i, j) = dvdx;
        }
        if (g.periodic_x()) {
            s.dudy(nx, j) = s.dudy(0, j);
            s.dvdx(nx, j) = s.dvdx(0, j);
        }
    }
    return s;
}

/// 2D curl dv/dx - du/dy at cell corners.
inline NodeField curl2d(const VectorField& w, const WallClosure& closure = WallClosure::extrapolate()) {
    NodeShear s = node_shear(w, closure);
    NodeField c(w.grid());
    for (std::size_t k = 0; k < c.data().size(); ++k) c.data()[k] = s.dvdx.data()[k] - s.dudy.data()[k];
    return c;
}

/// Average of the four corners of each cell.
inline ScalarField node_to_cell(const NodeField& n) {
    const Grid& g = n.grid();
    ScalarField c(g);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            c(i, j) = 0.25 * (n(i, j) + n(i + 1, j) + n(i, j + 1) + n(i + 1, j + 1));
    return c;
}

/// Cell-centred |D(v)|^2 with D = sym grad v. Diagonal entries are exact cell
/// differences; the off-diagonal entry lives at corners and its square is
/// averaged over the four corners of the cell.
inline ScalarField sym_grad_normsq(const VectorField& w, const WallClosure& closure = WallClosure::extrapolate()) {
    const Grid& g = w.grid();
    NodeShear s = node_shear(w, closure);
    NodeField d12sq(g);
    for (std::size_t k = 0; k < d12sq.data().size(); ++k) {
        const double d12 = 0.5 * (s.dudy.data()[k] + s.dvdx.data()[k]);
        d12sq.data()[k] = d12 * d12;
    }
    ScalarField shear = node_to_cell(d12sq);
    ScalarField out(g);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const double d11 = (w.u_wrapped(i + 1, j) - w.u(i, j)) / g.hx();
            const double d22 = (w.v(i, j + 1) - w.v(i, j)) / g.hy();
            out(i, j) = d11 * d11 + d22 * d22 + 2.0 * shear(i, j);
        }
    return out;
}

// ---------------------------------------------------------------------------
// Quadrature, inner products, norms
// ---------------------------------------------------------------------------

/// Midpoint rule.
inline double integrate(const ScalarField& p) {
    double s = 0.0;
    for (double x : p.data()) s += x;
    return s * p.grid().cell_area();
}

inline double inner(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid(), b.grid(), "inner");
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a.data()[k] * b.data()[k];
    return s * a.grid().cell_area();
}

/// Face inner product: full dual-cell weight on interior faces, half weight
/// on wall faces, periodic duplicates skipped.
inline double inner(const VectorField& a, const VectorField& b) {
    require_same_grid(a.grid(), b.grid(), "inner");
    const Grid& g = a.grid();
    double s = 0.0;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) {
            if (g.periodic_x() && i == g.nx()) continue;
            const double wgt = (!g.periodic_x() && (i == 0 || i == g.nx())) ? 0.5 : 1.0;
            s += wgt * a.u(i, j) * b.u(i, j);
        }
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const double wgt = (j == 0 || j == g.ny()) ? 0.5 : 1.0;
            s += wgt * a.v(i, j) * b.v(i, j);
        }
    return s * g.cell_area();
}

inline double l2_norm(const ScalarField& p) { return std::sqrt(inner(p, p)); }
inline double l2_norm(const VectorField& w) { return std::sqrt(inner(w, w)); }

/// sum |p|^q * cellArea, i.e. the q-th power of the discrete L_q norm.
inline double lp_norm_pow(const ScalarField& p, double q) {
    double s = 0.0;
    for (double x : p.data()) s += std::pow(std::abs(x), q);
    return s * p.grid().cell_area();
}

/// Squared H1 seminorm of a face field: cell-centred normal derivatives plus
/// interior-node cross derivatives.
inline double h1_seminorm_sq(const VectorField& w) {
    const Grid& g = w.grid();
    double s = 0.0;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const double d11 = (w.u_wrapped(i + 1, j) - w.u(i, j)) / g.hx();
            const double d22 = (w.v(i, j + 1) - w.v(i, j)) / g.hy();
            s += d11 * d11 + d22 * d22;
        }
    for (int j = 1; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            if (!g.periodic_x() && i == 0) continue;
            const double dudy = (w.u(i, j) - w.u(i, j - 1)) / g.hy();
            const double dvdx = (w.v(i, j) - w.v(g.wrap(i - 1), j)) / g.hx();
            s += dudy * dudy + dvdx * dvdx;
        }
    return s * g.cell_area();
}

inline double h1_normsq(const VectorField& w) { return inner(w, w) + h1_seminorm_sq(w); }

inline double h1_normsq(const ScalarField& p) {
    const VectorField gp = gradient(p);
    return inner(p, p) + inner(gp, gp);
}

// ---------------------------------------------------------------------------
// Wall traces
// ---------------------------------------------------------------------------

/// Tangential wall trace at a wall face from the first interior rows.
/// `a`, `b`, `c` are the tangential values at distances h/2, 3h/2, 5h/2.
inline double wall_trace(double a, double b, double c, double h, const WallClosure& closure) {
    if (closure.kind == WallClosure::Kind::Robin) return a / (1.0 + 0.5 * closure.ratio * h);
    return (15.0 * a - 10.0 * b + 3.0 * c) / 8.0;
}

/// sum over wall faces of (v.tau)^2 * edge length.
inline double boundary_integrate_tangential_sq(const VectorField& w,
                                               const WallClosure& closure = WallClosure::extrapolate()) {
    const Grid& g = w.grid();
    const int nx = g.nx(), ny = g.ny();
    double s = 0.0;
    for (int i = 0; i < nx; ++i) {
        if (!g.xface_active(i)) continue;
        const double tb = wall_trace(w.u(i, 0), w.u(i, 1), w.u(i, 2), g.hy(), closure);
        const double tt = wall_trace(w.u(i, ny - 1), w.u(i, ny - 2), w.u(i, ny - 3), g.hy(), closure);
        s += (tb * tb + tt * tt) * g.hx();
    }
    if (!g.periodic_x()) {
        for (int j = 1; j < ny; ++j) {
            const double tl = wall_trace(w.v(0, j), w.v(1, j), w.v(2, j), g.hx(), closure);
            const double tr = wall_trace(w.v(nx - 1, j), w.v(nx - 2, j), w.v(nx - 3, j), g.hx(), closure);
            s += (tl * tl + tr * tr) * g.hy();
        }
    }
    return s;
}

}  // namespace barons2d
