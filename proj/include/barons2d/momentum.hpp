#pragma once

#include <algorithm>

#include "config.hpp"
#include "density_solver.hpp"
#include "eos.hpp"
#include "grid.hpp"
#include "operators.hpp"

namespace barons2d {

/// Density on faces: mean of the two adjacent cells (zero on wall faces).
inline VectorField face_density(const ScalarField& rho) {
    const Grid& g = rho.grid();
    VectorField r(g);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            if (g.xface_active(i)) r.u(i, j) = 0.5 * (rho(g.wrap(i - 1), j) + rho(i, j));
    for (int j = 1; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) r.v(i, j) = 0.5 * (rho(i, j - 1) + rho(i, j));
    r.enforce_slip();
    return r;
}

/// Componentwise product of face fields.
inline VectorField face_product(const VectorField& a, const VectorField& b) {
    require_same_grid(a.grid(), b.grid(), "face_product");
    VectorField c(a.grid());
    for (std::size_t k = 0; k < c.u_data().size(); ++k) c.u_data()[k] = a.u_data()[k] * b.u_data()[k];
    for (std::size_t k = 0; k < c.v_data().size(); ++k) c.v_data()[k] = a.v_data()[k] * b.v_data()[k];
    return c;
}

/// Convective term div(m (x) w) on the dual (face-centred) cells, per unit
/// volume. Dual-cell mass fluxes are half sums of the primal fluxes `mass`
/// (whole-face fluxes, as produced by `upwind_mass_flux`), so the dual mass
/// balance is the average of the primal one. The transported velocity is
/// taken upwind.
inline VectorField convection(const VectorField& mass, const VectorField& w) {
    const Grid& g = w.grid();
    require_same_grid(g, mass.grid(), "convection");
    const int nx = g.nx(), ny = g.ny();
    const bool per = g.periodic_x();
    VectorField c(g);
    const double ia = 1.0 / g.cell_area();
    auto up = [](double flux, double own, double other) { return flux > 0.0 ? own : other; };

    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            if (!g.xface_active(i)) continue;
            const int il = g.wrap(i - 1);
            const double pe = 0.5 * (mass.u(i, j) + mass.u_wrapped(i + 1, j));
            const double pw = 0.5 * (mass.u_wrapped(i - 1, j) + mass.u(i, j));
            const double pn = 0.5 * (mass.v(il, j + 1) + mass.v(i, j + 1));
            const double ps = 0.5 * (mass.v(il, j) + mass.v(i, j));
            const double u0 = w.u(i, j);
            double s = pe * up(pe, u0, w.u_wrapped(i + 1, j)) - pw * up(pw, w.u_wrapped(i - 1, j), u0);
            if (j + 1 < ny) s += pn * up(pn, u0, w.u(i, j + 1));
            if (j > 0) s -= ps * up(ps, w.u(i, j - 1), u0);
            c.u(i, j) = s * ia;
        }
    for (int j = 1; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double pn = 0.5 * (mass.v(i, j) + mass.v(i, j + 1));
            const double ps = 0.5 * (mass.v(i, j - 1) + mass.v(i, j));
            const double pe = 0.5 * (mass.u_wrapped(i + 1, j - 1) + mass.u_wrapped(i + 1, j));
            const double pw = 0.5 * (mass.u(i, j - 1) + mass.u(i, j));
            const double v0 = w.v(i, j);
            double s = pn * up(pn, v0, w.v(i, j + 1)) - ps * up(ps, w.v(i, j - 1), v0);
            if (per || i + 1 < nx) s += pe * up(pe, v0, w.v_wrapped(i + 1, j));
            if (per || i > 0) s -= pw * up(pw, w.v_wrapped(i - 1, j), v0);
            c.v(i, j) = s * ia;
        }
    c.enforce_slip();
    return c;
}

/// (grad rho . grad) w on faces with centred differences. Density uses the
/// Neumann mirror at walls, tangential velocity the given wall closure.
inline VectorField density_gradient_transport(const ScalarField& rho, const VectorField& w,
                                              const WallClosure& closure) {
    const Grid& g = w.grid();
    require_same_grid(g, rho.grid(), "density_gradient_transport");
    const int nx = g.nx(), ny = g.ny();
    const double hx = g.hx(), hy = g.hy();
    const bool per = g.periodic_x();
    const double ry = closure.ghost_factor(hy), rx = closure.ghost_factor(hx);
    VectorField out(g);

    auto cy = [&](int i, int j) {
        return (rho(i, std::min(j + 1, ny - 1)) - rho(i, std::max(j - 1, 0))) / (2.0 * hy);
    };
    auto cx = [&](int i, int j) {
        const int e = per ? g.wrap(i + 1) : std::min(i + 1, nx - 1);
        const int wv = per ? g.wrap(i - 1) : std::max(i - 1, 0);
        return (rho(e, j) - rho(wv, j)) / (2.0 * hx);
    };

    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            if (!g.xface_active(i)) continue;
            const int il = g.wrap(i - 1);
            const double drx = (rho(i, j) - rho(il, j)) / hx;
            const double dry = 0.5 * (cy(il, j) + cy(i, j));
            const double dux = (w.u_wrapped(i + 1, j) - w.u_wrapped(i - 1, j)) / (2.0 * hx);
            const double un = j + 1 < ny ? w.u(i, j + 1) : ry * w.u(i, ny - 1);
            const double us = j > 0 ? w.u(i, j - 1) : ry * w.u(i, 0);
            out.u(i, j) = drx * dux + dry * (un - us) / (2.0 * hy);
        }
    for (int j = 1; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double dry = (rho(i, j) - rho(i, j - 1)) / hy;
            const double drx = 0.5 * (cx(i, j - 1) + cx(i, j));
            const double dvy = (w.v(i, j + 1) - w.v(i, j - 1)) / (2.0 * hy);
            double ve, vw;
            if (per) {
                ve = w.v_wrapped(i + 1, j);
                vw = w.v_wrapped(i - 1, j);
            } else {
                ve = i + 1 < nx ? w.v(i + 1, j) : rx * w.v(nx - 1, j);
                vw = i > 0 ? w.v(i - 1, j) : rx * w.v(0, j);
            }
            out.v(i, j) = drx * (ve - vw) / (2.0 * hx) + dry * dvy;
        }
    out.enforce_slip();
    return out;
}

/// The individual face-located terms of the momentum right side.
struct MomentumTerms {
    VectorField previous;      // alpha h_f g
    VectorField inertia;       // alpha rho_f v
    VectorField convection;    // div(K rho v (x) v)
    VectorField pressure;      // grad P(rho)
    VectorField regularizing;  // eps (grad rho . grad) v
};

inline MomentumTerms momentum_terms(const ScalarField& rho, const VectorField& v, const ScalarField& h,
                                    const VectorField& g, double alpha, double epsilon, const PressureLaw& law,
                                    const WallClosure& closure) {
    require_same_grid(rho.grid(), v.grid(), "assemble_momentum_rhs");
    require_same_grid(rho.grid(), h.grid(), "assemble_momentum_rhs");
    require_same_grid(rho.grid(), g.grid(), "assemble_momentum_rhs");
    MomentumTerms t;
    t.previous = alpha * face_product(face_density(h), g);
    t.inertia = alpha * face_product(face_density(rho), v);
    t.convection = convection(upwind_mass_flux(rho, v, apply_K(rho, law)), v);
    t.pressure = gradient(apply_P(rho, law));
    t.regularizing = epsilon * density_gradient_transport(rho, v, closure);
    return t;
}

/// F(rho, v, h, g) = alpha h g - alpha rho v - div(K rho v (x) v) - grad P(rho) - eps grad rho grad v.
inline VectorField assemble_momentum_rhs(const ScalarField& rho, const VectorField& v, const ScalarField& h,
                                         const VectorField& g, double alpha, const RegularizationParams& reg,
                                         const PressureLaw& law,
                                         const WallClosure& closure = WallClosure::extrapolate()) {
    const MomentumTerms t = momentum_terms(rho, v, h, g, alpha, reg.epsilon, law, closure);
    VectorField f = t.previous;
    f -= t.inertia;
    f -= t.convection;
    f -= t.pressure;
    f -= t.regularizing;
    return f;
}

}  // namespace barons2d
