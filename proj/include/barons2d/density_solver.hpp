#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "eos.hpp"
#include "grid.hpp"
#include "linear.hpp"
#include "operators.hpp"

namespace barons2d {

/// Face cutoff weight: the smaller cutoff of the two adjacent cells.
inline double face_cutoff(double k_left, double k_right) { return std::min(k_left, k_right); }

/// Upwind mass fluxes through whole faces, kappa_f * rho_upwind * (v.n) * |face| with
/// kappa_f = min(K(a_L), K(a_R)) evaluated on the cutoff density `a`.
/// Wall faces carry no flux.
inline VectorField upwind_mass_flux(const ScalarField& rho, const VectorField& v, const ScalarField& kcell) {
    const Grid& g = rho.grid();
    require_same_grid(g, v.grid(), "upwind_mass_flux");
    VectorField f(g);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            if (!g.xface_active(i)) continue;
            const int l = g.wrap(i - 1);
            const double u = v.u(i, j);
            const double up = u > 0.0 ? rho(l, j) : rho(i, j);
            f.u(i, j) = u * g.hy() * face_cutoff(kcell(l, j), kcell(i, j)) * up;
        }
    for (int j = 1; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const double w = v.v(i, j);
            const double up = w > 0.0 ? rho(i, j - 1) : rho(i, j);
            f.v(i, j) = w * g.hx() * face_cutoff(kcell(i, j - 1), kcell(i, j)) * up;
        }
    f.enforce_slip();
    return f;
}

/// Cell divergence of face fluxes divided by the cell area.
inline ScalarField flux_divergence(const VectorField& f) {
    const Grid& g = f.grid();
    ScalarField d(g);
    const double ia = 1.0 / g.cell_area();
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            d(i, j) = (f.u_wrapped(i + 1, j) - f.u(i, j) + f.v(i, j + 1) - f.v(i, j)) * ia;
    return d;
}

/// Defect of alpha (rho - h K(rho)) + div(K rho v) - eps Lap rho, per cell.
inline ScalarField density_defect(const ScalarField& rho, const VectorField& v, const ScalarField& h, double alpha,
                                  double epsilon, const PressureLaw& law) {
    const ScalarField k = apply_K(rho, law);
    ScalarField r = flux_divergence(upwind_mass_flux(rho, v, k));
    const ScalarField lap = laplacian_neumann(rho);
    for (std::size_t c = 0; c < r.size(); ++c)
        r.data()[c] += alpha * (rho.data()[c] - h.data()[c] * k.data()[c]) - epsilon * lap.data()[c];
    return r;
}

struct DensityIterate {
    double min_rho = 0.0;
    double max_rho = 0.0;
    double mass = 0.0;
    double residual = 0.0;
};

struct DensitySolveReport {
    int picard_iters = 0;
    double final_residual = 0.0;
    double mass_in = 0.0;
    double mass_out = 0.0;
    double min_rho = 0.0;
    double max_rho = 0.0;
    bool non_monotone = false;
    std::vector<DensityIterate> iterates;
};

class DensityNonConvergence : public NonConvergence {
public:
    DensityNonConvergence(const std::string& what, DensitySolveReport report, ScalarField best)
        : NonConvergence(what), report_(std::move(report)), best_(std::move(best)) {}
    const DensitySolveReport& report() const noexcept { return report_; }
    const ScalarField& best() const noexcept { return best_; }

private:
    DensitySolveReport report_;
    ScalarField best_;
};

struct DensitySolution {
    ScalarField rho;
    DensitySolveReport report;
};

/// Picard solver for the regularized continuity equation. Each linear step
/// freezes the cutoff at the previous iterate; its matrix is a column
/// diagonally dominant M-matrix, so every iterate is nonnegative and has
/// mass at most that of h. Iterates are additionally clamped to m2.
/// The point where K is frozen is relaxed per cell towards the new iterate
/// with weight 1 / (1 + h s), s the larger of |K'(p)| and the secant slope of
/// K between p and the new iterate. Below m1 this is plain Picard; inside the
/// cutoff window it removes the two-cycle rho -> h K(rho).
/// Owns its factorization workspace; not shareable across threads.
class DensitySolver {
public:
    DensitySolver(const Grid& grid, const PressureLaw& law)
        : grid_(grid), law_(law), solver_(static_cast<long>(grid.n_cells()) <= kDirectSolveLimit) {}

    const Grid& grid() const noexcept { return grid_; }
    const PressureLaw& law() const noexcept { return law_; }

    DensitySolution solve(const VectorField& v, const ScalarField& h, double alpha, double epsilon, double tol,
                          int max_iters) {
        require_same_grid(grid_, v.grid(), "solve_density");
        require_same_grid(grid_, h.grid(), "solve_density");
        if (!(alpha > 0.0) || !(tol > 0.0)) throw ConfigError("alpha", "alpha and tol must be positive");
        if (h.min() < -1e-12) throw NegativeInput("solve_density: previous density h has negative entries");
        if (epsilon < 0.0) throw ConfigError("epsilon", "epsilon must be nonnegative");
        const bool zero_eps = epsilon == 0.0;
        if (zero_eps && !(h.max() < law_.m1()))
            throw ConfigError("epsilon", "epsilon = 0 requires densities below m1 (cutoff inactive)");

        DensitySolveReport rep;
        rep.mass_in = integrate(h);
        const double scale = std::max(alpha * l2_norm(h), std::numeric_limits<double>::min());

        ScalarField prev = h;
        ScalarField best = h;
        double best_res = std::numeric_limits<double>::infinity();
        for (int it = 1; it <= max_iters; ++it) {
            const ScalarField k = apply_K(prev, law_);
            assemble(v, k, alpha, epsilon);
            solver_.factorize(mat_);
            Vec b(static_cast<long>(grid_.n_cells()));
            for (std::size_t c = 0; c < h.size(); ++c) b[static_cast<long>(c)] = alpha * h.data()[c] * k.data()[c];
            const Vec x = solver_.solve(b);
            ScalarField rho(grid_);
            for (std::size_t c = 0; c < rho.size(); ++c) rho.data()[c] = std::min(x[static_cast<long>(c)], law_.m2());

            const double res = l2_norm(density_defect(rho, v, h, alpha, epsilon, law_)) / scale;
            DensityIterate di{rho.min(), rho.max(), integrate(rho), res};
            if (!rep.iterates.empty() && res > rep.iterates.back().residual) rep.non_monotone = true;
            rep.iterates.push_back(di);
#ifndef NDEBUG
            if (di.min_rho < -1e-12 || di.max_rho > law_.m2() + 1e-12 ||
                di.mass > rep.mass_in + 1e-12 * std::max(1.0, rep.mass_in))
                throw std::logic_error("density iterate violates the discrete maximum principle");
#endif
            if (res < best_res) {
                best_res = res;
                best = rho;
            }
            rep.picard_iters = it;
            if (res <= tol) {
                if (zero_eps && !(di.max_rho < law_.m1()))
                    throw ConfigError("epsilon", "epsilon = 0 requires densities below m1 (cutoff inactive)");
                finish(rep, rho, res);
                return {std::move(rho), std::move(rep)};
            }
            for (std::size_t c = 0; c < rho.size(); ++c) {
                double& p = prev.data()[c];
                const double r = rho.data()[c];
                double slope = std::abs(law_.dK(p));
                if (r != p) slope = std::max(slope, std::abs(law_.cutoff_K(r) - law_.cutoff_K(p)) / std::abs(r - p));
                p += (r - p) / (1.0 + h.data()[c] * slope);
            }
        }
        finish(rep, best, best_res);
        throw DensityNonConvergence("density Picard iteration did not reach tolerance (residual " +
                                        std::to_string(best_res) + ")",
                                    rep, best);
    }

    /// The linear operator of the most recent Picard step (row = cell equation).
    const SparseMatrix& last_matrix() const noexcept { return mat_; }

    /// Linear operator alpha I + div(kappa * upwind(.) v) - eps Lap for a
    /// frozen cell cutoff field. The sparsity pattern does not depend on v.
    static SparseMatrix assemble_matrix(const VectorField& v, const ScalarField& kcell, double alpha,
                                        double epsilon) {
        const Grid& g = v.grid();
        std::vector<Triplet> t;
        t.reserve(g.n_cells() * 9);
        const double ia = 1.0 / g.cell_area();
        auto couple = [&](int l, int r, double vel, double len, double kap, double dcoef) {
            const double a = vel * len * kap * ia;
            const double up = std::max(a, 0.0), dn = std::min(a, 0.0);
            t.emplace_back(l, l, up + dcoef);
            t.emplace_back(r, l, -up - dcoef);
            t.emplace_back(l, r, dn - dcoef);
            t.emplace_back(r, r, -dn + dcoef);
        };
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i) {
                const int c = static_cast<int>(g.cell(i, j));
                t.emplace_back(c, c, alpha);
                if (g.xface_active(i)) {
                    const int l = static_cast<int>(g.cell(g.wrap(i - 1), j));
                    couple(l, c, v.u(i, j), g.hy(), face_cutoff(kcell.data()[l], kcell.data()[c]),
                           epsilon / (g.hx() * g.hx()));
                }
                if (j > 0) {
                    const int l = static_cast<int>(g.cell(i, j - 1));
                    couple(l, c, v.v(i, j), g.hx(), face_cutoff(kcell.data()[l], kcell.data()[c]),
                           epsilon / (g.hy() * g.hy()));
                }
            }
        const int n = static_cast<int>(g.n_cells());
        SparseMatrix m(n, n);
        m.setFromTriplets(t.begin(), t.end());
        m.makeCompressed();
        return m;
    }

private:
    void assemble(const VectorField& v, const ScalarField& kcell, double alpha, double epsilon) {
        mat_ = assemble_matrix(v, kcell, alpha, epsilon);
    }

    static void finish(DensitySolveReport& rep, const ScalarField& rho, double res) {
        rep.final_residual = res;
        rep.mass_out = integrate(rho);
        rep.min_rho = rho.min();
        rep.max_rho = rho.max();
    }

    Grid grid_;
    PressureLaw law_;
    GeneralSolver solver_;
    SparseMatrix mat_;
};

/// One-shot convenience wrapper; builds its own workspace.
inline DensitySolution solve_density(const VectorField& v, const ScalarField& h, double alpha,
                                     const RegularizationParams& reg, double tol, int max_iters) {
    DensitySolver s(h.grid(), PressureLaw(3.0, reg));
    return s.solve(v, h, alpha, reg.epsilon, tol, max_iters);
}

}  // namespace barons2d
