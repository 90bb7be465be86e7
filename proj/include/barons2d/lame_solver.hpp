#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <utility>
#include <vector>

#include "config.hpp"
#include "grid.hpp"
#include "linear.hpp"
#include "operators.hpp"

namespace barons2d {

/// Discrete Lame operator -mu Lap - (mu+nu) grad div with v.n = 0 and the
/// friction law mu d_n(v.t) + f (v.t) = 0 on the walls.
///
/// The stiffness matrix is assembled from the quadratic form
///   Q(w) = sum_cells (2 mu (D11^2 + D22^2) + nu (div w)^2) |cell|
///        + sum_nodes 4 mu D12^2 |dual node area|
///        + sum_wall_faces f (w.t)^2 |edge|
/// where wall-node shear and the wall trace use the Robin closure. Unknowns
/// are the non-wall face values; in channel mode the duplicate column is not
/// an unknown. The load-space operator is A = K / |cell|, so that
/// <A w, u> (face inner product) = w^T K u.
class LameSystem {
public:
    LameSystem(const Grid& grid, const PhysicalParams& params)
        : grid_(grid), params_(params), solver_(static_cast<long>(grid.n_cells()) <= kDirectSolveLimit) {
        build_dof_maps();
        assemble();
        kernel_ = grid_.periodic_x() && params_.f_friction == 0.0;
        if (kernel_) {
            SparseMatrix kp = stiffness_;
            kp.prune([](int r, int c, double) { return (r != 0 && c != 0) || r == c; });
            kp.coeffRef(0, 0) = 1.0;
            kp.makeCompressed();
            solver_.factorize(kp);
        } else {
            solver_.factorize(stiffness_);
        }
    }

    const Grid& grid() const noexcept { return grid_; }
    const PhysicalParams& params() const noexcept { return params_; }
    const SparseMatrix& stiffness() const noexcept { return stiffness_; }
    int n_dofs() const noexcept { return n_dofs_; }
    int n_u_dofs() const noexcept { return n_u_; }
    /// Channel mode with f = 0: constant x-translation is in the kernel.
    bool has_kernel() const noexcept { return kernel_; }
    WallClosure closure() const noexcept { return WallClosure::robin(params_.f_friction / params_.mu); }

    int u_dof(int i, int j) const noexcept { return udof_[grid_.xface(i, j)]; }
    int v_dof(int i, int j) const noexcept { return vdof_[grid_.yface(i, j)]; }

    Vec to_dofs(const VectorField& w) const {
        require_same_grid(grid_, w.grid(), "LameSystem::to_dofs");
        Vec x(n_dofs_);
        for (std::size_t k = 0; k < udof_.size(); ++k)
            if (udof_[k] >= 0) x[udof_[k]] = w.u_data()[k];
        for (std::size_t k = 0; k < vdof_.size(); ++k)
            if (vdof_[k] >= 0) x[vdof_[k]] = w.v_data()[k];
        return x;
    }

    VectorField from_dofs(const Vec& x) const {
        VectorField w(grid_);
        for (std::size_t k = 0; k < udof_.size(); ++k)
            if (udof_[k] >= 0) w.u_data()[k] = x[udof_[k]];
        for (std::size_t k = 0; k < vdof_.size(); ++k)
            if (vdof_[k] >= 0) w.v_data()[k] = x[vdof_[k]];
        w.enforce_slip();
        return w;
    }

    /// Bilinear form w^T K u.
    double form(const VectorField& w, const VectorField& u) const { return to_dofs(w).dot(stiffness_ * to_dofs(u)); }

    /// A w as a face field (zero on wall faces).
    VectorField apply(const VectorField& w) const {
        Vec y = stiffness_ * to_dofs(w);
        y /= grid_.cell_area();
        return from_dofs(y);
    }

    /// Solves A w = F. In the kernel case the load and solution are
    /// projected to zero x-velocity mean.
    VectorField solve(const VectorField& load) const {
        require_same_grid(grid_, load.grid(), "solve_lame");
        if (!load.finite()) throw SolverBreakdown("solve_lame: non-finite load");
        Vec b = to_dofs(load) * grid_.cell_area();
        Vec x;
        if (kernel_) {
            remove_u_mean(b);
            Vec pinned = b;
            pinned[0] = 0.0;
            x = solver_.solve(pinned);
        } else {
            x = solver_.solve(b);
        }
        if (kernel_) remove_u_mean(x);
        check_residual(stiffness_, x, b);
        return from_dofs(x);
    }

    /// Assembles K + |cell| diag(shift) on the stiffness pattern.
    SparseMatrix shifted(const VectorField& shift) const {
        SparseMatrix m = stiffness_;
        const Vec s = to_dofs(shift) * grid_.cell_area();
        for (int k = 0; k < n_dofs_; ++k) m.coeffRef(k, k) += s[k];
        return m;
    }

    void remove_u_mean(Vec& x) const {
        if (n_u_ == 0) return;
        const double m = x.head(n_u_).mean();
        x.head(n_u_).array() -= m;
    }

    static void check_residual(const SparseMatrix& a, const Vec& x, const Vec& b) {
        const double bn = b.norm();
        if (bn == 0.0) return;
        const double r = (a * x - b).norm() / bn;
        if (!(r <= 1e-10)) throw SolverBreakdown("Lame solve residual " + std::to_string(r) + " above 1e-10");
    }

private:
    void build_dof_maps() {
        udof_.assign(grid_.n_xfaces(), -1);
        vdof_.assign(grid_.n_yfaces(), -1);
        int n = 0;
        for (int j = 0; j < grid_.ny(); ++j)
            for (int i = 0; i <= grid_.nx(); ++i)
                if (grid_.xface_active(i)) udof_[grid_.xface(i, j)] = n++;
        n_u_ = n;
        for (int j = 1; j < grid_.ny(); ++j)
            for (int i = 0; i < grid_.nx(); ++i) vdof_[grid_.yface(i, j)] = n++;
        n_dofs_ = n;
    }

    struct Row {
        int dof[4];
        double coef[4];
        int n = 0;
        void add(int d, double c) {
            if (d < 0 || c == 0.0) return;
            dof[n] = d;
            coef[n] = c;
            ++n;
        }
    };

    void assemble() {
        const Grid& g = grid_;
        const int nx = g.nx(), ny = g.ny();
        const double hx = g.hx(), hy = g.hy(), area = g.cell_area();
        const double mu = params_.mu, nu = params_.nu, f = params_.f_friction;
        const WallClosure cl = closure();
        const double ry = cl.ghost_factor(hy), rx = cl.ghost_factor(hx);
        const double by = 0.5 * cl.ratio * hy, bx = 0.5 * cl.ratio * hx;

        std::vector<Triplet> t;
        t.reserve(static_cast<std::size_t>(n_dofs_) * 40);
        auto add = [&](const Row& r, double wgt) {
            for (int a = 0; a < r.n; ++a)
                for (int b = 0; b < r.n; ++b) t.emplace_back(r.dof[a], r.dof[b], wgt * r.coef[a] * r.coef[b]);
        };
        auto ud = [&](int i, int j) { return udof_[g.xface(i, j)]; };
        auto vd = [&](int i, int j) { return vdof_[g.yface(i, j)]; };

        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const int ie = g.periodic_x() ? g.wrap(i + 1) : i + 1;
                Row d11, d22, dv;
                d11.add(ud(ie, j), 1.0 / hx);
                d11.add(ud(i, j), -1.0 / hx);
                d22.add(vd(i, j + 1), 1.0 / hy);
                d22.add(vd(i, j), -1.0 / hy);
                dv = d11;
                for (int a = 0; a < d22.n; ++a) dv.add(d22.dof[a], d22.coef[a]);
                add(d11, 2.0 * mu * area);
                add(d22, 2.0 * mu * area);
                if (nu != 0.0) add(dv, nu * area);
            }

        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i <= nx; ++i) {
                if (!g.node_column_owned(i)) continue;
                Row s;
                // 0.5 * du/dy
                if (j > 0 && j < ny) {
                    s.add(ud(i, j), 0.5 / hy);
                    s.add(ud(i, j - 1), -0.5 / hy);
                } else if (j == 0) {
                    s.add(ud(i, 0), 0.5 * (1.0 - ry) / hy);
                } else {
                    s.add(ud(i, ny - 1), -0.5 * (1.0 - ry) / hy);
                }
                // 0.5 * dv/dx
                if (g.periodic_x() || (i > 0 && i < nx)) {
                    s.add(vd(g.wrap(i), j), 0.5 / hx);
                    s.add(vd(g.wrap(i - 1), j), -0.5 / hx);
                } else if (i == 0) {
                    s.add(vd(0, j), 0.5 * (1.0 - rx) / hx);
                } else {
                    s.add(vd(nx - 1, j), -0.5 * (1.0 - rx) / hx);
                }
                const double fx = g.node_on_xwall(i) ? 0.5 : 1.0;
                const double fy = (j == 0 || j == ny) ? 0.5 : 1.0;
                add(s, 4.0 * mu * area * fx * fy);
            }

        if (f > 0.0) {
            for (int i = 0; i < nx; ++i) {
                if (!g.xface_active(i)) continue;
                Row b, tp;
                b.add(ud(i, 0), 1.0 / (1.0 + by));
                tp.add(ud(i, ny - 1), 1.0 / (1.0 + by));
                add(b, f * hx);
                add(tp, f * hx);
            }
            if (!g.periodic_x())
                for (int j = 1; j < ny; ++j) {
                    Row l, r;
                    l.add(vd(0, j), 1.0 / (1.0 + bx));
                    r.add(vd(nx - 1, j), 1.0 / (1.0 + bx));
                    add(l, f * hy);
                    add(r, f * hy);
                }
        }
        // Keep every diagonal entry structurally present.
        for (int k = 0; k < n_dofs_; ++k) t.emplace_back(k, k, 0.0);

        stiffness_.resize(n_dofs_, n_dofs_);
        stiffness_.setFromTriplets(t.begin(), t.end());
        stiffness_.makeCompressed();
    }

    Grid grid_;
    PhysicalParams params_;
    std::vector<int> udof_, vdof_;
    int n_dofs_ = 0;
    int n_u_ = 0;
    bool kernel_ = false;
    SparseMatrix stiffness_;
    SpdSolver solver_;
};

inline LameSystem assemble_lame(const GridSpec& grid, const PhysicalParams& params) {
    return LameSystem(Grid(grid), params);
}

inline VectorField solve_lame(const LameSystem& system, const VectorField& load) { return system.solve(load); }

/// Solves (A + diag(shift)) w = F for a sequence of nonnegative face shifts
/// on one Lame system, reusing the symbolic factorization.
class ShiftedLameSolver {
public:
    explicit ShiftedLameSolver(std::shared_ptr<const LameSystem> system)
        : system_(std::move(system)),
          solver_(static_cast<long>(system_->grid().n_cells()) <= kDirectSolveLimit) {}

    const LameSystem& system() const noexcept { return *system_; }

    VectorField solve(const VectorField& shift, const VectorField& load) {
        const Vec s = system_->to_dofs(shift);
        if (system_->has_kernel() && s.maxCoeff() <= 0.0) return system_->solve(load);
        const SparseMatrix m = system_->shifted(shift);
        solver_.factorize(m);
        const Vec b = system_->to_dofs(load) * system_->grid().cell_area();
        const Vec x = solver_.solve(b);
        LameSystem::check_residual(m, x, b);
        return system_->from_dofs(x);
    }

private:
    std::shared_ptr<const LameSystem> system_;
    SpdSolver solver_;
};

}  // namespace barons2d
