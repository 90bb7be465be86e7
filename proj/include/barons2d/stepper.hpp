#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "density_solver.hpp"
#include "diagnostics.hpp"
#include "eos.hpp"
#include "lame_solver.hpp"
#include "momentum.hpp"
#include "operators.hpp"
#include "state.hpp"

namespace barons2d {

struct StepperOptions {
    double tol_outer = 1e-8;
    int max_outer = 200;
    double relax_theta = 0.7;
    double tol_density = 1e-10;
    int max_density_iters = 100;

    bool operator==(const StepperOptions&) const = default;
};

struct StepReport {
    int outer_iters = 0;
    double outer_residual = 0.0;
    bool converged = false;
    std::vector<double> residual_history;
    std::vector<DensitySolveReport> density_reports;
    double energy_before = 0.0;
    double energy_after = 0.0;
    double dissipation = 0.0;
    double entropy_residual = 0.0;
};

class StepNonConvergence : public NonConvergence {
public:
    StepNonConvergence(const std::string& what, FluidState best, StepReport report)
        : NonConvergence(what), best_(std::move(best)), report_(std::move(report)) {}
    const FluidState& best() const noexcept { return best_; }
    const StepReport& report() const noexcept { return report_; }

private:
    FluidState best_;
    StepReport report_;
};

/// One implicit time step of the regularized system by damped alternation
/// of the density solve and the Lame solve.
///
/// Each outer iteration computes rho' = S(v), then solves
///   (A + alpha rho'_f) w = alpha h_f g - div(K rho' v (x) v) - grad P(rho') - eps grad rho' grad v
/// and relaxes v <- (1 - theta) v + theta w. The inertia term alpha rho v
/// is kept implicit in w; at a fixed point w = v and the pair solves both
/// equations. The returned velocity is the last undamped w.
///
/// Owns solver workspaces; use one instance per thread.
class Stepper {
public:
    explicit Stepper(const ValidatedConfig& cfg, StepperOptions opt = {})
        : cfg_(cfg),
          opt_(opt),
          grid_(cfg.grid()),
          law_(cfg.physical().gamma, cfg.regularization()),
          lame_(std::make_shared<const LameSystem>(grid_, cfg.physical())),
          density_(grid_, law_),
          shifted_(lame_) {
        if (!(opt.relax_theta > 0.0 && opt.relax_theta <= 1.0))
            throw ConfigError("relax_theta", "relax_theta must lie in (0, 1]");
        if (!(opt.tol_outer > 0.0)) throw ConfigError("tol_outer", "tol_outer must be positive");
        if (opt.max_outer < 1) throw ConfigError("max_outer", "max_outer must be at least 1");
    }

    const ValidatedConfig& config() const noexcept { return cfg_; }
    const StepperOptions& options() const noexcept { return opt_; }
    const Grid& grid() const noexcept { return grid_; }
    const PressureLaw& law() const noexcept { return law_; }
    const LameSystem& lame() const noexcept { return *lame_; }

    /// Advances `prev` by dt with artificial diffusion epsilon. `guess`
    /// (optional) seeds the outer iteration instead of prev.
    std::pair<FluidState, StepReport> step(const FluidState& prev, double dt, double epsilon,
                                           const FluidState* guess = nullptr) {
        require_same_grid(grid_, prev.grid(), "fixed_point_step");
        check_state(prev, law_.m2());
        if (!(dt > 0.0)) throw ConfigError("dt", "dt must be positive");
        const double alpha = 1.0 / dt;
        const ScalarField& h = prev.rho;
        const VectorField& g = prev.v;
        const VectorField hg = alpha * face_product(face_density(h), g);
        const WallClosure closure = lame_->closure();

        StepReport rep;
        rep.energy_before = energy(prev.rho, prev.v, law_);
        const double h_norm = std::max(l2_norm(h), std::numeric_limits<double>::min());
        const double g_h1 = std::sqrt(h1_normsq(g));
        const double area_root = std::sqrt(grid_.area());

        ScalarField rho_i = guess ? guess->rho : h;
        VectorField v_i = guess ? guess->v : g;
        FluidState best{h, g, prev.time + dt, prev.step_index + 1, epsilon};
        double best_res = std::numeric_limits<double>::infinity();

        for (int it = 1; it <= opt_.max_outer; ++it) {
            DensitySolution ds = density_.solve(v_i, h, alpha, epsilon, opt_.tol_density, opt_.max_density_iters);
            rep.density_reports.push_back(ds.report);
            const ScalarField& rho = ds.rho;

            VectorField load = hg;
            load -= convection(upwind_mass_flux(rho, v_i, apply_K(rho, law_)), v_i);
            load -= gradient(apply_P(rho, law_));
            if (epsilon != 0.0) load -= epsilon * density_gradient_transport(rho, v_i, closure);
            const VectorField w = shifted_.solve(alpha * face_density(rho), load);

            // Residual relative to the state scale; the sound-speed floor keeps
            // it meaningful for flows that start from rest.
            const double c_ref = std::sqrt(law_.gamma() * std::pow(std::max(rho.max(), 0.0), law_.gamma() - 1.0));
            const double v_scale = std::max({std::sqrt(h1_normsq(w)), g_h1, c_ref * area_root});
            const double dv = std::sqrt(h1_normsq(w - v_i));
            const double dr = l2_norm(rho - rho_i);
            const double res = (dv == 0.0 ? 0.0 : dv / v_scale) + (dr == 0.0 ? 0.0 : dr / h_norm);
            rep.residual_history.push_back(res);
            rep.outer_iters = it;
            rep.outer_residual = res;
            if (res < best_res) {
                best_res = res;
                best.rho = rho;
                best.v = w;
            }
            if (!std::isfinite(res)) break;
            if (res <= opt_.tol_outer) {
                rep.converged = true;
                FluidState out{rho, w, prev.time + dt, prev.step_index + 1, epsilon};
                finish(rep, prev, out, dt);
                return {std::move(out), std::move(rep)};
            }
            rho_i = rho;
            v_i = (1.0 - opt_.relax_theta) * v_i + opt_.relax_theta * w;
        }
        rep.outer_residual = best_res;
        throw StepNonConvergence("outer fixed point did not converge (best residual " + std::to_string(best_res) +
                                     ")",
                                 best, rep);
    }

private:
    void finish(StepReport& rep, const FluidState& prev, const FluidState& cur, double dt) const {
        rep.energy_after = energy(cur.rho, cur.v, law_);
        rep.dissipation = dissipation(cur.v, cfg_.physical());
        rep.entropy_residual = entropy_residual(prev, cur, dt);
    }

    ValidatedConfig cfg_;
    StepperOptions opt_;
    Grid grid_;
    PressureLaw law_;
    std::shared_ptr<const LameSystem> lame_;
    DensitySolver density_;
    ShiftedLameSolver shifted_;
};

/// One-shot step with a fresh workspace.
inline std::pair<FluidState, StepReport> fixed_point_step(const FluidState& prev, double dt,
                                                          const ValidatedConfig& cfg, double tol_outer,
                                                          int max_outer, double relax_theta) {
    StepperOptions opt;
    opt.tol_outer = tol_outer;
    opt.max_outer = max_outer;
    opt.relax_theta = relax_theta;
    Stepper s(cfg, opt);
    return s.step(prev, dt, cfg.regularization().epsilon);
}

// ---------------------------------------------------------------------------
// Time loop
// ---------------------------------------------------------------------------

struct RunOptions {
    StepperOptions stepper;
    std::vector<double> tail_thresholds;
    bool keep_states = false;
    int weak_test_count = 25;
    /// Called after every accepted step (and once for the initial state with a null report).
    std::function<void(const FluidState&, const StepReport*, const DiagnosticsRecord&)> on_step;
};

struct RunResult {
    FluidState final_state;
    DiagnosticsRecord initial_record;
    std::vector<DiagnosticsRecord> records;  // one per step
    std::vector<StepReport> reports;
    std::vector<FluidState> states;          // initial + every step, when kept
};

/// Runs time.n_steps steps of size time.dt from `initial`.
inline RunResult run(const FluidState& initial, const TimeSpec& time, const ValidatedConfig& cfg,
                     const RunOptions& opt = {}) {
    Stepper st(cfg, opt.stepper);
    check_state(initial, st.law().m2());
    RunResult res;
    res.final_state = initial;
    res.initial_record = state_record(initial, st.law(), cfg.physical(), opt.tail_thresholds);
    if (opt.keep_states) res.states.push_back(initial);
    if (opt.on_step) opt.on_step(initial, nullptr, res.initial_record);
    if (time.n_steps == 0) return res;

    const TestFamily family = make_test_family(st.grid(), opt.weak_test_count);
    const double eps = cfg.regularization().epsilon;
    for (std::int64_t k = 0; k < time.n_steps; ++k) {
        auto [next, rep] = st.step(res.final_state, time.dt, eps);
        next.time = initial.time + static_cast<double>(k + 1) * time.dt;
        DiagnosticsRecord r =
            step_record(res.final_state, next, time.dt, st.law(), st.lame(), eps, family, opt.tail_thresholds);
        r.outer_iters = rep.outer_iters;
        if (opt.on_step) opt.on_step(next, &rep, r);
        res.records.push_back(std::move(r));
        res.reports.push_back(std::move(rep));
        if (opt.keep_states) res.states.push_back(next);
        res.final_state = std::move(next);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Epsilon continuation
// ---------------------------------------------------------------------------

struct EpsilonEntry {
    double epsilon = 0.0;
    bool converged = false;
    FluidState state;
    ScalarField G;
    double eps_grad_rho = 0.0;  // eps ||grad rho||_2
    double g_diff = 0.0;        // ||G_eps - G_ref||_2
    std::vector<std::pair<double, double>> tails;
    int outer_iters = 0;
};

struct EpsilonContinuation {
    std::vector<EpsilonEntry> entries;
    FluidState final_state;
};

/// Solves the step prev -> prev + dt for each epsilon of a strictly
/// decreasing schedule, warm-starting each from the previous solution.
/// G_ref is the effective viscous flux at the smallest converged epsilon.
inline EpsilonContinuation epsilon_continuation(const FluidState& prev, double dt, const ValidatedConfig& cfg,
                                                const std::vector<double>& schedule,
                                                const std::vector<double>& thresholds,
                                                const StepperOptions& opt = {}) {
    if (schedule.empty()) throw ConfigError("eps_schedule", "schedule must not be empty");
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        if (!(schedule[k] > 0.0)) throw ConfigError("eps_schedule", "schedule entries must be positive");
        if (k > 0 && !(schedule[k] < schedule[k - 1]))
            throw ConfigError("eps_schedule", "schedule must be strictly decreasing");
    }
    Stepper st(cfg, opt);
    EpsilonContinuation out;
    FluidState warm = prev;
    bool have_warm = false;
    for (double eps : schedule) {
        EpsilonEntry e;
        e.epsilon = eps;
        try {
            auto [s, rep] = st.step(prev, dt, eps, have_warm ? &warm : nullptr);
            e.state = std::move(s);
            e.converged = true;
            e.outer_iters = rep.outer_iters;
        } catch (const StepNonConvergence& ex) {
            e.state = ex.best();
            e.outer_iters = ex.report().outer_iters;
        }
        warm = e.state;
        have_warm = true;
        e.G = effective_viscous_flux(e.state.rho, e.state.v, st.law(), cfg.physical());
        const VectorField gr = gradient(e.state.rho);
        e.eps_grad_rho = eps * l2_norm(gr);
        for (double m : thresholds) e.tails.emplace_back(m, tail_measure(e.state.rho, m));
        out.entries.push_back(std::move(e));
    }
    const EpsilonEntry* ref = nullptr;
    for (const auto& e : out.entries)
        if (e.converged) ref = &e;
    if (ref == nullptr) ref = &out.entries.back();
    for (auto& e : out.entries) e.g_diff = l2_norm(e.G - ref->G);
    out.final_state = out.entries.back().state;
    return out;
}

}  // namespace barons2d
