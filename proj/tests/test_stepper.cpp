#include <cmath>

#include <gtest/gtest.h>

#include <barons2d/stepper.hpp>

#include "support.hpp"

using namespace barons2d;

namespace {

ValidatedConfig make_config(const FluidState& s0, double dt, std::int64_t steps, double eps = 1e-3,
                            PhysicalParams p = {1.0, 0.0, 3.0, 0.5}) {
    const double m1 = 4.0 * s0.rho.max();
    return validate(p, RegularizationParams{eps, m1, m1 + 1.0}, s0.grid().spec(), TimeSpec::make(dt, steps));
}

FluidState bump(int n, WallMode m = WallMode::AllSlipWalls) {
    InitialSpec spec;
    spec.kind = InitialKind::Bump;
    return make_initial_state(Grid(GridSpec{n, n, 1.0, 1.0, m}), spec);
}

FluidState random_smooth(int n, std::uint64_t seed, WallMode m = WallMode::AllSlipWalls) {
    InitialSpec spec;
    spec.kind = InitialKind::RandomSmooth;
    spec.bump_amplitude = 0.3;
    spec.seed = seed;
    return make_initial_state(Grid(GridSpec{n, n, 1.0, 1.0, m}), spec);
}

double state_distance(const FluidState& a, const FluidState& b) {
    return l2_norm(a.rho - b.rho) + std::sqrt(h1_normsq(a.v - b.v));
}

}  // namespace

TEST(Stepper, RestStateIsAFixedPoint) {
    for (WallMode m : {WallMode::AllSlipWalls, WallMode::PeriodicXChannel}) {
        const Grid g(GridSpec{12, 10, 1.0, 1.0, m});
        const FluidState rest{ScalarField(g, 1.4), VectorField(g), 0.0, 0, 0.0};
        Stepper st(make_config(rest, 0.01, 1));
        const auto [next, rep] = st.step(rest, 0.01, 1e-3);
        EXPECT_TRUE(rep.converged);
        EXPECT_EQ(rep.outer_iters, 1);
        EXPECT_LE(support::max_abs_diff(next.rho.data(), rest.rho.data()), 1e-13);
        EXPECT_LE(support::max_abs(next.v.u_data()) + support::max_abs(next.v.v_data()), 1e-13);
        EXPECT_EQ(next.step_index, 1);
        EXPECT_DOUBLE_EQ(next.time, 0.01);
    }
}

TEST(Stepper, ConvergedStepSolvesBothDiscreteEquations) {
    for (WallMode m : {WallMode::AllSlipWalls, WallMode::PeriodicXChannel}) {
        const FluidState s0 = random_smooth(16, 3, m);
        const double dt = 0.01, eps = 1e-3, alpha = 1.0 / dt;
        StepperOptions opt;
        opt.tol_outer = 1e-11;
        Stepper st(make_config(s0, dt, 1, eps), opt);
        const auto [s1, rep] = st.step(s0, dt, eps);
        ASSERT_TRUE(rep.converged);

        const ScalarField dres = density_defect(s1.rho, s1.v, s0.rho, alpha, eps, st.law());
        EXPECT_LE(l2_norm(dres) / (alpha * l2_norm(s0.rho)), 1e-8);

        const WallClosure cl = st.lame().closure();
        VectorField lhs = st.lame().apply(s1.v);
        lhs += alpha * face_product(face_density(s1.rho), s1.v);
        const MomentumTerms t = momentum_terms(s1.rho, s1.v, s0.rho, s0.v, alpha, eps, st.law(), cl);
        VectorField rhs = t.previous;
        rhs -= t.convection;
        rhs -= t.pressure;
        rhs -= t.regularizing;
        const double scale = l2_norm(t.previous) + l2_norm(t.pressure) + l2_norm(t.inertia);
        EXPECT_LE(l2_norm(lhs - rhs) / scale, 1e-8) << to_string(m);
    }
}

TEST(Stepper, EnergyDoesNotIncreaseOnBump) {
    const FluidState s0 = bump(16);
    const ValidatedConfig cfg = make_config(s0, 0.01, 10);
    const RunResult res = run(s0, cfg.time(), cfg);
    double prev = res.initial_record.energy;
    for (const auto& r : res.records) {
        EXPECT_LE(r.energy + 0.01 * r.dissipation, prev * (1.0 + 1e-8)) << "step " << r.step_index;
        prev = r.energy;
    }
}

TEST(Stepper, MassIsConservedOverShortRun) {
    for (WallMode m : {WallMode::AllSlipWalls, WallMode::PeriodicXChannel}) {
        const FluidState s0 = bump(16, m);
        const ValidatedConfig cfg = make_config(s0, 0.01, 10);
        const RunResult res = run(s0, cfg.time(), cfg);
        for (const auto& r : res.records) EXPECT_NEAR(r.mass, res.initial_record.mass, 1e-9 * res.initial_record.mass);
        EXPECT_GE(res.final_state.rho.min(), 0.0);
    }
}

TEST(Stepper, ZeroStepsReturnsInitialState) {
    const FluidState s0 = bump(12);
    const ValidatedConfig cfg = make_config(s0, 0.01, 0);
    const RunResult res = run(s0, cfg.time(), cfg);
    EXPECT_TRUE(res.records.empty());
    EXPECT_EQ(res.final_state, s0);
}

TEST(Stepper, LongRestRunStaysAtRest) {
    const Grid g(GridSpec{10, 10, 1.0, 1.0, WallMode::AllSlipWalls});
    const FluidState rest{ScalarField(g, 0.9), VectorField(g), 0.0, 0, 0.0};
    const ValidatedConfig cfg = make_config(rest, 0.02, 50);
    const RunResult res = run(rest, cfg.time(), cfg);
    ASSERT_EQ(res.records.size(), 50u);
    EXPECT_LE(support::max_abs_diff(res.final_state.rho.data(), rest.rho.data()), 1e-10);
    EXPECT_LE(support::max_abs(res.final_state.v.u_data()) + support::max_abs(res.final_state.v.v_data()), 1e-10);
    EXPECT_DOUBLE_EQ(res.final_state.time, 1.0);
    EXPECT_EQ(res.final_state.step_index, 50);
}

TEST(Stepper, HalvingTheStepHalvesTheError) {
    // Three runs to the same final time; successive differences shrink at first order.
    const FluidState s0 = random_smooth(16, 7);
    const double t_final = 0.08;
    std::vector<FluidState> finals;
    for (double dt : {0.01, 0.005, 0.0025}) {
        const ValidatedConfig cfg = make_config(s0, dt, std::llround(t_final / dt));
        finals.push_back(run(s0, cfg.time(), cfg).final_state);
    }
    const double d1 = state_distance(finals[0], finals[1]);
    const double d2 = state_distance(finals[1], finals[2]);
    ASSERT_GT(d2, 0.0);
    EXPECT_GE(d1 / d2, 1.5);
    EXPECT_LE(d1 / d2, 2.5);
}

TEST(Stepper, PerStepIncrementIsFirstOrderInTheStep) {
    // ||rho1 - rho0||_gamma from a moving state; its gamma-th power scales like dt^gamma.
    const FluidState s0 = random_smooth(16, 7);
    std::vector<double> norms;
    for (double dt : {0.01, 0.005, 0.0025}) {
        Stepper st(make_config(s0, dt, 1));
        const FluidState s1 = st.step(s0, dt, 1e-3).first;
        norms.push_back(std::cbrt(lp_norm_pow(s1.rho - s0.rho, 3.0)));
    }
    for (std::size_t k = 1; k < norms.size(); ++k) {
        EXPECT_GE(norms[k - 1] / norms[k], 1.5);
        EXPECT_LE(norms[k - 1] / norms[k], 2.5);
    }
}

TEST(Stepper, RejectsBadOptionsAndInputs) {
    const FluidState s0 = bump(8);
    const ValidatedConfig cfg = make_config(s0, 0.01, 1);
    StepperOptions bad;
    bad.relax_theta = 0.0;
    EXPECT_THROW(Stepper(cfg, bad), ConfigError);
    bad = {};
    bad.max_outer = 0;
    EXPECT_THROW(Stepper(cfg, bad), ConfigError);
    Stepper st(cfg);
    EXPECT_THROW(st.step(s0, 0.0, 1e-3), ConfigError);
    FluidState neg = s0;
    neg.rho(1, 1) = -0.5;
    EXPECT_THROW(st.step(neg, 0.01, 1e-3), NegativeInput);
    const FluidState other = bump(9);
    EXPECT_THROW(st.step(other, 0.01, 1e-3), GridMismatch);
}

TEST(Stepper, NonConvergenceCarriesBestState) {
    const FluidState s0 = random_smooth(12, 5);
    StepperOptions opt;
    opt.max_outer = 2;
    opt.tol_outer = 1e-14;
    Stepper st(make_config(s0, 0.05, 1), opt);
    try {
        st.step(s0, 0.05, 1e-3);
        FAIL() << "two outer iterations met a 1e-14 tolerance";
    } catch (const StepNonConvergence& e) {
        EXPECT_EQ(e.report().outer_iters, 2);
        EXPECT_FALSE(e.report().converged);
        EXPECT_EQ(e.report().residual_history.size(), 2u);
        EXPECT_EQ(e.best().rho.size(), s0.rho.size());
        EXPECT_GE(e.best().rho.min(), -1e-12);
    }
}

TEST(EpsilonContinuation, RestStateGivesIdenticalEntries) {
    const Grid g(GridSpec{10, 10, 1.0, 1.0, WallMode::PeriodicXChannel});
    const FluidState rest{ScalarField(g, 1.0), VectorField(g), 0.0, 0, 0.0};
    const EpsilonContinuation c = epsilon_continuation(rest, 0.01, make_config(rest, 0.01, 1), {1e-1, 1e-2, 1e-3}, {0.8});
    ASSERT_EQ(c.entries.size(), 3u);
    for (const auto& e : c.entries) {
        EXPECT_TRUE(e.converged);
        EXPECT_LE(support::max_abs_diff(e.state.rho.data(), rest.rho.data()), 1e-13);
        EXPECT_LE(e.eps_grad_rho, 1e-13);
        EXPECT_LE(e.g_diff, 1e-10);
        ASSERT_EQ(e.tails.size(), 1u);
        EXPECT_DOUBLE_EQ(e.tails[0].second, g.area());
    }
}

TEST(EpsilonContinuation, ValidatesSchedule) {
    const FluidState s0 = bump(8);
    const ValidatedConfig cfg = make_config(s0, 0.01, 1);
    EXPECT_THROW(epsilon_continuation(s0, 0.01, cfg, {}, {}), ConfigError);
    EXPECT_THROW(epsilon_continuation(s0, 0.01, cfg, {1e-2, 1e-2}, {}), ConfigError);
    EXPECT_THROW(epsilon_continuation(s0, 0.01, cfg, {1e-3, 1e-2}, {}), ConfigError);
    EXPECT_THROW(epsilon_continuation(s0, 0.01, cfg, {1e-2, 0.0}, {}), ConfigError);
}

TEST(EpsilonContinuation, RecordsUnconvergedEntries) {
    const FluidState s0 = random_smooth(12, 9);
    StepperOptions opt;
    opt.max_outer = 1;
    opt.tol_outer = 1e-14;
    const EpsilonContinuation c =
        epsilon_continuation(s0, 0.05, make_config(s0, 0.05, 1), {1e-2, 1e-3}, {}, opt);
    ASSERT_EQ(c.entries.size(), 2u);
    for (const auto& e : c.entries) {
        EXPECT_FALSE(e.converged);
        EXPECT_EQ(e.outer_iters, 1);
    }
    EXPECT_EQ(c.final_state, c.entries.back().state);
}
