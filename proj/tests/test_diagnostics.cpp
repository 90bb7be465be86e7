#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include <barons2d/diagnostics.hpp>
#include <barons2d/stepper.hpp>

#include "support.hpp"

using namespace barons2d;
using std::numbers::pi;

namespace {

const WallMode kModes[] = {WallMode::AllSlipWalls, WallMode::PeriodicXChannel};

PressureLaw cubic_law(double m1 = 10.0) { return PressureLaw(3.0, RegularizationParams{1e-3, m1, m1 + 1.0}); }

/// Energy summed face by face: interior faces carry a full dual cell.
double energy_oracle(const ScalarField& rho, const VectorField& v, double gamma) {
    const Grid& g = rho.grid();
    const int nx = g.nx(), ny = g.ny();
    double kin = 0.0;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            if (!g.periodic_x() && i == 0) continue;
            const int l = (i + nx - 1) % nx;
            kin += 0.5 * (rho(l, j) + rho(i, j)) * v.u(i, j) * v.u(i, j);
        }
    for (int j = 1; j < ny; ++j)
        for (int i = 0; i < nx; ++i) kin += 0.5 * (rho(i, j - 1) + rho(i, j)) * v.v(i, j) * v.v(i, j);
    double internal = 0.0;
    for (double r : rho.data()) internal += std::pow(r, gamma);
    return (0.5 * kin + internal / (gamma - 1.0)) * g.cell_area();
}

FluidState converged_step(WallMode m, double tol, FluidState* prev_out) {
    InitialSpec spec;
    spec.kind = InitialKind::RandomSmooth;
    spec.bump_amplitude = 0.3;
    spec.seed = 4;
    const FluidState s0 = make_initial_state(Grid(GridSpec{16, 16, 1.0, 1.0, m}), spec);
    const ValidatedConfig cfg = validate({1.0, 0.1, 3.0, 0.5}, RegularizationParams{1e-3, 8.0, 9.0},
                                         s0.grid().spec(), TimeSpec::make(0.01, 1));
    StepperOptions opt;
    opt.tol_outer = tol;
    Stepper st(cfg, opt);
    *prev_out = s0;
    return st.step(s0, 0.01, 1e-3).first;
}

}  // namespace

TEST(Energy, UniformRestState) {
    const Grid g(GridSpec{8, 8, 1.0, 1.0, WallMode::AllSlipWalls});
    EXPECT_DOUBLE_EQ(energy(ScalarField(g, 2.0), VectorField(g), cubic_law()), 4.0);
    EXPECT_DOUBLE_EQ(internal_energy(ScalarField(g, 2.0), cubic_law()), 4.0);
    EXPECT_EQ(kinetic_energy(ScalarField(g, 2.0), VectorField(g)), 0.0);
}

TEST(Energy, ChannelPlugFlow) {
    // rho = 1, u = 2 on the unit channel: kinetic energy 1/2 * 4 = 2.
    const Grid g(GridSpec{8, 8, 1.0, 1.0, WallMode::PeriodicXChannel});
    const VectorField v = VectorField::sample(g, [](double, double) { return 2.0; }, [](double, double) { return 0.0; });
    EXPECT_DOUBLE_EQ(kinetic_energy(ScalarField(g, 1.0), v), 2.0);
}

TEST(Energy, MatchesFaceByFaceOracle) {
    support::Gen gen(109);
    for (int trial = 0; trial < 50; ++trial) {
        const Grid g(gen.grid_spec(4, 12));
        const ScalarField rho = gen.scalar(g, 0.0, 3.0);
        const VectorField v = gen.slip_field(g);
        const double ref = energy_oracle(rho, v, 3.0);
        EXPECT_NEAR(energy(rho, v, cubic_law()), ref, 1e-12 * ref);
    }
}

TEST(Dissipation, ZeroForRestAndFrictionlessPlugFlow) {
    const Grid g(GridSpec{8, 8, 1.0, 1.0, WallMode::PeriodicXChannel});
    EXPECT_EQ(dissipation(VectorField(g), {1.0, 0.3, 3.0, 1.0}), 0.0);
    const VectorField plug = VectorField::sample(g, [](double, double) { return 1.5; }, [](double, double) { return 0.0; });
    EXPECT_NEAR(dissipation(plug, {1.0, 0.3, 3.0, 0.0}), 0.0, 1e-12);
    EXPECT_GT(dissipation(plug, {1.0, 0.3, 3.0, 1.0}), 0.0);
}

TEST(Dissipation, QuadraticAndNonnegative) {
    support::Gen gen(113);
    for (int trial = 0; trial < 50; ++trial) {
        const Grid g(gen.grid_spec(4, 12));
        const double mu = gen.uniform(0.2, 2.0);
        const PhysicalParams p{mu, gen.uniform(-0.6 * mu, 1.0), 3.0, gen.uniform(0.0, 3.0)};
        const VectorField v = gen.slip_field(g);
        const double d = dissipation(v, p);
        EXPECT_GE(d, 0.0);
        EXPECT_NEAR(dissipation(2.0 * v, p), 4.0 * d, 1e-12 * d);
    }
}

TEST(EntropyResidual, ExactCases) {
    const Grid g(GridSpec{6, 6, 1.0, 1.0, WallMode::AllSlipWalls});
    const FluidState rest{ScalarField(g, 1.3), VectorField(g), 0.0, 0, 0.0};
    EXPECT_NEAR(entropy_residual(rest, rest, 0.1), 0.0, 1e-15);
    // rho 1 -> e at rest: (e ln e - 0) / dt over unit area.
    const FluidState one{ScalarField(g, 1.0), VectorField(g), 0.0, 0, 0.0};
    const FluidState up{ScalarField(g, std::exp(1.0)), VectorField(g), 0.5, 1, 0.0};
    EXPECT_NEAR(entropy_residual(one, up, 0.5), 2.0 * std::exp(1.0), 1e-12);
}

TEST(EntropyResidual, UnchangedDensityLeavesTransportTerm) {
    support::Gen gen(127);
    const Grid g(GridSpec{7, 5, 1.0, 0.8, WallMode::AllSlipWalls});
    const ScalarField rho = gen.scalar(g, 0.5, 2.0);
    const VectorField v = gen.slip_field(g);
    const FluidState a{rho, VectorField(g), 0.0, 0, 0.0}, b{rho, v, 0.1, 1, 0.0};
    const ScalarField d = divergence(v);
    double ref = 0.0;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) ref += rho(i, j) * d(i, j) * g.hx() * g.hy();
    EXPECT_NEAR(entropy_residual(a, b, 0.1), ref, 1e-12 * (1.0 + std::abs(ref)));
}

TEST(Helmholtz, RecoversGradientField) {
    support::Gen gen(131);
    for (WallMode m : kModes) {
        const Grid g(GridSpec{12, 10, 1.2, 1.0, m});
        const VectorField v = gradient(gen.scalar(g));
        const HelmholtzParts h = helmholtz_decompose(v);
        EXPECT_LE(l2_norm(h.gradient_part - v), 1e-10 * l2_norm(v));
        EXPECT_LE(l2_norm(h.rotation_part), 1e-10 * l2_norm(v));
        EXPECT_LE(h.reconstruction_error, 1e-10);
    }
}

TEST(Helmholtz, RecoversRotatedGradientField) {
    support::Gen gen(137);
    for (WallMode m : kModes) {
        const Grid g(GridSpec{12, 10, 1.2, 1.0, m});
        NodeField a(g);
        for (int j = 1; j < g.ny(); ++j)
            for (int i = 0; i <= g.nx(); ++i) a(i, j) = gen.uniform(-1, 1);
        for (int j = 0; j <= g.ny(); ++j) {
            if (m == WallMode::PeriodicXChannel)
                a(g.nx(), j) = a(0, j);
            else
                a(0, j) = a(g.nx(), j) = 0.0;
        }
        VectorField v = perp_gradient(a);
        v.enforce_slip();
        const HelmholtzParts h = helmholtz_decompose(v);
        EXPECT_LE(l2_norm(h.rotation_part - v), 1e-10 * l2_norm(v));
        EXPECT_LE(l2_norm(h.gradient_part), 1e-10 * l2_norm(v));
    }
}

TEST(Helmholtz, PartsAreOrthogonalAndReconstructInTheBox) {
    support::Gen gen(139);
    for (int trial = 0; trial < 20; ++trial) {
        GridSpec spec = gen.grid_spec(4, 12);
        spec.wall_mode = WallMode::AllSlipWalls;
        const Grid g(spec);
        const VectorField v = gen.slip_field(g);
        const HelmholtzParts h = helmholtz_decompose(v);
        EXPECT_LE(h.reconstruction_error, 1e-10);
        EXPECT_NEAR(inner(h.gradient_part, h.rotation_part), 0.0, 1e-10 * inner(v, v));
        EXPECT_NEAR(integrate(h.phi), 0.0, 1e-12);
    }
}

TEST(Helmholtz, ZeroFieldAndChannelPlugFlow) {
    const Grid g(GridSpec{8, 8, 1.0, 1.0, WallMode::PeriodicXChannel});
    const HelmholtzParts z = helmholtz_decompose(VectorField(g));
    EXPECT_EQ(z.reconstruction_error, 0.0);
    // Constant x-flow in the channel is harmonic: neither part captures it.
    const VectorField plug = VectorField::sample(g, [](double, double) { return 1.0; }, [](double, double) { return 0.0; });
    const HelmholtzParts p = helmholtz_decompose(plug);
    EXPECT_NEAR(p.reconstruction_error, 1.0, 1e-10);
}

TEST(EffectiveViscousFlux, RestAndDivergenceFreeCases) {
    const Grid g(GridSpec{8, 8, 1.0, 1.0, WallMode::AllSlipWalls});
    const PhysicalParams p{1.0, 0.5, 3.0, 0.0};
    const ScalarField gr = effective_viscous_flux(ScalarField(g, 1.5), VectorField(g), cubic_law(), p);
    for (double x : gr.data()) EXPECT_DOUBLE_EQ(x, 3.375);
    const ScalarField zm = effective_viscous_flux(ScalarField(g, 1.5), VectorField(g), cubic_law(), p, true);
    EXPECT_LE(support::max_abs(zm.data()), 1e-14);

    support::Gen gen(149);
    NodeField a(g);
    for (int j = 1; j < g.ny(); ++j)
        for (int i = 1; i < g.nx(); ++i) a(i, j) = gen.uniform(-1, 1);
    const VectorField v = perp_gradient(a);
    const ScalarField rho = gen.scalar(g, 0.5, 2.0);
    const ScalarField gv = effective_viscous_flux(rho, v, cubic_law(), p);
    const ScalarField pr = apply_P(rho, cubic_law());
    EXPECT_LE(support::max_abs_diff(gv.data(), pr.data()), 1e-10);
}

TEST(EffectiveViscousFlux, CompressionRaisesG) {
    const Grid g(GridSpec{8, 8, 1.0, 1.0, WallMode::AllSlipWalls});
    const PhysicalParams p{1.0, 0.5, 3.0, 0.0};
    support::Gen gen(151);
    const VectorField v = gen.slip_field(g);
    const ScalarField d = divergence(v);
    const ScalarField gv = effective_viscous_flux(ScalarField(g, 1.0), v, cubic_law(), p);
    for (std::size_t c = 0; c < d.size(); ++c) EXPECT_NEAR(gv.data()[c], 1.0 - 2.5 * d.data()[c], 1e-12);
}

TEST(TailMeasure, CountsCellsAboveThreshold) {
    const Grid g(GridSpec{4, 4, 2.0, 1.0, WallMode::AllSlipWalls});
    ScalarField rho(g, 1.0);
    rho(0, 0) = 3.0;
    rho(3, 2) = 2.5;
    EXPECT_DOUBLE_EQ(tail_measure(rho, 2.0), 2 * 0.125);
    EXPECT_DOUBLE_EQ(tail_measure(rho, 2.5), 0.125);
    EXPECT_DOUBLE_EQ(tail_measure(rho, 0.5), 2.0);
    EXPECT_THROW(tail_measure(rho, 0.0), ConfigError);
}

TEST(WeakResiduals, VanishForRestState) {
    for (WallMode m : kModes) {
        const Grid g(GridSpec{10, 10, 1.0, 1.0, m});
        const FluidState rest{ScalarField(g, 1.0), VectorField(g), 0.0, 0, 0.0};
        const LameSystem lame(g, {1.0, 0.0, 3.0, 0.5});
        const WeakResiduals r =
            weakform_residuals(rest, rest, 0.01, cubic_law(), lame, 1e-3, make_test_family(g, 25));
        EXPECT_LE(r.continuity, 1e-14);
        EXPECT_LE(r.momentum, 1e-14);
    }
}

TEST(WeakResiduals, SmallAtConvergedStepAndLinearInPerturbation) {
    for (WallMode m : kModes) {
        FluidState s0;
        const FluidState s1 = converged_step(m, 1e-11, &s0);
        const Grid& g = s1.grid();
        const LameSystem lame(g, {1.0, 0.1, 3.0, 0.5});
        const PressureLaw law(3.0, RegularizationParams{1e-3, 8.0, 9.0});
        const TestFamily fam = make_test_family(g, 25);
        ASSERT_EQ(fam.scalar.size(), 25u);
        ASSERT_EQ(fam.vector.size(), 25u);
        const WeakResiduals base = weakform_residuals(s0, s1, 0.01, law, lame, 1e-3, fam);
        EXPECT_LE(base.continuity, 1e-9);
        EXPECT_LE(base.momentum, 1e-9);

        const ScalarField bumpf =
            ScalarField::sample(g, [](double x, double y) { return std::cos(pi * x) * std::cos(pi * y); });
        double prev = 0.0;
        for (double delta : {1e-4, 2e-4, 4e-4}) {
            FluidState c = s1;
            c.rho += delta * bumpf;
            const double r = weakform_residuals(s0, c, 0.01, law, lame, 1e-3, fam).continuity;
            if (prev > 0.0) {
                EXPECT_NEAR(r / prev, 2.0, 0.1) << to_string(m);
            }
            prev = r;
        }
    }
}

TEST(TestFamily, OrderedModes) {
    const auto m0 = ordered_modes(4, 0);
    ASSERT_EQ(m0.size(), 4u);
    EXPECT_EQ(m0[0], (std::pair<int, int>{0, 0}));
    EXPECT_EQ(m0[1], (std::pair<int, int>{0, 1}));
    EXPECT_EQ(m0[2], (std::pair<int, int>{1, 0}));
    EXPECT_EQ(m0[3], (std::pair<int, int>{0, 2}));
    const auto m1 = ordered_modes(3, 1);
    EXPECT_EQ(m1[0], (std::pair<int, int>{1, 1}));
    EXPECT_EQ(m1[1], (std::pair<int, int>{1, 2}));
    EXPECT_EQ(m1[2], (std::pair<int, int>{2, 1}));
}

TEST(TestFamily, VectorModesAreSlipCompatible) {
    for (WallMode m : kModes) {
        const Grid g(GridSpec{10, 8, 1.0, 1.0, m});
        for (const auto& phi : make_test_family(g, 25).vector) {
            EXPECT_TRUE(phi.is_slip_compatible());
            EXPECT_GT(l2_norm(phi), 0.0);
        }
    }
}

TEST(Interpolants, PiecewiseConstantAndLinear) {
    const Grid g(GridSpec{4, 4, 1.0, 1.0, WallMode::AllSlipWalls});
    std::vector<FluidState> traj;
    for (int k = 0; k < 3; ++k) traj.push_back({ScalarField(g, 1.0 + k), VectorField(g), 0.1 * k, k, 0.0});
    const Interpolants mid = interpolants(traj, 0.1, 0.15);
    EXPECT_EQ(mid.hat.rho(0, 0), 2.0);
    EXPECT_DOUBLE_EQ(mid.tilde.rho(0, 0), 2.5);
    EXPECT_DOUBLE_EQ(mid.tilde.time, 0.15);
    const Interpolants node = interpolants(traj, 0.1, 0.2);
    EXPECT_EQ(node.hat.rho(2, 2), 3.0);
    EXPECT_EQ(node.tilde.rho(2, 2), 3.0);
    const Interpolants start = interpolants(traj, 0.1, 0.0);
    EXPECT_EQ(start.tilde.rho(1, 1), 1.0);
    EXPECT_THROW(interpolants(traj, 0.1, 0.3), Error);
    EXPECT_THROW(interpolants({}, 0.1, 0.0), Error);
}

TEST(Records, StateRecordObservables) {
    const Grid g(GridSpec{8, 8, 1.0, 1.0, WallMode::AllSlipWalls});
    support::Gen gen(157);
    const FluidState s{gen.scalar(g, 0.5, 2.0), gen.slip_field(g), 0.3, 3, 0.0};
    const PressureLaw law = cubic_law(1.5);
    const DiagnosticsRecord r = state_record(s, law, {1.0, 0.0, 3.0, 0.0}, {1.0, 1.8});
    EXPECT_EQ(r.step_index, 3);
    EXPECT_DOUBLE_EQ(r.time, 0.3);
    EXPECT_DOUBLE_EQ(r.mass, integrate(s.rho));
    EXPECT_DOUBLE_EQ(r.energy, energy(s.rho, s.v, law));
    EXPECT_DOUBLE_EQ(r.max_rho, s.rho.max());
    EXPECT_DOUBLE_EQ(r.min_rho, s.rho.min());
    ASSERT_EQ(r.tail_measures.size(), 2u);
    EXPECT_DOUBLE_EQ(r.tail_measures[1].second, tail_measure(s.rho, 1.8));
}
