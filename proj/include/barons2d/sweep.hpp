#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "diagnostics.hpp"
#include "io.hpp"
#include "state.hpp"
#include "stepper.hpp"

namespace barons2d {

struct SweepAssertion {
    std::string name;
    bool passed = true;
    std::string detail;
};

/// Runs `fn(k)` for k in [0, n) on up to `workers` threads. Results must be
/// written to per-index slots so that the outcome is independent of scheduling.
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn fn) {
    const std::size_t w = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
    if (w <= 1) {
        for (std::size_t k = 0; k < n; ++k) fn(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < w; ++t)
        pool.emplace_back([&] {
            for (std::size_t k = next++; k < n; k = next++) fn(k);
        });
    for (auto& th : pool) th.join();
}

// ---------------------------------------------------------------------------
// Time-step refinement
// ---------------------------------------------------------------------------

struct DtRun {
    double dt = 0.0;
    std::int64_t n_steps = 0;
    bool completed = false;
    std::string error;
    double initial_energy = 0.0;
    double sup_energy = 0.0;        // sup_{k>=1} 1/(gamma-1) int rho^gamma + 1/2 int rho v^2
    double sum_dt_h1 = 0.0;         // sum dt ||v||_H1^2
    double sum_increment = 0.0;     // sum int |rho_k - rho_{k-1}|^gamma
    double sum_dt_gamma1 = 0.0;     // sum dt int rho^(gamma+1)
    double max_entropy_residual = -std::numeric_limits<double>::infinity();
    double max_energy_excess = -std::numeric_limits<double>::infinity();  // E_k + dt D_k - E_{k-1}
    double max_weak_residual = 0.0;
    double max_pressure_l2 = 0.0;
    int max_outer_iters = 0;
    double diff_to_next = 0.0;      // sup over shared times of the L2 difference to the next run
    std::vector<DiagnosticsRecord> records;
    std::vector<FluidState> states;
};

struct DtSweepReport {
    std::vector<DtRun> runs;
    std::vector<double> shared_times;
    std::vector<std::vector<double>> differences;  // [pair][shared time]
    std::vector<SweepAssertion> assertions;
    bool complete = true;
    double gamma = 0.0;

    bool passed() const {
        return std::all_of(assertions.begin(), assertions.end(), [](const SweepAssertion& a) { return a.passed; });
    }
};

/// Runs every dt to the same final time from identical initial data and
/// checks the dt-uniform bounds and the Cauchy property.
inline DtSweepReport dt_sweep(const ValidatedConfig& base, const std::vector<double>& dts, const FluidState& initial,
                              double t_final, const StepperOptions& opt, const std::vector<double>& thresholds,
                              int workers = 1) {
    if (dts.empty()) throw ConfigError("dts", "at least one time step is required");
    for (std::size_t k = 0; k < dts.size(); ++k) {
        if (!(dts[k] > 0.0)) throw ConfigError("dts", "time steps must be positive");
        if (k > 0 && !(dts[k] < dts[k - 1])) throw ConfigError("dts", "time steps must be strictly decreasing");
    }
    if (!(t_final > 0.0)) throw ConfigError("t_final", "t_final must be positive");

    DtSweepReport rep;
    rep.gamma = base.physical().gamma;
    rep.runs.resize(dts.size());
    parallel_for(dts.size(), workers, [&](std::size_t k) {
        DtRun& r = rep.runs[k];
        r.dt = dts[k];
        r.n_steps = std::llround(t_final / r.dt);
        try {
            const ValidatedConfig cfg = validate(base.physical(), base.regularization(), base.grid(),
                                                 TimeSpec::make(r.dt, r.n_steps));
            RunOptions ro;
            ro.stepper = opt;
            ro.tail_thresholds = thresholds;
            ro.keep_states = true;
            RunResult res = run(initial, cfg.time(), cfg, ro);
            r.initial_energy = res.initial_record.energy;
            double e_prev = r.initial_energy;
            r.sup_energy = res.records.empty() ? r.initial_energy : 0.0;
            for (const auto& d : res.records) {
                r.sup_energy = std::max(r.sup_energy, d.energy);
                r.sum_dt_h1 += r.dt * d.v_h1_normsq;
                r.sum_increment += d.rho_increment_gamma;
                r.sum_dt_gamma1 += r.dt * d.rho_gammaplus1_norm;
                r.max_entropy_residual = std::max(r.max_entropy_residual, d.entropy_residual);
                r.max_energy_excess = std::max(r.max_energy_excess, d.energy + r.dt * d.dissipation - e_prev);
                r.max_weak_residual = std::max({r.max_weak_residual, d.weak_continuity, d.weak_momentum});
                r.max_pressure_l2 = std::max(r.max_pressure_l2, d.pressure_l2);
                r.max_outer_iters = std::max(r.max_outer_iters, d.outer_iters);
                e_prev = d.energy;
            }
            r.records = std::move(res.records);
            r.states = std::move(res.states);
            r.completed = true;
        } catch (const Error& e) {
            r.error = e.what();
        }
    });

    std::vector<const DtRun*> done;
    for (const auto& r : rep.runs) {
        if (r.completed) done.push_back(&r);
        else rep.complete = false;
    }
    if (!rep.complete)
        rep.assertions.push_back({"all_runs_completed", false, "at least one run failed"});

    // Shared sample times: the coarsest grid in time.
    if (!done.empty()) {
        const DtRun& coarse = *done.front();
        for (std::int64_t k = 1; k <= coarse.n_steps; ++k) rep.shared_times.push_back(initial.time + k * coarse.dt);
    }
    for (std::size_t p = 0; p + 1 < done.size(); ++p) {
        std::vector<double> d;
        for (double t : rep.shared_times) {
            const Interpolants a = interpolants(done[p]->states, done[p]->dt, t);
            const Interpolants b = interpolants(done[p + 1]->states, done[p + 1]->dt, t);
            d.push_back(l2_norm(a.tilde.rho - b.tilde.rho) + l2_norm(a.tilde.v - b.tilde.v));
        }
        rep.differences.push_back(d);
        const double sup = d.empty() ? 0.0 : *std::max_element(d.begin(), d.end());
        for (auto& r : rep.runs)
            if (&r == done[p]) r.diff_to_next = sup;
    }

    if (done.size() >= 2) {
        const DtRun& c = *done.front();
        double emin = c.sup_energy, emax = c.sup_energy;
        bool below_initial = true;
        for (const DtRun* r : done) {
            emin = std::min(emin, r->sup_energy);
            emax = std::max(emax, r->sup_energy);
            below_initial = below_initial && r->sup_energy <= r->initial_energy * (1.0 + 1e-12);
        }
        const double var = emin > 0.0 ? (emax - emin) / emin : (emax > 0.0 ? 1.0 : 0.0);
        rep.assertions.push_back({"energy_sup_uniform", var < 0.10, "relative variation " + format_double(var)});
        rep.assertions.push_back({"energy_sup_below_initial", below_initial, ""});
        // Sums below this floor are roundoff (e.g. a flow at rest) and compare as equal.
        const double floor = 1e-12 * std::max(1.0, c.initial_energy * std::max(1.0, t_final));
        auto bounded = [&](const char* name, double DtRun::*field) {
            double worst = 0.0;
            bool ok = true;
            for (const DtRun* r : done) {
                const double ref = c.*field, val = r->*field;
                if (val <= floor && ref <= floor) continue;
                const double ratio = ref > 0.0 ? val / ref : 2.0;
                worst = std::max(worst, ratio);
                ok = ok && val <= 1.10 * ref + floor;
            }
            rep.assertions.push_back({name, ok, "max ratio to coarsest " + format_double(worst)});
        };
        bounded("h1_sum_bounded", &DtRun::sum_dt_h1);
        bounded("increment_sum_bounded", &DtRun::sum_increment);
        bounded("gamma_plus_one_sum_bounded", &DtRun::sum_dt_gamma1);
    }
    if (rep.differences.size() >= 2) {
        bool ok = true;
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p + 1 < rep.differences.size(); ++p)
            for (std::size_t t = 0; t < rep.shared_times.size(); ++t) {
                const double a = rep.differences[p][t], b = rep.differences[p + 1][t];
                if (a == 0.0 && b == 0.0) continue;
                const double ratio = b > 0.0 ? a / b : std::numeric_limits<double>::infinity();
                worst = std::min(worst, ratio);
                ok = ok && ratio >= 1.5;
            }
        rep.assertions.push_back({"cauchy_in_dt", ok,
                                  "min decrease factor " + (std::isfinite(worst) ? format_double(worst) : "n/a")});
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Epsilon schedule
// ---------------------------------------------------------------------------

struct EpsSweepReport {
    EpsilonContinuation continuation;
    std::vector<SweepAssertion> assertions;
    bool complete = true;
    double gamma = 0.0;

    bool passed() const {
        return std::all_of(assertions.begin(), assertions.end(), [](const SweepAssertion& a) { return a.passed; });
    }
};

/// Nonincreasing within a relative slack per step of the schedule.
inline SweepAssertion trend_nonincreasing(const std::string& name, const std::vector<double>& values,
                                          double slack = 0.05) {
    SweepAssertion a{name, true, ""};
    for (std::size_t k = 1; k < values.size(); ++k)
        if (values[k] > values[k - 1] * (1.0 + slack)) {
            a.passed = false;
            a.detail = "increase at schedule index " + std::to_string(k);
        }
    return a;
}

inline EpsSweepReport eps_sweep(const ValidatedConfig& cfg, const std::vector<double>& schedule,
                                const FluidState& initial, double dt, const StepperOptions& opt,
                                const std::vector<double>& thresholds) {
    EpsSweepReport rep;
    rep.gamma = cfg.physical().gamma;
    rep.continuation = epsilon_continuation(initial, dt, cfg, schedule, thresholds, opt);
    for (const auto& e : rep.continuation.entries)
        if (!e.converged) rep.complete = false;
    if (!rep.complete) rep.assertions.push_back({"all_epsilons_converged", false, ""});
    std::vector<double> eg, gd;
    for (const auto& e : rep.continuation.entries) {
        eg.push_back(e.eps_grad_rho);
        gd.push_back(e.g_diff);
    }
    rep.assertions.push_back(trend_nonincreasing("eps_grad_rho_nonincreasing", eg));
    rep.assertions.push_back(trend_nonincreasing("G_difference_nonincreasing", gd));
    for (std::size_t m = 0; m < thresholds.size(); ++m) {
        std::vector<double> tails;
        for (const auto& e : rep.continuation.entries) tails.push_back(e.tails[m].second);
        rep.assertions.push_back(trend_nonincreasing("tail_" + format_double(thresholds[m]) + "_nonincreasing", tails));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Report files
// ---------------------------------------------------------------------------

inline void write_dt_sweep_csv(std::ostream& out, const DtSweepReport& rep) {
    out << "# barons2d-dt-sweep v1\n";
    out << "dt,n_steps,completed,initial_energy,sup_energy,sum_dt_h1,sum_increment_gamma,sum_dt_rho_gammaplus1,"
           "max_entropy_residual,max_energy_excess,max_weak_residual,max_pressure_l2,max_outer_iters,diff_to_next\n";
    for (const auto& r : rep.runs) {
        out << format_double(r.dt) << ',' << r.n_steps << ',' << (r.completed ? 1 : 0);
        for (double x : {r.initial_energy, r.sup_energy, r.sum_dt_h1, r.sum_increment, r.sum_dt_gamma1,
                         r.max_entropy_residual, r.max_energy_excess, r.max_weak_residual, r.max_pressure_l2})
            out << ',' << format_double(x);
        out << ',' << r.max_outer_iters << ',' << format_double(r.diff_to_next) << '\n';
    }
}

inline void write_eps_sweep_csv(std::ostream& out, const EpsSweepReport& rep, const std::vector<double>& thresholds) {
    out << "# barons2d-eps-sweep v1\n";
    out << "epsilon,converged,outer_iters,eps_grad_rho,G_difference";
    for (double m : thresholds) out << ",tail_" << format_double(m);
    out << '\n';
    for (const auto& e : rep.continuation.entries) {
        out << format_double(e.epsilon) << ',' << (e.converged ? 1 : 0) << ',' << e.outer_iters << ','
            << format_double(e.eps_grad_rho) << ',' << format_double(e.g_diff);
        for (const auto& t : e.tails) out << ',' << format_double(t.second);
        out << '\n';
    }
}

inline nlohmann::json assertions_json(const std::vector<SweepAssertion>& as) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& x : as) a.push_back({{"name", x.name}, {"passed", x.passed}, {"detail", x.detail}});
    return a;
}

inline nlohmann::json summary_json(const DtSweepReport& rep) {
    nlohmann::json j;
    j["format"] = "barons2d-sweep-summary";
    j["version"] = 1;
    j["kind"] = "dt";
    j["gamma"] = rep.gamma;
    j["gamma_above_3"] = rep.gamma > 3.0;
    j["complete"] = rep.complete;
    j["passed"] = rep.passed();
    j["assertions"] = assertions_json(rep.assertions);
    for (const auto& r : rep.runs)
        if (!r.completed) j["errors"].push_back({{"dt", r.dt}, {"message", r.error}});
    return j;
}

inline nlohmann::json summary_json(const EpsSweepReport& rep) {
    nlohmann::json j;
    j["format"] = "barons2d-sweep-summary";
    j["version"] = 1;
    j["kind"] = "epsilon";
    j["gamma"] = rep.gamma;
    j["gamma_above_3"] = rep.gamma > 3.0;
    j["complete"] = rep.complete;
    j["passed"] = rep.passed();
    j["assertions"] = assertions_json(rep.assertions);
    return j;
}

inline constexpr const char* kSummaryHeader = "# barons2d-sweep-summary v1";

/// Header line, then the JSON document.
inline void write_summary(std::ostream& out, const nlohmann::json& j) {
    out << kSummaryHeader << '\n' << j.dump(2) << '\n';
}

}  // namespace barons2d
