#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "config.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "mms.hpp"
#include "run_config.hpp"
#include "state.hpp"
#include "stepper.hpp"
#include "sweep.hpp"

namespace barons2d {

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitConfig = 2, kExitNonConvergence = 3, kExitAssertion = 4 };

struct CliOptions {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::int64_t> snapshot_every;
    std::vector<std::string> overrides;
    std::optional<int> workers;
    std::optional<std::uint64_t> seed;
};

namespace detail {

inline RunConfig load_run_config(const CliOptions& o) {
    RunConfig c = o.config_path.empty() ? RunConfig{} : load_config_file(o.config_path);
    for (const auto& kv : o.overrides) apply_override(c, kv);
    if (o.snapshot_every) c.snapshot_every = *o.snapshot_every;
    if (o.workers) c.workers = *o.workers;
    if (o.seed) c.initial.seed = *o.seed;
    if (c.snapshot_every < 0) throw ConfigError("snapshot_every", "must be nonnegative");
    if (c.workers < 1) throw ConfigError("workers", "must be at least 1");
    return c;
}

inline FluidState initial_state(const RunConfig& c) {
    if (!c.restart.empty()) return read_snapshot(c.restart, c.grid);
    return make_initial_state(Grid(c.grid), c.initial);
}

inline std::filesystem::path out_path(const CliOptions& o, const std::string& name) {
    std::filesystem::create_directories(o.out_dir);
    return std::filesystem::path(o.out_dir) / name;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot open '" + p.string() + "' for writing");
    return f;
}

inline std::string snapshot_name(std::int64_t step) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "snapshot_%06lld.snap", static_cast<long long>(step));
    return buf;
}

inline SnapshotFormat snapshot_format(const RunConfig& c) {
    return c.snapshot_format == "ascii" ? SnapshotFormat::Ascii : SnapshotFormat::Binary;
}

inline int cmd_check(const CliOptions& o, std::ostream& out) {
    RunConfig c = load_run_config(o);
    const FluidState s0 = initial_state(c);
    const ValidatedConfig cfg = resolve(c, s0.rho);
    out << "grid = " << cfg.grid().nx << " x " << cfg.grid().ny << " on " << format_double(cfg.grid().lx) << " x "
        << format_double(cfg.grid().ly) << " (" << to_string(cfg.grid().wall_mode) << ")\n";
    out << "dt = " << format_double(cfg.time().dt) << "\n";
    out << "n_steps = " << cfg.time().n_steps << "\n";
    out << "alpha = " << format_double(cfg.time().alpha) << "\n";
    out << "gamma = " << format_double(cfg.physical().gamma) << "\n";
    out << "mu = " << format_double(cfg.physical().mu) << "\n";
    out << "nu = " << format_double(cfg.physical().nu) << "\n";
    out << "f_friction = " << format_double(cfg.physical().f_friction) << "\n";
    out << "m1 = " << format_double(cfg.regularization().m1) << "\n";
    out << "m2 = " << format_double(cfg.regularization().m2) << "\n";
    out << "epsilon = " << format_double(cfg.regularization().epsilon) << (c.epsilon_auto ? " (auto)" : "") << "\n";
    out << "cutoff_profile = " << to_string(cfg.regularization().cutoff_profile) << "\n";
    out << "initial_mass = " << format_double(integrate(s0.rho)) << "\n";
    out << "initial_max_rho = " << format_double(s0.rho.max()) << "\n";
    return kExitOk;
}

inline int cmd_run(const CliOptions& o, std::ostream& out) {
    RunConfig c = load_run_config(o);
    const FluidState s0 = initial_state(c);
    const ValidatedConfig cfg = resolve(c, s0.rho);
    const auto thresholds = effective_thresholds(c);
    std::ofstream diag = open_out(out_path(o, "diagnostics.csv"));
    write_diagnostics_header(diag, thresholds);
    const SnapshotFormat fmt = snapshot_format(c);

    RunOptions ro;
    ro.stepper = c.stepper;
    ro.tail_thresholds = thresholds;
    ro.on_step = [&](const FluidState& s, const StepReport*, const DiagnosticsRecord& r) {
        write_diagnostics_row(diag, r);
        diag.flush();
        if (c.snapshot_every > 0 && s.step_index % c.snapshot_every == 0)
            write_snapshot(s, out_path(o, snapshot_name(s.step_index)).string(), fmt);
    };
    try {
        const RunResult res = run(s0, cfg.time(), cfg, ro);
        write_snapshot(res.final_state, out_path(o, "final.snap").string(), fmt);
        const DiagnosticsRecord& last = res.records.empty() ? res.initial_record : res.records.back();
        out << "steps = " << res.records.size() << "\n";
        out << "time = " << format_double(res.final_state.time) << "\n";
        out << "energy = " << format_double(last.energy) << " (initial " << format_double(res.initial_record.energy)
            << ")\n";
        out << "mass = " << format_double(last.mass) << " (initial " << format_double(res.initial_record.mass) << ")\n";
    } catch (const StepNonConvergence& e) {
        write_snapshot(e.best(), out_path(o, "nonconverged.snap").string(), fmt);
        throw;
    }
    return kExitOk;
}

inline void print_assertions(std::ostream& out, const std::vector<SweepAssertion>& as) {
    for (const auto& a : as)
        out << (a.passed ? "PASS " : "FAIL ") << a.name << (a.detail.empty() ? "" : "  " + a.detail) << "\n";
}

inline int cmd_sweep_dt(const CliOptions& o, std::ostream& out) {
    RunConfig c = load_run_config(o);
    const FluidState s0 = initial_state(c);
    const ValidatedConfig cfg = resolve(c, s0.rho);
    const DtSweepReport rep = dt_sweep(cfg, c.dts, s0, c.t_final, c.stepper, effective_thresholds(c), c.workers);
    {
        std::ofstream f = open_out(out_path(o, "sweep_dt.csv"));
        write_dt_sweep_csv(f, rep);
    }
    {
        std::ofstream f = open_out(out_path(o, "sweep_dt_summary.json"));
        write_summary(f, summary_json(rep));
    }
    print_assertions(out, rep.assertions);
    if (!rep.complete) return kExitNonConvergence;
    return rep.passed() ? kExitOk : kExitAssertion;
}

inline int cmd_sweep_eps(const CliOptions& o, std::ostream& out) {
    RunConfig c = load_run_config(o);
    const FluidState s0 = initial_state(c);
    const ValidatedConfig cfg = resolve(c, s0.rho);
    const auto thresholds = effective_thresholds(c);
    const EpsSweepReport rep = eps_sweep(cfg, c.eps_schedule, s0, c.dt, c.stepper, thresholds);
    {
        std::ofstream f = open_out(out_path(o, "sweep_eps.csv"));
        write_eps_sweep_csv(f, rep, thresholds);
    }
    {
        std::ofstream f = open_out(out_path(o, "sweep_eps_summary.json"));
        write_summary(f, summary_json(rep));
    }
    print_assertions(out, rep.assertions);
    if (!rep.complete) return kExitNonConvergence;
    return rep.passed() ? kExitOk : kExitAssertion;
}

inline int cmd_mms(const CliOptions& o, std::ostream& out) {
    const auto results = all_mms();
    std::ofstream f = open_out(out_path(o, "mms.csv"));
    f << "# barons2d-mms v1\n";
    f << "suite,wall_mode,n,error,order\n";
    bool ok = true;
    for (const auto& r : results) {
        for (std::size_t k = 0; k < r.errors.size(); ++k)
            f << r.name << ',' << to_string(r.wall_mode) << ',' << r.resolutions[k] << ',' << format_double(r.errors[k])
              << ',' << (k == 0 ? std::string() : format_double(r.orders[k - 1])) << '\n';
        out << (r.passed() ? "PASS " : "FAIL ") << std::left << std::setw(18) << r.name << std::setw(20)
            << to_string(r.wall_mode) << " min order " << std::fixed << std::setprecision(3) << r.min_order()
            << " (required " << r.required_order << ")\n"
            << std::defaultfloat << std::setprecision(6);
        ok = ok && r.passed();
    }
    return ok ? kExitOk : kExitAssertion;
}

}  // namespace detail

/// Entry point of the command-line tool. Returns the process exit code.
inline int cli_run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"2D barotropic compressible Navier-Stokes solver with Navier slip walls", "barons2d"};
    app.require_subcommand(1);
    app.fallthrough();
    CliOptions o;
    app.add_option("--config", o.config_path, "Config file of key = value lines");
    app.add_option("--out", o.out_dir, "Output directory");
    app.add_option("--snapshot-every", o.snapshot_every, "Write a snapshot every N steps (0: only the final state)");
    app.add_option("--override", o.overrides, "Override a config key (key=value); repeatable");
    app.add_option("--workers", o.workers, "Concurrent runs in a sweep");
    app.add_option("--seed", o.seed, "Seed of the random-smooth preset");

    int code = kExitOk;
    app.add_subcommand("run", "Run one simulation")->callback([&] { code = detail::cmd_run(o, out); });
    app.add_subcommand("sweep-dt", "Time-step refinement sweep")->callback([&] { code = detail::cmd_sweep_dt(o, out); });
    app.add_subcommand("sweep-eps", "Artificial-diffusion sweep")->callback([&] { code = detail::cmd_sweep_eps(o, out); });
    app.add_subcommand("check", "Validate the config and print derived quantities")->callback([&] {
        code = detail::cmd_check(o, out);
    });
    app.add_subcommand("mms", "Manufactured-solution convergence suites")->callback([&] {
        code = detail::cmd_mms(o, out);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitConfig;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const GridMismatch& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const FormatError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NonConvergence& e) {
        err << "nonconvergence: " << e.what() << "\n";
        return kExitNonConvergence;
    } catch (const SolverBreakdown& e) {
        err << "solver breakdown: " << e.what() << "\n";
        return kExitNonConvergence;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
    return code;
}

}  // namespace barons2d
