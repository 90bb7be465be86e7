#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "diagnostics.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "state.hpp"

namespace barons2d {

inline constexpr const char* kSnapshotMagic = "BARONS2D-SNAPSHOT";
inline constexpr int kSnapshotVersion = 1;
inline constexpr const char* kDiagnosticsHeader = "# barons2d-diagnostics v1";

/// Shortest text that reads back to the same double.
inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

enum class SnapshotFormat { Binary, Ascii };

namespace detail {

inline void write_le_doubles(std::ostream& out, const std::vector<double>& v) {
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    } else {
        for (double x : v) {
            auto b = std::bit_cast<std::uint64_t>(x);
            b = __builtin_bswap64(b);
            out.write(reinterpret_cast<const char*>(&b), sizeof b);
        }
    }
}

inline void read_le_doubles(std::istream& in, std::vector<double>& v) {
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(v.size() * sizeof(double)))
        throw FormatError("snapshot truncated inside a data block");
    if constexpr (std::endian::native != std::endian::little)
        for (double& x : v) x = std::bit_cast<double>(__builtin_bswap64(std::bit_cast<std::uint64_t>(x)));
}

inline void write_block(std::ostream& out, const Grid& g, double time, const char* kind,
                        const std::vector<double>& data, SnapshotFormat fmt) {
    out << "BARONS2D " << g.nx() << ' ' << g.ny() << ' ' << format_double(g.lx()) << ' ' << format_double(g.ly())
        << ' ' << format_double(time) << ' ' << kind << '\n';
    if (fmt == SnapshotFormat::Binary) {
        write_le_doubles(out, data);
    } else {
        for (double x : data) out << format_double(x) << '\n';
    }
}

struct BlockHeader {
    int nx = 0, ny = 0;
    double lx = 0.0, ly = 0.0, time = 0.0;
    std::string kind;
};

inline BlockHeader read_block_header(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("snapshot truncated: missing block header");
    std::istringstream ss(line);
    std::string tag;
    BlockHeader h;
    if (!(ss >> tag >> h.nx >> h.ny >> h.lx >> h.ly >> h.time >> h.kind) || tag != "BARONS2D")
        throw FormatError("malformed snapshot block header: '" + line + "'");
    return h;
}

inline void read_block_data(std::istream& in, std::vector<double>& data, SnapshotFormat fmt) {
    if (fmt == SnapshotFormat::Binary) {
        read_le_doubles(in, data);
        return;
    }
    std::string line;
    for (double& x : data) {
        if (!std::getline(in, line)) throw FormatError("snapshot truncated inside an ASCII block");
        char* end = nullptr;
        x = std::strtod(line.c_str(), &end);
        while (end != nullptr && (*end == ' ' || *end == '\t' || *end == '\r')) ++end;
        if (end == line.c_str() || *end != '\0') throw FormatError("malformed ASCII value '" + line + "'");
    }
}

}  // namespace detail

/// Writes the versioned header line followed by x-face, y-face and cell blocks.
inline void write_snapshot(const FluidState& s, std::ostream& out, SnapshotFormat fmt = SnapshotFormat::Binary) {
    const Grid& g = s.grid();
    out << kSnapshotMagic << ' ' << kSnapshotVersion << ' ' << (fmt == SnapshotFormat::Binary ? "binary" : "ascii")
        << " step=" << s.step_index << " epsilon=" << format_double(s.epsilon_used)
        << " wall_mode=" << to_string(g.spec().wall_mode) << '\n';
    detail::write_block(out, g, s.time, "facex", s.v.u_data(), fmt);
    detail::write_block(out, g, s.time, "facey", s.v.v_data(), fmt);
    detail::write_block(out, g, s.time, "cell", s.rho.data(), fmt);
}

inline void write_snapshot(const FluidState& s, const std::string& path, SnapshotFormat fmt = SnapshotFormat::Binary) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    write_snapshot(s, out, fmt);
    if (!out) throw Error("failed writing '" + path + "'");
}

/// Reads a snapshot; when `expected` is given, a different grid is a GridMismatch.
inline FluidState read_snapshot(std::istream& in, const std::optional<GridSpec>& expected = std::nullopt) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty snapshot");
    std::istringstream ss(line);
    std::string magic, mode, step_kv, eps_kv, wall_kv;
    int version = 0;
    if (!(ss >> magic >> version >> mode >> step_kv >> eps_kv >> wall_kv) || magic != kSnapshotMagic)
        throw FormatError("not a snapshot file (bad header line)");
    if (version != kSnapshotVersion) throw FormatError("unsupported snapshot version " + std::to_string(version));
    SnapshotFormat fmt;
    if (mode == "binary") fmt = SnapshotFormat::Binary;
    else if (mode == "ascii") fmt = SnapshotFormat::Ascii;
    else throw FormatError("unknown snapshot encoding '" + mode + "'");
    auto value_of = [](const std::string& kv, const char* key) {
        const std::string prefix = std::string(key) + "=";
        if (kv.rfind(prefix, 0) != 0) throw FormatError(std::string("snapshot header lacks ") + key);
        return kv.substr(prefix.size());
    };
    FluidState s;
    try {
        s.step_index = std::stoll(value_of(step_kv, "step"));
        s.epsilon_used = std::stod(value_of(eps_kv, "epsilon"));
    } catch (const std::logic_error&) {
        throw FormatError("malformed snapshot header values");
    }
    WallMode wm;
    try {
        wm = parse_wall_mode(value_of(wall_kv, "wall_mode"));
    } catch (const ConfigError&) {
        throw FormatError("unknown wall mode in snapshot header");
    }

    const char* kinds[3] = {"facex", "facey", "cell"};
    std::optional<Grid> grid;
    std::vector<double> blocks[3];
    for (int b = 0; b < 3; ++b) {
        const detail::BlockHeader h = detail::read_block_header(in);
        if (h.kind != kinds[b]) throw FormatError("expected block '" + std::string(kinds[b]) + "', found '" + h.kind + "'");
        const GridSpec spec{h.nx, h.ny, h.lx, h.ly, wm};
        if (expected && !(spec == *expected)) throw GridMismatch("snapshot grid differs from the configured grid");
        if (!grid) {
            if (h.nx < 4 || h.ny < 4 || !(h.lx > 0.0) || !(h.ly > 0.0)) throw FormatError("invalid grid in snapshot");
            grid.emplace(spec);
            s.time = h.time;
        } else if (!(grid->spec() == spec)) {
            throw GridMismatch("snapshot blocks disagree on the grid");
        }
        const std::size_t n = b == 0 ? grid->n_xfaces() : b == 1 ? grid->n_yfaces() : grid->n_cells();
        blocks[b].assign(n, 0.0);
        detail::read_block_data(in, blocks[b], fmt);
    }
    s.v = VectorField(*grid);
    s.v.u_data() = std::move(blocks[0]);
    s.v.v_data() = std::move(blocks[1]);
    s.rho = ScalarField(*grid);
    s.rho.data() = std::move(blocks[2]);
    return s;
}

inline FluidState read_snapshot(const std::string& path, const std::optional<GridSpec>& expected = std::nullopt) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open snapshot '" + path + "'");
    return read_snapshot(in, expected);
}

// ---------------------------------------------------------------------------
// Diagnostics CSV
// ---------------------------------------------------------------------------

inline std::vector<std::string> diagnostics_columns(const std::vector<double>& thresholds) {
    std::vector<std::string> c = {"step",           "time",
                                  "mass",           "energy",
                                  "dissipation",    "boundary_friction_dissipation",
                                  "entropy_residual", "rho_gamma_norm",
                                  "rho_v2_norm",    "v_h1_normsq",
                                  "rho_increment_gamma", "pressure_l2",
                                  "rho_gammaplus1_norm", "max_rho",
                                  "min_rho",        "weak_continuity",
                                  "weak_momentum",  "outer_iters"};
    for (double m : thresholds) c.push_back("tail_" + format_double(m));
    return c;
}

inline void write_diagnostics_header(std::ostream& out, const std::vector<double>& thresholds) {
    out << kDiagnosticsHeader << '\n';
    const auto cols = diagnostics_columns(thresholds);
    for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
    out << '\n';
}

inline void write_diagnostics_row(std::ostream& out, const DiagnosticsRecord& r) {
    out << r.step_index << ',' << format_double(r.time);
    for (double x : {r.mass, r.energy, r.dissipation, r.boundary_friction_dissipation, r.entropy_residual,
                     r.rho_gamma_norm, r.rho_v2_norm, r.v_h1_normsq, r.rho_increment_gamma, r.pressure_l2,
                     r.rho_gammaplus1_norm, r.max_rho, r.min_rho, r.weak_continuity, r.weak_momentum})
        out << ',' << format_double(x);
    out << ',' << r.outer_iters;
    for (const auto& [m, a] : r.tail_measures) out << ',' << format_double(a);
    out << '\n';
}

}  // namespace barons2d
