#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include <barons2d/grid.hpp>
#include <barons2d/operators.hpp>

namespace barons2d::support {

/// Small hand-rolled generator helpers around a fixed-seed engine.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return lo + (hi - lo) * static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
    int integer(int lo, int hi) { return lo + static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1)); }

    GridSpec grid_spec(int nmin = 4, int nmax = 12) {
        const WallMode m = integer(0, 1) ? WallMode::PeriodicXChannel : WallMode::AllSlipWalls;
        return {integer(nmin, nmax), integer(nmin, nmax), uniform(0.5, 2.0), uniform(0.5, 2.0), m};
    }

    ScalarField scalar(const Grid& g, double lo = -1.0, double hi = 1.0) {
        ScalarField p(g);
        for (double& x : p.data()) x = uniform(lo, hi);
        return p;
    }

    VectorField slip_field(const Grid& g, double amp = 1.0) {
        VectorField w(g);
        for (double& x : w.u_data()) x = uniform(-amp, amp);
        for (double& x : w.v_data()) x = uniform(-amp, amp);
        w.enforce_slip();
        return w;
    }

private:
    std::mt19937_64 rng_;
};

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

inline double max_abs(const std::vector<double>& a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace barons2d::support
