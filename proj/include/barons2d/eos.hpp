#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "grid.hpp"

namespace barons2d {

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on the Legendre recurrence).
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    std::vector<double> x(n), w(n);
    for (int k = 0; k < (n + 1) / 2; ++k) {
        double z = std::cos(std::numbers::pi * (k + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int m = 2; m <= n; ++m) {
                const double p2 = ((2.0 * m - 1.0) * z * p1 - (m - 1.0) * p0) / m;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        double p0 = 1.0, p1 = z;
        for (int m = 2; m <= n; ++m) {
            const double p2 = ((2.0 * m - 1.0) * z * p1 - (m - 1.0) * p0) / m;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        x[k] = -z;
        x[n - 1 - k] = z;
        w[k] = w[n - 1 - k] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return {x, w};
}

/// Pressure rho^gamma, cutoff K and truncated pressure P = gamma * int_0^rho s^(gamma-1) K(s) ds.
///
/// P on [m1, m2] is tabulated at construction (Gauss-Legendre per panel) and
/// evaluated by monotone cubic Hermite interpolation using the exact slope.
class PressureLaw {
public:
    static constexpr int kPanels = 512;
    static constexpr int kGaussNodes = 16;

    PressureLaw() : PressureLaw(3.0, RegularizationParams{}) {}
    PressureLaw(double gamma, const RegularizationParams& reg) : gamma_(gamma), reg_(reg) { build_table(); }

    double gamma() const noexcept { return gamma_; }
    const RegularizationParams& regularization() const noexcept { return reg_; }
    double m1() const noexcept { return reg_.m1; }
    double m2() const noexcept { return reg_.m2; }

    double pi(double rho) const {
        if (rho < 0.0) throw NegativeInput("pressure: negative density");
        return std::pow(rho, gamma_);
    }

    /// Bridge profile in t in [0,1]; 1 at t=0, 0 at t=1.
    double bridge(double t) const noexcept {
        t = std::clamp(t, 0.0, 1.0);
        if (reg_.cutoff_profile == CutoffProfile::Smoothstep) return 1.0 - t * t * (3.0 - 2.0 * t);
        return 1.0 - t * t * t * (t * (6.0 * t - 15.0) + 10.0);
    }

    double cutoff_K(double rho) const noexcept {
        if (rho <= reg_.m1) return 1.0;
        if (rho >= reg_.m2) return 0.0;
        return bridge((rho - reg_.m1) / (reg_.m2 - reg_.m1));
    }

    /// Derivative of K in rho; zero outside (m1, m2).
    double dK(double rho) const noexcept {
        if (rho <= reg_.m1 || rho >= reg_.m2) return 0.0;
        const double w = reg_.m2 - reg_.m1, t = (rho - reg_.m1) / w;
        if (reg_.cutoff_profile == CutoffProfile::Smoothstep) return -6.0 * t * (1.0 - t) / w;
        return -30.0 * t * t * (1.0 - t) * (1.0 - t) / w;
    }

    /// Exact derivative of P.
    double dP(double rho) const noexcept {
        if (rho <= 0.0) return 0.0;
        return gamma_ * std::pow(rho, gamma_ - 1.0) * cutoff_K(rho);
    }

    double truncated_pressure_P(double rho) const {
        if (rho < 0.0) throw NegativeInput("truncated pressure: negative density");
        if (rho <= reg_.m1) return std::pow(rho, gamma_);
        if (rho >= reg_.m2) return table_.back();
        const double hs = (reg_.m2 - reg_.m1) / kPanels;
        const double s = (rho - reg_.m1) / hs;
        const int k = std::min(static_cast<int>(s), kPanels - 1);
        const double t = s - k;
        const double y0 = table_[k], y1 = table_[k + 1];
        const double d0 = slope_[k] * hs, d1 = slope_[k + 1] * hs;
        const double t2 = t * t, t3 = t2 * t;
        const double p = (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * d0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * d1;
        return std::min(p, std::pow(rho, gamma_));
    }

    /// Value of P at the table node s_k = m1 + k (m2 - m1)/kPanels.
    double table_value(int k) const { return table_.at(k); }

private:
    void build_table() {
        const auto [gx, gw] = gauss_legendre(kGaussNodes);
        const double hs = (reg_.m2 - reg_.m1) / kPanels;
        table_.assign(kPanels + 1, 0.0);
        slope_.assign(kPanels + 1, 0.0);
        table_[0] = std::pow(reg_.m1, gamma_);
        for (int k = 0; k <= kPanels; ++k) slope_[k] = dP(reg_.m1 + k * hs);
        for (int k = 0; k < kPanels; ++k) {
            const double a = reg_.m1 + k * hs;
            double acc = 0.0;
            for (int q = 0; q < kGaussNodes; ++q) acc += gw[q] * dP(a + 0.5 * hs * (gx[q] + 1.0));
            table_[k + 1] = table_[k] + 0.5 * hs * acc;
        }
        // Fritsch-Carlson limiter keeps the Hermite interpolant monotone.
        for (int k = 0; k < kPanels; ++k) {
            const double delta = (table_[k + 1] - table_[k]) / hs;
            if (delta <= 0.0) {
                slope_[k] = slope_[k + 1] = 0.0;
                continue;
            }
            const double a = slope_[k] / delta, b = slope_[k + 1] / delta;
            const double r = a * a + b * b;
            if (r > 9.0) {
                const double tau = 3.0 / std::sqrt(r);
                slope_[k] = tau * a * delta;
                slope_[k + 1] = tau * b * delta;
            }
        }
    }

    double gamma_;
    RegularizationParams reg_;
    std::vector<double> table_;
    std::vector<double> slope_;
};

namespace detail {
/// Densities produced by the solvers may carry roundoff-level negative values.
inline double admissible_density(double rho) {
    if (rho < 0.0) {
        if (rho < -1e-12) throw NegativeInput("negative density in field");
        return 0.0;
    }
    return rho;
}
}  // namespace detail

inline ScalarField apply_pi(const ScalarField& rho, const PressureLaw& law) {
    ScalarField out(rho.grid());
    for (std::size_t k = 0; k < rho.size(); ++k) out.data()[k] = law.pi(detail::admissible_density(rho.data()[k]));
    return out;
}

inline ScalarField apply_P(const ScalarField& rho, const PressureLaw& law) {
    ScalarField out(rho.grid());
    for (std::size_t k = 0; k < rho.size(); ++k)
        out.data()[k] = law.truncated_pressure_P(detail::admissible_density(rho.data()[k]));
    return out;
}

inline ScalarField apply_K(const ScalarField& rho, const PressureLaw& law) {
    ScalarField out(rho.grid());
    for (std::size_t k = 0; k < rho.size(); ++k) out.data()[k] = law.cutoff_K(rho.data()[k]);
    return out;
}

}  // namespace barons2d
