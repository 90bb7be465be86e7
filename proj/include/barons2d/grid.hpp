#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "config.hpp"
#include "errors.hpp"

namespace barons2d {

/// Uniform MAC grid on [0,lx]x[0,ly].
///
/// Layout (row-major, j is the slow index):
///   cells  (i,j)  i<nx,   j<ny    centre ((i+1/2)hx, (j+1/2)hy)
///   x-faces(i,j)  i<=nx,  j<ny    at (i hx, (j+1/2)hy), carry the x-velocity
///   y-faces(i,j)  i<nx,   j<=ny   at ((i+1/2)hx, j hy), carry the y-velocity
///   nodes  (i,j)  i<=nx,  j<=ny   at (i hx, j hy)
/// In periodic-x mode column nx of x-faces and nodes duplicates column 0.
class Grid {
public:
    Grid() = default;
    explicit Grid(const GridSpec& spec) : spec_(spec) {
        if (spec.nx < 4) throw ConfigError("nx", "nx must be at least 4");
        if (spec.ny < 4) throw ConfigError("ny", "ny must be at least 4");
        if (!(spec.lx > 0.0)) throw ConfigError("lx", "lx must be positive");
        if (!(spec.ly > 0.0)) throw ConfigError("ly", "ly must be positive");
        hx_ = spec.lx / spec.nx;
        hy_ = spec.ly / spec.ny;
    }

    const GridSpec& spec() const noexcept { return spec_; }
    int nx() const noexcept { return spec_.nx; }
    int ny() const noexcept { return spec_.ny; }
    double lx() const noexcept { return spec_.lx; }
    double ly() const noexcept { return spec_.ly; }
    double hx() const noexcept { return hx_; }
    double hy() const noexcept { return hy_; }
    double h_min() const noexcept { return std::min(hx_, hy_); }
    double cell_area() const noexcept { return hx_ * hy_; }
    double area() const noexcept { return spec_.lx * spec_.ly; }
    bool periodic_x() const noexcept { return spec_.wall_mode == WallMode::PeriodicXChannel; }

    std::size_t n_cells() const noexcept { return std::size_t(nx()) * ny(); }
    std::size_t n_xfaces() const noexcept { return std::size_t(nx() + 1) * ny(); }
    std::size_t n_yfaces() const noexcept { return std::size_t(nx()) * (ny() + 1); }
    std::size_t n_nodes() const noexcept { return std::size_t(nx() + 1) * (ny() + 1); }

    std::size_t cell(int i, int j) const noexcept { return std::size_t(j) * nx() + i; }
    std::size_t xface(int i, int j) const noexcept { return std::size_t(j) * (nx() + 1) + i; }
    std::size_t yface(int i, int j) const noexcept { return std::size_t(j) * nx() + i; }
    std::size_t node(int i, int j) const noexcept { return std::size_t(j) * (nx() + 1) + i; }

    /// Cell column index with periodic wrap (identity in wall mode for in-range i).
    int wrap(int i) const noexcept {
        if (!periodic_x()) return i;
        const int n = nx();
        return ((i % n) + n) % n;
    }

    /// Whether x-face column i carries an unknown x-velocity (not a wall, not a duplicate).
    bool xface_active(int i) const noexcept { return periodic_x() ? i < nx() : (i > 0 && i < nx()); }
    /// Whether node column i is owned (periodic duplicates excluded).
    bool node_column_owned(int i) const noexcept { return !periodic_x() || i < nx(); }
    bool node_on_xwall(int i) const noexcept { return !periodic_x() && (i == 0 || i == nx()); }

    double xc(int i) const noexcept { return (i + 0.5) * hx_; }
    double yc(int j) const noexcept { return (j + 0.5) * hy_; }
    double xn(int i) const noexcept { return i * hx_; }
    double yn(int j) const noexcept { return j * hy_; }

    bool operator==(const Grid& o) const noexcept { return spec_ == o.spec_; }

private:
    GridSpec spec_{};
    double hx_ = 0.0;
    double hy_ = 0.0;
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* where) {
    if (!(a == b)) throw GridMismatch(std::string(where) + ": fields live on different grids");
}

namespace detail {
inline void axpy(std::vector<double>& y, double a, const std::vector<double>& x) {
    for (std::size_t k = 0; k < y.size(); ++k) y[k] += a * x[k];
}
inline bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}
}  // namespace detail

/// Cell-centred grid function.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const Grid& g, double value = 0.0) : grid_(g), data_(g.n_cells(), value) {}

    static ScalarField sample(const Grid& g, const std::function<double(double, double)>& f) {
        ScalarField s(g);
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i) s(i, j) = f(g.xc(i), g.yc(j));
        return s;
    }

    const Grid& grid() const noexcept { return grid_; }
    double& operator()(int i, int j) noexcept { return data_[grid_.cell(i, j)]; }
    double operator()(int i, int j) const noexcept { return data_[grid_.cell(i, j)]; }
    std::vector<double>& data() noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }
    std::size_t size() const noexcept { return data_.size(); }

    double min() const { return *std::min_element(data_.begin(), data_.end()); }
    double max() const { return *std::max_element(data_.begin(), data_.end()); }
    bool finite() const { return detail::all_finite(data_); }

    ScalarField& operator+=(const ScalarField& o) {
        require_same_grid(grid_, o.grid_, "ScalarField +=");
        detail::axpy(data_, 1.0, o.data_);
        return *this;
    }
    ScalarField& operator-=(const ScalarField& o) {
        require_same_grid(grid_, o.grid_, "ScalarField -=");
        detail::axpy(data_, -1.0, o.data_);
        return *this;
    }
    ScalarField& operator*=(double a) {
        for (double& x : data_) x *= a;
        return *this;
    }
    friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
    friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
    friend ScalarField operator*(double s, ScalarField a) { return a *= s; }

    bool operator==(const ScalarField&) const = default;

private:
    Grid grid_;
    std::vector<double> data_;
};

/// Node-located grid function (used for the 2D curl and the stream function).
class NodeField {
public:
    NodeField() = default;
    explicit NodeField(const Grid& g, double value = 0.0) : grid_(g), data_(g.n_nodes(), value) {}

    const Grid& grid() const noexcept { return grid_; }
    double& operator()(int i, int j) noexcept { return data_[grid_.node(i, j)]; }
    double operator()(int i, int j) const noexcept { return data_[grid_.node(i, j)]; }
    std::vector<double>& data() noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }

    bool operator==(const NodeField&) const = default;

private:
    Grid grid_;
    std::vector<double> data_;
};

/// Face-staggered velocity: x-component on x-faces, y-component on y-faces.
///
/// Wall faces are stored so that arbitrary face fields can be represented;
/// `enforce_slip` zeroes the normal component on walls (and restores the
/// periodic duplicate column), and every solver output is slip-compatible.
class VectorField {
public:
    VectorField() = default;
    explicit VectorField(const Grid& g) : grid_(g), u_(g.n_xfaces(), 0.0), v_(g.n_yfaces(), 0.0) {}

    static VectorField sample(const Grid& g, const std::function<double(double, double)>& fu,
                              const std::function<double(double, double)>& fv) {
        VectorField w(g);
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i <= g.nx(); ++i) w.u(i, j) = fu(g.xn(i), g.yc(j));
        for (int j = 0; j <= g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i) w.v(i, j) = fv(g.xc(i), g.yn(j));
        return w;
    }

    const Grid& grid() const noexcept { return grid_; }
    double& u(int i, int j) noexcept { return u_[grid_.xface(i, j)]; }
    double u(int i, int j) const noexcept { return u_[grid_.xface(i, j)]; }
    double& v(int i, int j) noexcept { return v_[grid_.yface(i, j)]; }
    double v(int i, int j) const noexcept { return v_[grid_.yface(i, j)]; }
    std::vector<double>& u_data() noexcept { return u_; }
    const std::vector<double>& u_data() const noexcept { return u_; }
    std::vector<double>& v_data() noexcept { return v_; }
    const std::vector<double>& v_data() const noexcept { return v_; }

    /// Periodic-aware x-face access: column index wraps in channel mode.
    double u_wrapped(int i, int j) const noexcept {
        if (grid_.periodic_x()) i = grid_.wrap(i);
        return u(i, j);
    }
    /// Periodic-aware y-face access.
    double v_wrapped(int i, int j) const noexcept { return v(grid_.wrap(i), j); }

    void enforce_slip() {
        const int nx = grid_.nx(), ny = grid_.ny();
        for (int j = 0; j < ny; ++j) {
            if (grid_.periodic_x()) {
                u(nx, j) = u(0, j);
            } else {
                u(0, j) = 0.0;
                u(nx, j) = 0.0;
            }
        }
        for (int i = 0; i < nx; ++i) {
            v(i, 0) = 0.0;
            v(i, ny) = 0.0;
        }
    }

    bool is_slip_compatible() const {
        VectorField c = *this;
        c.enforce_slip();
        return c == *this;
    }

    bool finite() const { return detail::all_finite(u_) && detail::all_finite(v_); }

    VectorField& operator+=(const VectorField& o) {
        require_same_grid(grid_, o.grid_, "VectorField +=");
        detail::axpy(u_, 1.0, o.u_);
        detail::axpy(v_, 1.0, o.v_);
        return *this;
    }
    VectorField& operator-=(const VectorField& o) {
        require_same_grid(grid_, o.grid_, "VectorField -=");
        detail::axpy(u_, -1.0, o.u_);
        detail::axpy(v_, -1.0, o.v_);
        return *this;
    }
    VectorField& operator*=(double a) {
        for (double& x : u_) x *= a;
        for (double& x : v_) x *= a;
        return *this;
    }
    friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
    friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
    friend VectorField operator*(double s, VectorField a) { return a *= s; }

    bool operator==(const VectorField&) const = default;

private:
    Grid grid_;
    std::vector<double> u_;
    std::vector<double> v_;
};

}  // namespace barons2d
