#include "delaydmd/problems.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "delaydmd/errors.hpp"

namespace delaydmd {

namespace {

constexpr double kPi = std::numbers::pi;

struct Forcing {
    double f;
    double dfdx;
};

Forcing forcing(double x, double t, const DoubleGyreParams& p) {
    const double a = p.eps * std::sin(p.omega * t);
    return {a * x * x + x - 2.0 * a * x, 2.0 * a * x + 1.0 - 2.0 * a};
}

// Second-order derivative of `value(i)` along a line of n equally spaced nodes.
template <typename F>
double fd_derivative(F&& value, Eigen::Index i, Eigen::Index n, double h) {
    if (i == 0) return (-3.0 * value(0) + 4.0 * value(1) - value(2)) / (2.0 * h);
    if (i == n - 1) return (3.0 * value(n - 1) - 4.0 * value(n - 2) + value(n - 3)) / (2.0 * h);
    return (value(i + 1) - value(i - 1)) / (2.0 * h);
}

}  // namespace

void DoubleGyreParams::validate() const {
    if (!(amp > 0.0)) fail(ErrorCode::InvalidParameter, "double gyre: amp must be > 0");
    if (!(omega > 0.0)) fail(ErrorCode::InvalidParameter, "double gyre: omega must be > 0");
    if (!(eps >= 0.0 && eps < 0.5)) fail(ErrorCode::InvalidParameter, "double gyre: eps must lie in [0, 0.5)");
    if (nt < 2) fail(ErrorCode::InvalidParameter, "double gyre: nt must be >= 2");
    if (!(dt > 0.0)) fail(ErrorCode::InvalidParameter, "double gyre: dt must be > 0");
    grid.validate();
}

Eigen::Index SignalParams::snapshot_count() const {
    if (nt > 0) return nt;
    return static_cast<Eigen::Index>(std::llround(t_final / dt));
}

void SignalParams::validate() const {
    if (!(f1 > 0.0) || !(f2 > 0.0)) fail(ErrorCode::InvalidParameter, "signal: f1 and f2 must be > 0");
    if (!(noise_amp >= 0.0)) fail(ErrorCode::InvalidParameter, "signal: noise_amp must be >= 0");
    if (!(dt > 0.0)) fail(ErrorCode::InvalidParameter, "signal: dt must be > 0");
    const double limit = 1.0 / (2.0 * std::max(f1, f2));
    if (dt > limit) {
        fail(ErrorCode::SamplingRate, "signal: dt = " + std::to_string(dt) + " exceeds the Nyquist limit " +
                                          std::to_string(limit) +
                                          "; sampling must be at least twice the highest frequency");
    }
    if (snapshot_count() < 2) fail(ErrorCode::InvalidParameter, "signal: need at least 2 snapshots");
    grid.validate();
}

double stream_function(double x, double y, double t, const DoubleGyreParams& p) {
    const Forcing g = forcing(x, t, p);
    return p.amp * std::sin(kPi * g.f) * std::sin(kPi * y);
}

std::pair<double, double> velocity(double x, double y, double t, const DoubleGyreParams& p) {
    const Forcing g = forcing(x, t, p);
    // The minus sign of -dpsi/dy is kept; dropping it cancels the steady vorticity.
    const double u = -kPi * p.amp * std::sin(kPi * g.f) * std::cos(kPi * y);
    const double v = kPi * p.amp * std::cos(kPi * g.f) * std::sin(kPi * y) * g.dfdx;
    return {u, v};
}

Vector vorticity_field(double t, const DoubleGyreParams& p) {
    const GridMeta& g = p.grid;
    if (g.nx < 3 || g.ny < 3) {
        fail(ErrorCode::InvalidGrid, "vorticity_field: grid must be at least 3x3, got " + std::to_string(g.nx) +
                                         "x" + std::to_string(g.ny));
    }
    g.validate();

    const Eigen::Index nx = g.nx;
    const Eigen::Index ny = g.ny;
    Matrix u(ny, nx);
    Matrix v(ny, nx);
    for (Eigen::Index iy = 0; iy < ny; ++iy) {
        for (Eigen::Index ix = 0; ix < nx; ++ix) {
            const auto [uu, vv] = velocity(g.x(ix), g.y(iy), t, p);
            u(iy, ix) = uu;
            v(iy, ix) = vv;
        }
    }

    Vector out(nx * ny);
    for (Eigen::Index iy = 0; iy < ny; ++iy) {
        for (Eigen::Index ix = 0; ix < nx; ++ix) {
            const double dvdx = fd_derivative([&](Eigen::Index k) { return v(iy, k); }, ix, nx, g.hx());
            const double dudy = fd_derivative([&](Eigen::Index k) { return u(k, ix); }, iy, ny, g.hy());
            out(iy * nx + ix) = dvdx - dudy;
        }
    }
    return out;
}

SnapshotMatrix generate_double_gyre(const DoubleGyreParams& p) {
    p.validate();
    Matrix data(p.grid.size(), p.nt);
    for (Eigen::Index k = 0; k < p.nt; ++k) {
        data.col(k) = vorticity_field(p.t0 + static_cast<double>(k) * p.dt, p);
    }
    return SnapshotMatrix(std::move(data), p.dt, p.t0, p.grid);
}

double signal_mode_v1(double x, double y) {
    const double dx = x - 0.5;
    const double dy = y - 0.5;
    return 2.0 * std::exp(-dx * dx / (2.0 * 0.6 * 0.6) - dy * dy / (2.0 * 0.2 * 0.2));
}

double signal_mode_v2(double x, double y) {
    const double dx = x + 0.25;
    const double dy = y - 0.35;
    return std::exp(-dx * dx / (2.0 * 0.6 * 0.6) - dy * dy / (2.0 * 1.2 * 1.2));
}

SnapshotMatrix generate_signal(const SignalParams& p, std::uint64_t seed) {
    p.validate();
    const GridMeta& g = p.grid;
    const Eigen::Index m = g.size();
    const Eigen::Index nt = p.snapshot_count();

    Vector v1(m);
    Vector v2(m);
    for (Eigen::Index iy = 0; iy < g.ny; ++iy) {
        for (Eigen::Index ix = 0; ix < g.nx; ++ix) {
            v1(iy * g.nx + ix) = signal_mode_v1(g.x(ix), g.y(iy));
            v2(iy * g.nx + ix) = signal_mode_v2(g.x(ix), g.y(iy));
        }
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix data(m, nt);
    for (Eigen::Index k = 0; k < nt; ++k) {
        const double t = p.t0 + static_cast<double>(k) * p.dt;
        data.col(k) = std::sin(2.0 * kPi * p.f1 * t) * v1 + std::sin(2.0 * kPi * p.f2 * t) * v2;
        if (p.noise_amp > 0.0) {
            for (Eigen::Index i = 0; i < m; ++i) data(i, k) += p.noise_amp * normal(rng);
        }
    }
    return SnapshotMatrix(std::move(data), p.dt, p.t0, g);
}

}  // namespace delaydmd
