#pragma once

#include <cstdint>
#include <numbers>
#include <utility>

#include "delaydmd/snapshots.hpp"

namespace delaydmd {

struct DoubleGyreParams {
    double amp = 0.1;
    double omega = 2.0 * std::numbers::pi / 10.0;
    double eps = 0.25;
    GridMeta grid{100, 100, 0.0, 2.0, 0.0, 1.0};
    Eigen::Index nt = 200;
    double dt = 0.05;
    double t0 = 0.0;

    void validate() const;
};

struct SignalParams {
    double f1 = 1.3;
    double f2 = 8.4;
    double noise_amp = 0.0;
    GridMeta grid{100, 100, -2.0, 2.0, -2.0, 2.0};
    Eigen::Index nt = 0;  // 0 derives the count from t_final / dt
    double dt = 0.05;
    double t_final = 4.0;
    double t0 = 0.0;

    Eigen::Index snapshot_count() const;
    void validate() const;
};

// Double gyre -----------------------------------------------------------------

double stream_function(double x, double y, double t, const DoubleGyreParams& p);

/// u = -dpsi/dy = -pi A sin(pi f) cos(pi y), v = dpsi/dx = pi A cos(pi f) sin(pi y) df/dx.
std::pair<double, double> velocity(double x, double y, double t, const DoubleGyreParams& p);

/// dv/dx - du/dy on p.grid from second-order finite differences of the
/// analytic velocity (central inside, one-sided on the boundary), flattened
/// y-major: index iy * nx + ix.
Vector vorticity_field(double t, const DoubleGyreParams& p);

SnapshotMatrix generate_double_gyre(const DoubleGyreParams& p);

// Two-frequency compressible signal ---------------------------------------------

double signal_mode_v1(double x, double y);
double signal_mode_v2(double x, double y);

/// Column k = sin(2 pi f1 t_k) v1 + sin(2 pi f2 t_k) v2 + noise_amp * w(t_k),
/// with w i.i.d. standard normal drawn from `seed`.
SnapshotMatrix generate_signal(const SignalParams& p, std::uint64_t seed);

}  // namespace delaydmd
