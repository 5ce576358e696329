#pragma once

#include <filesystem>
#include <optional>
#include <utility>

#include "delaydmd/numerics.hpp"

namespace delaydmd {

/// Regular 2D grid. Node (ix, iy) maps to flat index iy * nx + ix and sits at
/// x_min + ix * (x_max - x_min) / (nx - 1), likewise for y.
struct GridMeta {
    Eigen::Index nx = 0;
    Eigen::Index ny = 0;
    double x_min = 0.0;
    double x_max = 1.0;
    double y_min = 0.0;
    double y_max = 1.0;

    Eigen::Index size() const { return nx * ny; }
    double x(Eigen::Index ix) const;
    double y(Eigen::Index iy) const;
    double hx() const { return (x_max - x_min) / static_cast<double>(nx - 1); }
    double hy() const { return (y_max - y_min) / static_cast<double>(ny - 1); }

    /// Throws InvalidGrid when the extents are inverted or a side is empty.
    void validate() const;

    bool operator==(const GridMeta&) const = default;
};

/// Columns are states at successive times t0, t0 + dt, ... A single column is
/// allowed (e.g. a one-step test window); fitting needs at least two.
class SnapshotMatrix {
public:
    SnapshotMatrix(Matrix data, double dt, double t0 = 0.0, std::optional<GridMeta> grid = std::nullopt);

    const Matrix& data() const { return data_; }
    double dt() const { return dt_; }
    double t0() const { return t0_; }
    const std::optional<GridMeta>& grid() const { return grid_; }

    Eigen::Index m() const { return data_.rows(); }
    Eigen::Index n() const { return data_.cols(); }
    double time(Eigen::Index k) const { return t0_ + static_cast<double>(k) * dt_; }

private:
    Matrix data_;
    double dt_;
    double t0_;
    std::optional<GridMeta> grid_;
};

/// Time-delay (Hankel) embedding of a snapshot sequence with depth q.
struct HankelPair {
    Matrix x1_aug;  // (q*M) x (N-q)
    Matrix x2_aug;  // x1_aug advanced by one step
    Eigen::Index q = 1;
    Eigen::Index base_m = 0;
    Eigen::Index base_n = 0;
};

std::pair<Matrix, Matrix> split(const SnapshotMatrix& x);

/// Column j of x1_aug stacks x_j ... x_{j+q-1}; x2_aug is shifted one step.
HankelPair hankel_augment(const SnapshotMatrix& x, Eigen::Index q);

/// Same stacking applied to a raw matrix (used on sketched snapshots).
HankelPair hankel_augment(const Eigen::Ref<const Matrix>& x, Eigen::Index q);

std::pair<SnapshotMatrix, SnapshotMatrix> train_test_split(const SnapshotMatrix& x, Eigen::Index n_train);

/// Writes `<base>.csv` (M rows, N columns, no header) and `<base>.meta.json`.
/// A trailing ".csv" on `base` is ignored.
void save(const SnapshotMatrix& x, const std::filesystem::path& base);
SnapshotMatrix load(const std::filesystem::path& base);

}  // namespace delaydmd
