#include "delaydmd/snapshots.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "delaydmd/errors.hpp"

namespace delaydmd {

namespace fs = std::filesystem;
using json = nlohmann::json;

double GridMeta::x(Eigen::Index ix) const {
    return x_min + static_cast<double>(ix) * hx();
}

double GridMeta::y(Eigen::Index iy) const {
    return y_min + static_cast<double>(iy) * hy();
}

void GridMeta::validate() const {
    if (nx < 2 || ny < 2) {
        fail(ErrorCode::InvalidGrid, "grid needs at least 2 nodes per side, got " + std::to_string(nx) + "x" +
                                         std::to_string(ny));
    }
    if (!(x_min < x_max) || !(y_min < y_max)) fail(ErrorCode::InvalidGrid, "grid extents must satisfy min < max");
}

SnapshotMatrix::SnapshotMatrix(Matrix data, double dt, double t0, std::optional<GridMeta> grid)
    : data_(std::move(data)), dt_(dt), t0_(t0), grid_(std::move(grid)) {
    if (data_.rows() < 1) fail(ErrorCode::Shape, "snapshot matrix needs at least one row");
    if (data_.cols() < 1) fail(ErrorCode::InsufficientSnapshots, "snapshot matrix needs at least one snapshot");
    if (!(dt_ > 0.0) || !std::isfinite(dt_)) fail(ErrorCode::InvalidParameter, "dt must be positive");
    if (!std::isfinite(t0_)) fail(ErrorCode::InvalidParameter, "t0 must be finite");
    if (!data_.allFinite()) fail(ErrorCode::NumericalFailure, "snapshot data contains NaN or Inf");
    if (grid_) {
        grid_->validate();
        if (grid_->size() != data_.rows()) {
            fail(ErrorCode::Consistency, "grid " + std::to_string(grid_->nx) + "x" + std::to_string(grid_->ny) +
                                             " does not match M = " + std::to_string(data_.rows()));
        }
    }
}

std::pair<Matrix, Matrix> split(const SnapshotMatrix& x) {
    const Eigen::Index n = x.n();
    if (n < 2) fail(ErrorCode::InsufficientSnapshots, "split: need at least 2 snapshots, got " + std::to_string(n));
    return {x.data().leftCols(n - 1), x.data().rightCols(n - 1)};
}

HankelPair hankel_augment(const Eigen::Ref<const Matrix>& x, Eigen::Index q) {
    const Eigen::Index m = x.rows();
    const Eigen::Index n = x.cols();
    if (n < 2) fail(ErrorCode::InsufficientSnapshots, "hankel_augment: need at least 2 snapshots");
    if (q < 1 || q > n - 1) {
        fail(ErrorCode::InvalidDelay, "delay depth q = " + std::to_string(q) + " outside [1, " +
                                          std::to_string(n - 1) + "]");
    }
    const Eigen::Index cols = n - q;
    HankelPair out;
    out.q = q;
    out.base_m = m;
    out.base_n = n;
    out.x1_aug.resize(q * m, cols);
    out.x2_aug.resize(q * m, cols);
    for (Eigen::Index block = 0; block < q; ++block) {
        out.x1_aug.middleRows(block * m, m) = x.middleCols(block, cols);
        out.x2_aug.middleRows(block * m, m) = x.middleCols(block + 1, cols);
    }
    return out;
}

HankelPair hankel_augment(const SnapshotMatrix& x, Eigen::Index q) {
    return hankel_augment(x.data(), q);
}

std::pair<SnapshotMatrix, SnapshotMatrix> train_test_split(const SnapshotMatrix& x, Eigen::Index n_train) {
    if (n_train < 2 || n_train >= x.n()) {
        fail(ErrorCode::InvalidSplit, "n_train = " + std::to_string(n_train) + " outside [2, " +
                                          std::to_string(x.n() - 1) + "]");
    }
    SnapshotMatrix train(x.data().leftCols(n_train), x.dt(), x.t0(), x.grid());
    SnapshotMatrix test(x.data().rightCols(x.n() - n_train), x.dt(), x.time(n_train), x.grid());
    return {std::move(train), std::move(test)};
}

namespace {

fs::path strip_base(const fs::path& base) {
    fs::path p = base;
    if (p.extension() == ".csv") p.replace_extension();
    return p;
}

fs::path with_suffix(const fs::path& base, std::string_view suffix) {
    return fs::path(base.string() + std::string(suffix));
}

json grid_to_json(const GridMeta& g) {
    return json{{"nx", g.nx}, {"ny", g.ny}, {"x_min", g.x_min}, {"x_max", g.x_max},
                {"y_min", g.y_min}, {"y_max", g.y_max}};
}

template <typename T>
T require_field(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) fail(ErrorCode::Parse, where + ": missing field \"" + key + "\"");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        fail(ErrorCode::Parse, where + ": field \"" + key + "\" has the wrong type");
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

void save(const SnapshotMatrix& x, const fs::path& base_in) {
    const fs::path base = strip_base(base_in);
    if (base.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(base.parent_path(), ec);
    }

    json meta{{"m", x.m()}, {"n", x.n()}, {"dt", x.dt()}, {"t0", x.t0()}};
    if (x.grid()) meta["grid"] = grid_to_json(*x.grid());
    {
        std::ofstream out(with_suffix(base, ".meta.json"));
        if (!out) fail(ErrorCode::Io, "cannot write " + with_suffix(base, ".meta.json").string());
        out << meta.dump(2) << '\n';
    }

    std::ofstream out(with_suffix(base, ".csv"), std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write " + with_suffix(base, ".csv").string());
    std::string line;
    char buf[32];
    const Matrix& d = x.data();
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
        line.clear();
        for (Eigen::Index j = 0; j < d.cols(); ++j) {
            if (j) line.push_back(',');
            auto res = std::to_chars(buf, buf + sizeof(buf), d(i, j), std::chars_format::general, 17);
            line.append(buf, res.ptr);
        }
        line.push_back('\n');
        out.write(line.data(), static_cast<std::streamsize>(line.size()));
    }
    if (!out) fail(ErrorCode::Io, "write failed for " + with_suffix(base, ".csv").string());
}

SnapshotMatrix load(const fs::path& base_in) {
    const fs::path base = strip_base(base_in);
    const fs::path meta_path = with_suffix(base, ".meta.json");
    const fs::path csv_path = with_suffix(base, ".csv");

    std::ifstream meta_in(meta_path);
    if (!meta_in) fail(ErrorCode::Io, "cannot read " + meta_path.string());
    json meta;
    try {
        meta = json::parse(meta_in);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::Parse, meta_path.string() + ": " + e.what());
    }
    const std::string where = meta_path.string();
    const auto m = require_field<Eigen::Index>(meta, "m", where);
    const auto n = require_field<Eigen::Index>(meta, "n", where);
    const auto dt = require_field<double>(meta, "dt", where);
    const double t0 = meta.contains("t0") ? require_field<double>(meta, "t0", where) : 0.0;
    std::optional<GridMeta> grid;
    if (meta.contains("grid") && !meta.at("grid").is_null()) {
        const json& g = meta.at("grid");
        const std::string gw = where + " grid";
        grid = GridMeta{require_field<Eigen::Index>(g, "nx", gw), require_field<Eigen::Index>(g, "ny", gw),
                        require_field<double>(g, "x_min", gw),     require_field<double>(g, "x_max", gw),
                        require_field<double>(g, "y_min", gw),     require_field<double>(g, "y_max", gw)};
        if (grid->size() != m) {
            fail(ErrorCode::Consistency, where + ": grid nx*ny = " + std::to_string(grid->size()) +
                                             " but m = " + std::to_string(m));
        }
    }
    if (m < 1 || n < 1) fail(ErrorCode::Consistency, where + ": m and n must be positive");

    std::ifstream in(csv_path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot read " + csv_path.string());
    Matrix data(m, n);
    std::string line;
    Eigen::Index row = 0;
    while (std::getline(in, line)) {
        std::string_view rest = trim(line);
        if (rest.empty()) continue;
        const std::string lineno = std::to_string(row + 1);
        if (row >= m) fail(ErrorCode::Consistency, csv_path.string() + ": more than m = " + std::to_string(m) + " rows");
        Eigen::Index col = 0;
        while (true) {
            const size_t comma = rest.find(',');
            std::string_view field = trim(rest.substr(0, comma));
            if (col >= n) {
                fail(ErrorCode::Consistency, csv_path.string() + ": line " + lineno + " has more than n = " +
                                                 std::to_string(n) + " fields");
            }
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
            if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
                fail(ErrorCode::Parse, csv_path.string() + ": line " + lineno + ", field " + std::to_string(col + 1) +
                                           ": cannot parse \"" + std::string(field) + "\"");
            }
            data(row, col++) = value;
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (col != n) {
            fail(ErrorCode::Consistency, csv_path.string() + ": line " + lineno + " has " + std::to_string(col) +
                                             " fields, expected " + std::to_string(n));
        }
        ++row;
    }
    if (row != m) {
        fail(ErrorCode::Consistency, csv_path.string() + ": found " + std::to_string(row) + " rows, expected " +
                                         std::to_string(m));
    }
    return SnapshotMatrix(std::move(data), dt, t0, grid);
}

}  // namespace delaydmd
