#include <charconv>
#include <fstream>
#include <string>

#include <json.hpp>

#include "delaydmd/dmd.hpp"
#include "delaydmd/errors.hpp"

namespace delaydmd {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

json complex_list(const ComplexVector& v) {
    json out = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back({{"re", v(k).real()}, {"im", v(k).imag()}});
    return out;
}

ComplexVector parse_complex_list(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_array()) fail(ErrorCode::Parse, std::string("model: missing array \"") + key + "\"");
    const json& arr = j.at(key);
    ComplexVector out(static_cast<Eigen::Index>(arr.size()));
    for (size_t k = 0; k < arr.size(); ++k) {
        try {
            out(static_cast<Eigen::Index>(k)) = Complex(arr[k].at("re").get<double>(), arr[k].at("im").get<double>());
        } catch (const json::exception&) {
            fail(ErrorCode::Parse, std::string("model: entry ") + std::to_string(k) + " of \"" + key +
                                       "\" is not a {re, im} pair");
        }
    }
    return out;
}

VariantKind variant_from_tag(const std::string& tag, std::optional<ProjectionKind>& projection) {
    if (tag == "classic") return VariantKind::Classic;
    if (tag == "tdc") return VariantKind::Tdc;
    if (tag.rfind("projected:", 0) == 0) {
        projection = projection_kind_from_string(tag.substr(10));
        return VariantKind::Projected;
    }
    fail(ErrorCode::Parse, "model: unknown variant \"" + tag + "\"");
}

void write_modes_csv(const ComplexMatrix& modes, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    char buf[32];
    std::string line;
    for (int part = 0; part < 2; ++part) {
        for (Eigen::Index i = 0; i < modes.rows(); ++i) {
            line.clear();
            for (Eigen::Index j = 0; j < modes.cols(); ++j) {
                if (j) line.push_back(',');
                const double v = part == 0 ? modes(i, j).real() : modes(i, j).imag();
                auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
                line.append(buf, res.ptr);
            }
            line.push_back('\n');
            out.write(line.data(), static_cast<std::streamsize>(line.size()));
        }
    }
    if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

ComplexMatrix read_modes_csv(const fs::path& path, Eigen::Index d_out, Eigen::Index r) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot read " + path.string());
    Matrix raw(2 * d_out, r);
    std::string line;
    Eigen::Index row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        if (row >= raw.rows()) fail(ErrorCode::Consistency, path.string() + ": too many rows");
        std::string_view rest(line);
        if (!rest.empty() && rest.back() == '\r') rest.remove_suffix(1);
        for (Eigen::Index col = 0; col < r; ++col) {
            const size_t comma = rest.find(',');
            std::string_view field = rest.substr(0, comma);
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
            if (ec != std::errc{} || ptr != field.data() + field.size()) {
                fail(ErrorCode::Parse, path.string() + ": line " + std::to_string(row + 1) + ", field " +
                                           std::to_string(col + 1));
            }
            raw(row, col) = v;
            if (comma == std::string_view::npos) {
                if (col + 1 != r) fail(ErrorCode::Consistency, path.string() + ": short line " + std::to_string(row + 1));
                break;
            }
            rest.remove_prefix(comma + 1);
        }
        ++row;
    }
    if (row != raw.rows()) fail(ErrorCode::Consistency, path.string() + ": expected " + std::to_string(raw.rows()) + " rows");
    ComplexMatrix modes(d_out, r);
    modes.real() = raw.topRows(d_out);
    modes.imag() = raw.bottomRows(d_out);
    return modes;
}

}  // namespace

void save_model(const DmdModel& model, const fs::path& json_path, const std::optional<fs::path>& modes_csv) {
    json j{{"variant", model.tag()},
           {"measurements", model.measurements},
           {"rank", model.rank},
           {"q", model.q},
           {"base_m", model.base_m},
           {"d_out", model.modes.rows()},
           {"dt", model.dt},
           {"t0", model.t0},
           {"eigenvalues", complex_list(model.eigenvalues)},
           {"exponents", complex_list(model.exponents)},
           {"amplitudes", complex_list(model.amplitudes)},
           {"warnings", model.warnings}};
    if (modes_csv) {
        write_modes_csv(model.modes, *modes_csv);
        j["modes_file"] = fs::relative(*modes_csv, json_path.has_parent_path() ? json_path.parent_path() : ".").string();
    }
    std::ofstream out(json_path);
    if (!out) fail(ErrorCode::Io, "cannot write " + json_path.string());
    out << j.dump(2) << '\n';
}

DmdModel load_model(const fs::path& json_path) {
    std::ifstream in(json_path);
    if (!in) fail(ErrorCode::Io, "cannot read " + json_path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::Parse, json_path.string() + ": " + e.what());
    }

    DmdModel m;
    try {
        m.variant = variant_from_tag(j.at("variant").get<std::string>(), m.projection);
        m.measurements = j.value("measurements", Eigen::Index{0});
        m.rank = j.at("rank").get<Eigen::Index>();
        m.q = j.at("q").get<Eigen::Index>();
        m.base_m = j.at("base_m").get<Eigen::Index>();
        m.dt = j.at("dt").get<double>();
        m.t0 = j.value("t0", 0.0);
        m.warnings = j.value("warnings", std::vector<std::string>{});
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, json_path.string() + ": " + e.what());
    }
    m.eigenvalues = parse_complex_list(j, "eigenvalues");
    m.exponents = parse_complex_list(j, "exponents");
    m.amplitudes = parse_complex_list(j, "amplitudes");
    if (m.eigenvalues.size() != m.rank || m.exponents.size() != m.rank || m.amplitudes.size() != m.rank) {
        fail(ErrorCode::Consistency, json_path.string() + ": spectrum lengths disagree with rank");
    }
    if (j.contains("modes_file")) {
        const fs::path modes_path = json_path.parent_path() / j.at("modes_file").get<std::string>();
        m.modes = read_modes_csv(modes_path, j.at("d_out").get<Eigen::Index>(), m.rank);
    }
    return m;
}

}  // namespace delaydmd
