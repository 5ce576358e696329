#include "delaydmd/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "delaydmd/errors.hpp"

namespace delaydmd {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

Eigen::Index default_measurements(const ExperimentConfig& defaults, const std::string& name) {
    for (const auto& v : defaults.variants) {
        if (v.name == name) return v.measurements;
    }
    return 0;
}

template <typename T>
T get_field(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        fail(ErrorCode::Parse, std::string("config: field \"") + key + "\" has the wrong type");
    }
}

void select_variants(ExperimentConfig& c, const std::vector<std::string>& names) {
    if (names.empty()) fail(ErrorCode::InvalidParameter, "variant list is empty");
    const ExperimentConfig defaults = problem_defaults(c.problem.name());
    std::vector<VariantSpec> chosen;
    for (const auto& name : names) {
        if (std::find(variant_names().begin(), variant_names().end(), name) == variant_names().end()) {
            fail(ErrorCode::InvalidParameter, "unknown variant \"" + name + "\"");
        }
        auto existing = std::find_if(c.variants.begin(), c.variants.end(), [&](const auto& v) { return v.name == name; });
        chosen.push_back(existing != c.variants.end() ? *existing
                                                      : VariantSpec{name, default_measurements(defaults, name), 3});
    }
    c.variants = std::move(chosen);
}

void set_measurement(ExperimentConfig& c, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) fail(ErrorCode::Parse, "--measurements expects <variant>=<a>, got \"" + assignment + "\"");
    const std::string name = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);
    Eigen::Index a = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), a);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        fail(ErrorCode::Parse, "--measurements: bad count \"" + value + "\"");
    }
    auto it = std::find_if(c.variants.begin(), c.variants.end(), [&](const auto& v) { return v.name == name; });
    if (it == c.variants.end()) fail(ErrorCode::InvalidParameter, "--measurements: variant \"" + name + "\" not selected");
    it->measurements = a;
}

Eigen::Index default_split(Eigen::Index n) {
    return std::max<Eigen::Index>(2, n - std::max<Eigen::Index>(1, n / 5));
}

void set_grid_size(GridMeta& g, std::optional<Eigen::Index> nx, std::optional<Eigen::Index> ny) {
    if (nx) g.nx = *nx;
    if (ny) g.ny = *ny;
}

}  // namespace

ExperimentConfig problem_defaults(const std::string& problem) {
    if (problem == "double-gyre") return ExperimentConfig::double_gyre_defaults();
    if (problem == "signal-2d") return ExperimentConfig::signal_defaults();
    if (problem.rfind("file:", 0) == 0 && problem.size() > 5) {
        ExperimentConfig c = ExperimentConfig::signal_defaults();
        c.problem.kind = ProblemKind::File;
        c.problem.file = problem.substr(5);
        c.n_train = 0;  // resolved against the file's snapshot count
        return c;
    }
    fail(ErrorCode::InvalidParameter, "unknown problem \"" + problem + "\" (double-gyre, signal-2d or file:<path>)");
}

void merge_config_json(RunConfig& config, const json& j) {
    if (!j.is_object()) fail(ErrorCode::Parse, "config: top level must be an object");
    ExperimentConfig& c = config.experiment;
    if (j.contains("problem")) {
        const json& p = j.at("problem");
        if (p.contains("amp")) c.problem.gyre.amp = get_field<double>(p, "amp");
        if (p.contains("omega")) c.problem.gyre.omega = get_field<double>(p, "omega");
        if (p.contains("eps")) c.problem.gyre.eps = get_field<double>(p, "eps");
        if (p.contains("f1")) c.problem.signal.f1 = get_field<double>(p, "f1");
        if (p.contains("f2")) c.problem.signal.f2 = get_field<double>(p, "f2");
        if (p.contains("noise_amp")) c.problem.signal.noise_amp = get_field<double>(p, "noise_amp");
        if (p.contains("t_final")) c.problem.signal.t_final = get_field<double>(p, "t_final");
        const bool gyre = c.problem.kind == ProblemKind::DoubleGyre;
        GridMeta& grid = gyre ? c.problem.gyre.grid : c.problem.signal.grid;
        if (p.contains("nx")) grid.nx = get_field<Eigen::Index>(p, "nx");
        if (p.contains("ny")) grid.ny = get_field<Eigen::Index>(p, "ny");
        if (p.contains("nt")) (gyre ? c.problem.gyre.nt : c.problem.signal.nt) = get_field<Eigen::Index>(p, "nt");
        if (p.contains("dt")) (gyre ? c.problem.gyre.dt : c.problem.signal.dt) = get_field<double>(p, "dt");
        if (p.contains("t0")) (gyre ? c.problem.gyre.t0 : c.problem.signal.t0) = get_field<double>(p, "t0");
        if (p.contains("path")) c.problem.file = get_field<std::string>(p, "path");
    }
    if (j.contains("q")) c.q = get_field<Eigen::Index>(j, "q");
    if (j.contains("n_train")) c.n_train = get_field<Eigen::Index>(j, "n_train");
    if (j.contains("rank")) c.rank = RankPolicy::parse(get_field<std::string>(j, "rank"));
    if (j.contains("seed")) c.seed = get_field<std::uint64_t>(j, "seed");
    if (j.contains("strict")) c.strict = get_field<bool>(j, "strict");
    if (j.contains("project_before_augment")) c.project_before_augment = get_field<bool>(j, "project_before_augment");
    if (j.contains("variants")) {
        std::vector<std::string> names;
        for (const auto& v : j.at("variants")) {
            names.push_back(v.is_string() ? v.get<std::string>() : get_field<std::string>(v, "name"));
        }
        select_variants(c, names);
        for (const auto& v : j.at("variants")) {
            if (!v.is_object()) continue;
            auto it = std::find_if(c.variants.begin(), c.variants.end(),
                                   [&](const auto& s) { return s.name == v.at("name").get<std::string>(); });
            if (v.contains("measurements")) it->measurements = get_field<Eigen::Index>(v, "measurements");
            if (v.contains("sparsity")) it->sparsity = get_field<int>(v, "sparsity");
        }
    }
    if (j.contains("out")) config.out_dir = get_field<std::string>(j, "out");
    if (j.contains("emit_modes")) config.emit_modes = get_field<std::vector<Eigen::Index>>(j, "emit_modes");
    if (j.contains("save_modes")) config.save_modes = get_field<bool>(j, "save_modes");
}

RunConfig resolve_run_config(const RunOverrides& flags, const char* env_seed) {
    json file_json;
    if (flags.config_file) {
        std::ifstream in(*flags.config_file);
        if (!in) fail(ErrorCode::Io, "cannot read config " + flags.config_file->string());
        try {
            file_json = json::parse(in);
        } catch (const json::parse_error& e) {
            fail(ErrorCode::Parse, flags.config_file->string() + ": " + e.what());
        }
    }

    std::string problem = "signal-2d";
    if (file_json.contains("problem")) {
        const json& p = file_json.at("problem");
        const std::string name = p.is_string() ? p.get<std::string>() : p.value("name", problem);
        problem = name == "file" ? "file:" + p.value("path", std::string{}) : name;
    }
    if (flags.problem) problem = *flags.problem;

    RunConfig rc;
    rc.experiment = problem_defaults(problem);
    std::optional<std::uint64_t> seed;
    if (!file_json.is_null()) {
        json overlay = file_json;
        if (overlay.contains("problem") && overlay.at("problem").is_string()) overlay.erase("problem");
        merge_config_json(rc, overlay);
        if (file_json.contains("seed")) seed = rc.experiment.seed;
    }

    ExperimentConfig& c = rc.experiment;
    const bool gyre = c.problem.kind == ProblemKind::DoubleGyre;
    if (gyre) {
        set_grid_size(c.problem.gyre.grid, flags.nx, flags.ny);
        if (flags.nt) c.problem.gyre.nt = *flags.nt;
        if (flags.dt) c.problem.gyre.dt = *flags.dt;
        if (flags.t0) c.problem.gyre.t0 = *flags.t0;
        if (flags.amp) c.problem.gyre.amp = *flags.amp;
        if (flags.omega) c.problem.gyre.omega = *flags.omega;
        if (flags.eps) c.problem.gyre.eps = *flags.eps;
    } else {
        set_grid_size(c.problem.signal.grid, flags.nx, flags.ny);
        if (flags.nt) c.problem.signal.nt = *flags.nt;
        if (flags.dt) {
            c.problem.signal.dt = *flags.dt;
            // keep the "start one step in" convention unless t0 is given
            if (!flags.t0 && !(file_json.contains("problem") && file_json.at("problem").contains("t0"))) {
                c.problem.signal.t0 = *flags.dt;
            }
        }
        if (flags.t0) c.problem.signal.t0 = *flags.t0;
        if (flags.f1) c.problem.signal.f1 = *flags.f1;
        if (flags.f2) c.problem.signal.f2 = *flags.f2;
        if (flags.noise) c.problem.signal.noise_amp = *flags.noise;
        if (flags.t_final) c.problem.signal.t_final = *flags.t_final;
    }

    if (flags.q) c.q = *flags.q;
    if (flags.n_train) c.n_train = *flags.n_train;
    if (flags.rank) c.rank = RankPolicy::parse(*flags.rank);
    if (flags.variants) select_variants(c, *flags.variants);
    for (const auto& m : flags.measurements) set_measurement(c, m);
    if (flags.sparsity) {
        for (auto& v : c.variants) v.sparsity = *flags.sparsity;
    }
    if (flags.strict) c.strict = true;
    if (flags.project_before_augment) c.project_before_augment = true;
    if (flags.out_dir) rc.out_dir = *flags.out_dir;
    if (flags.emit_modes) rc.emit_modes = *flags.emit_modes;
    if (flags.save_modes) rc.save_modes = true;

    if (flags.seed) seed = flags.seed;
    if (!seed && env_seed && *env_seed) {
        std::uint64_t s = 0;
        const std::string_view text(env_seed);
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), s);
        if (ec != std::errc{} || ptr != text.data() + text.size()) {
            fail(ErrorCode::Parse, "DELAYDMD_SEED must be an unsigned integer");
        }
        seed = s;
    }
    if (seed) c.seed = *seed;

    if (c.problem.kind == ProblemKind::File && c.n_train == 0) {
        const Eigen::Index n = load(c.problem.file).n();
        c.n_train = default_split(n);
    }
    // A shorter run than the default window shrinks the training split to 80%.
    const bool n_train_given = flags.n_train || file_json.contains("n_train");
    if (!n_train_given && c.problem.kind != ProblemKind::File) {
        const Eigen::Index n = gyre ? c.problem.gyre.nt : c.problem.signal.snapshot_count();
        if (c.n_train >= n) c.n_train = default_split(n);
    }
    return rc;
}

}  // namespace delaydmd
