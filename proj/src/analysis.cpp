#include "delaydmd/analysis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "delaydmd/errors.hpp"

namespace delaydmd {

using json = nlohmann::json;

double ErrorSeries::mean(Eigen::Index begin, Eigen::Index end) const {
    begin = std::max<Eigen::Index>(begin, 0);
    end = std::min<Eigen::Index>(end, static_cast<Eigen::Index>(rel_error.size()));
    if (end <= begin) return 0.0;
    const double sum = std::accumulate(rel_error.begin() + begin, rel_error.begin() + end, 0.0);
    return sum / static_cast<double>(end - begin);
}

double ErrorSeries::train_max() const {
    double worst = 0.0;
    for (Eigen::Index k = 0; k < std::min<Eigen::Index>(n_train, static_cast<Eigen::Index>(rel_error.size())); ++k) {
        worst = std::max(worst, rel_error[static_cast<size_t>(k)]);
    }
    return worst;
}

ErrorSeries relative_error_series(const DmdModel& model, const SnapshotMatrix& truth, Eigen::Index n_train) {
    if (truth.m() != model.base_m) {
        fail(ErrorCode::Shape, "relative_error_series: model has M = " + std::to_string(model.base_m) +
                                   " but data has M = " + std::to_string(truth.m()));
    }
    if (std::abs(truth.dt() - model.dt) > 1e-12 * model.dt) {
        fail(ErrorCode::Shape, "relative_error_series: model and data time steps differ");
    }
    ErrorSeries out;
    out.n_train = n_train;
    out.times.reserve(static_cast<size_t>(truth.n()));
    out.rel_error.reserve(static_cast<size_t>(truth.n()));
    for (Eigen::Index k = 0; k < truth.n(); ++k) {
        const double t = truth.time(k);
        const auto x = truth.data().col(k);
        const double denom = std::max(x.norm(), kErrorFloor);
        out.times.push_back(t);
        out.rel_error.push_back((x - predict_at(model, t)).norm() / denom);
    }
    return out;
}

FieldPart field_part_from_string(std::string_view s) {
    if (s == "real") return FieldPart::Real;
    if (s == "imag") return FieldPart::Imag;
    if (s == "abs") return FieldPart::Abs;
    fail(ErrorCode::InvalidParameter, "field part must be real, imag or abs");
}

std::string_view to_string(FieldPart p) {
    switch (p) {
        case FieldPart::Real: return "real";
        case FieldPart::Imag: return "imag";
        case FieldPart::Abs: return "abs";
    }
    return "unknown";
}

Matrix mode_field(const DmdModel& model, Eigen::Index k, const GridMeta& grid, FieldPart part) {
    if (k < 0 || k >= model.rank || k >= model.modes.cols()) {
        fail(ErrorCode::Shape, "mode_field: mode index " + std::to_string(k) + " outside [0, " +
                                   std::to_string(model.rank) + ")");
    }
    if (grid.size() != model.base_m || model.modes.rows() < model.base_m) {
        fail(ErrorCode::Shape, "mode_field: grid " + std::to_string(grid.nx) + "x" + std::to_string(grid.ny) +
                                   " does not match M = " + std::to_string(model.base_m));
    }
    Matrix out(grid.ny, grid.nx);
    for (Eigen::Index iy = 0; iy < grid.ny; ++iy) {
        for (Eigen::Index ix = 0; ix < grid.nx; ++ix) {
            const Complex z = model.modes(iy * grid.nx + ix, k);
            switch (part) {
                case FieldPart::Real: out(iy, ix) = z.real(); break;
                case FieldPart::Imag: out(iy, ix) = z.imag(); break;
                case FieldPart::Abs: out(iy, ix) = std::abs(z); break;
            }
        }
    }
    return out;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view component) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : component) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::uint64_t z = master ^ h;
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::string_view to_string(ProblemKind k) {
    switch (k) {
        case ProblemKind::DoubleGyre: return "double-gyre";
        case ProblemKind::Signal: return "signal-2d";
        case ProblemKind::File: return "file";
    }
    return "unknown";
}

std::string ProblemSpec::name() const {
    if (kind == ProblemKind::File) return "file:" + file.string();
    return std::string(to_string(kind));
}

SnapshotMatrix ProblemSpec::generate(std::uint64_t master_seed) const {
    switch (kind) {
        case ProblemKind::DoubleGyre: return generate_double_gyre(gyre);
        case ProblemKind::Signal: return generate_signal(signal, derive_seed(master_seed, "problem"));
        case ProblemKind::File: return load(file);
    }
    fail(ErrorCode::InvalidParameter, "unknown problem");
}

ExperimentConfig ExperimentConfig::double_gyre_defaults() {
    ExperimentConfig c;
    c.problem.kind = ProblemKind::DoubleGyre;
    c.q = 2;
    c.n_train = 174;
    c.rank = RankPolicy::fixed(20);
    c.variants = {{"classic", 0, 3}, {"sampling", 100, 3}, {"gaussian", 200, 3}, {"achlioptas", 100, 3}, {"krylov", 100, 3}};
    return c;
}

ExperimentConfig ExperimentConfig::signal_defaults() {
    ExperimentConfig c;
    c.problem.kind = ProblemKind::Signal;
    // The signal vanishes identically at t = 0; start one step later.
    c.problem.signal.t0 = c.problem.signal.dt;
    c.q = 2;
    c.n_train = 64;
    c.rank = RankPolicy::threshold(1e-10);
    c.variants = {{"classic", 0, 3}, {"sampling", 100, 3}, {"gaussian", 50, 3}, {"achlioptas", 50, 3}, {"krylov", 50, 3}};
    return c;
}

void ExperimentConfig::validate() const {
    if (variants.empty()) fail(ErrorCode::InvalidParameter, "at least one variant is required");
    if (q < 1) fail(ErrorCode::InvalidDelay, "q must be >= 1");
    if (n_train < 2) fail(ErrorCode::InvalidSplit, "n_train must be >= 2");
    if (q > n_train - 1) fail(ErrorCode::InvalidDelay, "q must not exceed n_train - 1");
    rank.validate();
    for (const auto& v : variants) {
        if (std::find(variant_names().begin(), variant_names().end(), v.name) == variant_names().end()) {
            fail(ErrorCode::InvalidParameter, "unknown variant \"" + v.name + "\"");
        }
        if (v.name != "classic" && v.measurements < 1) {
            fail(ErrorCode::InvalidCount, "variant " + v.name + " needs a positive measurement count");
        }
        if (v.name == "krylov" && v.measurements < 2) {
            fail(ErrorCode::InvalidCount, "krylov needs at least 2 measurements (start vector plus one step)");
        }
        if (v.name == "achlioptas" && v.sparsity != 1 && v.sparsity != 3) {
            fail(ErrorCode::InvalidParameter, "achlioptas sparsity must be 1 or 3");
        }
    }
    switch (problem.kind) {
        case ProblemKind::DoubleGyre:
            problem.gyre.validate();
            if (n_train >= problem.gyre.nt) fail(ErrorCode::InvalidSplit, "n_train must be below nt");
            break;
        case ProblemKind::Signal:
            problem.signal.validate();
            if (n_train >= problem.signal.snapshot_count()) fail(ErrorCode::InvalidSplit, "n_train must be below nt");
            break;
        case ProblemKind::File: break;
    }
}

DmdModel fit_variant(const VariantSpec& spec, const SnapshotMatrix& train, Eigen::Index q, const RankPolicy& rank,
                     std::uint64_t master_seed, bool project_before_augment, std::optional<double>* gram) {
    if (spec.name == "classic") {
        DmdModel m = dmd_tdc(train, q, rank);
        m.measurements = train.m();
        return m;
    }
    const Eigen::Index dim = project_before_augment ? train.m() : q * train.m();
    const std::uint64_t seed = derive_seed(master_seed, spec.name);
    std::optional<ProjectionOperator> op;
    if (spec.name == "sampling") op = sampling_operator(dim, spec.measurements, seed);
    else if (spec.name == "gaussian") op = gaussian_operator(dim, spec.measurements, seed);
    else if (spec.name == "achlioptas") op = achlioptas_operator(dim, spec.measurements, spec.sparsity, seed);
    else if (spec.name == "krylov") op = krylov_operator(dim, spec.measurements - 1, seed);
    else fail(ErrorCode::InvalidParameter, "unknown variant \"" + spec.name + "\"");
    if (gram) *gram = gram_deviation(*op);
    return dmd_projected(train, q, *op, rank, project_before_augment);
}

const VariantReport* ExperimentReport::find(std::string_view variant) const {
    for (const auto& v : variants) {
        if (v.variant == variant) return &v;
    }
    return nullptr;
}

ExperimentReport run_comparison(const ExperimentConfig& config, std::vector<DmdModel>* models) {
    config.validate();
    const SnapshotMatrix data = config.problem.generate(config.seed);
    const auto [train, test] = train_test_split(data, config.n_train);

    ExperimentReport report;
    report.problem = config.problem.name();
    report.config = to_json(config);
    report.seeds = json{{"master", config.seed}};
    if (config.problem.kind == ProblemKind::Signal) report.seeds["problem"] = derive_seed(config.seed, "problem");

    for (const auto& spec : config.variants) {
        VariantReport vr;
        vr.variant = spec.name;
        vr.measurements = spec.name == "classic" ? data.m() : spec.measurements;
        if (spec.name == "achlioptas") vr.sparsity = spec.sparsity;
        if (spec.name != "classic") {
            vr.seed = derive_seed(config.seed, spec.name);
            report.seeds[spec.name] = *vr.seed;
        }

        const auto start = std::chrono::steady_clock::now();
        DmdModel model;
        try {
            model = fit_variant(spec, train, config.q, config.rank, config.seed, config.project_before_augment,
                                &vr.gram_deviation);
            vr.measurements = model.measurements;
            vr.rank = model.rank;
            vr.spectrum = spectrum(model);
            vr.errors = relative_error_series(model, data, config.n_train);
            vr.warnings = model.warnings;
        } catch (const Error& e) {
            if (config.strict) throw;
            vr.error = std::string(to_string(e.code())) + ": " + e.what();
            model = DmdModel{};
        }
        vr.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        report.variants.push_back(std::move(vr));
        if (models) models->push_back(std::move(model));
    }
    return report;
}

// JSON ---------------------------------------------------------------------------

namespace {

json complex_json(const Complex& z) { return json{{"re", z.real()}, {"im", z.imag()}}; }
Complex complex_from(const json& j) { return {j.at("re").get<double>(), j.at("im").get<double>()}; }

json problem_json(const ProblemSpec& p) {
    switch (p.kind) {
        case ProblemKind::DoubleGyre: {
            const auto& g = p.gyre;
            return json{{"name", "double-gyre"}, {"amp", g.amp}, {"omega", g.omega}, {"eps", g.eps},
                        {"nx", g.grid.nx},       {"ny", g.grid.ny}, {"nt", g.nt},   {"dt", g.dt}, {"t0", g.t0}};
        }
        case ProblemKind::Signal: {
            const auto& s = p.signal;
            return json{{"name", "signal-2d"}, {"f1", s.f1}, {"f2", s.f2}, {"noise_amp", s.noise_amp},
                        {"nx", s.grid.nx},     {"ny", s.grid.ny}, {"nt", s.snapshot_count()},
                        {"dt", s.dt},          {"t_final", s.t_final}, {"t0", s.t0}};
        }
        case ProblemKind::File: return json{{"name", "file"}, {"path", p.file.string()}};
    }
    return json{};
}

}  // namespace

json to_json(const ExperimentConfig& c) {
    json variants = json::array();
    for (const auto& v : c.variants) {
        json e{{"name", v.name}, {"measurements", v.measurements}};
        if (v.name == "achlioptas") e["sparsity"] = v.sparsity;
        variants.push_back(std::move(e));
    }
    return json{{"problem", problem_json(c.problem)},
                {"q", c.q},
                {"n_train", c.n_train},
                {"rank", c.rank.to_string()},
                {"variants", std::move(variants)},
                {"seed", c.seed},
                {"strict", c.strict},
                {"project_before_augment", c.project_before_augment}};
}

json to_json(const VariantReport& v) {
    json spec = json::array();
    for (const auto& e : v.spectrum) {
        spec.push_back(json{{"mu", complex_json(e.mu)},
                            {"omega", complex_json(e.omega)},
                            {"amp", e.amp_abs},
                            {"circle", std::string(to_string(e.circle))}});
    }
    return json{{"variant", v.variant},
                {"measurements", v.measurements},
                {"sparsity", v.sparsity ? json(*v.sparsity) : json(nullptr)},
                {"seed", v.seed ? json(*v.seed) : json(nullptr)},
                {"rank", v.rank},
                {"gram_deviation", v.gram_deviation ? json(*v.gram_deviation) : json(nullptr)},
                {"wall_time", v.wall_time},
                {"error", v.error ? json(*v.error) : json(nullptr)},
                {"warnings", v.warnings},
                {"spectrum", std::move(spec)},
                {"errors", json{{"times", v.errors.times}, {"rel_error", v.errors.rel_error}, {"n_train", v.errors.n_train}}}};
}

json to_json(const ExperimentReport& r) {
    json variants = json::array();
    for (const auto& v : r.variants) variants.push_back(to_json(v));
    return json{{"problem", r.problem}, {"config", r.config}, {"seeds", r.seeds}, {"variants", std::move(variants)}};
}

ExperimentReport report_from_json(const json& j) {
    ExperimentReport r;
    try {
        r.problem = j.at("problem").get<std::string>();
        r.config = j.at("config");
        r.seeds = j.at("seeds");
        for (const auto& jv : j.at("variants")) {
            VariantReport v;
            v.variant = jv.at("variant").get<std::string>();
            v.measurements = jv.at("measurements").get<Eigen::Index>();
            if (!jv.at("sparsity").is_null()) v.sparsity = jv.at("sparsity").get<int>();
            if (!jv.at("seed").is_null()) v.seed = jv.at("seed").get<std::uint64_t>();
            v.rank = jv.at("rank").get<Eigen::Index>();
            if (!jv.at("gram_deviation").is_null()) v.gram_deviation = jv.at("gram_deviation").get<double>();
            v.wall_time = jv.at("wall_time").get<double>();
            if (!jv.at("error").is_null()) v.error = jv.at("error").get<std::string>();
            v.warnings = jv.at("warnings").get<std::vector<std::string>>();
            for (const auto& e : jv.at("spectrum")) {
                v.spectrum.push_back({complex_from(e.at("mu")), complex_from(e.at("omega")), e.at("amp").get<double>(),
                                      circle_position_from_string(e.at("circle").get<std::string>())});
            }
            const json& es = jv.at("errors");
            v.errors.times = es.at("times").get<std::vector<double>>();
            v.errors.rel_error = es.at("rel_error").get<std::vector<double>>();
            v.errors.n_train = es.at("n_train").get<Eigen::Index>();
            r.variants.push_back(std::move(v));
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, std::string("report: ") + e.what());
    }
    return r;
}

json without_wall_times(const json& report) {
    json out = report;
    if (out.contains("variants")) {
        for (auto& v : out["variants"]) v.erase("wall_time");
    }
    return out;
}

}  // namespace delaydmd
