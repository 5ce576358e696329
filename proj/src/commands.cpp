#include "delaydmd/commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "delaydmd/errors.hpp"

namespace delaydmd {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    return out;
}

void write_matrix_csv(const Matrix& m, const fs::path& path) {
    auto out = open_out(path);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << fmt_double(m(i, j));
        }
        out << '\n';
    }
}

void write_spectrum_csv(const VariantReport& v, const fs::path& path) {
    auto out = open_out(path);
    out << "re_mu,im_mu,re_omega,im_omega,amp,circle\n";
    for (const auto& e : v.spectrum) {
        out << fmt_double(e.mu.real()) << ',' << fmt_double(e.mu.imag()) << ',' << fmt_double(e.omega.real()) << ','
            << fmt_double(e.omega.imag()) << ',' << fmt_double(e.amp_abs) << ',' << to_string(e.circle) << '\n';
    }
}

void write_errors_csv(const VariantReport& v, const fs::path& path) {
    auto out = open_out(path);
    out << "time,rel_error\n";
    for (size_t k = 0; k < v.errors.times.size(); ++k) {
        out << fmt_double(v.errors.times[k]) << ',' << fmt_double(v.errors.rel_error[k]) << '\n';
    }
}

std::optional<GridMeta> problem_grid(const ExperimentConfig& c) {
    switch (c.problem.kind) {
        case ProblemKind::DoubleGyre: return c.problem.gyre.grid;
        case ProblemKind::Signal: return c.problem.signal.grid;
        case ProblemKind::File: return std::nullopt;
    }
    return std::nullopt;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

int exit_for(const Error& e) {
    switch (e.code()) {
        case ErrorCode::Io:
        case ErrorCode::Consistency: return exit_code::kIo;
        default: return exit_code::kUsage;
    }
}

}  // namespace

fs::path cmd_generate(const RunConfig& config, std::ostream& log) {
    const ExperimentConfig& c = config.experiment;
    if (c.problem.kind == ProblemKind::File) fail(ErrorCode::InvalidParameter, "generate needs double-gyre or signal-2d");
    const SnapshotMatrix data = c.problem.generate(c.seed);
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec) fail(ErrorCode::Io, "cannot create " + config.out_dir.string());
    const fs::path base = config.out_dir / c.problem.name();
    save(data, base);
    log << "wrote " << base.string() << ".csv (" << data.m() << "x" << data.n() << ") and " << base.string()
        << ".meta.json\n";
    return base;
}

int cmd_run(const RunConfig& config, std::ostream& log) {
    const ExperimentConfig& c = config.experiment;
    std::vector<DmdModel> models;
    ExperimentReport report;
    try {
        report = run_comparison(c, &models);
    } catch (const Error& e) {
        if (c.strict && e.code() != ErrorCode::Io && e.code() != ErrorCode::Parse) {
            log << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
            return exit_code::kVariantFailure;
        }
        throw;
    }

    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec) fail(ErrorCode::Io, "cannot create " + config.out_dir.string());
    {
        auto out = open_out(config.out_dir / "report.json");
        out << to_json(report).dump(2) << '\n';
    }

    const std::optional<GridMeta> grid = problem_grid(c);
    for (size_t i = 0; i < report.variants.size(); ++i) {
        const VariantReport& v = report.variants[i];
        if (!v.ok()) {
            log << v.variant << ": FAILED " << *v.error << '\n';
            continue;
        }
        write_spectrum_csv(v, config.out_dir / ("spectrum_" + v.variant + ".csv"));
        write_errors_csv(v, config.out_dir / ("errors_" + v.variant + ".csv"));
        const DmdModel& model = models[i];
        std::optional<fs::path> modes_csv;
        if (config.save_modes) modes_csv = config.out_dir / ("modes_" + v.variant + ".csv");
        save_model(model, config.out_dir / ("model_" + v.variant + ".json"), modes_csv);
        if (grid) {
            for (Eigen::Index k : config.emit_modes) {
                if (k < 0 || k >= model.rank) {
                    log << v.variant << ": mode " << k << " out of range (rank " << model.rank << ")\n";
                    continue;
                }
                for (FieldPart part : {FieldPart::Real, FieldPart::Imag, FieldPart::Abs}) {
                    write_matrix_csv(mode_field(model, k, *grid, part),
                                     config.out_dir / ("mode_" + v.variant + "_" + std::to_string(k) + "_" +
                                                       std::string(to_string(part)) + ".csv"));
                }
            }
        }
        log << v.variant << ": a=" << v.measurements << " r=" << v.rank << " train_err=" << v.errors.train_mean()
            << " test_err=" << v.errors.test_mean() << " time=" << v.wall_time << "s\n";
    }

    if (grid && !config.emit_modes.empty()) {
        const SnapshotMatrix data = c.problem.generate(c.seed);
        const auto [train, test] = train_test_split(data, c.n_train);
        const Matrix pod = pod_modes(train, c.rank);
        for (Eigen::Index k : config.emit_modes) {
            if (k < 0 || k >= pod.cols()) continue;
            Matrix field(grid->ny, grid->nx);
            for (Eigen::Index iy = 0; iy < grid->ny; ++iy) {
                for (Eigen::Index ix = 0; ix < grid->nx; ++ix) field(iy, ix) = pod(iy * grid->nx + ix, k);
            }
            write_matrix_csv(field, config.out_dir / ("pod_" + std::to_string(k) + ".csv"));
        }
    }

    const bool any_failed = std::any_of(report.variants.begin(), report.variants.end(), [](const auto& v) { return !v.ok(); });
    if (any_failed && c.strict) return exit_code::kVariantFailure;
    return exit_code::kOk;
}

void cmd_spectrum(const fs::path& model_json, std::ostream& out) {
    const DmdModel model = load_model(model_json);
    char line[256];
    std::snprintf(line, sizeof(line), "# %s rank=%lld dt=%.10g\n", model.tag().c_str(),
                  static_cast<long long>(model.rank), model.dt);
    out << line;
    out << "# mu_re mu_im omega_re omega_im amp circle\n";
    for (const auto& e : spectrum(model)) {
        std::snprintf(line, sizeof(line), "%.12g %.12g %.12g %.12g %.12g %s\n", e.mu.real(), e.mu.imag(),
                      e.omega.real(), e.omega.imag(), e.amp_abs, std::string(to_string(e.circle)).c_str());
        out << line;
    }
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Time-delay DMD with measurement-reducing projections"};
    app.require_subcommand(1);

    RunOverrides flags;
    std::string variants_text;
    std::string emit_text;
    std::string measurements_text;
    unsigned long long seed_value = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--problem", flags.problem, "double-gyre, signal-2d or file:<path>");
        cmd->add_option("--config", flags.config_file, "JSON run configuration");
        cmd->add_option("--seed", seed_value, "master RNG seed");
        cmd->add_option("--out", flags.out_dir, "output directory");
        cmd->add_option("--nt", flags.nt, "number of snapshots");
        cmd->add_option("--nx", flags.nx, "grid nodes along x");
        cmd->add_option("--ny", flags.ny, "grid nodes along y");
        cmd->add_option("--dt", flags.dt, "time step [s]");
        cmd->add_option("--t0", flags.t0, "start time [s]");
        cmd->add_option("--amp", flags.amp, "double gyre amplitude A");
        cmd->add_option("--omega", flags.omega, "double gyre forcing frequency [rad/s]");
        cmd->add_option("--eps", flags.eps, "double gyre epsilon");
        cmd->add_option("--f1", flags.f1, "signal frequency f1 [Hz]");
        cmd->add_option("--f2", flags.f2, "signal frequency f2 [Hz]");
        cmd->add_option("--noise", flags.noise, "signal noise amplitude");
        cmd->add_option("--t-final", flags.t_final, "signal duration [s]");
    };

    CLI::App* gen = app.add_subcommand("generate", "write a benchmark dataset");
    add_common(gen);

    CLI::App* run = app.add_subcommand("run", "fit and compare DMD variants");
    add_common(run);
    run->add_option("--q", flags.q, "delay depth");
    run->add_option("--n-train", flags.n_train, "training snapshots");
    run->add_option("--rank", flags.rank, "fixed:R or tol:T");
    CLI::Option* variants_opt = run->add_option("--variants", variants_text, "comma list of variants");
    run->add_option("--measurements", measurements_text, "<variant>=<a>[,<variant>=<a>...]");
    run->add_option("--sparsity", flags.sparsity, "Achlioptas s (1 or 3)");
    CLI::Option* emit_opt = run->add_option("--emit-modes", emit_text, "comma list of mode indices to export");
    run->add_flag("--strict", flags.strict, "fail (exit 2) if any variant fails");
    run->add_flag("--project-before-augment", flags.project_before_augment, "sketch raw snapshots, then delay-embed");
    run->add_flag("--save-modes", flags.save_modes, "write full mode matrices next to each model");

    std::string model_path;
    CLI::App* spec = app.add_subcommand("spectrum", "print the spectrum of a saved model");
    spec->add_option("model", model_path, "model JSON written by run")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_code::kOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return exit_code::kUsage;
    }

    try {
        if (*spec) {
            cmd_spectrum(model_path, out);
            return exit_code::kOk;
        }
        CLI::App* active = *gen ? gen : run;
        if (active->get_option("--seed")->count() > 0) flags.seed = seed_value;
        if (*run && variants_opt->count() > 0) flags.variants = split_list(variants_text);
        if (*run && !measurements_text.empty()) flags.measurements = split_list(measurements_text);
        if (*run && emit_opt->count() > 0) {
            std::vector<Eigen::Index> modes;
            for (const auto& s : split_list(emit_text)) {
                try {
                    modes.push_back(std::stoll(s));
                } catch (const std::exception&) {
                    err << "usage error: --emit-modes expects integers\n";
                    return exit_code::kUsage;
                }
            }
            flags.emit_modes = modes;
        }

        RunConfig config = resolve_run_config(flags, std::getenv("DELAYDMD_SEED"));
        if (*gen) {
            if (config.experiment.problem.kind == ProblemKind::DoubleGyre) config.experiment.problem.gyre.validate();
            cmd_generate(config, out);
            return exit_code::kOk;
        }
        config.experiment.validate();
        return cmd_run(config, out);
    } catch (const Error& e) {
        err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
        return exit_for(e);
    }
}

}  // namespace delaydmd
