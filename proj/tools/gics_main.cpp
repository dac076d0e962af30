// gics: command-line front end for acquisition, sensing, solving and sweeps.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gics/binary_io.hpp"
#include "gics/config.hpp"
#include "gics/pipeline.hpp"
#include "gics/report.hpp"

namespace fs = std::filesystem;
using namespace gics;

namespace {

struct Common {
    std::string config;
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "run configuration (JSON)")->check(CLI::ExistingFile);
    app->add_option("--preset", c.preset, "built-in preset: paper-sim or paper-exp");
    app->add_option("--seed", c.seed, "master seed (overrides acquisition.seed)");
    app->add_option("--out", c.out, "output directory (overrides output.directory)");
}

RunConfig resolve(const Common& c) {
    if (!c.config.empty() && !c.preset.empty()) throw ConfigurationError("give either --config or --preset, not both");
    RunConfig cfg = !c.config.empty() ? load_config(c.config) : (!c.preset.empty() ? preset_config(c.preset) : parse_config("{}"));
    if (c.seed) cfg.acquisition.seed = *c.seed;
    if (!c.out.empty()) cfg.output_directory = c.out;
    return cfg;
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.output_directory);
    return (fs::path(cfg.output_directory) / name).string();
}

SpectrumEstimate oracle_for(const RunConfig& cfg) {
    const SchemeGeometry g = cfg.seeded_geometry();
    const R2Alignment al = align_r2(g, cfg.acquisition.r2_pixels);
    return spectrum_oracle(cfg.make_object(), Eigen::VectorXd(al.freq_axis.segment(al.window_offset, g.d1_grid.n_points)));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lensless Fourier-transform ghost imaging with compressive sampling"};
    app.require_subcommand(1);

    Common c;
    std::string shots_file, system_file, mode_name, gics_csv, cgi_csv, stage = "setup";
    int jobs = 1;
    bool reference = false;

    auto* acquire = app.add_subcommand("acquire", "simulate speckle shots and write shots.bin");
    add_common(acquire, c);

    auto* build = app.add_subcommand("build", "build a sensing system from a shots file");
    add_common(build, c);
    build->add_option("--shots", shots_file, "shots file")->required()->check(CLI::ExistingFile);
    build->add_option("--mode", mode_name, "sensing mode (default: first configured mode)");

    auto* solve = app.add_subcommand("solve", "solve a sensing system and write its spectrum");
    add_common(solve, c);
    solve->add_option("--system", system_file, "sensing-system file")->required()->check(CLI::ExistingFile);

    auto* cgi = app.add_subcommand("cgi", "correlation ghost-imaging baseline from a shots file");
    add_common(cgi, c);
    cgi->add_option("--shots", shots_file, "shots file")->required()->check(CLI::ExistingFile);

    auto* cmp = app.add_subcommand("compare", "compare GICS and CGI spectra against the oracle");
    add_common(cmp, c);
    cmp->add_option("--gics", gics_csv, "GICS spectrum CSV")->required()->check(CLI::ExistingFile);
    cmp->add_option("--cgi", cgi_csv, "CGI spectrum CSV")->required()->check(CLI::ExistingFile);

    auto* run = app.add_subcommand("run", "full pipeline: acquire, build, solve, cgi, compare");
    add_common(run, c);

    auto* sweep = app.add_subcommand("sweep", "efficiency sweep over K, modes and seeds");
    add_common(sweep, c);
    sweep->add_option("--jobs", jobs, "parallel runs")->check(CLI::PositiveNumber);

    auto* defaults = app.add_subcommand("defaults", "print the default configuration");
    defaults->add_flag("--reference", reference, "print the documented key reference instead");
    defaults->add_option("--preset", c.preset, "print a built-in preset");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*defaults) {
            if (reference)
                std::cout << config_reference();
            else
                std::cout << (c.preset.empty() ? config_to_json(parse_config("{}")) : preset_json(c.preset));
            return 0;
        }

        const RunConfig cfg = resolve(c);
        const SchemeGeometry geometry = cfg.seeded_geometry();

        if (*acquire) {
            stage = "acquire";
            const ShotSimulator sim(geometry, cfg.make_object());
            const auto shots = sim.simulate_range(0, cfg.acquisition.shots, cfg.needs_field());
            const std::string p = out_path(cfg, "shots.bin");
            save_shots(p, {shots, geometry.source.seed, geometry.d1_grid.n_points, geometry.d2_grid.n_points});
            std::cout << "wrote " << shots.size() << " shots to " << p << "\n";
        } else if (*build) {
            stage = "build";
            const ShotBatch batch = load_shots(shots_file);
            const std::string name = mode_name.empty() ? cfg.sensing.modes.front() : mode_name;
            const SensingSystem sys = build_system(batch.shots, geometry, cfg.mode(name), cfg.acquisition.r2_pixels);
            const std::string p = out_path(cfg, "system_" + name + ".bin");
            save_system(p, sys, batch.seed);
            std::cout << "wrote " << sys.rows() << " x " << sys.cols() << " system to " << p << "\n";
        } else if (*solve) {
            stage = "solve";
            SensingSystem sys = load_system(system_file);
            if (sys.detector_pixels != geometry.d1_grid.n_points)
                throw ShapeError("system was built for " + std::to_string(sys.detector_pixels) +
                                 " D1 pixels but the configuration has " + std::to_string(geometry.d1_grid.n_points));
            const std::string name = sys.mode.name();
            const GicsRun r = reconstruct_from_system(std::move(sys), cfg.recon);
            save_solution(out_path(cfg, "solution_" + name + ".bin"), r.solve, r.system);
            write_text(out_path(cfg, "trace_" + name + ".csv"), trace_csv(r.solve.objective_trace));
            write_text(out_path(cfg, "spectrum_" + name + ".csv"), spectrum_csv(r.spectrum));
            std::cout << name << ": lambda=" << r.solve.lambda << " residual=" << r.solve.residual
                      << " iterations=" << r.solve.iterations_used << (r.solve.converged ? " converged" : " not converged")
                      << "\n";
        } else if (*cgi) {
            stage = "cgi";
            const ShotBatch batch = load_shots(shots_file);
            const SpectrumEstimate s = cgi_reconstruct(batch.shots, geometry, cfg.acquisition.r2_pixels);
            const std::string p = out_path(cfg, "spectrum_cgi.csv");
            write_text(p, spectrum_csv(s));
            std::cout << "wrote " << p << "\n";
        } else if (*cmp) {
            stage = "compare";
            SpectrumEstimate g = read_spectrum_csv(read_text(gics_csv));
            SpectrumEstimate k = read_spectrum_csv(read_text(cgi_csv));
            const SpectrumEstimate o = oracle_for(cfg);
            const ReconComparison rc = compare(g, k, o);
            write_text(out_path(cfg, "spectra_" + g.source + ".csv"), spectra_csv(rc));
            write_text(out_path(cfg, "metrics.csv"), metrics_csv({{g.source, rc.gics}, {"cgi", rc.cgi}}));
            std::cout << g.source << " pearson=" << rc.gics.pearson_correlation << " nmse=" << rc.gics.normalized_mse
                      << " | cgi pearson=" << rc.cgi.pearson_correlation << " nmse=" << rc.cgi.normalized_mse << "\n";
        } else if (*run) {
            const PipelineResult r = run_pipeline(cfg, cfg.output_directory);
            std::cout << r.summary << "\n";
        } else if (*sweep) {
            stage = "sweep";
            SweepSpec spec = sweep_spec(cfg, jobs);
            const SweepResult res = efficiency_sweep(spec);
            const std::string csv = sweep_csv(res);
            write_text(out_path(cfg, "sweep.csv"), csv);
            std::cout << csv;
        }
    } catch (const PipelineError& e) {
        std::cerr << "gics: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "gics: stage '" << stage << "' failed: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
