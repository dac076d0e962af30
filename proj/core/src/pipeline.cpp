#include "gics/pipeline.hpp"

#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "gics/binary_io.hpp"
#include "gics/report.hpp"

namespace gics {

namespace {

class Stages {
public:
    Stages(std::string dir) : dir_(std::move(dir)) {}

    template <class F>
    auto run(const std::string& stage, F&& f) {
        try {
            return f();
        } catch (const std::exception& e) {
            write_manifest("partial", stage);
            throw PipelineError(stage, e.what());
        }
    }

    std::string path(const std::string& name) {
        artifacts.push_back(name);
        return (std::filesystem::path(dir_) / name).string();
    }

    void write_manifest(const std::string& status, const std::string& failed_stage) {
        nlohmann::json m;
        m["status"] = status;
        if (!failed_stage.empty()) m["failed_stage"] = failed_stage;
        m["artifacts"] = artifacts;
        try {
            write_text((std::filesystem::path(dir_) / "manifest.json").string(), m.dump(2) + "\n");
        } catch (const std::exception&) {
        }
    }

    std::vector<std::string> artifacts;

private:
    std::string dir_;
};

}  // namespace

PipelineResult run_pipeline(const RunConfig& config, const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw PipelineError("setup", "cannot create output directory '" + out_dir + "': " + ec.message());

    Stages st(out_dir);
    PipelineResult result;
    const SchemeGeometry geometry = config.seeded_geometry();
    const auto& r2 = config.acquisition.r2_pixels;

    st.run("setup", [&] {
        write_text(st.path("config.json"), config_to_json(config));
        return 0;
    });

    const PhaseObject object = st.run("acquire", [&] { return config.make_object(); });
    const std::vector<ShotRecord> shots = st.run("acquire", [&] {
        const ShotSimulator sim(geometry, object);
        auto s = sim.simulate_range(0, config.acquisition.shots, config.needs_field());
        save_shots(st.path("shots.bin"), ShotBatch{s, geometry.source.seed, geometry.d1_grid.n_points, geometry.d2_grid.n_points});
        return s;
    });

    const SpectrumEstimate cgi = st.run("cgi", [&] { return cgi_reconstruct(shots, geometry, r2); });
    const SpectrumEstimate oracle = spectrum_oracle(object, cgi.freq);

    std::vector<std::pair<std::string, Metrics>> metric_rows;
    for (const std::string& name : config.sensing.modes) {
        const SensingMode mode = config.mode(name);
        const SensingSystem system = st.run("build", [&] {
            SensingSystem s = build_system(shots, geometry, mode, r2);
            save_system(st.path("system_" + name + ".bin"), s, geometry.source.seed);
            return s;
        });
        const GicsRun run = st.run("solve", [&] {
            GicsRun g = reconstruct_from_system(system, config.recon);
            save_solution(st.path("solution_" + name + ".bin"), g.solve, system);
            write_text(st.path("trace_" + name + ".csv"), trace_csv(g.solve.objective_trace));
            return g;
        });
        const ReconComparison cmp = st.run("compare", [&] {
            ReconComparison c = compare(run.spectrum, cgi, oracle);
            write_text(st.path("spectra_" + name + ".csv"), spectra_csv(c));
            write_text(st.path("plot_" + name + ".svg"),
                       svg_plot("|T(f)|: " + name + " vs oracle", oracle.freq,
                                {{"oracle", oracle.magnitude, "#000000"},
                                 {name, run.spectrum.magnitude, "#d62728"},
                                 {"cgi", cgi.magnitude, "#1f77b4"}}));
            return c;
        });
        metric_rows.emplace_back(name, cmp.gics);
        result.cgi = cmp.cgi;
        result.modes.push_back({name, cmp, run.solve.lambda, run.solve.converged});
    }
    if (result.modes.empty()) result.cgi = evaluate(cgi, oracle);
    metric_rows.emplace_back("cgi", result.cgi);

    st.run("compare", [&] {
        write_text(st.path("metrics.csv"), metrics_csv(metric_rows));
        return 0;
    });
    st.write_manifest("complete", "");
    result.artifacts = st.artifacts;

    std::ostringstream os;
    os.precision(4);
    for (const auto& [name, m] : metric_rows) {
        if (&name != &metric_rows.front().first) os << " | ";
        os << name << " pearson=" << m.pearson_correlation << " nmse=" << m.normalized_mse
           << " peak_err=" << m.peak_position_error;
    }
    result.summary = os.str();
    return result;
}

}  // namespace gics
