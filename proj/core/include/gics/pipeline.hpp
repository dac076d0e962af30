#pragma once

#include <string>
#include <vector>

#include "gics/bench.hpp"
#include "gics/config.hpp"
#include "gics/error.hpp"

namespace gics {

class PipelineError : public Error {
public:
    PipelineError(std::string stage, const std::string& what)
        : Error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct ModeOutcome {
    std::string mode;
    ReconComparison comparison;
    double lambda = 0.0;
    bool converged = false;
};

struct PipelineResult {
    std::vector<ModeOutcome> modes;
    Metrics cgi;
    std::vector<std::string> artifacts;  // file names relative to the output directory
    std::string summary;
};

// acquire -> build -> solve -> cgi -> compare for every configured mode.
// Writes config.json, shots.bin, system_<mode>.bin, solution_<mode>.bin,
// trace_<mode>.csv, spectra_<mode>.csv, plot_<mode>.svg, metrics.csv and
// manifest.json into out_dir. On failure the manifest records the stage.
PipelineResult run_pipeline(const RunConfig& config, const std::string& out_dir);

}  // namespace gics
