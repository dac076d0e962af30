#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gics/bench.hpp"
#include "gics/scheme.hpp"
#include "gics/sensing.hpp"

namespace gics {

struct ObjectSpec {
    int n_slits = 5;
    double slit_width = 600e-6;
    double gap = 600e-6;
    double phase_depth = 3.141592653589793;
};

struct AcquisitionSpec {
    int shots = 50;
    std::vector<Eigen::Index> r2_pixels;  // empty: central D2 pixel
    std::uint64_t seed = 1;
};

struct SensingSpec {
    std::vector<std::string> modes{"homodyne"};
    DiagonalConvention convention = DiagonalConvention::ExactIntensity;
    std::uint64_t conjecture_seed = 7;
};

struct SweepSettings {
    std::vector<int> k_values{50};
    std::vector<std::string> modes{"homodyne", "diagonal", "cgi"};
    int n_seeds = 10;
};

struct RunConfig {
    SchemeGeometry geometry;
    ObjectSpec object;
    AcquisitionSpec acquisition;
    SensingSpec sensing;
    ReconstructionSettings recon;
    SweepSettings sweep;
    std::string output_directory = "gics-out";

    PhaseObject make_object() const;
    // Geometry with the source seed taken from the acquisition seed.
    SchemeGeometry seeded_geometry() const;
    SensingMode mode(const std::string& name) const;
    bool needs_field() const;
};

// Parses JSON text. Unknown keys and invalid values raise ConfigurationError
// naming the key path; JSON syntax errors report line and column.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

// Built-in presets: "paper-sim", "paper-exp" (same content as presets/*.json).
RunConfig preset_config(const std::string& name);
std::string preset_json(const std::string& name);

std::string config_to_json(const RunConfig& config);

// Sweep over the configured K values, modes and seeds; run s uses
// derive_seed(acquisition.seed, s).
SweepSpec sweep_spec(const RunConfig& config, int jobs = 1);
// Markdown reference of every key with its default value.
std::string config_reference();

}  // namespace gics
