#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gics/scheme.hpp"
#include "gics/sensing.hpp"
#include "gics/solver.hpp"
#include "gics/spectrum.hpp"

namespace gics {

struct Metrics {
    double pearson_correlation = 0.0;
    double normalized_mse = 0.0;
    double peak_position_error = 0.0;  // frequency bins
};

struct ReconComparison {
    SpectrumEstimate gics_result;
    SpectrumEstimate cgi_result;
    SpectrumEstimate oracle;
    Metrics gics;
    Metrics cgi;
};

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
double normalized_mse(const Eigen::VectorXd& estimate, const Eigen::VectorXd& oracle);
// Local maxima at or above half the global peak.
std::vector<Eigen::Index> major_peaks(const Eigen::VectorXd& v);
// Largest distance from an oracle peak to the nearest estimate peak.
double peak_position_error(const Eigen::VectorXd& estimate, const Eigen::VectorXd& oracle);
Metrics evaluate(const SpectrumEstimate& estimate, const SpectrumEstimate& oracle);

// Fluctuation correlation <dI_r(r1) dI_w(r2)>, averaged over aligned r2
// pixels and returned on the reference r2's window as sqrt(max(G, 0)).
SpectrumEstimate cgi_reconstruct(const std::vector<ShotRecord>& shots, const SchemeGeometry& geometry,
                                 std::vector<Eigen::Index> r2_pixels = {});

ReconComparison compare(const SpectrumEstimate& gics, const SpectrumEstimate& cgi, const SpectrumEstimate& oracle);

struct ReconstructionSettings {
    SolverConfig solver;
    // lambda candidates as fractions of lambda_max of the full system; more
    // than one entry triggers held-out selection.
    std::vector<double> lambda_fractions{0.003};
    std::uint64_t split_seed = 12345;
};

struct GicsRun {
    SensingSystem system;
    SolveResult solve;
    SpectrumEstimate spectrum;  // reference-r2 window, unit peak
    double lambda_max = 0.0;
    std::vector<double> held_out;  // per fraction, empty without selection
};

// Selects lambda (if several fractions are given), solves and extracts the
// reference-window spectrum of an already built system.
GicsRun reconstruct_from_system(SensingSystem system, const ReconstructionSettings& settings);

GicsRun reconstruct_gics(const std::vector<ShotRecord>& shots, const SchemeGeometry& geometry, const SensingMode& mode,
                         const std::vector<Eigen::Index>& r2_pixels, const ReconstructionSettings& settings);

// Geometric sequence from hi down to lo with count entries.
std::vector<double> geometric_grid(double hi, double lo, int count);

struct SweepSpec {
    SchemeGeometry geometry;
    PhaseObject object;
    std::vector<int> k_values;
    std::vector<std::string> modes;  // sensing mode names or "cgi"
    int n_seeds = 1;
    std::uint64_t master_seed = 1;
    std::vector<Eigen::Index> r2_pixels;
    DiagonalConvention convention = DiagonalConvention::ExactIntensity;
    std::uint64_t conjecture_seed = 7;
    ReconstructionSettings recon;
    int jobs = 1;
};

struct SweepRun {
    int k = 0;
    std::string mode;
    int seed_index = 0;
    bool failed = false;
    std::string error;
    Metrics metrics;
};

struct SweepRow {
    int k = 0;
    std::string mode;
    int n_runs = 0;
    int n_failed = 0;
    Metrics mean;
    Metrics stddev;
};

struct SweepResult {
    std::vector<SweepRow> rows;  // k ascending, modes in spec order
    std::vector<SweepRun> runs;
};

// Source seed of run s is derive_seed(master_seed, s); all K values and modes
// of a run share its shots (the K shots are a prefix of the largest K).
std::uint64_t sweep_run_seed(std::uint64_t master_seed, int seed_index);

SweepResult efficiency_sweep(const SweepSpec& spec);

}  // namespace gics
