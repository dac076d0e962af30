#pragma once

#include <string>
#include <vector>

#include "gics/bench.hpp"
#include "gics/spectrum.hpp"

namespace gics {

// Shortest round-trip decimal form of a double; non-finite values throw.
std::string format_number(double v);

// Columns f,oracle,gics,cgi (one row per frequency).
std::string spectra_csv(const ReconComparison& c);
// Columns estimate,pearson,nmse,peak_error_bins.
std::string metrics_csv(const std::vector<std::pair<std::string, Metrics>>& rows);
// Columns iteration,objective.
std::string trace_csv(const std::vector<double>& trace);
// Columns K,mode,n_runs,n_failed,pearson_mean,pearson_std,nmse_mean,nmse_std,
// peak_error_mean,peak_error_std. Cells with no successful run are empty.
std::string sweep_csv(const SweepResult& result);
// Columns f,<name>.
std::string spectrum_csv(const SpectrumEstimate& s);
SpectrumEstimate read_spectrum_csv(const std::string& text);

struct PlotSeries {
    std::string label;
    Eigen::VectorXd values;
    std::string color;
};

// Line chart of the series against x.
std::string svg_plot(const std::string& title, const Eigen::VectorXd& x, const std::vector<PlotSeries>& series,
                     const std::string& x_label = "f (1/mm)");

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace gics
