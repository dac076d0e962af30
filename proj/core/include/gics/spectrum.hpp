#pragma once

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "gics/optics.hpp"

namespace gics {

struct SpectrumEstimate {
    Eigen::VectorXd freq;       // cycles/m
    Eigen::VectorXd magnitude;  // |T(f)|, unit peak unless all zero
    std::string source;         // "oracle", "cgi", "homodyne", ...
    // Off-diagonal Hermitian estimate of T*(f_i) T(f_j), full-mode GICS only.
    std::optional<Eigen::MatrixXcd> hermitian;

    Eigen::Index size() const { return freq.size(); }
    SpectrumEstimate window(Eigen::Index offset, Eigen::Index n) const;
};

// Scales v so max |v| = 1. All-zero input is returned unchanged.
Eigen::VectorXd unit_peak(const Eigen::VectorXd& v);

// Frequency axis f_i = (r1_i - r2) / (lambda d22).
Eigen::VectorXd detector_frequencies(const Grid1D& d1_grid, double r2, double wavelength, double d22);

// |T(f)| by direct DFT of the transmission at f = r / (lambda d22), unit peak.
SpectrumEstimate spectrum_oracle(const PhaseObject& object, const Eigen::VectorXd& freqs);
SpectrumEstimate spectrum_oracle(const PhaseObject& object, const Eigen::VectorXd& r, double lambda_d22);

}  // namespace gics
