#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gics/optics.hpp"

namespace gics {

struct SchemeGeometry {
    double wavelength = 632.8e-9;
    double d1 = 0.4;
    double d21 = 0.2;
    double d22 = 0.2;
    SourceModel source{3e-3, Grid1D(320, 10e-6), 1.0, 1, 30e-6};
    Grid1D object_grid{600, 10e-6};
    // Pitch lambda d22 / object window puts every diffraction order on a pixel.
    Grid1D d1_grid{256, 632.8e-9 * 0.2 / 6e-3};
    Grid1D d2_grid{256, 632.8e-9 * 0.2 / 6e-3};
    // Relative sigma of additive Gaussian detector noise; 0 disables it.
    double noise_sigma = 0.0;

    // Throws ConfigurationError on non-positive distances or when the
    // Fourier condition d1 = d21 + d22 fails.
    void validate() const;
};

struct ShotRecord {
    std::int64_t shot_index = 0;
    Eigen::VectorXd i_r;                   // D1 intensities
    std::optional<Eigen::VectorXcd> e_r;   // D1 field, homodyne only
    Eigen::VectorXd i_w;                   // D2 intensities
};

// Caches the three propagation matrices of the two-arm scheme so that many
// shots can be drawn cheaply. Immutable after construction.
class ShotSimulator {
public:
    ShotSimulator(const SchemeGeometry& geometry, const PhaseObject& object);

    ShotRecord simulate(std::int64_t shot_index, bool record_field) const;
    std::vector<ShotRecord> simulate_range(std::int64_t first, std::int64_t count, bool record_field) const;

    // Field reaching the object plane for a given shot.
    ComplexField object_plane_field(std::int64_t shot_index) const;

    const SchemeGeometry& geometry() const { return geometry_; }
    const PhaseObject& object() const { return object_; }
    const Eigen::MatrixXcd& object_to_d2() const { return h_o2_; }

private:
    SchemeGeometry geometry_;
    PhaseObject object_;
    Eigen::MatrixXcd h_s1_;
    Eigen::MatrixXcd h_so_;
    Eigen::MatrixXcd h_o2_;
};

ShotRecord simulate_shot(const SchemeGeometry& geometry, const PhaseObject& object, std::int64_t shot_index,
                         bool record_field);

// Computes I_w on D2 twice: by sequential propagation and by the direct double
// sum over object-plane points of E*(x)E(x')t*(x)t(x')h*(r2-x)h(r2-x').
// Returns max |difference| over pixels divided by the peak intensity.
double validate_test_intensity(const SchemeGeometry& geometry, const PhaseObject& object, std::int64_t shot_index);

}  // namespace gics
