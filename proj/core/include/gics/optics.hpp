#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Dense>

namespace gics {

using cdouble = std::complex<double>;

struct Grid1D {
    Eigen::Index n_points = 2;
    double pitch = 1.0;   // m
    double center = 0.0;  // m

    Grid1D() = default;
    Grid1D(Eigen::Index n, double p, double c = 0.0);

    double coordinate(Eigen::Index i) const {
        return center + (static_cast<double>(i) - 0.5 * static_cast<double>(n_points - 1)) * pitch;
    }
    Eigen::VectorXd coordinates() const;
    double extent() const { return static_cast<double>(n_points) * pitch; }
    // Largest |x| reached by a sample, measured from the origin.
    double max_abs() const;

    bool operator==(const Grid1D&) const = default;
};

struct ComplexField {
    Grid1D grid;
    Eigen::VectorXcd amplitude;
    double wavelength = 632.8e-9;

    ComplexField() = default;
    ComplexField(Grid1D g, Eigen::VectorXcd a, double lambda);

    double energy() const { return amplitude.squaredNorm() * grid.pitch; }
    Eigen::VectorXd intensity() const { return amplitude.cwiseAbs2(); }
};

struct PhaseObject {
    Grid1D grid;
    Eigen::VectorXcd transmission;
};

struct SourceModel {
    double width = 3e-3;  // full aperture, m
    Grid1D grid{320, 10e-6};
    double mean_intensity = 1.0;
    std::uint64_t seed = 1;
    // Gaussian correlation length of the diffuser field. Zero gives independent
    // samples per grid point.
    double correlation_length = 0.0;

    void validate() const;
};

ComplexField make_speckle_field(const SourceModel& source, std::int64_t shot_index, double wavelength);

// Grid with n * pitch^2 = lambda |d|. On such a grid the sampled kernel is a
// chirp-DFT-chirp product, exactly unitary, and propagating by -d inverts
// propagating by d; fresnel_matrix accepts it despite the phase-step rule.
Grid1D matched_grid(Eigen::Index n, double wavelength, double distance, double center = 0.0);
bool matched_grids(const Grid1D& input, const Grid1D& target, double wavelength, double distance);

// Discretised Fresnel transfer matrix H with E_out = H * E_in:
//   H(u, x) = exp(-i pi (u - x)^2 / (lambda d)) / sqrt(-i lambda d) * pitch_in.
// Negative distances give the inverse kernel. Throws AliasingError when the
// kernel phase steps by pi or more between adjacent input samples, except on
// matched grids.
Eigen::MatrixXcd fresnel_matrix(const Grid1D& input, const Grid1D& target, double wavelength, double distance);

ComplexField fresnel_propagate(const ComplexField& field, double distance, const Grid1D& target);

ComplexField apply_object(const ComplexField& field, const PhaseObject& object);

PhaseObject make_phase_slits(int n_slits, double slit_width, double gap, double phase_depth, const Grid1D& grid);

// Continuous-coordinate transform T(f) = sum_x t(x) exp(-2 pi i f x) pitch.
Eigen::VectorXcd object_transform(const PhaseObject& object, const Eigen::VectorXd& freqs);

}  // namespace gics
