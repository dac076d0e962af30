#include "gics/optics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "gics/error.hpp"

namespace gics {

namespace {

std::string describe(const Grid1D& g) {
    std::ostringstream os;
    os << "Grid1D(n=" << g.n_points << ", pitch=" << g.pitch << " m, center=" << g.center << " m)";
    return os.str();
}

}  // namespace

Grid1D::Grid1D(Eigen::Index n, double p, double c) : n_points(n), pitch(p), center(c) {
    if (n < 2) throw ConfigurationError("Grid1D needs at least 2 points");
    if (!(p > 0.0) || !std::isfinite(p)) throw ConfigurationError("Grid1D pitch must be positive");
    if (!std::isfinite(c)) throw ConfigurationError("Grid1D center must be finite");
}

Eigen::VectorXd Grid1D::coordinates() const {
    Eigen::VectorXd x(n_points);
    for (Eigen::Index i = 0; i < n_points; ++i) x(i) = coordinate(i);
    return x;
}

double Grid1D::max_abs() const {
    return std::max(std::abs(coordinate(0)), std::abs(coordinate(n_points - 1)));
}

ComplexField::ComplexField(Grid1D g, Eigen::VectorXcd a, double lambda)
    : grid(g), amplitude(std::move(a)), wavelength(lambda) {
    if (amplitude.size() != grid.n_points)
        throw ShapeError("field amplitude length " + std::to_string(amplitude.size()) + " does not match " +
                         describe(grid));
    if (!(wavelength > 0.0)) throw ConfigurationError("wavelength must be positive");
}

void SourceModel::validate() const {
    if (!(width > 0.0)) throw ConfigurationError("source width must be positive");
    if (width > grid.extent() * (1.0 + 1e-12))
        throw ConfigurationError("source width " + std::to_string(width) + " m exceeds grid extent of " +
                                 describe(grid));
    if (mean_intensity < 0.0) throw ConfigurationError("source mean_intensity must be non-negative");
    if (correlation_length < 0.0) throw ConfigurationError("source correlation_length must be non-negative");
}

Grid1D matched_grid(Eigen::Index n, double wavelength, double distance, double center) {
    return Grid1D(n, std::sqrt(wavelength * std::abs(distance) / static_cast<double>(n)), center);
}

bool matched_grids(const Grid1D& input, const Grid1D& target, double wavelength, double distance) {
    if (!(input == target)) return false;
    const double np2 = static_cast<double>(input.n_points) * input.pitch * input.pitch;
    return std::abs(np2 - wavelength * std::abs(distance)) <= 1e-12 * np2;
}

Eigen::MatrixXcd fresnel_matrix(const Grid1D& input, const Grid1D& target, double wavelength, double distance) {
    if (!(wavelength > 0.0)) throw ConfigurationError("wavelength must be positive");
    if (distance == 0.0 || !std::isfinite(distance)) throw ConfigurationError("propagation distance must be nonzero");

    const double ld = wavelength * distance;
    const double reach = std::max(std::abs(target.coordinate(0) - input.coordinate(input.n_points - 1)),
                                  std::abs(target.coordinate(target.n_points - 1) - input.coordinate(0)));
    if (reach * input.pitch >= 0.5 * std::abs(ld) && !matched_grids(input, target, wavelength, distance)) {
        std::ostringstream os;
        os << "Fresnel kernel undersampled: input " << describe(input) << " to target " << describe(target)
           << " at d=" << distance << " m needs input pitch below " << 0.5 * std::abs(ld) / reach << " m";
        throw AliasingError(os.str());
    }

    const cdouble norm = input.pitch / std::sqrt(cdouble(0.0, -ld));
    const Eigen::VectorXd x = input.coordinates();
    const Eigen::VectorXd u = target.coordinates();
    Eigen::MatrixXcd H(target.n_points, input.n_points);
    for (Eigen::Index j = 0; j < input.n_points; ++j) {
        for (Eigen::Index i = 0; i < target.n_points; ++i) {
            const double s = u(i) - x(j);
            H(i, j) = norm * std::polar(1.0, -std::numbers::pi * s * s / ld);
        }
    }
    return H;
}

ComplexField fresnel_propagate(const ComplexField& field, double distance, const Grid1D& target) {
    const Eigen::MatrixXcd H = fresnel_matrix(field.grid, target, field.wavelength, distance);
    return ComplexField(target, H * field.amplitude, field.wavelength);
}

ComplexField apply_object(const ComplexField& field, const PhaseObject& object) {
    if (!(field.grid == object.grid) || object.transmission.size() != field.amplitude.size())
        throw ShapeError("object grid " + describe(object.grid) + " does not match field grid " + describe(field.grid));
    return ComplexField(field.grid, field.amplitude.cwiseProduct(object.transmission), field.wavelength);
}

PhaseObject make_phase_slits(int n_slits, double slit_width, double gap, double phase_depth, const Grid1D& grid) {
    if (n_slits < 1) throw ConfigurationError("n_slits must be at least 1");
    if (!(slit_width > 0.0) || gap < 0.0) throw ConfigurationError("slit width must be positive and gap non-negative");
    const double period = slit_width + gap;
    const double span = n_slits * slit_width + (n_slits - 1) * gap;
    if (span > grid.extent() * (1.0 + 1e-12))
        throw ConfigurationError("slit pattern of width " + std::to_string(span) + " m does not fit " + describe(grid));

    PhaseObject obj{grid, Eigen::VectorXcd::Ones(grid.n_points)};
    const cdouble inside = std::polar(1.0, phase_depth);
    for (int k = 0; k < n_slits; ++k) {
        const double c = grid.center + (k - 0.5 * (n_slits - 1)) * period;
        for (Eigen::Index i = 0; i < grid.n_points; ++i)
            if (std::abs(grid.coordinate(i) - c) < 0.5 * slit_width) obj.transmission(i) = inside;
    }
    return obj;
}

Eigen::VectorXcd object_transform(const PhaseObject& object, const Eigen::VectorXd& freqs) {
    const Eigen::VectorXd x = object.grid.coordinates();
    Eigen::VectorXcd T = Eigen::VectorXcd::Zero(freqs.size());
    for (Eigen::Index k = 0; k < freqs.size(); ++k) {
        cdouble acc = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i)
            acc += object.transmission(i) * std::polar(1.0, -2.0 * std::numbers::pi * freqs(k) * x(i));
        T(k) = acc * object.grid.pitch;
    }
    return T;
}

}  // namespace gics
