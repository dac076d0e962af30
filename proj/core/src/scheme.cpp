#include "gics/scheme.hpp"

#include <cmath>
#include <sstream>

#include "gics/error.hpp"
#include "gics/rng.hpp"

namespace gics {

void SchemeGeometry::validate() const {
    if (!(wavelength > 0.0)) throw ConfigurationError("wavelength must be positive");
    if (!(d1 > 0.0) || !(d21 > 0.0) || !(d22 > 0.0)) throw ConfigurationError("distances d1, d21, d22 must be positive");
    if (std::abs(d1 - (d21 + d22)) >= 1e-12) {
        std::ostringstream os;
        os << "Fourier condition violated: d1 = " << d1 << " m but d21 + d22 = " << d21 + d22 << " m";
        throw ConfigurationError(os.str());
    }
    if (noise_sigma < 0.0) throw ConfigurationError("noise_sigma must be non-negative");
    source.validate();
}

ShotSimulator::ShotSimulator(const SchemeGeometry& geometry, const PhaseObject& object)
    : geometry_(geometry), object_(object) {
    geometry_.validate();
    if (!(object.grid == geometry.object_grid) || object.transmission.size() != object.grid.n_points)
        throw ShapeError("object grid does not match geometry object grid");
    h_s1_ = fresnel_matrix(geometry.source.grid, geometry.d1_grid, geometry.wavelength, geometry.d1);
    h_so_ = fresnel_matrix(geometry.source.grid, geometry.object_grid, geometry.wavelength, geometry.d21);
    h_o2_ = fresnel_matrix(geometry.object_grid, geometry.d2_grid, geometry.wavelength, geometry.d22);
}

ComplexField ShotSimulator::object_plane_field(std::int64_t shot_index) const {
    const ComplexField src = make_speckle_field(geometry_.source, shot_index, geometry_.wavelength);
    return ComplexField(geometry_.object_grid, h_so_ * src.amplitude, geometry_.wavelength);
}

namespace {

void add_noise(Eigen::VectorXd& v, double sigma, Rng& rng) {
    const double scale = sigma * v.mean();
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = std::max(0.0, v(k) + scale * rng.normal());
}

}  // namespace

ShotRecord ShotSimulator::simulate(std::int64_t shot_index, bool record_field) const {
    const ComplexField src = make_speckle_field(geometry_.source, shot_index, geometry_.wavelength);

    // Reference arm and test arm see the same source realisation.
    Eigen::VectorXcd e_r = h_s1_ * src.amplitude;
    const Eigen::VectorXcd e_o = (h_so_ * src.amplitude).cwiseProduct(object_.transmission);
    const Eigen::VectorXcd e_w = h_o2_ * e_o;

    ShotRecord rec;
    rec.shot_index = shot_index;
    rec.i_r = e_r.cwiseAbs2();
    rec.i_w = e_w.cwiseAbs2();

    if (geometry_.noise_sigma > 0.0) {
        Rng rng(derive_seed(geometry_.source.seed ^ 0x6e6f697365ULL, static_cast<std::uint64_t>(shot_index)));
        const Eigen::VectorXd clean = rec.i_r;
        add_noise(rec.i_r, geometry_.noise_sigma, rng);
        add_noise(rec.i_w, geometry_.noise_sigma, rng);
        // Keep |e_r|^2 == i_r by rescaling the amplitude and keeping the phase.
        for (Eigen::Index k = 0; k < e_r.size(); ++k) {
            if (clean(k) > 0.0)
                e_r(k) *= std::sqrt(rec.i_r(k) / clean(k));
            else
                e_r(k) = std::sqrt(rec.i_r(k));
        }
        rec.i_r = e_r.cwiseAbs2();
    }
    if (record_field) rec.e_r = std::move(e_r);
    return rec;
}

std::vector<ShotRecord> ShotSimulator::simulate_range(std::int64_t first, std::int64_t count, bool record_field) const {
    std::vector<ShotRecord> out;
    out.reserve(static_cast<std::size_t>(std::max<std::int64_t>(count, 0)));
    for (std::int64_t k = 0; k < count; ++k) out.push_back(simulate(first + k, record_field));
    return out;
}

ShotRecord simulate_shot(const SchemeGeometry& geometry, const PhaseObject& object, std::int64_t shot_index,
                         bool record_field) {
    return ShotSimulator(geometry, object).simulate(shot_index, record_field);
}

double validate_test_intensity(const SchemeGeometry& geometry, const PhaseObject& object, std::int64_t shot_index) {
    SchemeGeometry clean = geometry;
    clean.noise_sigma = 0.0;
    const ShotSimulator sim(clean, object);
    const ShotRecord rec = sim.simulate(shot_index, false);
    const Eigen::VectorXcd E = sim.object_plane_field(shot_index).amplitude;
    const Eigen::VectorXcd& t = object.transmission;
    const Eigen::MatrixXcd& h = sim.object_to_d2();

    const Eigen::Index nx = E.size();
    Eigen::VectorXd direct(h.rows());
    Eigen::VectorXcd q(nx);
    for (Eigen::Index p = 0; p < h.rows(); ++p) {
        for (Eigen::Index x = 0; x < nx; ++x) q(x) = E(x) * t(x) * h(p, x);
        double acc = 0.0;
        for (Eigen::Index x = 0; x < nx; ++x) {
            const cdouble cx = std::conj(q(x));
            for (Eigen::Index xp = 0; xp < nx; ++xp) acc += (cx * q(xp)).real();
        }
        direct(p) = acc;
    }

    const Eigen::VectorXd& seq = rec.i_w;
    const double peak = std::max(seq.cwiseAbs().maxCoeff(), direct.cwiseAbs().maxCoeff());
    if (peak == 0.0) return 0.0;
    return (seq - direct).cwiseAbs().maxCoeff() / peak;
}

}  // namespace gics
