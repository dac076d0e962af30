#include "gics/spectrum.hpp"

#include "gics/error.hpp"

namespace gics {

Eigen::VectorXd unit_peak(const Eigen::VectorXd& v) {
    if (v.size() == 0) return v;
    const double m = v.cwiseAbs().maxCoeff();
    if (m == 0.0 || !std::isfinite(m)) return v;
    return v / m;
}

SpectrumEstimate SpectrumEstimate::window(Eigen::Index offset, Eigen::Index n) const {
    if (offset < 0 || n < 0 || offset + n > size()) throw ShapeError("spectrum window out of range");
    SpectrumEstimate w;
    w.freq = freq.segment(offset, n);
    w.magnitude = unit_peak(magnitude.segment(offset, n));
    w.source = source;
    if (hermitian) w.hermitian = hermitian->block(offset, offset, n, n);
    return w;
}

Eigen::VectorXd detector_frequencies(const Grid1D& d1_grid, double r2, double wavelength, double d22) {
    return (d1_grid.coordinates().array() - r2) / (wavelength * d22);
}

SpectrumEstimate spectrum_oracle(const PhaseObject& object, const Eigen::VectorXd& freqs) {
    SpectrumEstimate s;
    s.freq = freqs;
    s.magnitude = unit_peak(object_transform(object, freqs).cwiseAbs());
    s.source = "oracle";
    return s;
}

SpectrumEstimate spectrum_oracle(const PhaseObject& object, const Eigen::VectorXd& r, double lambda_d22) {
    if (!(lambda_d22 > 0.0)) throw ConfigurationError("lambda*d22 must be positive");
    return spectrum_oracle(object, Eigen::VectorXd(r / lambda_d22));
}

}  // namespace gics
