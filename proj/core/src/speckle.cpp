#include <cmath>
#include <vector>

#include "gics/error.hpp"
#include "gics/optics.hpp"
#include "gics/rng.hpp"

namespace gics {

ComplexField make_speckle_field(const SourceModel& source, std::int64_t shot_index, double wavelength) {
    if (shot_index < 0) throw ConfigurationError("shot_index must be non-negative");
    source.validate();

    const Grid1D& g = source.grid;
    const double sigma = source.correlation_length / g.pitch;  // in samples
    const Eigen::Index pad = sigma > 0.0 ? static_cast<Eigen::Index>(std::ceil(5.0 * sigma)) : 0;

    Rng rng(derive_seed(source.seed, static_cast<std::uint64_t>(shot_index)));
    const Eigen::Index nw = g.n_points + 2 * pad;
    std::vector<cdouble> white(static_cast<std::size_t>(nw));
    for (auto& w : white) {
        const double re = rng.normal();
        const double im = rng.normal();
        w = cdouble(re, im) * std::sqrt(0.5);
    }

    std::vector<double> kernel(static_cast<std::size_t>(2 * pad + 1), 1.0);
    if (pad > 0) {
        double ss = 0.0;
        for (Eigen::Index k = -pad; k <= pad; ++k) {
            const double v = std::exp(-0.5 * k * k / (sigma * sigma));
            kernel[static_cast<std::size_t>(k + pad)] = v;
            ss += v * v;
        }
        for (auto& v : kernel) v /= std::sqrt(ss);
    }

    const double amp = std::sqrt(source.mean_intensity);
    const double half = 0.5 * source.width;
    Eigen::VectorXcd E = Eigen::VectorXcd::Zero(g.n_points);
    for (Eigen::Index i = 0; i < g.n_points; ++i) {
        if (std::abs(g.coordinate(i) - g.center) > half) continue;
        cdouble acc = 0.0;
        for (Eigen::Index k = 0; k <= 2 * pad; ++k)
            acc += kernel[static_cast<std::size_t>(k)] * white[static_cast<std::size_t>(i + k)];
        E(i) = amp * acc;
    }
    return ComplexField(g, std::move(E), wavelength);
}

}  // namespace gics
