#include "gics/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gics/error.hpp"
#include "gics/rng.hpp"

namespace gics {

std::string to_string(PhaseStrategy s) {
    switch (s) {
        case PhaseStrategy::ZeroPhase: return "zero";
        case PhaseStrategy::SphericalWave: return "spherical";
        case PhaseStrategy::SeededRandomPhase: return "random";
    }
    return "?";
}

std::string to_string(DiagonalConvention c) {
    return c == DiagonalConvention::ExactIntensity ? "exact" : "paper-sqrt";
}

PhaseStrategy parse_strategy(const std::string& s) {
    if (s == "zero") return PhaseStrategy::ZeroPhase;
    if (s == "spherical") return PhaseStrategy::SphericalWave;
    if (s == "random") return PhaseStrategy::SeededRandomPhase;
    throw ConfigurationError("unknown phase strategy '" + s + "' (expected zero, spherical or random)");
}

DiagonalConvention parse_convention(const std::string& s) {
    if (s == "exact") return DiagonalConvention::ExactIntensity;
    if (s == "paper-sqrt") return DiagonalConvention::PaperSqrt;
    throw ConfigurationError("unknown diagonal convention '" + s + "' (expected exact or paper-sqrt)");
}

std::string SensingMode::name() const {
    switch (kind) {
        case Kind::Homodyne: return "homodyne";
        case Kind::PhaseConjecture: return "conjecture-" + to_string(strategy);
        case Kind::DiagonalOnly: return "diagonal";
    }
    return "?";
}

SensingMode SensingMode::parse(const std::string& name) {
    SensingMode m;
    if (name == "homodyne") {
        m.kind = Kind::Homodyne;
    } else if (name == "diagonal") {
        m.kind = Kind::DiagonalOnly;
    } else if (name.rfind("conjecture-", 0) == 0) {
        m.kind = Kind::PhaseConjecture;
        m.strategy = parse_strategy(name.substr(11));
    } else {
        throw ConfigurationError("unknown sensing mode '" + name +
                                 "' (expected homodyne, conjecture-zero, conjecture-spherical, conjecture-random "
                                 "or diagonal)");
    }
    return m;
}

Eigen::VectorXcd conjecture_field(const Eigen::VectorXd& i_r, const SchemeGeometry& geometry, PhaseStrategy strategy,
                                  std::uint64_t seed) {
    if (i_r.size() != geometry.d1_grid.n_points) throw ShapeError("i_r length does not match D1 grid");
    if ((i_r.array() < 0.0).any()) throw DataError("conjecture_field: negative reference intensity");

    Eigen::VectorXcd e(i_r.size());
    const Eigen::VectorXd r1 = geometry.d1_grid.coordinates();
    Rng rng(seed);
    for (Eigen::Index k = 0; k < e.size(); ++k) {
        double phi = 0.0;
        if (strategy == PhaseStrategy::SphericalWave)
            phi = -std::numbers::pi * r1(k) * r1(k) / (geometry.wavelength * geometry.d1);
        else if (strategy == PhaseStrategy::SeededRandomPhase)
            phi = 2.0 * std::numbers::pi * rng.uniform();
        e(k) = std::polar(std::sqrt(i_r(k)), phi);
    }
    return e;
}

R2Alignment align_r2(const SchemeGeometry& geometry, std::vector<Eigen::Index> r2_pixels) {
    const Eigen::Index n = geometry.d1_grid.n_points;
    const Eigen::Index m2 = geometry.d2_grid.n_points;
    if (r2_pixels.empty()) r2_pixels.push_back(m2 / 2);
    for (Eigen::Index p : r2_pixels)
        if (p < 0 || p >= m2) throw ShapeError("r2 pixel " + std::to_string(p) + " outside D2 grid");

    const double p1 = geometry.d1_grid.pitch;
    R2Alignment al;
    al.pixels = r2_pixels;
    al.shift.resize(r2_pixels.size());
    for (std::size_t k = 0; k < r2_pixels.size(); ++k) {
        const double s = (geometry.d2_grid.coordinate(r2_pixels[k]) - geometry.d2_grid.coordinate(r2_pixels[0])) / p1;
        const double rs = std::round(s);
        if (std::abs(s - rs) > 1e-6) {
            std::ostringstream os;
            os << "r2 pixel " << r2_pixels[k] << " is offset by " << s << " D1 pitches from pixel " << r2_pixels[0]
               << "; multi-r2 systems need integer offsets";
            throw AlignmentError(os.str());
        }
        al.shift[k] = static_cast<Eigen::Index>(rs);
    }
    std::vector<Eigen::Index> sorted = al.shift;
    std::sort(sorted.begin(), sorted.end());
    const Eigen::Index s_ref = sorted[(sorted.size() - 1) / 2];
    const auto ref_k = static_cast<std::size_t>(std::find(al.shift.begin(), al.shift.end(), s_ref) - al.shift.begin());
    for (auto& s : al.shift) s -= s_ref;
    const Eigen::Index s_min = *std::min_element(al.shift.begin(), al.shift.end());
    const Eigen::Index s_max = *std::max_element(al.shift.begin(), al.shift.end());
    al.reference_pixel = r2_pixels[ref_k];
    al.union_size = n + s_max - s_min;
    al.window_offset = s_max;

    const double ld = geometry.wavelength * geometry.d22;
    const double r2_ref = geometry.d2_grid.coordinate(al.reference_pixel);
    al.freq_axis.resize(al.union_size);
    for (Eigen::Index u = 0; u < al.union_size; ++u)
        al.freq_axis(u) = (geometry.d1_grid.coordinate(0) + static_cast<double>(u - s_max) * p1 - r2_ref) / ld;
    return al;
}

SensingSystem build_system(const std::vector<ShotRecord>& shots, const SchemeGeometry& geometry,
                           const SensingMode& mode, std::vector<Eigen::Index> r2_pixels) {
    geometry.validate();
    const Eigen::Index n = geometry.d1_grid.n_points;
    const Eigen::Index m2 = geometry.d2_grid.n_points;
    if (shots.empty()) throw DataError("build_system: no shots");
    const R2Alignment al = align_r2(geometry, std::move(r2_pixels));
    const Eigen::Index nu = al.union_size;
    const double ld = geometry.wavelength * geometry.d22;

    SensingSystem sys;
    sys.mode = mode;
    sys.detector_pixels = n;
    sys.window_offset = al.window_offset;
    sys.r2_pixel = al.reference_pixel;
    sys.freq_axis = al.freq_axis;

    const Eigen::Index rows = static_cast<Eigen::Index>(shots.size() * al.pixels.size());
    if (mode.full()) sys.generators = Eigen::MatrixXcd::Zero(rows, nu);
    sys.diagonal = Eigen::MatrixXd::Zero(rows, nu);
    sys.y.resize(rows);
    sys.row_scale.resize(rows);
    sys.origins.reserve(static_cast<std::size_t>(rows));

    const Eigen::VectorXd r1 = geometry.d1_grid.coordinates();
    Eigen::VectorXcd chirp(n);
    for (Eigen::Index i = 0; i < n; ++i) chirp(i) = std::polar(1.0, std::numbers::pi * r1(i) * r1(i) / ld);

    Eigen::Index row = 0;
    for (const ShotRecord& shot : shots) {
        if (shot.i_r.size() != n || shot.i_w.size() != m2)
            throw ShapeError("shot " + std::to_string(shot.shot_index) + " has detector sizes (" +
                             std::to_string(shot.i_r.size()) + ", " + std::to_string(shot.i_w.size()) +
                             ") but the geometry expects (" + std::to_string(n) + ", " + std::to_string(m2) + ")");
        Eigen::VectorXcd e;
        if (mode.kind == SensingMode::Kind::Homodyne) {
            if (!shot.e_r) throw ModeError("homodyne mode needs the recorded reference field in every shot");
            if (shot.e_r->size() != n) throw ShapeError("e_r length does not match D1 grid");
            e = *shot.e_r;
        } else if (mode.kind == SensingMode::Kind::PhaseConjecture) {
            e = conjecture_field(shot.i_r, geometry, mode.strategy, mode.conjecture_seed);
        }
        if ((shot.i_r.array() < 0.0).any()) throw DataError("negative reference intensity in shot");

        Eigen::VectorXd dcoef = mode.convention == DiagonalConvention::ExactIntensity
                                    ? (e.size() ? Eigen::VectorXd(e.cwiseAbs2()) : shot.i_r)
                                    : Eigen::VectorXd(shot.i_r.cwiseSqrt());

        for (std::size_t k = 0; k < al.pixels.size(); ++k) {
            const Eigen::Index u0 = al.union_start(k);
            sys.diagonal.row(row).segment(u0, n) = dcoef.transpose();
            double norm2 = dcoef.squaredNorm();
            if (mode.full()) {
                const Eigen::VectorXcd g = e.cwiseProduct(chirp);
                sys.generators.row(row).segment(u0, n) = g.transpose();
                const double s2 = g.squaredNorm();
                const double s4 = g.cwiseAbs2().squaredNorm();
                norm2 += 2.0 * (s2 * s2 - s4);
            }
            const double scale = norm2 > 0.0 ? 1.0 / std::sqrt(norm2) : 1.0;
            sys.diagonal.row(row) *= scale;
            if (mode.full()) sys.generators.row(row) *= std::sqrt(scale);
            sys.y(row) = shot.i_w(al.pixels[k]) * scale;
            sys.row_scale(row) = scale;
            sys.origins.push_back({shot.shot_index, al.pixels[k]});
            ++row;
        }
    }
    return sys;
}

void SensingSystem::check() const {
    const Eigen::Index nu = n();
    if (diagonal.rows() != rows() || diagonal.cols() != nu || row_scale.size() != rows())
        throw ShapeError("sensing system: inconsistent dimensions");
    if (mode.full() && (generators.rows() != rows() || generators.cols() != nu))
        throw ShapeError("sensing system: generator block has wrong dimensions");
    if (!mode.full() && generators.size() != 0) throw ShapeError("diagonal-only system carries generators");
}

Eigen::VectorXd SensingSystem::apply(const Eigen::VectorXd& x) const {
    if (x.size() != cols()) throw ShapeError("apply: vector length does not match system columns");
    const Eigen::Index nu = n();
    if (!mode.full()) return diagonal * x;

    Eigen::VectorXd d(nu);
    Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(nu, nu);
    for (Eigen::Index i = 0; i < nu; ++i) {
        d(i) = x(i * nu + i);
        for (Eigen::Index j = i + 1; j < nu; ++j) {
            B(i, j) = cdouble(x(i * nu + j), x(j * nu + i));
            B(j, i) = std::conj(B(i, j));
        }
    }
    // Row k: Re sum_ij conj(g_i) B_ij g_j.
    const Eigen::MatrixXcd GB = generators * B.transpose();
    Eigen::VectorXd out = (generators.conjugate().cwiseProduct(GB)).rowwise().sum().real();
    out.noalias() += diagonal * d;
    return out;
}

Eigen::VectorXd SensingSystem::adjoint(const Eigen::VectorXd& r) const {
    if (r.size() != rows()) throw ShapeError("adjoint: vector length does not match system rows");
    const Eigen::Index nu = n();
    if (!mode.full()) return diagonal.transpose() * r;

    const Eigen::MatrixXcd S = generators.adjoint() * (r.asDiagonal() * generators);
    const Eigen::VectorXd dg = diagonal.transpose() * r;
    Eigen::VectorXd out(nu * nu);
    for (Eigen::Index i = 0; i < nu; ++i) {
        out(i * nu + i) = dg(i);
        for (Eigen::Index j = i + 1; j < nu; ++j) {
            out(i * nu + j) = 2.0 * S(i, j).real();
            out(j * nu + i) = -2.0 * S(i, j).imag();
        }
    }
    return out;
}

Eigen::MatrixXd SensingSystem::columns(const std::vector<Eigen::Index>& idx) const {
    const Eigen::Index nu = n();
    Eigen::MatrixXd out(rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) {
        const Eigen::Index k = idx[c];
        if (k < 0 || k >= cols()) throw ShapeError("column index out of range");
        const auto cc = static_cast<Eigen::Index>(c);
        if (!mode.full()) {
            out.col(cc) = diagonal.col(k);
            continue;
        }
        const Eigen::Index i = k / nu, j = k % nu;
        if (i == j) {
            out.col(cc) = diagonal.col(i);
        } else if (i < j) {
            out.col(cc) = 2.0 * (generators.col(i).conjugate().cwiseProduct(generators.col(j))).real();
        } else {
            out.col(cc) = -2.0 * (generators.col(j).conjugate().cwiseProduct(generators.col(i))).imag();
        }
    }
    return out;
}

Eigen::VectorXd SensingSystem::row(Eigen::Index k) const {
    if (k < 0 || k >= rows()) throw ShapeError("row index out of range");
    if (!mode.full()) return diagonal.row(k).transpose();
    const Eigen::Index nu = n();
    const Eigen::VectorXcd g = generators.row(k).transpose();
    Eigen::VectorXd out(nu * nu);
    for (Eigen::Index i = 0; i < nu; ++i) {
        out(i * nu + i) = diagonal(k, i);
        for (Eigen::Index j = i + 1; j < nu; ++j) {
            const cdouble a = std::conj(g(i)) * g(j);
            out(i * nu + j) = 2.0 * a.real();
            out(j * nu + i) = -2.0 * a.imag();
        }
    }
    return out;
}

Eigen::MatrixXd SensingSystem::a_prime() const {
    Eigen::MatrixXd A(rows(), cols());
    for (Eigen::Index k = 0; k < rows(); ++k) A.row(k) = row(k).transpose();
    return A;
}

SensingSystem SensingSystem::select_rows(const std::vector<Eigen::Index>& keep) const {
    SensingSystem s;
    s.mode = mode;
    s.freq_axis = freq_axis;
    s.detector_pixels = detector_pixels;
    s.window_offset = window_offset;
    s.r2_pixel = r2_pixel;
    const auto m = static_cast<Eigen::Index>(keep.size());
    if (mode.full()) s.generators.resize(m, n());
    s.diagonal.resize(m, n());
    s.y.resize(m);
    s.row_scale.resize(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const Eigen::Index r = keep[static_cast<std::size_t>(k)];
        if (r < 0 || r >= rows()) throw ShapeError("row index out of range");
        if (mode.full()) s.generators.row(k) = generators.row(r);
        s.diagonal.row(k) = diagonal.row(r);
        s.y(k) = y(r);
        s.row_scale(k) = row_scale(r);
        s.origins.push_back(origins.empty() ? RowOrigin{} : origins[static_cast<std::size_t>(r)]);
    }
    return s;
}

}  // namespace gics
