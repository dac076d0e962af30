#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gics/error.hpp"
#include "gics/optics.hpp"
#include "gics/rng.hpp"
#include "gics/scheme.hpp"
#include "gics/sensing.hpp"

using namespace gics;

namespace {

struct Fixture {
    SchemeGeometry g;
    PhaseObject obj = make_phase_slits(5, 600e-6, 600e-6, std::numbers::pi, g.object_grid);
    std::vector<ShotRecord> shots;

    explicit Fixture(int k = 50, std::uint64_t seed = 1) {
        g.source.seed = seed;
        shots = ShotSimulator(g, obj).simulate_range(0, k, true);
    }

    // ||A' pack(B_true) - y|| / ||y|| on raw (unnormalised) rows
    double forward_residual(const SensingSystem& s) const {
        const Eigen::VectorXcd T = object_transform(obj, s.freq_axis) * (g.d1_grid.pitch / (g.wavelength * g.d22));
        const Eigen::VectorXd x = s.packing().pack(outer_spectrum(T));
        const Eigen::VectorXd fit = s.apply(x).cwiseQuotient(s.row_scale);
        const Eigen::VectorXd y = s.y.cwiseQuotient(s.row_scale);
        return (fit - y).norm() / y.norm();
    }
};

}  // namespace

TEST_CASE("sensing mode names") {
    for (const std::string n : {"homodyne", "conjecture-zero", "conjecture-spherical", "conjecture-random", "diagonal"})
        CHECK(SensingMode::parse(n).name() == n);
    CHECK(SensingMode::parse("conjecture-random").strategy == PhaseStrategy::SeededRandomPhase);
    CHECK_FALSE(SensingMode::parse("diagonal").full());
    CHECK_THROWS_AS(SensingMode::parse("phase"), ConfigurationError);
    CHECK(parse_convention(to_string(DiagonalConvention::PaperSqrt)) == DiagonalConvention::PaperSqrt);
}

TEST_CASE("conjecture fields keep the measured amplitude") {
    const SchemeGeometry g;
    Rng rng(6);
    Eigen::VectorXd ir(g.d1_grid.n_points);
    for (auto& v : ir) v = rng.uniform() * 3.0;
    for (auto s : {PhaseStrategy::ZeroPhase, PhaseStrategy::SphericalWave, PhaseStrategy::SeededRandomPhase}) {
        const Eigen::VectorXcd e = conjecture_field(ir, g, s, 7);
        CHECK((e.cwiseAbs2() - ir).cwiseAbs().maxCoeff() < 1e-14);
    }
    const Eigen::VectorXcd z = conjecture_field(ir, g, PhaseStrategy::ZeroPhase);
    CHECK(z.imag().isZero(0.0));
    CHECK(z.real() == ir.cwiseSqrt());

    CHECK(conjecture_field(ir, g, PhaseStrategy::SeededRandomPhase, 7) ==
          conjecture_field(ir, g, PhaseStrategy::SeededRandomPhase, 7));
    CHECK(conjecture_field(ir, g, PhaseStrategy::SeededRandomPhase, 7) !=
          conjecture_field(ir, g, PhaseStrategy::SeededRandomPhase, 8));

    const Eigen::VectorXcd sph = conjecture_field(Eigen::VectorXd::Ones(ir.size()), g, PhaseStrategy::SphericalWave);
    const double r = g.d1_grid.coordinate(0);
    CHECK(std::arg(sph(0) * std::polar(1.0, std::numbers::pi * r * r / (g.wavelength * g.d1))) ==
          doctest::Approx(0.0).epsilon(1e-9));

    ir(3) = -1e-3;
    CHECK_THROWS_AS(conjecture_field(ir, g, PhaseStrategy::ZeroPhase), DataError);
}

TEST_CASE("system shapes") {
    const Fixture f;
    const SensingSystem full = build_system(f.shots, f.g, SensingMode::parse("homodyne"));
    const Eigen::Index n = f.g.d1_grid.n_points;
    CHECK(full.rows() == 50);
    CHECK(full.cols() == n * n);
    CHECK(full.r2_pixel == f.g.d2_grid.n_points / 2);
    CHECK_NOTHROW(full.check());

    const SensingSystem diag = build_system(f.shots, f.g, SensingMode::parse("diagonal"));
    CHECK(diag.rows() == 50);
    CHECK(diag.cols() == n);

    const SensingSystem multi = build_system(f.shots, f.g, SensingMode::parse("conjecture-zero"), {120, 128, 136});
    CHECK(multi.rows() == 150);
    CHECK(multi.n() == n + 16);
    CHECK(multi.r2_pixel == 128);

    for (Eigen::Index i = 1; i < multi.n(); ++i) CHECK(multi.freq_axis(i) > multi.freq_axis(i - 1));
    const double ld = f.g.wavelength * f.g.d22;
    const double r2 = f.g.d2_grid.coordinate(128);
    for (Eigen::Index i = 0; i < n; i += 17)
        CHECK(multi.freq_axis(multi.window_offset + i) == doctest::Approx((f.g.d1_grid.coordinate(i) - r2) / ld));
}

TEST_CASE("rows are unit norm and match the explicit packing") {
    const Fixture f(6);
    for (const std::string name : {"homodyne", "conjecture-spherical", "diagonal"}) {
        CAPTURE(name);
        const SensingMode mode = SensingMode::parse(name);
        const SensingSystem s = build_system(f.shots, f.g, mode, {124, 128, 132});
        const Eigen::MatrixXd A = s.a_prime();
        for (Eigen::Index k = 0; k < s.rows(); ++k) CHECK(A.row(k).norm() == doctest::Approx(1.0));

        // explicit row for shot 2 at the reference pixel, placed on the union grid
        const Eigen::Index k = 2 * 3 + 1;
        REQUIRE(s.origins[k].shot_index == 2);
        REQUIRE(s.origins[k].r2_pixel == 128);
        const ShotRecord& shot = f.shots[2];
        const Eigen::VectorXcd e =
            mode.kind == SensingMode::Kind::Homodyne ? *shot.e_r : conjecture_field(shot.i_r, f.g, mode.strategy);
        const Eigen::Index n = f.g.d1_grid.n_points, N = s.n(), off = s.window_offset;
        Eigen::VectorXd want = Eigen::VectorXd::Zero(s.cols());
        if (mode.full()) {
            Eigen::VectorXcd eu = Eigen::VectorXcd::Zero(N);
            eu.segment(off, n) = e;
            Eigen::VectorXd ir = Eigen::VectorXd::Zero(N);
            ir.segment(off, n) = shot.i_r;
            Eigen::VectorXd r1(N);
            for (Eigen::Index i = 0; i < N; ++i) r1(i) = f.g.d1_grid.coordinate(i - off);
            want = pack_row(complex_sensing_row(eu, r1, f.g.wavelength, f.g.d22), ir, mode.convention);
        } else {
            want.segment(off, n) = shot.i_r;
        }
        want /= want.norm();
        CHECK((A.row(k).transpose() - want).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(s.y(k) == doctest::Approx(shot.i_w(128) * s.row_scale(k)));
    }
}

TEST_CASE("factored products agree with the dense matrix") {
    const Fixture f(5);
    for (const std::string name : {"homodyne", "diagonal"}) {
        const SensingSystem s = build_system(f.shots, f.g, SensingMode::parse(name), {124, 128, 132});
        const Eigen::MatrixXd A = s.a_prime();
        Rng rng(12);
        Eigen::VectorXd x(s.cols()), r(s.rows());
        for (auto& v : x) v = rng.normal();
        for (auto& v : r) v = rng.normal();
        CHECK((s.apply(x) - A * x).cwiseAbs().maxCoeff() < 1e-10 * (A * x).cwiseAbs().maxCoeff());
        CHECK((s.adjoint(r) - A.transpose() * r).cwiseAbs().maxCoeff() < 1e-10 * r.cwiseAbs().maxCoeff());
        const std::vector<Eigen::Index> idx{0, 3, s.cols() - 1};
        const Eigen::MatrixXd cols = s.columns(idx);
        for (std::size_t c = 0; c < idx.size(); ++c)
            CHECK((cols.col(static_cast<Eigen::Index>(c)) - A.col(idx[c])).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((s.row(4).transpose() - A.row(4)).cwiseAbs().maxCoeff() < 1e-14);

        const SensingSystem sub = s.select_rows({4, 1});
        CHECK(sub.rows() == 2);
        CHECK(sub.y(0) == s.y(4));
        CHECK(sub.origins[1].shot_index == s.origins[1].shot_index);
    }
}

TEST_CASE("homodyne forward model fits noiseless data") {
    const Fixture f;
    const SensingSystem s = build_system(f.shots, f.g, SensingMode::parse("homodyne"));
    CHECK(f.forward_residual(s) < 0.05);
}

TEST_CASE("homodyne residual does not exceed the conjecture residual") {
    double hom = 0.0, conj = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Fixture f(20, seed);
        hom += f.forward_residual(build_system(f.shots, f.g, SensingMode::parse("homodyne")));
        conj += f.forward_residual(build_system(f.shots, f.g, SensingMode::parse("conjecture-zero")));
    }
    CHECK(hom <= conj);
}

TEST_CASE("build_system errors") {
    Fixture f(3);
    SchemeGeometry odd = f.g;
    odd.d2_grid.pitch *= 1.5;
    CHECK_THROWS_AS(build_system(f.shots, odd, SensingMode::parse("diagonal"), {128, 129}), AlignmentError);
    CHECK_NOTHROW(build_system(f.shots, odd, SensingMode::parse("diagonal"), {128, 130}));

    std::vector<ShotRecord> no_field = f.shots;
    no_field[1].e_r.reset();
    CHECK_THROWS_AS(build_system(no_field, f.g, SensingMode::parse("homodyne")), ModeError);
    CHECK_NOTHROW(build_system(no_field, f.g, SensingMode::parse("conjecture-zero")));

    CHECK_THROWS_AS(build_system({}, f.g, SensingMode::parse("diagonal")), DataError);
    CHECK_THROWS_AS(build_system(f.shots, f.g, SensingMode::parse("diagonal"), {999}), ShapeError);

    SchemeGeometry small = f.g;
    small.d1_grid.n_points = 128;
    CHECK_THROWS_AS(build_system(f.shots, small, SensingMode::parse("diagonal")), ShapeError);
}
