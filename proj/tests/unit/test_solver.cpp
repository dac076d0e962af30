#include <doctest.h>

#include <cmath>
#include <set>

#include "gics/error.hpp"
#include "gics/rng.hpp"
#include "gics/solver.hpp"

using namespace gics;

namespace {

struct Planted {
    Eigen::MatrixXd A;
    Eigen::VectorXd x0, y;
};

Planted planted(std::uint64_t seed, Eigen::Index m = 40, Eigen::Index n = 100, int k = 5, double noise = 0.0) {
    Rng rng(seed);
    Planted p;
    p.A.resize(m, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < m; ++i) p.A(i, j) = rng.normal() / std::sqrt(static_cast<double>(m));
    p.x0 = Eigen::VectorXd::Zero(n);
    std::set<Eigen::Index> s;
    while (static_cast<int>(s.size()) < k) s.insert(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
    for (Eigen::Index i : s) p.x0(i) = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (1.0 + rng.uniform());
    p.y = p.A * p.x0;
    for (auto& v : p.y) v += noise * rng.normal();
    return p;
}

SolverConfig config(double lambda, double tol = 1e-10) {
    SolverConfig c;
    c.lambda_reg = lambda;
    c.tol = tol;
    return c;
}

}  // namespace

TEST_CASE("soft threshold closed form") {
    const Eigen::VectorXd v = (Eigen::VectorXd(4) << 3.0, 0.5, -1.5, -1.0).finished();
    const Eigen::VectorXd s = soft_threshold(v, 1.0);
    CHECK(s(0) == 2.0);
    CHECK(s(1) == 0.0);
    CHECK(s(2) == -0.5);
    CHECK(s(3) == 0.0);
}

TEST_CASE("identity system returns the soft threshold of y") {
    Rng rng(1);
    Eigen::VectorXd y(16);
    for (auto& v : y) v = 3.0 * rng.normal();
    y(0) = 3.0;
    y(1) = 0.5;
    const SolveResult r = solve_l1(Eigen::MatrixXd::Identity(16, 16), y, config(1.0));
    CHECK((r.x - soft_threshold(y, 1.0)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(r.x(0) == doctest::Approx(2.0));
    CHECK(r.x(1) == 0.0);
    CHECK(r.converged);
}

TEST_CASE("lambda at or above lambda_max gives exactly zero") {
    const Planted p = planted(2);
    const double lm = lambda_max(p.A, p.y);
    CHECK(lm == doctest::Approx((p.A.transpose() * p.y).cwiseAbs().maxCoeff()));
    for (double f : {1.0, 1.5}) CHECK(solve_l1(p.A, p.y, config(f * lm)).x.cwiseAbs().maxCoeff() == 0.0);
    CHECK(solve_l1(p.A, Eigen::VectorXd::Zero(40), config(0.1)).x.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("planted sparse recovery with debiasing") {
    for (std::uint64_t seed : {3, 4, 5}) {
        const Planted p = planted(seed);
        SolverConfig c = config(1e-3 * lambda_max(p.A, p.y));
        c.debias = true;
        const SolveResult r = solve_l1(p.A, p.y, c);
        CHECK((r.x - p.x0).norm() / p.x0.norm() < 1e-3);
    }
}

TEST_CASE("solution satisfies the optimality conditions") {
    const Planted p = planted(6, 40, 100, 8, 0.05);
    const double lam = 0.05 * lambda_max(p.A, p.y);
    const SolverConfig c = config(lam, 1e-9);
    const SolveResult r = solve_l1(p.A, p.y, c);
    REQUIRE(r.converged);
    const Eigen::VectorXd g = p.A.transpose() * (p.A * r.x - p.y);
    for (Eigen::Index k = 0; k < g.size(); ++k) {
        if (r.x(k) != 0.0)
            CHECK(std::abs(g(k) + lam * (r.x(k) > 0 ? 1.0 : -1.0)) <= 10.0 * c.tol * lam);
        else
            CHECK(std::abs(g(k)) <= lam * (1.0 + 10.0 * c.tol));
    }
    CHECK(r.residual == doctest::Approx((p.A * r.x - p.y).norm()));
}

TEST_CASE("objective trace is non-increasing") {
    const Planted p = planted(7, 60, 200, 12, 0.1);
    const SolveResult r = solve_l1(p.A, p.y, config(0.02 * lambda_max(p.A, p.y), 1e-8));
    REQUIRE(r.objective_trace.size() > 2);
    for (std::size_t i = 1; i < r.objective_trace.size(); ++i)
        CHECK(r.objective_trace[i] <= r.objective_trace[i - 1] * (1.0 + 1e-14));
    const double final_obj = 0.5 * (p.A * r.x - p.y).squaredNorm() + r.lambda * r.x.lpNorm<1>();
    CHECK(r.objective_trace.back() == doctest::Approx(final_obj).epsilon(1e-10));
}

TEST_CASE("solves are bitwise deterministic") {
    const Planted p = planted(8, 50, 150, 10, 0.05);
    const SolverConfig c = config(0.01 * lambda_max(p.A, p.y), 1e-8);
    const SolveResult a = solve_l1(p.A, p.y, c), b = solve_l1(p.A, p.y, c);
    CHECK(a.x == b.x);
    CHECK(a.objective_trace == b.objective_trace);
    CHECK(a.iterations_used == b.iterations_used);
}

TEST_CASE("scaling rows and y by c with lambda scaled by c^2 keeps the solution") {
    const Planted p = planted(9, 40, 100, 6, 0.05);
    const double lam = 0.05 * lambda_max(p.A, p.y);
    const double cs = 3.7;
    const SolveResult a = solve_l1(p.A, p.y, config(lam));
    const SolveResult b = solve_l1(Eigen::MatrixXd(cs * p.A), Eigen::VectorXd(cs * p.y), config(cs * cs * lam));
    Eigen::Index ia, ib;
    a.x.cwiseAbs().maxCoeff(&ia);
    b.x.cwiseAbs().maxCoeff(&ib);
    CHECK(ia == ib);
    for (Eigen::Index k = 0; k < a.x.size(); ++k) CHECK((a.x(k) != 0.0) == (b.x(k) != 0.0));
    CHECK((a.x - b.x).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("lambda selection") {
    const Planted p = planted(10, 80, 200, 8, 0.05);
    const double lm = lambda_max(p.A, p.y);
    const SolverConfig c = config(0.0, 1e-8);

    SUBCASE("a single lambda_max entry selects it and gives zero") {
        const LambdaSelection s = select_lambda(p.A, p.y, {lm}, c);
        CHECK(s.lambda == lm);
        CHECK(s.index == 0);
        SolverConfig cc = c;
        cc.lambda_reg = s.lambda;
        CHECK(solve_l1(p.A, p.y, cc).x.cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("duplicate entries give identical results") {
        const LambdaSelection s = select_lambda(p.A, p.y, {0.1 * lm, 0.1 * lm}, c);
        CHECK(s.held_out[0] == s.held_out[1]);
        const LambdaSelection t = select_lambda(p.A, p.y, {0.1 * lm, 0.1 * lm}, c);
        CHECK(t.held_out == s.held_out);
    }

    SUBCASE("chosen lambda is close to the best on the grid") {
        std::vector<double> grid;
        for (int i = 0; i < 12; ++i) grid.push_back(lm * std::pow(0.5, i));
        const LambdaSelection s = select_lambda(p.A, p.y, grid, c);
        CHECK(s.held_out[s.index] <= *std::min_element(s.held_out.begin(), s.held_out.end()) * 2.0);
        // exhaustive evaluation of the recovery error on the full data
        std::vector<double> err;
        for (double l : grid) {
            SolverConfig cc = c;
            cc.lambda_reg = l;
            err.push_back((solve_l1(p.A, p.y, cc).x - p.x0).norm());
        }
        CHECK(err[s.index] <= 2.0 * *std::min_element(err.begin(), err.end()));
    }

    CHECK_THROWS_AS(select_lambda(p.A, p.y, {}, c), ConfigurationError);
}

TEST_CASE("spectrum extraction") {
    Rng rng(11);
    const Eigen::Index n = 7;
    Eigen::VectorXcd T(n);
    for (auto& t : T) t = cdouble(rng.normal(), rng.normal());
    const HermitianPacking P(n);
    const Eigen::VectorXd f = Eigen::VectorXd::LinSpaced(n, -3, 3);
    Eigen::MatrixXcd B(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) B(i, j) = std::conj(T(i)) * T(j);

    const SpectrumEstimate s = extract_spectrum(P.pack(B), P, DiagonalConvention::ExactIntensity, f);
    const Eigen::VectorXd want = T.cwiseAbs() / T.cwiseAbs().maxCoeff();
    CHECK((s.magnitude - want).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(s.freq == f);
    REQUIRE(s.hermitian.has_value());
    CHECK((*s.hermitian - B).cwiseAbs().maxCoeff() < 1e-10);

    const SpectrumEstimate sqrt_est = extract_spectrum(T.cwiseAbs(), P, DiagonalConvention::PaperSqrt, f);
    CHECK((sqrt_est.magnitude - want).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_FALSE(sqrt_est.hermitian.has_value());

    CHECK(extract_spectrum(Eigen::VectorXd::Zero(n * n), P, DiagonalConvention::ExactIntensity, f)
              .magnitude.isZero(0.0));
    Eigen::VectorXd neg = -Eigen::VectorXd::Ones(n);
    neg(2) = 4.0;
    const SpectrumEstimate clamped = extract_spectrum(neg, P, DiagonalConvention::ExactIntensity, f);
    CHECK(clamped.magnitude(2) == 1.0);
    CHECK(clamped.magnitude(0) == 0.0);
    CHECK_THROWS_AS(extract_spectrum(Eigen::VectorXd::Zero(10), P, DiagonalConvention::ExactIntensity, f), ShapeError);
}

TEST_CASE("invalid solver configuration") {
    const Planted p = planted(12);
    SolverConfig c = config(-1.0);
    CHECK_THROWS_AS(solve_l1(p.A, p.y, c), ConfigurationError);
    c = config(0.1);
    c.max_iters = 0;
    CHECK_THROWS_AS(solve_l1(p.A, p.y, c), ConfigurationError);
    c = config(0.1, 0.0);
    CHECK_THROWS_AS(solve_l1(p.A, p.y, c), ConfigurationError);
    CHECK_THROWS_AS(solve_l1(p.A, Eigen::VectorXd::Zero(3), config(0.1)), ShapeError);
}
