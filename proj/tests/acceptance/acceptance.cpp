// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gics/bench.hpp"
#include "gics/config.hpp"
#include "gics/optics.hpp"
#include "gics/packing.hpp"
#include "gics/pipeline.hpp"
#include "gics/report.hpp"
#include "gics/rng.hpp"
#include "gics/scheme.hpp"
#include "gics/sensing.hpp"
#include "gics/solver.hpp"

using namespace gics;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

Eigen::MatrixXcd random_hermitian(Rng& rng, Eigen::Index n) {
    Eigen::MatrixXcd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        m(i, i) = cdouble(rng.normal(), 0.0);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            m(i, j) = cdouble(rng.normal(), rng.normal());
            m(j, i) = std::conj(m(i, j));
        }
    }
    return m;
}

Outcome packing_identity() {
    Rng rng(101);
    double worst_dot = 0.0, worst_im = 0.0;
    for (Eigen::Index n : {2, 4, 8, 16}) {
        const HermitianPacking P(n);
        for (int t = 0; t < 100; ++t) {
            const Eigen::MatrixXcd A = random_hermitian(rng, n);
            const Eigen::MatrixXcd B = random_hermitian(rng, n);
            const Eigen::VectorXd row = pack_row(A, Eigen::VectorXd::Zero(n), DiagonalConvention::ExactIntensity);
            cdouble full = 0.0;
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j < n; ++j) full += A(i, j) * B(i, j);
            worst_dot = std::max(worst_dot, std::abs(row.dot(P.pack(B)) - full.real()));
            worst_im = std::max(worst_im, std::abs(full.imag()));
        }
    }
    return {worst_dot < 1e-12 && worst_im < 1e-12,
            "max |packed - Re| = " + fmt(worst_dot) + ", max |Im| = " + fmt(worst_im) + " (limit 1e-12)"};
}

Outcome forward_consistency() {
    const auto t0 = std::chrono::steady_clock::now();
    const RunConfig cfg = preset_config("paper-sim");
    const SchemeGeometry g = cfg.seeded_geometry();
    const PhaseObject obj = cfg.make_object();

    double worst = 0.0;
    for (int s = 0; s < 20; ++s) worst = std::max(worst, validate_test_intensity(g, obj, 1000 + s));

    const ShotSimulator sim(g, obj);
    const auto shots = sim.simulate_range(0, cfg.acquisition.shots, true);
    const SensingSystem sys = build_system(shots, g, SensingMode::parse("homodyne"), cfg.acquisition.r2_pixels);
    const Eigen::VectorXcd T =
        object_transform(obj, sys.freq_axis) * (g.d1_grid.pitch / (g.wavelength * g.d22));
    const Eigen::VectorXd x = sys.packing().pack(outer_spectrum(T));
    const Eigen::VectorXd raw_fit = sys.apply(x).cwiseQuotient(sys.row_scale);
    const Eigen::VectorXd raw_y = sys.y.cwiseQuotient(sys.row_scale);
    const double rel = (raw_fit - raw_y).norm() / raw_y.norm();
    const double t = seconds_since(t0);
    return {worst < 1e-6 && rel < 0.05 && t < 60.0,
            "double-sum residual " + fmt(worst) + " (< 1e-6), homodyne system residual " + fmt(rel) +
                " (< 0.05), " + fmt(t) + " s (< 60)"};
}

Outcome solver_oracle() {
    Rng rng(2024);
    const Eigen::Index m = 40, n = 100;
    Eigen::MatrixXd A(m, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < m; ++i) A(i, j) = rng.normal() / std::sqrt(static_cast<double>(m));
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
    std::set<Eigen::Index> support;
    while (support.size() < 5) support.insert(static_cast<Eigen::Index>(rng.below(n)));
    for (Eigen::Index k : support) x0(k) = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (1.0 + rng.uniform());
    const Eigen::VectorXd y = A * x0;

    SolverConfig cfg;
    cfg.lambda_reg = 1e-3 * lambda_max(A, y);
    cfg.debias = true;
    cfg.tol = 1e-10;
    const SolveResult r = solve_l1(A, y, cfg);
    const double rel = (r.x - x0).norm() / x0.norm();

    SolverConfig null_cfg;
    null_cfg.lambda_reg = 1.0;
    const SolveResult z = solve_l1(A, Eigen::VectorXd::Zero(m), null_cfg);
    const bool null_exact = z.x.cwiseAbs().maxCoeff() == 0.0;

    const Eigen::VectorXd v = (Eigen::VectorXd(5) << 3.0, -0.5, 0.2, -2.0, 1.0).finished();
    const Eigen::VectorXd want = (Eigen::VectorXd(5) << 2.0, 0.0, 0.0, -1.0, 0.0).finished();
    const bool st_exact = soft_threshold(v, 1.0) == want;

    return {rel < 1e-3 && null_exact && st_exact, "planted recovery error " + fmt(rel) + " (< 1e-3), null " +
                                                      (null_exact ? "exact" : "NOT exact") + ", soft-threshold " +
                                                      (st_exact ? "exact" : "NOT exact")};
}

// Per-mode Pearson/NMSE means of a K=50 sweep, filled on demand.
struct SweepCache {
    std::map<std::string, SweepRow> rows;
    double homodyne_seconds = 0.0;
    double others_seconds = 0.0;

    SweepSpec spec(const std::vector<std::string>& modes, std::vector<int> ks) const {
        SweepSpec s = sweep_spec(preset_config("paper-sim"));
        s.modes = modes;
        s.k_values = std::move(ks);
        s.n_seeds = 10;
        return s;
    }

    void run(const std::vector<std::string>& modes, double& seconds) {
        const auto t0 = std::chrono::steady_clock::now();
        const SweepResult res = efficiency_sweep(spec(modes, {50}));
        seconds = seconds_since(t0);
        for (const auto& row : res.rows) rows[row.mode] = row;
    }

    const SweepRow& homodyne() {
        if (!rows.count("homodyne")) run({"homodyne"}, homodyne_seconds);
        return rows.at("homodyne");
    }
    void others() {
        if (!rows.count("diagonal"))
            run({"conjecture-zero", "conjecture-spherical", "conjecture-random", "diagonal"}, others_seconds);
    }
};

std::string failures(const SweepRow& r) {
    return r.n_failed ? " [" + std::to_string(r.n_failed) + " failed runs]" : "";
}

Outcome homodyne_reconstruction(SweepCache& cache) {
    const SweepRow& h = cache.homodyne();
    const double p = h.mean.pearson_correlation;
    return {h.n_failed == 0 && p >= 0.90 && cache.homodyne_seconds < 300.0,
            "mean Pearson over 10 seeds " + fmt(p) + " (>= 0.90, std " + fmt(h.stddev.pearson_correlation) + "), " +
                fmt(cache.homodyne_seconds) + " s (< 300)" + failures(h)};
}

Outcome mode_ordering(SweepCache& cache) {
    const double hom = cache.homodyne().mean.pearson_correlation;
    cache.others();
    std::string best;
    double best_p = -2.0;
    int failed = cache.rows.at("homodyne").n_failed;
    std::ostringstream os;
    for (const std::string m : {"conjecture-zero", "conjecture-spherical", "conjecture-random"}) {
        const SweepRow& r = cache.rows.at(m);
        failed += r.n_failed;
        os << m << " " << fmt(r.mean.pearson_correlation) << ", ";
        if (r.mean.pearson_correlation > best_p) best_p = r.mean.pearson_correlation, best = m;
    }
    const double diag = cache.rows.at("diagonal").mean.pearson_correlation;
    failed += cache.rows.at("diagonal").n_failed;
    const bool ok = failed == 0 && hom >= best_p && best_p > diag;
    return {ok, "mean Pearson homodyne " + fmt(hom) + " >= best conjecture (" + best + ") " + fmt(best_p) +
                    " > diagonal " + fmt(diag) + "; " + os.str() + fmt(cache.others_seconds) + " s" +
                    (failed ? " [" + std::to_string(failed) + " failed runs]" : "")};
}

Outcome gics_vs_cgi(SweepCache& cache) {
    const double hom = cache.homodyne().mean.normalized_mse;
    const auto t0 = std::chrono::steady_clock::now();
    const SweepResult res = efficiency_sweep(cache.spec({"cgi"}, {50, 500, 5000}));
    const double t = seconds_since(t0) + cache.homodyne_seconds;
    std::vector<double> cgi;
    int failed = 0;
    for (const auto& row : res.rows) cgi.push_back(row.mean.normalized_mse), failed += row.n_failed;
    const bool monotone = cgi[0] > cgi[1] && cgi[1] > cgi[2];
    return {failed == 0 && hom < cgi[0] && monotone && t < 900.0,
            "mean NMSE at K=50 homodyne " + fmt(hom) + " < CGI " + fmt(cgi[0]) + "; CGI over K=50/500/5000 " +
                fmt(cgi[0]) + " > " + fmt(cgi[1]) + " > " + fmt(cgi[2]) + ", " + fmt(t) + " s (< 900)"};
}

Outcome optics_properties() {
    const double lambda = 632.8e-9, d = 0.05;
    const Grid1D grid = matched_grid(256, lambda, d);
    Rng rng(77);
    Eigen::VectorXcd e1(grid.n_points), e2(grid.n_points);
    for (Eigen::Index i = 0; i < grid.n_points; ++i) {
        e1(i) = cdouble(rng.normal(), rng.normal());
        e2(i) = cdouble(rng.normal(), rng.normal());
    }
    const ComplexField f1(grid, e1, lambda), f2(grid, e2, lambda);
    const Eigen::VectorXcd back = fresnel_propagate(fresnel_propagate(f1, d, grid), -d, grid).amplitude;
    const double inv = (back - e1).cwiseAbs().maxCoeff();

    const cdouble a(0.7, -1.3), b(-2.1, 0.4);
    const Eigen::VectorXcd lhs = fresnel_propagate(ComplexField(grid, a * e1 + b * e2, lambda), d, grid).amplitude;
    const Eigen::VectorXcd rhs =
        a * fresnel_propagate(f1, d, grid).amplitude + b * fresnel_propagate(f2, d, grid).amplitude;
    const double lin = (lhs - rhs).cwiseAbs().maxCoeff() / rhs.cwiseAbs().maxCoeff();

    SourceModel src = SchemeGeometry{}.source;
    src.seed = 4242;
    const Eigen::Index centre = src.grid.n_points / 2;
    const int n = 10000;
    double s1 = 0.0, s2 = 0.0;
    for (int k = 0; k < n; ++k) {
        const double i = std::norm(make_speckle_field(src, k, lambda).amplitude(centre));
        s1 += i;
        s2 += i * i;
    }
    const double mean = s1 / n;
    const double contrast = std::sqrt(s2 / n - mean * mean) / mean;

    return {inv < 1e-8 && lin < 1e-12 && std::abs(contrast - 1.0) <= 0.05,
            "inverse deviation " + fmt(inv) + " (< 1e-8), linearity " + fmt(lin) + " (< 1e-12), speckle contrast " +
                fmt(contrast) + " (1 +- 0.05, 1e4 shots)"};
}

Outcome reproducibility(const fs::path& work) {
    RunConfig cfg = preset_config("paper-sim");
    cfg.sensing.modes = {"homodyne", "conjecture-random", "diagonal"};
    const fs::path a = work / "run-a", b = work / "run-b";
    fs::remove_all(a);
    fs::remove_all(b);
    run_pipeline(cfg, a.string());
    run_pipeline(cfg, b.string());
    int n_csv = 0, differ = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
        if (entry.path().extension() != ".csv") continue;
        ++n_csv;
        const fs::path other = b / entry.path().filename();
        if (!fs::exists(other) || read_text(entry.path().string()) != read_text(other.string())) ++differ;
    }
    return {n_csv > 0 && differ == 0,
            std::to_string(n_csv) + " CSV files compared, " + std::to_string(differ) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GICS acceptance suite"};
    std::vector<int> only;
    std::string work = (fs::temp_directory_path() / "gics-acceptance").string();
    app.add_option("--only", only, "criteria to run (default: all)")->delimiter(',')->check(CLI::Range(1, 8));
    app.add_option("--work", work, "scratch directory for pipeline runs");
    CLI11_PARSE(app, argc, argv);

    SweepCache cache;
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"packing identity", packing_identity},
        {"forward-model consistency", forward_consistency},
        {"solver oracle", solver_oracle},
        {"homodyne reconstruction", [&] { return homodyne_reconstruction(cache); }},
        {"mode ordering", [&] { return mode_ordering(cache); }},
        {"GICS vs CGI efficiency", [&] { return gics_vs_cgi(cache); }},
        {"optics properties", optics_properties},
        {"pipeline reproducibility", [&] { return reproducibility(work); }},
    };

    fs::create_directories(work);
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i + 1);
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << criteria[i].first << ": " << o.detail
                  << std::endl;
    }
    return failed ? 1 : 0;
}
