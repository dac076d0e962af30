#include "gics/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "gics/error.hpp"
#include "gics/rng.hpp"

namespace gics {

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) throw ShapeError("pearson: length mismatch");
    if (a.size() < 2) return 0.0;
    const Eigen::ArrayXd da = a.array() - a.mean();
    const Eigen::ArrayXd db = b.array() - b.mean();
    const double va = da.square().sum();
    const double vb = db.square().sum();
    if (va == 0.0 || vb == 0.0) return 0.0;
    return std::clamp((da * db).sum() / std::sqrt(va * vb), -1.0, 1.0);
}

double normalized_mse(const Eigen::VectorXd& estimate, const Eigen::VectorXd& oracle) {
    if (estimate.size() != oracle.size()) throw ShapeError("normalized_mse: length mismatch");
    const Eigen::VectorXd o = unit_peak(oracle);
    const double den = o.squaredNorm();
    if (den == 0.0) throw DataError("normalized_mse: oracle is identically zero");
    return (unit_peak(estimate) - o).squaredNorm() / den;
}

std::vector<Eigen::Index> major_peaks(const Eigen::VectorXd& v) {
    std::vector<Eigen::Index> peaks;
    const Eigen::Index n = v.size();
    if (n == 0) return peaks;
    const double top = v.maxCoeff();
    if (!(top > 0.0)) return peaks;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double left = i > 0 ? v(i - 1) : -std::numeric_limits<double>::infinity();
        const double right = i + 1 < n ? v(i + 1) : -std::numeric_limits<double>::infinity();
        if (v(i) >= 0.5 * top && v(i) > left && v(i) >= right) peaks.push_back(i);
    }
    return peaks;
}

double peak_position_error(const Eigen::VectorXd& estimate, const Eigen::VectorXd& oracle) {
    if (estimate.size() != oracle.size()) throw ShapeError("peak_position_error: length mismatch");
    const auto op = major_peaks(oracle);
    const auto ep = major_peaks(estimate);
    if (op.empty()) return 0.0;
    if (ep.empty()) return static_cast<double>(oracle.size());
    double worst = 0.0;
    for (Eigen::Index o : op) {
        Eigen::Index best = oracle.size();
        for (Eigen::Index e : ep) best = std::min(best, std::abs(e - o));
        worst = std::max(worst, static_cast<double>(best));
    }
    return worst;
}

namespace {

void require_same_axis(const SpectrumEstimate& a, const SpectrumEstimate& b) {
    if (a.freq.size() != b.freq.size() || a.magnitude.size() != a.freq.size() || b.magnitude.size() != b.freq.size())
        throw ShapeError("spectra do not share a frequency axis (length mismatch)");
    const double scale = std::max(a.freq.cwiseAbs().maxCoeff(), 1.0);
    if ((a.freq - b.freq).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw ShapeError("spectra do not share a frequency axis");
}

}  // namespace

Metrics evaluate(const SpectrumEstimate& estimate, const SpectrumEstimate& oracle) {
    require_same_axis(estimate, oracle);
    Metrics m;
    m.pearson_correlation = pearson(estimate.magnitude, oracle.magnitude);
    m.normalized_mse = normalized_mse(estimate.magnitude, oracle.magnitude);
    m.peak_position_error = peak_position_error(unit_peak(estimate.magnitude), unit_peak(oracle.magnitude));
    return m;
}

ReconComparison compare(const SpectrumEstimate& gics, const SpectrumEstimate& cgi, const SpectrumEstimate& oracle) {
    require_same_axis(gics, oracle);
    require_same_axis(cgi, oracle);
    ReconComparison c{gics, cgi, oracle, evaluate(gics, oracle), evaluate(cgi, oracle)};
    return c;
}

SpectrumEstimate cgi_reconstruct(const std::vector<ShotRecord>& shots, const SchemeGeometry& geometry,
                                 std::vector<Eigen::Index> r2_pixels) {
    if (shots.size() < 2) throw StatisticsError("cgi_reconstruct needs at least 2 shots");
    const R2Alignment al = align_r2(geometry, std::move(r2_pixels));
    const Eigen::Index n = geometry.d1_grid.n_points;
    const auto K = static_cast<Eigen::Index>(shots.size());

    Eigen::MatrixXd Ir(K, n);
    Eigen::MatrixXd Iw(K, static_cast<Eigen::Index>(al.pixels.size()));
    for (Eigen::Index k = 0; k < K; ++k) {
        const ShotRecord& s = shots[static_cast<std::size_t>(k)];
        if (s.i_r.size() != n || s.i_w.size() != geometry.d2_grid.n_points)
            throw ShapeError("shot detector sizes do not match the geometry");
        Ir.row(k) = s.i_r.transpose();
        for (std::size_t p = 0; p < al.pixels.size(); ++p) Iw(k, static_cast<Eigen::Index>(p)) = s.i_w(al.pixels[p]);
    }
    Ir.rowwise() -= Ir.colwise().mean();
    Iw.rowwise() -= Iw.colwise().mean();
    const Eigen::MatrixXd G = Ir.transpose() * Iw / static_cast<double>(K);  // n x n_r2

    Eigen::VectorXd acc = Eigen::VectorXd::Zero(al.union_size);
    Eigen::VectorXd cnt = Eigen::VectorXd::Zero(al.union_size);
    for (std::size_t p = 0; p < al.pixels.size(); ++p) {
        const Eigen::Index u0 = al.union_start(p);
        acc.segment(u0, n) += G.col(static_cast<Eigen::Index>(p));
        cnt.segment(u0, n).array() += 1.0;
    }
    const Eigen::VectorXd g = acc.segment(al.window_offset, n).cwiseQuotient(cnt.segment(al.window_offset, n));

    SpectrumEstimate s;
    s.freq = al.freq_axis.segment(al.window_offset, n);
    s.magnitude = unit_peak(g.cwiseMax(0.0).cwiseSqrt());
    s.source = "cgi";
    return s;
}

std::vector<double> geometric_grid(double hi, double lo, int count) {
    if (count < 1 || !(hi > 0.0) || !(lo > 0.0)) throw ConfigurationError("geometric grid needs count >= 1 and positive ends");
    std::vector<double> g(static_cast<std::size_t>(count));
    if (count == 1) {
        g[0] = hi;
        return g;
    }
    for (int i = 0; i < count; ++i)
        g[static_cast<std::size_t>(i)] = hi * std::pow(lo / hi, static_cast<double>(i) / (count - 1));
    return g;
}

GicsRun reconstruct_from_system(SensingSystem system, const ReconstructionSettings& settings) {
    if (settings.lambda_fractions.empty()) throw ConfigurationError("no lambda fractions configured");
    GicsRun run;
    run.system = std::move(system);
    run.lambda_max = lambda_max(run.system, settings.solver);

    SolverConfig cfg = settings.solver;
    if (settings.lambda_fractions.size() == 1) {
        cfg.lambda_reg = settings.lambda_fractions[0] * run.lambda_max;
    } else {
        std::vector<double> grid;
        for (double f : settings.lambda_fractions) grid.push_back(f * run.lambda_max);
        const LambdaSelection sel = select_lambda(run.system, grid, settings.solver, settings.split_seed);
        cfg.lambda_reg = sel.lambda;
        run.held_out = sel.held_out;
    }
    run.solve = solve_l1(run.system, cfg);
    const SensingSystem& sys = run.system;
    run.spectrum = extract_spectrum(run.solve.x, sys.packing(), sys.mode.convention, sys.freq_axis)
                       .window(sys.window_offset, sys.detector_pixels);
    run.spectrum.source = sys.mode.name();
    return run;
}

GicsRun reconstruct_gics(const std::vector<ShotRecord>& shots, const SchemeGeometry& geometry, const SensingMode& mode,
                         const std::vector<Eigen::Index>& r2_pixels, const ReconstructionSettings& settings) {
    return reconstruct_from_system(build_system(shots, geometry, mode, r2_pixels), settings);
}

std::uint64_t sweep_run_seed(std::uint64_t master_seed, int seed_index) {
    return derive_seed(master_seed, static_cast<std::uint64_t>(seed_index));
}

SweepResult efficiency_sweep(const SweepSpec& spec) {
    if (spec.k_values.empty() || spec.modes.empty()) throw ConfigurationError("sweep needs K values and modes");
    if (spec.n_seeds < 1) throw ConfigurationError("sweep needs n_seeds >= 1");
    for (std::size_t i = 0; i < spec.k_values.size(); ++i)
        if (spec.k_values[i] < 1 || (i > 0 && spec.k_values[i] <= spec.k_values[i - 1]))
            throw ConfigurationError("sweep K values must be positive and ascending");
    std::vector<SensingMode> parsed;
    bool need_field = false;
    for (const auto& m : spec.modes) {
        if (m == "cgi") {
            parsed.emplace_back();
            continue;
        }
        SensingMode sm = SensingMode::parse(m);
        sm.convention = spec.convention;
        sm.conjecture_seed = spec.conjecture_seed;
        need_field |= sm.kind == SensingMode::Kind::Homodyne;
        parsed.push_back(sm);
    }
    spec.geometry.validate();

    const std::size_t cells = spec.k_values.size() * spec.modes.size();
    std::vector<SweepRun> runs(cells * static_cast<std::size_t>(spec.n_seeds));

    auto do_seed = [&](int s) {
        SchemeGeometry g = spec.geometry;
        g.source.seed = sweep_run_seed(spec.master_seed, s);
        const ShotSimulator sim(g, spec.object);
        const std::vector<ShotRecord> all = sim.simulate_range(0, spec.k_values.back(), need_field);
        const R2Alignment al = align_r2(g, spec.r2_pixels);
        const SpectrumEstimate oracle =
            spectrum_oracle(spec.object, Eigen::VectorXd(al.freq_axis.segment(al.window_offset, g.d1_grid.n_points)));
        for (std::size_t ki = 0; ki < spec.k_values.size(); ++ki) {
            const std::vector<ShotRecord> shots(all.begin(), all.begin() + spec.k_values[ki]);
            for (std::size_t mi = 0; mi < spec.modes.size(); ++mi) {
                SweepRun& r = runs[(static_cast<std::size_t>(s) * spec.k_values.size() + ki) * spec.modes.size() + mi];
                r.k = spec.k_values[ki];
                r.mode = spec.modes[mi];
                r.seed_index = s;
                try {
                    const SpectrumEstimate est =
                        spec.modes[mi] == "cgi" ? cgi_reconstruct(shots, g, spec.r2_pixels)
                                                : reconstruct_gics(shots, g, parsed[mi], spec.r2_pixels, spec.recon).spectrum;
                    r.metrics = evaluate(est, oracle);
                } catch (const Error& e) {
                    r.failed = true;
                    r.error = e.what();
                }
            }
        }
    };

    const int jobs = std::max(1, std::min(spec.jobs, spec.n_seeds));
    if (jobs == 1) {
        for (int s = 0; s < spec.n_seeds; ++s) do_seed(s);
    } else {
        std::atomic<int> next{0};
        std::exception_ptr failure;
        std::mutex mu;
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j)
            pool.emplace_back([&] {
                for (int s = next++; s < spec.n_seeds; s = next++) {
                    try {
                        do_seed(s);
                    } catch (...) {
                        const std::lock_guard<std::mutex> lock(mu);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        for (auto& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    SweepResult out;
    out.runs = runs;
    for (std::size_t ki = 0; ki < spec.k_values.size(); ++ki) {
        for (std::size_t mi = 0; mi < spec.modes.size(); ++mi) {
            SweepRow row;
            row.k = spec.k_values[ki];
            row.mode = spec.modes[mi];
            std::vector<Metrics> ok;
            for (int s = 0; s < spec.n_seeds; ++s) {
                const SweepRun& r = runs[(static_cast<std::size_t>(s) * spec.k_values.size() + ki) * spec.modes.size() + mi];
                ++row.n_runs;
                if (r.failed)
                    ++row.n_failed;
                else
                    ok.push_back(r.metrics);
            }
            auto stat = [&](double Metrics::*field, double& mean, double& sd) {
                mean = sd = 0.0;
                if (ok.empty()) {
                    mean = sd = std::numeric_limits<double>::quiet_NaN();
                    return;
                }
                for (const auto& m : ok) mean += m.*field;
                mean /= static_cast<double>(ok.size());
                if (ok.size() > 1) {
                    for (const auto& m : ok) sd += (m.*field - mean) * (m.*field - mean);
                    sd = std::sqrt(sd / static_cast<double>(ok.size() - 1));
                }
            };
            stat(&Metrics::pearson_correlation, row.mean.pearson_correlation, row.stddev.pearson_correlation);
            stat(&Metrics::normalized_mse, row.mean.normalized_mse, row.stddev.normalized_mse);
            stat(&Metrics::peak_position_error, row.mean.peak_position_error, row.stddev.peak_position_error);
            out.rows.push_back(row);
        }
    }
    return out;
}

}  // namespace gics
