#include "gics/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gics/error.hpp"

namespace gics {

using nlohmann::json;

namespace {

constexpr const char* kPaperSim = R"({
  "geometry": {
    "wavelength": 632.8e-9,
    "d1": 0.4,
    "d21": 0.2,
    "d22": 0.2,
    "noise_sigma": 0.0,
    "source": {"width": 3e-3, "n_points": 320, "pitch": 10e-6, "mean_intensity": 1.0, "correlation_length": 30e-6},
    "object_grid": {"n_points": 600, "pitch": 10e-6},
    "d1_grid": {"n_points": 256, "pitch": null},
    "d2_grid": {"n_points": 256, "pitch": null}
  },
  "object": {"n_slits": 5, "slit_width": 600e-6, "gap": 600e-6, "phase_depth": 3.141592653589793},
  "acquisition": {
    "shots": 50,
    "r2_pixels": [96, 100, 104, 108, 112, 116, 120, 124, 128, 132, 136, 140, 144, 148, 152, 156, 160],
    "seed": 1
  },
  "sensing": {
    "modes": ["homodyne", "conjecture-zero", "conjecture-spherical", "conjecture-random", "diagonal"],
    "diagonal_convention": "exact",
    "conjecture_seed": 7
  },
  "solver": {
    "lambda_fractions": {"max": 0.5, "min": 0.001, "count": 16},
    "selection_seed": 12345,
    "max_iters": 5000,
    "tol": 1e-6,
    "max_outer": 60,
    "nonneg_diagonal": true,
    "debias": false,
    "hermitian_weights": true
  },
  "sweep": {
    "k_values": [50, 500, 5000],
    "modes": ["homodyne", "conjecture-zero", "conjecture-spherical", "conjecture-random", "diagonal", "cgi"],
    "n_seeds": 10
  },
  "output": {"directory": "gics-out"}
}
)";

// Experiment analogue: d22 = 5 cm, a = 150 um, K = 100. The object window is
// five slit periods wide so the D1 pitch lambda d22 / W lands on 21.09 um
// again; the finer object pitch keeps the d22 kernel sampled.
constexpr const char* kPaperExp = R"({
  "geometry": {
    "wavelength": 632.8e-9,
    "d1": 0.25,
    "d21": 0.2,
    "d22": 0.05,
    "noise_sigma": 0.0,
    "source": {"width": 3e-3, "n_points": 320, "pitch": 10e-6, "mean_intensity": 1.0, "correlation_length": 30e-6},
    "object_grid": {"n_points": 600, "pitch": 2.5e-6},
    "d1_grid": {"n_points": 256, "pitch": null},
    "d2_grid": {"n_points": 256, "pitch": null}
  },
  "object": {"n_slits": 5, "slit_width": 150e-6, "gap": 150e-6, "phase_depth": 3.141592653589793},
  "acquisition": {
    "shots": 100,
    "r2_pixels": [96, 100, 104, 108, 112, 116, 120, 124, 128, 132, 136, 140, 144, 148, 152, 156, 160],
    "seed": 1
  },
  "sensing": {
    "modes": ["homodyne", "conjecture-zero", "conjecture-spherical", "conjecture-random", "diagonal"],
    "diagonal_convention": "exact",
    "conjecture_seed": 7
  },
  "solver": {
    "lambda_fractions": {"max": 0.5, "min": 0.001, "count": 16},
    "selection_seed": 12345,
    "max_iters": 5000,
    "tol": 1e-6,
    "max_outer": 60,
    "nonneg_diagonal": true,
    "debias": false,
    "hermitian_weights": true
  },
  "sweep": {
    "k_values": [100, 1000],
    "modes": ["homodyne", "conjecture-zero", "diagonal", "cgi"],
    "n_seeds": 10
  },
  "output": {"directory": "gics-out"}
}
)";

// Walks a JSON object, remembering which keys were read so that leftovers can
// be reported as unknown.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& at(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    Reader child(const std::string& key) {
        seen_.insert(key);
        return Reader(j_.at(key), sub(key));
    }

    template <class T>
    void get(const std::string& key, T& out) {
        if (!j_.contains(key)) return;
        seen_.insert(key);
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigurationError("config key '" + sub(key) + "' has the wrong type");
        }
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigurationError("unknown config key '" + sub(it.key()) + "'");
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ConfigurationError("config '" + path_ + "': " + msg); }
    std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigurationError("config key '" + key + "' " + what);
}

// Grid with an optional null pitch (filled later).
struct GridSpec {
    Eigen::Index n_points = 256;
    double pitch = 0.0;  // 0: match to the object window
    double center = 0.0;
};

GridSpec read_grid(Reader r, bool allow_null_pitch) {
    GridSpec g;
    r.get("n_points", g.n_points);
    r.get("center", g.center);
    if (r.has("pitch")) {
        const json& p = r.at("pitch");
        if (p.is_null()) {
            require(allow_null_pitch, r.sub("pitch"), "may not be null");
            g.pitch = 0.0;
        } else if (p.is_number()) {
            g.pitch = p.get<double>();
            require(g.pitch > 0.0, r.sub("pitch"), "must be positive");
        } else {
            r.fail("pitch must be a number or null");
        }
    }
    require(g.n_points >= 2, r.sub("n_points"), "must be at least 2");
    r.finish();
    return g;
}

std::vector<double> read_lambda(const json& j, const std::string& key) {
    std::vector<double> out;
    if (j.is_array()) {
        for (const auto& v : j) {
            require(v.is_number() && v.get<double>() > 0.0, key, "entries must be positive numbers");
            out.push_back(v.get<double>());
        }
        require(!out.empty(), key, "must not be empty");
        return out;
    }
    Reader r(j, key);
    double hi = 0.5, lo = 0.001;
    int count = 16;
    r.get("max", hi);
    r.get("min", lo);
    r.get("count", count);
    r.finish();
    require(hi > 0.0 && lo > 0.0 && count >= 1, key, "needs positive max/min and count >= 1");
    return geometric_grid(hi, lo, count);
}

}  // namespace

PhaseObject RunConfig::make_object() const {
    return make_phase_slits(object.n_slits, object.slit_width, object.gap, object.phase_depth, geometry.object_grid);
}

SchemeGeometry RunConfig::seeded_geometry() const {
    SchemeGeometry g = geometry;
    g.source.seed = acquisition.seed;
    return g;
}

SensingMode RunConfig::mode(const std::string& name) const {
    SensingMode m = SensingMode::parse(name);
    m.convention = sensing.convention;
    m.conjecture_seed = sensing.conjecture_seed;
    return m;
}

bool RunConfig::needs_field() const {
    for (const auto& m : sensing.modes)
        if (m == "homodyne") return true;
    return false;
}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // byte offset -> line/column
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigurationError("config parse error at line " + std::to_string(line) + ", column " +
                                 std::to_string(col) + ": " + e.what());
    }

    RunConfig c;
    Reader root(j, "");
    GridSpec d1g{256, 0.0, 0.0}, d2g{256, 0.0, 0.0};
    try {
        if (root.has("geometry")) {
            Reader g = root.child("geometry");
            g.get("wavelength", c.geometry.wavelength);
            g.get("d1", c.geometry.d1);
            g.get("d21", c.geometry.d21);
            g.get("d22", c.geometry.d22);
            g.get("noise_sigma", c.geometry.noise_sigma);
            if (g.has("source")) {
                Reader s = g.child("source");
                s.get("width", c.geometry.source.width);
                s.get("mean_intensity", c.geometry.source.mean_intensity);
                s.get("correlation_length", c.geometry.source.correlation_length);
                Eigen::Index n = c.geometry.source.grid.n_points;
                double p = c.geometry.source.grid.pitch, ctr = 0.0;
                s.get("n_points", n);
                s.get("pitch", p);
                s.get("center", ctr);
                require(n >= 2 && p > 0.0, "geometry.source", "needs n_points >= 2 and positive pitch");
                c.geometry.source.grid = Grid1D(n, p, ctr);
                s.finish();
            }
            if (g.has("object_grid")) {
                const GridSpec o = read_grid(g.child("object_grid"), false);
                c.geometry.object_grid = Grid1D(o.n_points, o.pitch > 0.0 ? o.pitch : c.geometry.object_grid.pitch, o.center);
            }
            if (g.has("d1_grid")) d1g = read_grid(g.child("d1_grid"), true);
            if (g.has("d2_grid")) d2g = read_grid(g.child("d2_grid"), true);
            g.finish();
        }
        const double matched = c.geometry.wavelength * c.geometry.d22 / c.geometry.object_grid.extent();
        c.geometry.d1_grid = Grid1D(d1g.n_points, d1g.pitch > 0.0 ? d1g.pitch : matched, d1g.center);
        c.geometry.d2_grid = Grid1D(d2g.n_points, d2g.pitch > 0.0 ? d2g.pitch : matched, d2g.center);

        if (root.has("object")) {
            Reader o = root.child("object");
            o.get("n_slits", c.object.n_slits);
            o.get("slit_width", c.object.slit_width);
            o.get("gap", c.object.gap);
            o.get("phase_depth", c.object.phase_depth);
            o.finish();
        }
        if (root.has("acquisition")) {
            Reader a = root.child("acquisition");
            a.get("shots", c.acquisition.shots);
            a.get("r2_pixels", c.acquisition.r2_pixels);
            a.get("seed", c.acquisition.seed);
            a.finish();
            require(c.acquisition.shots >= 1, "acquisition.shots", "must be at least 1");
        }
        if (root.has("sensing")) {
            Reader s = root.child("sensing");
            s.get("modes", c.sensing.modes);
            std::string conv = to_string(c.sensing.convention);
            s.get("diagonal_convention", conv);
            c.sensing.convention = parse_convention(conv);
            s.get("conjecture_seed", c.sensing.conjecture_seed);
            s.finish();
            require(!c.sensing.modes.empty(), "sensing.modes", "must not be empty");
            for (const auto& m : c.sensing.modes) SensingMode::parse(m);
        }
        if (root.has("solver")) {
            Reader s = root.child("solver");
            if (s.has("lambda_fractions")) c.recon.lambda_fractions = read_lambda(s.at("lambda_fractions"), "solver.lambda_fractions");
            s.get("selection_seed", c.recon.split_seed);
            s.get("max_iters", c.recon.solver.max_iters);
            s.get("tol", c.recon.solver.tol);
            s.get("max_outer", c.recon.solver.max_outer);
            s.get("nonneg_diagonal", c.recon.solver.nonneg_diagonal);
            s.get("debias", c.recon.solver.debias);
            s.get("hermitian_weights", c.recon.solver.hermitian_weights);
            s.finish();
            c.recon.solver.validate();
        }
        if (root.has("sweep")) {
            Reader s = root.child("sweep");
            s.get("k_values", c.sweep.k_values);
            s.get("modes", c.sweep.modes);
            s.get("n_seeds", c.sweep.n_seeds);
            s.finish();
            require(c.sweep.n_seeds >= 1, "sweep.n_seeds", "must be at least 1");
            require(!c.sweep.k_values.empty(), "sweep.k_values", "must not be empty");
            for (std::size_t i = 0; i < c.sweep.k_values.size(); ++i)
                require(c.sweep.k_values[i] >= 2 && (i == 0 || c.sweep.k_values[i] > c.sweep.k_values[i - 1]),
                        "sweep.k_values", "must be ascending and at least 2");
            for (const auto& m : c.sweep.modes)
                if (m != "cgi") SensingMode::parse(m);
        }
        if (root.has("output")) {
            Reader o = root.child("output");
            o.get("directory", c.output_directory);
            o.finish();
        }
        root.finish();
    } catch (const json::exception& e) {
        throw ConfigurationError(std::string("config: ") + e.what());
    }

    c.geometry.validate();
    c.make_object();
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigurationError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ConfigurationError& e) {
        throw ConfigurationError(path + ": " + e.what());
    }
}

std::string preset_json(const std::string& name) {
    if (name == "paper-sim") return kPaperSim;
    if (name == "paper-exp") return kPaperExp;
    throw ConfigurationError("unknown preset '" + name + "' (expected paper-sim or paper-exp)");
}

RunConfig preset_config(const std::string& name) { return parse_config(preset_json(name)); }

std::string config_to_json(const RunConfig& c) {
    auto grid = [](const Grid1D& g) { return json{{"n_points", g.n_points}, {"pitch", g.pitch}, {"center", g.center}}; };
    const auto& s = c.geometry.source;
    json j;
    j["geometry"] = {{"wavelength", c.geometry.wavelength},
                     {"d1", c.geometry.d1},
                     {"d21", c.geometry.d21},
                     {"d22", c.geometry.d22},
                     {"noise_sigma", c.geometry.noise_sigma},
                     {"source",
                      {{"width", s.width},
                       {"n_points", s.grid.n_points},
                       {"pitch", s.grid.pitch},
                       {"center", s.grid.center},
                       {"mean_intensity", s.mean_intensity},
                       {"correlation_length", s.correlation_length}}},
                     {"object_grid", grid(c.geometry.object_grid)},
                     {"d1_grid", grid(c.geometry.d1_grid)},
                     {"d2_grid", grid(c.geometry.d2_grid)}};
    j["object"] = {{"n_slits", c.object.n_slits},
                   {"slit_width", c.object.slit_width},
                   {"gap", c.object.gap},
                   {"phase_depth", c.object.phase_depth}};
    j["acquisition"] = {{"shots", c.acquisition.shots}, {"r2_pixels", c.acquisition.r2_pixels}, {"seed", c.acquisition.seed}};
    j["sensing"] = {{"modes", c.sensing.modes},
                    {"diagonal_convention", to_string(c.sensing.convention)},
                    {"conjecture_seed", c.sensing.conjecture_seed}};
    j["solver"] = {{"lambda_fractions", c.recon.lambda_fractions},
                   {"selection_seed", c.recon.split_seed},
                   {"max_iters", c.recon.solver.max_iters},
                   {"tol", c.recon.solver.tol},
                   {"max_outer", c.recon.solver.max_outer},
                   {"nonneg_diagonal", c.recon.solver.nonneg_diagonal},
                   {"debias", c.recon.solver.debias},
                   {"hermitian_weights", c.recon.solver.hermitian_weights}};
    j["sweep"] = {{"k_values", c.sweep.k_values}, {"modes", c.sweep.modes}, {"n_seeds", c.sweep.n_seeds}};
    j["output"] = {{"directory", c.output_directory}};
    return j.dump(2) + "\n";
}

std::string config_reference() {
    const RunConfig d;
    std::ostringstream os;
    os << "# Run configuration reference\n\n"
       << "Generated by `gics defaults --reference`. Lengths are in meters, angles in radians.\n"
       << "Unknown keys are rejected. Omitted keys take the defaults below.\n\n"
       << "| key | default | meaning |\n|---|---|---|\n";
    auto row = [&](const std::string& k, const std::string& v, const std::string& m) {
        os << "| `" << k << "` | " << v << " | " << m << " |\n";
    };
    auto num = [](double v) {
        std::ostringstream s;
        s.precision(10);
        s << v;
        return s.str();
    };
    const auto& g = d.geometry;
    row("geometry.wavelength", num(g.wavelength), "optical wavelength");
    row("geometry.d1", num(g.d1), "source to D1; must equal d21 + d22");
    row("geometry.d21", num(g.d21), "source to object");
    row("geometry.d22", num(g.d22), "object to D2");
    row("geometry.noise_sigma", num(g.noise_sigma), "relative sigma of additive detector noise");
    row("geometry.source.width", num(g.source.width), "illuminated aperture of the diffuser");
    row("geometry.source.n_points", std::to_string(g.source.grid.n_points), "source samples");
    row("geometry.source.pitch", num(g.source.grid.pitch), "source sample pitch");
    row("geometry.source.center", "0", "grid center");
    row("geometry.source.mean_intensity", num(g.source.mean_intensity), "mean speckle intensity");
    row("geometry.source.correlation_length", num(g.source.correlation_length),
        "Gaussian correlation length of the diffuser field; 0 = independent samples");
    row("geometry.object_grid.n_points", std::to_string(g.object_grid.n_points), "object samples");
    row("geometry.object_grid.pitch", num(g.object_grid.pitch), "object sample pitch");
    row("geometry.object_grid.center", "0", "grid center");
    row("geometry.d1_grid.n_points", std::to_string(g.d1_grid.n_points), "D1 pixels");
    row("geometry.d1_grid.pitch", "null", "D1 pitch; null = wavelength * d22 / object window");
    row("geometry.d1_grid.center", "0", "grid center");
    row("geometry.d2_grid.n_points", std::to_string(g.d2_grid.n_points), "D2 pixels");
    row("geometry.d2_grid.pitch", "null", "D2 pitch; null = wavelength * d22 / object window");
    row("geometry.d2_grid.center", "0", "grid center");
    row("object.n_slits", std::to_string(d.object.n_slits), "number of phase slits");
    row("object.slit_width", num(d.object.slit_width), "slit width a");
    row("object.gap", num(d.object.gap), "opaque-free gap between slits");
    row("object.phase_depth", num(d.object.phase_depth), "phase inside the slits");
    row("acquisition.shots", std::to_string(d.acquisition.shots), "speckle shots K");
    row("acquisition.r2_pixels", "[]", "D2 pixels used as equations; [] = central pixel");
    row("acquisition.seed", std::to_string(d.acquisition.seed), "master seed; `--seed` overrides");
    row("sensing.modes", "[\"homodyne\"]",
        "any of homodyne, conjecture-zero, conjecture-spherical, conjecture-random, diagonal");
    row("sensing.diagonal_convention", "\"exact\"", "exact (I_r on the diagonal) or paper-sqrt (sqrt(I_r))");
    row("sensing.conjecture_seed", std::to_string(d.sensing.conjecture_seed), "seed of the random phase profile");
    row("solver.lambda_fractions", "{\"max\": 0.5, \"min\": 0.001, \"count\": 16}",
        "lambda candidates relative to lambda_max; a list or a geometric range; >1 entry = held-out selection");
    row("solver.selection_seed", std::to_string(d.recon.split_seed), "seed of the 80/20 row split");
    row("solver.max_iters", std::to_string(d.recon.solver.max_iters), "iterations per inner solve");
    row("solver.tol", num(d.recon.solver.tol), "relative step tolerance; KKT tolerance is 10 * tol * lambda");
    row("solver.max_outer", std::to_string(d.recon.solver.max_outer), "working-set expansions");
    row("solver.nonneg_diagonal", "true", "project diagonal slots onto >= 0");
    row("solver.debias", "false", "least-squares refit on the recovered support");
    row("solver.hermitian_weights", "true", "weight off-diagonal slots by 2 in the l1 penalty");
    row("sweep.k_values", "[50]", "shot counts, ascending");
    row("sweep.modes", "[\"homodyne\", \"diagonal\", \"cgi\"]", "sensing modes plus cgi");
    row("sweep.n_seeds", std::to_string(d.sweep.n_seeds), "runs per cell");
    row("output.directory", "\"" + d.output_directory + "\"", "artifact directory; `--out` overrides");
    return os.str();
}

SweepSpec sweep_spec(const RunConfig& config, int jobs) {
    SweepSpec spec;
    spec.geometry = config.geometry;
    spec.object = config.make_object();
    spec.k_values = config.sweep.k_values;
    spec.modes = config.sweep.modes;
    spec.n_seeds = config.sweep.n_seeds;
    spec.master_seed = config.acquisition.seed;
    spec.r2_pixels = config.acquisition.r2_pixels;
    spec.convention = config.sensing.convention;
    spec.conjecture_seed = config.sensing.conjecture_seed;
    spec.recon = config.recon;
    spec.jobs = jobs;
    return spec;
}

}  // namespace gics
