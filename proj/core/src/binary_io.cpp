#include "gics/binary_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "gics/error.hpp"

namespace gics {

using nlohmann::json;

namespace {

constexpr char kMagicSystem[8] = {'G', 'I', 'C', 'S', 'S', 'Y', 'S', '\0'};
constexpr char kMagicShots[8] = {'G', 'I', 'C', 'S', 'S', 'H', 'O', 'T'};
constexpr char kMagicSolution[8] = {'G', 'I', 'C', 'S', 'S', 'O', 'L', '\0'};

template <class U>
void put_le(std::ostream& os, U v) {
    unsigned char b[sizeof(U)];
    for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), sizeof(U));
}

template <class U>
U get_le(std::istream& is) {
    unsigned char b[sizeof(U)];
    if (!is.read(reinterpret_cast<char*>(b), sizeof(U))) throw FormatError("file truncated");
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(b[i]) << (8 * i);
    return v;
}

class Writer {
public:
    Writer(const std::string& path, const char (&magic)[8]) : os_(path, std::ios::binary) {
        if (!os_) throw FormatError("cannot open '" + path + "' for writing");
        os_.write(magic, 8);
        put_le<std::uint32_t>(os_, kFormatVersion);
    }
    void header(const json& h) {
        const std::string s = h.dump();
        put_le<std::uint64_t>(os_, s.size());
        os_.write(s.data(), static_cast<std::streamsize>(s.size()));
    }
    void doubles(const double* p, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) put_le<std::uint64_t>(os_, std::bit_cast<std::uint64_t>(p[i]));
    }
    void real_rows(const Eigen::MatrixXd& m) {
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                const double v = m(r, c);
                doubles(&v, 1);
            }
    }
    void complex_rows(const Eigen::MatrixXcd& m) {
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                const double re = m(r, c).real(), im = m(r, c).imag();
                doubles(&re, 1);
                doubles(&im, 1);
            }
    }
    void close() {
        os_.flush();
        if (!os_) throw FormatError("write failed");
    }

private:
    std::ofstream os_;
};

class Reader {
public:
    Reader(const std::string& path, const char (&magic)[8], const char* what) : is_(path, std::ios::binary) {
        if (!is_) throw FormatError("cannot open '" + path + "'");
        is_.seekg(0, std::ios::end);
        size_ = static_cast<std::uint64_t>(is_.tellg());
        is_.seekg(0);
        char m[8];
        if (!is_.read(m, 8)) throw FormatError("'" + path + "' is truncated (no magic)");
        if (std::memcmp(m, magic, 8) != 0) throw FormatError("'" + path + "' is not a " + what + " file (bad magic)");
        const auto version = get_le<std::uint32_t>(is_);
        if (version != kFormatVersion)
            throw FormatError("'" + path + "' has format version " + std::to_string(version) + ", expected " +
                              std::to_string(kFormatVersion));
        const auto hlen = get_le<std::uint64_t>(is_);
        if (hlen > size_) throw FormatError("'" + path + "' header length exceeds file size");
        std::string h(hlen, '\0');
        if (!is_.read(h.data(), static_cast<std::streamsize>(hlen))) throw FormatError("'" + path + "' header truncated");
        try {
            header_ = json::parse(h);
        } catch (const json::exception& e) {
            throw FormatError("'" + path + "' header is not valid JSON: " + e.what());
        }
        path_ = path;
    }
    const json& header() const { return header_; }

    template <class T>
    T field(const char* key) const {
        try {
            return header_.at(key).get<T>();
        } catch (const json::exception&) {
            throw FormatError("'" + path_ + "' header lacks a valid '" + key + "'");
        }
    }

    void need(std::uint64_t count) {
        const auto pos = static_cast<std::uint64_t>(is_.tellg());
        if (count > (size_ - pos) / 8) throw FormatError("'" + path_ + "' payload truncated");
    }
    double value() { return std::bit_cast<double>(get_le<std::uint64_t>(is_)); }
    Eigen::VectorXd vector(Eigen::Index n) {
        need(static_cast<std::uint64_t>(n));
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = value();
        return v;
    }
    Eigen::MatrixXd real_rows(Eigen::Index r, Eigen::Index c) {
        need(static_cast<std::uint64_t>(r) * static_cast<std::uint64_t>(c));
        Eigen::MatrixXd m(r, c);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < c; ++j) m(i, j) = value();
        return m;
    }
    Eigen::MatrixXcd complex_rows(Eigen::Index r, Eigen::Index c) {
        need(2 * static_cast<std::uint64_t>(r) * static_cast<std::uint64_t>(c));
        Eigen::MatrixXcd m(r, c);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < c; ++j) {
                const double re = value();
                const double im = value();
                m(i, j) = cdouble(re, im);
            }
        return m;
    }
    void finish() {
        if (static_cast<std::uint64_t>(is_.tellg()) != size_) throw FormatError("'" + path_ + "' has trailing bytes");
    }

private:
    std::ifstream is_;
    std::uint64_t size_ = 0;
    json header_;
    std::string path_;
};

json payload_entry(const std::string& name, std::vector<Eigen::Index> shape, const std::string& dtype) {
    return json{{"name", name}, {"shape", shape}, {"dtype", dtype}};
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_std(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void save_system(const std::string& path, const SensingSystem& s, std::uint64_t seed) {
    s.check();
    json h;
    h["kind"] = "sensing-system";
    h["rows"] = s.rows();
    h["columns"] = s.cols();
    h["n"] = s.n();
    h["detector_pixels"] = s.detector_pixels;
    h["window_offset"] = s.window_offset;
    h["r2_pixel"] = s.r2_pixel;
    h["mode"] = s.mode.name();
    h["diagonal_convention"] = to_string(s.mode.convention);
    h["conjecture_seed"] = s.mode.conjecture_seed;
    h["seed"] = seed;
    h["freq_axis"] = to_std(s.freq_axis);
    json origins = json::array();
    for (const auto& o : s.origins) origins.push_back({o.shot_index, o.r2_pixel});
    h["origins"] = origins;
    json payload = json::array();
    if (s.mode.full()) payload.push_back(payload_entry("generators", {s.rows(), s.n()}, "complex128"));
    payload.push_back(payload_entry("diagonal", {s.rows(), s.n()}, "float64"));
    payload.push_back(payload_entry("y", {s.rows()}, "float64"));
    payload.push_back(payload_entry("row_scale", {s.rows()}, "float64"));
    h["payload"] = payload;

    Writer w(path, kMagicSystem);
    w.header(h);
    if (s.mode.full()) w.complex_rows(s.generators);
    w.real_rows(s.diagonal);
    w.doubles(s.y.data(), static_cast<std::size_t>(s.y.size()));
    w.doubles(s.row_scale.data(), static_cast<std::size_t>(s.row_scale.size()));
    w.close();
}

SensingSystem load_system(const std::string& path, std::uint64_t* seed) {
    Reader r(path, kMagicSystem, "sensing-system");
    SensingSystem s;
    s.mode = SensingMode::parse(r.field<std::string>("mode"));
    s.mode.convention = parse_convention(r.field<std::string>("diagonal_convention"));
    s.mode.conjecture_seed = r.field<std::uint64_t>("conjecture_seed");
    const auto rows = r.field<Eigen::Index>("rows");
    const auto n = r.field<Eigen::Index>("n");
    s.freq_axis = from_std(r.field<std::vector<double>>("freq_axis"));
    if (rows < 0 || n < 1 || s.freq_axis.size() != n) throw FormatError("'" + path + "' has inconsistent dimensions");
    if (r.field<Eigen::Index>("columns") != s.cols()) throw FormatError("'" + path + "' column count disagrees with mode");
    s.detector_pixels = r.field<Eigen::Index>("detector_pixels");
    s.window_offset = r.field<Eigen::Index>("window_offset");
    s.r2_pixel = r.field<Eigen::Index>("r2_pixel");
    for (const auto& o : r.header().at("origins")) s.origins.push_back({o.at(0).get<std::int64_t>(), o.at(1).get<Eigen::Index>()});
    if (static_cast<Eigen::Index>(s.origins.size()) != rows) throw FormatError("'" + path + "' origin list length mismatch");
    if (seed) *seed = r.field<std::uint64_t>("seed");
    if (s.mode.full()) s.generators = r.complex_rows(rows, n);
    s.diagonal = r.real_rows(rows, n);
    s.y = r.vector(rows);
    s.row_scale = r.vector(rows);
    r.finish();
    return s;
}

void save_shots(const std::string& path, const ShotBatch& b) {
    if (b.shots.empty()) throw DataError("no shots to save");
    const bool field = b.shots.front().e_r.has_value();
    std::vector<std::int64_t> idx;
    for (const auto& s : b.shots) {
        if (s.e_r.has_value() != field) throw DataError("shots mix recorded and unrecorded reference fields");
        if (s.i_r.size() != b.d1_pixels || s.i_w.size() != b.d2_pixels || (field && s.e_r->size() != b.d1_pixels))
            throw ShapeError("shot sizes do not match the batch detector sizes");
        idx.push_back(s.shot_index);
    }
    const auto K = static_cast<Eigen::Index>(b.shots.size());
    json h;
    h["kind"] = "shots";
    h["count"] = K;
    h["d1_pixels"] = b.d1_pixels;
    h["d2_pixels"] = b.d2_pixels;
    h["has_field"] = field;
    h["seed"] = b.seed;
    h["shot_indices"] = idx;
    json payload = json::array({payload_entry("i_r", {K, b.d1_pixels}, "float64")});
    if (field) payload.push_back(payload_entry("e_r", {K, b.d1_pixels}, "complex128"));
    payload.push_back(payload_entry("i_w", {K, b.d2_pixels}, "float64"));
    h["payload"] = payload;

    Writer w(path, kMagicShots);
    w.header(h);
    for (const auto& s : b.shots) w.doubles(s.i_r.data(), static_cast<std::size_t>(s.i_r.size()));
    if (field)
        for (const auto& s : b.shots) w.complex_rows(s.e_r->transpose());
    for (const auto& s : b.shots) w.doubles(s.i_w.data(), static_cast<std::size_t>(s.i_w.size()));
    w.close();
}

ShotBatch load_shots(const std::string& path) {
    Reader r(path, kMagicShots, "shots");
    ShotBatch b;
    const auto K = r.field<Eigen::Index>("count");
    b.d1_pixels = r.field<Eigen::Index>("d1_pixels");
    b.d2_pixels = r.field<Eigen::Index>("d2_pixels");
    b.seed = r.field<std::uint64_t>("seed");
    const bool field = r.field<bool>("has_field");
    const auto idx = r.field<std::vector<std::int64_t>>("shot_indices");
    if (K < 0 || b.d1_pixels < 1 || b.d2_pixels < 1 || static_cast<Eigen::Index>(idx.size()) != K)
        throw FormatError("'" + path + "' has inconsistent dimensions");
    const Eigen::MatrixXd ir = r.real_rows(K, b.d1_pixels);
    Eigen::MatrixXcd er;
    if (field) er = r.complex_rows(K, b.d1_pixels);
    const Eigen::MatrixXd iw = r.real_rows(K, b.d2_pixels);
    r.finish();
    for (Eigen::Index k = 0; k < K; ++k) {
        ShotRecord s;
        s.shot_index = idx[static_cast<std::size_t>(k)];
        s.i_r = ir.row(k).transpose();
        if (field) s.e_r = Eigen::VectorXcd(er.row(k).transpose());
        s.i_w = iw.row(k).transpose();
        b.shots.push_back(std::move(s));
    }
    return b;
}

void save_solution(const std::string& path, const SolveResult& res, const SensingSystem& system) {
    if (res.x.size() != system.cols()) throw ShapeError("solution length does not match the system");
    json h;
    h["kind"] = "solution";
    h["columns"] = res.x.size();
    h["n"] = system.n();
    h["mode"] = system.mode.name();
    h["diagonal_convention"] = to_string(system.mode.convention);
    h["lambda"] = res.lambda;
    h["residual"] = res.residual;
    h["iterations_used"] = res.iterations_used;
    h["converged"] = res.converged;
    h["trace_length"] = res.objective_trace.size();
    h["freq_axis"] = to_std(system.freq_axis);
    h["window_offset"] = system.window_offset;
    h["detector_pixels"] = system.detector_pixels;
    h["payload"] = json::array({payload_entry("x", {res.x.size()}, "float64"),
                                payload_entry("objective_trace", {static_cast<Eigen::Index>(res.objective_trace.size())},
                                              "float64")});
    Writer w(path, kMagicSolution);
    w.header(h);
    w.doubles(res.x.data(), static_cast<std::size_t>(res.x.size()));
    w.doubles(res.objective_trace.data(), res.objective_trace.size());
    w.close();
}

SolveResult load_solution(const std::string& path) {
    Reader r(path, kMagicSolution, "solution");
    SolveResult res;
    const auto cols = r.field<Eigen::Index>("columns");
    const auto tl = r.field<Eigen::Index>("trace_length");
    if (cols < 0 || tl < 0) throw FormatError("'" + path + "' has inconsistent dimensions");
    res.lambda = r.field<double>("lambda");
    res.residual = r.field<double>("residual");
    res.iterations_used = r.field<int>("iterations_used");
    res.converged = r.field<bool>("converged");
    res.x = r.vector(cols);
    const Eigen::VectorXd t = r.vector(tl);
    res.objective_trace.assign(t.data(), t.data() + t.size());
    r.finish();
    return res;
}

}  // namespace gics
