#include "gics/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gics/error.hpp"

namespace gics {

std::string format_number(double v) {
    if (!std::isfinite(v)) throw DataError("refusing to write a non-finite value");
    if (v == 0.0) v = 0.0;  // drop the sign of -0
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

std::string spectra_csv(const ReconComparison& c) {
    std::ostringstream os;
    os << "f,oracle,gics,cgi\n";
    for (Eigen::Index i = 0; i < c.oracle.size(); ++i)
        os << format_number(c.oracle.freq(i)) << ',' << format_number(c.oracle.magnitude(i)) << ','
           << format_number(c.gics_result.magnitude(i)) << ',' << format_number(c.cgi_result.magnitude(i)) << '\n';
    return os.str();
}

std::string metrics_csv(const std::vector<std::pair<std::string, Metrics>>& rows) {
    std::ostringstream os;
    os << "estimate,pearson,nmse,peak_error_bins\n";
    for (const auto& [name, m] : rows)
        os << name << ',' << format_number(m.pearson_correlation) << ',' << format_number(m.normalized_mse) << ','
           << format_number(m.peak_position_error) << '\n';
    return os.str();
}

std::string trace_csv(const std::vector<double>& trace) {
    std::ostringstream os;
    os << "iteration,objective\n";
    for (std::size_t i = 0; i < trace.size(); ++i) os << i << ',' << format_number(trace[i]) << '\n';
    return os.str();
}

std::string sweep_csv(const SweepResult& result) {
    std::ostringstream os;
    os << "K,mode,n_runs,n_failed,pearson_mean,pearson_std,nmse_mean,nmse_std,peak_error_mean,peak_error_std\n";
    auto cell = [](double v) { return std::isfinite(v) ? format_number(v) : std::string(); };
    for (const auto& r : result.rows)
        os << r.k << ',' << r.mode << ',' << r.n_runs << ',' << r.n_failed << ',' << cell(r.mean.pearson_correlation)
           << ',' << cell(r.stddev.pearson_correlation) << ',' << cell(r.mean.normalized_mse) << ','
           << cell(r.stddev.normalized_mse) << ',' << cell(r.mean.peak_position_error) << ','
           << cell(r.stddev.peak_position_error) << '\n';
    return os.str();
}

std::string spectrum_csv(const SpectrumEstimate& s) {
    std::ostringstream os;
    os << "f," << (s.source.empty() ? "magnitude" : s.source) << '\n';
    for (Eigen::Index i = 0; i < s.size(); ++i) os << format_number(s.freq(i)) << ',' << format_number(s.magnitude(i)) << '\n';
    return os.str();
}

SpectrumEstimate read_spectrum_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line.rfind("f,", 0) != 0) throw FormatError("spectrum CSV must start with an 'f,<name>' header");
    SpectrumEstimate s;
    s.source = line.substr(2);
    std::vector<double> f, m;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw FormatError("spectrum CSV line " + std::to_string(lineno) + " has no comma");
        try {
            std::size_t used = 0;
            const std::string a = line.substr(0, comma), b = line.substr(comma + 1);
            f.push_back(std::stod(a, &used));
            if (used != a.size()) throw std::invalid_argument(a);
            m.push_back(std::stod(b, &used));
            if (used != b.size()) throw std::invalid_argument(b);
        } catch (const std::exception&) {
            throw FormatError("spectrum CSV line " + std::to_string(lineno) + " is not two numbers");
        }
    }
    s.freq = Eigen::Map<Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
    s.magnitude = Eigen::Map<Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
    return s;
}

std::string svg_plot(const std::string& title, const Eigen::VectorXd& x, const std::vector<PlotSeries>& series,
                     const std::string& x_label) {
    constexpr double W = 720, H = 420, L = 60, R = 20, T = 40, B = 50;
    const double x0 = x.minCoeff(), x1 = x.maxCoeff();
    double y1 = 0.0;
    for (const auto& s : series) y1 = std::max(y1, s.values.maxCoeff());
    if (y1 <= 0.0) y1 = 1.0;
    const double xs = x1 > x0 ? (W - L - R) / (x1 - x0) : 1.0;
    const double ys = (H - T - B) / y1;
    auto px = [&](double v) { return L + (v - x0) * xs; };
    auto py = [&](double v) { return H - B - v * ys; };
    auto fx = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", v);
        return std::string(buf);
    };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
       << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n"
       << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
       << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double yv = y1 * k / 4.0, xv = x0 + (x1 - x0) * k / 4.0;
        os << "<text x=\"" << L - 6 << "\" y=\"" << fx(py(yv) + 4) << "\" text-anchor=\"end\">" << fx(yv) << "</text>\n";
        os << "<text x=\"" << fx(px(xv)) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << fx(xv * 1e-3)
           << "</text>\n";
    }
    os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        os << "<polyline fill=\"none\" stroke=\"" << series[s].color << "\" stroke-width=\"1.5\" points=\"";
        for (Eigen::Index i = 0; i < x.size(); ++i) os << fx(px(x(i))) << ',' << fx(py(series[s].values(i))) << ' ';
        os << "\"/>\n";
        const double ly = T + 16 + 16 * static_cast<double>(s);
        os << "<line x1=\"" << W - R - 130 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - R - 110 << "\" y2=\"" << ly - 4
           << "\" stroke=\"" << series[s].color << "\" stroke-width=\"2\"/>\n"
           << "<text x=\"" << W - R - 104 << "\" y=\"" << ly << "\">" << series[s].label << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot write '" + path + "'");
    os << text;
    if (!os) throw FormatError("write to '" + path + "' failed");
}

std::string read_text(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot read '" + path + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace gics
