#pragma once

// CSV and SVG output. CSV is canonical; every file starts with a config header.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bsthermo {

inline std::string fmt_num(double x, int digits = 12) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

// Ordered key/value pairs echoed into every output file.
struct ConfigHeader {
    std::vector<std::pair<std::string, std::string>> entries;
    void set(const std::string& k, const std::string& v) {
        for (auto& e : entries)
            if (e.first == k) {
                e.second = v;
                return;
            }
        entries.emplace_back(k, v);
    }
    std::string text(const std::string& kind) const {
        std::ostringstream os;
        os << "# bsthermo " << kind << "\n";
        for (const auto& [k, v] : entries) os << "# " << k << ": " << v << "\n";
        return os.str();
    }
};

class CsvTable {
  public:
    explicit CsvTable(std::vector<std::string> columns) : cols_(std::move(columns)) {}
    void row(const std::vector<std::string>& cells) {
        if (cells.size() != cols_.size()) throw std::invalid_argument("csv row has the wrong width");
        rows_.push_back(cells);
    }
    std::string str(const ConfigHeader& h, const std::string& kind) const {
        std::ostringstream os;
        os << h.text(kind);
        for (std::size_t i = 0; i < cols_.size(); ++i) os << (i ? "," : "") << cols_[i];
        os << "\n";
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
            os << "\n";
        }
        return os.str();
    }
    std::size_t size() const { return rows_.size(); }

  private:
    std::vector<std::string> cols_;
    std::vector<std::vector<std::string>> rows_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << text;
}

// ---------------------------------------------------------------- svg

struct Series {
    std::string label;
    std::vector<double> x, y;
    std::string color{"#1f77b4"};
    bool dashed{false};
};

struct Plot {
    std::string title, xlabel, ylabel;
    std::vector<Series> series;
    std::vector<std::pair<double, std::string>> hlines;  // reference lines
    std::vector<std::pair<double, std::string>> vlines;  // endpoint annotations
};

inline std::string render_svg(const Plot& P, int W = 640, int H = 420) {
    const double L = 70, R = 20, T = 40, B = 55;
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    auto grow = [](double v, double& lo, double& hi) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    };
    for (const auto& s : P.series)
        for (std::size_t i = 0; i < s.x.size(); ++i)
            if (std::isfinite(s.y[i])) grow(s.x[i], x0, x1), grow(s.y[i], y0, y1);
    for (const auto& h : P.hlines) grow(h.first, y0, y1);
    for (const auto& v : P.vlines) grow(v.first, x0, x1);
    if (x0 > x1) x0 = 0, x1 = 1;
    if (y0 > y1) y0 = 0, y1 = 1;
    if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
    if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
    double pad = 0.05 * (y1 - y0);
    y0 -= pad, y1 += pad;
    auto X = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto Y = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << P.title << "</text>\n";
    // axes and ticks
    os << "<path d=\"M" << L << " " << T << " V" << H - B << " H" << W - R << "\" stroke=\"black\" fill=\"none\"/>\n";
    for (int k = 0; k <= 5; ++k) {
        double xv = x0 + (x1 - x0) * k / 5, yv = y0 + (y1 - y0) * k / 5;
        os << "<path d=\"M" << fmt_num(X(xv), 6) << " " << H - B << " v5\" stroke=\"black\"/>";
        os << "<text x=\"" << fmt_num(X(xv), 6) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << fmt_num(xv, 3) << "</text>\n";
        os << "<path d=\"M" << L << " " << fmt_num(Y(yv), 6) << " h-5\" stroke=\"black\"/>";
        os << "<text x=\"" << L - 8 << "\" y=\"" << fmt_num(Y(yv) + 4, 6) << "\" text-anchor=\"end\">" << fmt_num(yv, 3) << "</text>\n";
    }
    os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << P.xlabel << "</text>\n";
    os << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << (T + H - B) / 2 << ")\">" << P.ylabel << "</text>\n";
    for (const auto& [v, label] : P.hlines) {
        os << "<path d=\"M" << L << " " << fmt_num(Y(v), 6) << " H" << W - R << "\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>";
        os << "<text x=\"" << W - R - 4 << "\" y=\"" << fmt_num(Y(v) - 4, 6) << "\" text-anchor=\"end\" fill=\"#555\">" << label << "</text>\n";
    }
    for (const auto& [v, label] : P.vlines) {
        os << "<path d=\"M" << fmt_num(X(v), 6) << " " << T << " V" << H - B << "\" stroke=\"#888\" stroke-dasharray=\"2 3\"/>";
        os << "<text x=\"" << fmt_num(X(v) + 3, 6) << "\" y=\"" << T + 12 << "\" fill=\"#555\">" << label << "</text>\n";
    }
    int li = 0;
    for (const auto& s : P.series) {
        std::string d;
        bool pen = false;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.y[i])) {
                pen = false;
                continue;
            }
            d += (pen ? " L" : " M") + fmt_num(X(s.x[i]), 6) + " " + fmt_num(Y(s.y[i]), 6);
            pen = true;
        }
        os << "<path d=\"" << d << "\" stroke=\"" << s.color << "\" fill=\"none\" stroke-width=\"1.5\"" << (s.dashed ? " stroke-dasharray=\"5 3\"" : "") << "/>\n";
        os << "<text x=\"" << L + 10 << "\" y=\"" << T + 14 + 14 * li << "\" fill=\"" << s.color << "\">" << s.label << "</text>\n";
        ++li;
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace bsthermo
