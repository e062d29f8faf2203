#include "spiked/svg.hpp"
#include "spiked/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace spiked::svg {

namespace {

constexpr double W = 640, H = 420, L = 60, R = 20, T = 40, B = 50;
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

struct Frame {
    double x0, x1, y0, y1;
    double px(double x) const { return L + (x - x0) / (x1 - x0) * (W - L - R); }
    double py(double y) const { return H - B - (y - y0) / (y1 - y0) * (H - T - B); }
};

Frame frame_for(const std::vector<const std::vector<double>*>& xs, const std::vector<const std::vector<double>*>& ys) {
    Frame f{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (auto* v : xs)
        for (double x : *v)
            if (std::isfinite(x)) f.x0 = std::min(f.x0, x), f.x1 = std::max(f.x1, x);
    for (auto* v : ys)
        for (double y : *v)
            if (std::isfinite(y)) f.y0 = std::min(f.y0, y), f.y1 = std::max(f.y1, y);
    if (!std::isfinite(f.x0)) f.x0 = 0, f.x1 = 1;
    if (!std::isfinite(f.y0)) f.y0 = 0, f.y1 = 1;
    if (f.x1 == f.x0) f.x1 = f.x0 + 1;
    f.y0 = std::min(f.y0, 0.0);
    if (f.y1 == f.y0) f.y1 = f.y0 + 1;
    f.y1 += 0.05 * (f.y1 - f.y0);
    return f;
}

std::string escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else if (c == '&') o += "&amp;";
        else o += c;
    }
    return o;
}

void axes(std::ostringstream& os, const Frame& f, const std::string& title, const std::string& xlabel) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title) << "</text>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double x = f.x0 + (f.x1 - f.x0) * k / 4.0, y = f.y0 + (f.y1 - f.y0) * k / 4.0;
        os << "<text x=\"" << f.px(x) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << fmt_num(std::round(x * 1000) / 1000) << "</text>\n";
        os << "<text x=\"" << L - 6 << "\" y=\"" << f.py(y) + 4 << "\" text-anchor=\"end\">" << fmt_num(std::round(y * 1000) / 1000) << "</text>\n";
    }
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << escape(xlabel) << "</text>\n";
}

void draw(std::ostringstream& os, const Frame& f, const Series& s, const char* color, int slot) {
    if (s.markers) {
        for (std::size_t k = 0; k < s.x.size(); ++k)
            if (std::isfinite(s.y[k]))
                os << "<circle cx=\"" << f.px(s.x[k]) << "\" cy=\"" << f.py(s.y[k]) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    } else {
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t k = 0; k < s.x.size(); ++k)
            if (std::isfinite(s.y[k])) os << f.px(s.x[k]) << ',' << f.py(s.y[k]) << ' ';
        os << "\"/>\n";
    }
    os << "<text x=\"" << W - R - 150 << "\" y=\"" << T + 14 * slot << "\" fill=\"" << color << "\">" << escape(s.label) << "</text>\n";
}

void save(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << body;
}

}  // namespace

void line_plot(const std::string& path, const std::string& title, const std::string& xlabel,
               const std::vector<Series>& series) {
    std::vector<const std::vector<double>*> xs, ys;
    for (const auto& s : series) xs.push_back(&s.x), ys.push_back(&s.y);
    const Frame f = frame_for(xs, ys);
    std::ostringstream os;
    axes(os, f, title, xlabel);
    for (std::size_t k = 0; k < series.size(); ++k) draw(os, f, series[k], kColors[k % 7], static_cast<int>(k));
    os << "</svg>\n";
    save(path, os.str());
}

void histogram_plot(const std::string& path, const std::string& title, const std::vector<double>& edges,
                    const std::vector<double>& densities, const Series& overlay) {
    std::vector<const std::vector<double>*> xs{&edges, &overlay.x}, ys{&densities, &overlay.y};
    const Frame f = frame_for(xs, ys);
    std::ostringstream os;
    axes(os, f, title, "eigenvalue");
    for (std::size_t b = 0; b < densities.size(); ++b) {
        const double x0 = f.px(edges[b]), x1 = f.px(edges[b + 1]);
        const double y = f.py(densities[b]), y0 = f.py(0.0);
        os << "<rect x=\"" << x0 << "\" y=\"" << y << "\" width=\"" << std::max(0.0, x1 - x0) << "\" height=\""
           << std::max(0.0, y0 - y) << "\" fill=\"#9ecae1\" stroke=\"#6baed6\"/>\n";
    }
    if (!overlay.x.empty()) draw(os, f, overlay, "black", 0);
    os << "</svg>\n";
    save(path, os.str());
}

}  // namespace spiked::svg
