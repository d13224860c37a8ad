#include "icsplit/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace icsplit {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

}  // namespace

std::string render_curve_svg(const std::vector<CurvePoint>& points, const PlotSpec& spec) {
    if (points.empty()) throw std::invalid_argument("render_curve_svg: empty curve");

    const double width = 640, height = 420;
    const double ml = 70, mr = 20, mt = 30, mb = 50;
    const double pw = width - ml - mr, ph = height - mt - mb;

    auto xval = [&](double x) {
        if (!spec.log_x) return x;
        if (!(x > 0.0))
            throw std::invalid_argument("render_curve_svg: log axis needs positive x values");
        return std::log10(x);
    };

    double x_lo = xval(points.front().x), x_hi = x_lo;
    double y_lo = points.front().mean - points.front().stddev;
    double y_hi = points.front().mean + points.front().stddev;
    for (const auto& p : points) {
        x_lo = std::min(x_lo, xval(p.x));
        x_hi = std::max(x_hi, xval(p.x));
        y_lo = std::min(y_lo, p.mean - p.stddev);
        y_hi = std::max(y_hi, p.mean + p.stddev);
    }
    if (x_hi == x_lo) {
        x_lo -= 1.0;
        x_hi += 1.0;
    }
    const double y_pad = (y_hi - y_lo) > 0 ? 0.08 * (y_hi - y_lo) : 0.05;
    y_lo -= y_pad;
    y_hi += y_pad;

    auto sx = [&](double x) { return ml + (xval(x) - x_lo) / (x_hi - x_lo) * pw; };
    auto sy = [&](double y) { return mt + (y_hi - y) / (y_hi - y_lo) * ph; };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    s << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    if (!spec.title.empty())
        s << "<text x=\"" << num(width / 2) << "\" y=\"20\" text-anchor=\"middle\" "
          << "font-family=\"sans-serif\" font-size=\"14\">" << spec.title << "</text>\n";

    // axes
    s << "<line x1=\"" << num(ml) << "\" y1=\"" << num(mt + ph) << "\" x2=\"" << num(ml + pw)
      << "\" y2=\"" << num(mt + ph) << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << num(ml) << "\" y1=\"" << num(mt) << "\" x2=\"" << num(ml) << "\" y2=\""
      << num(mt + ph) << "\" stroke=\"black\"/>\n";

    // x ticks at the data points when few, else 5 even ticks
    std::vector<double> xticks;
    if (points.size() <= 8) {
        for (const auto& p : points) xticks.push_back(p.x);
    } else {
        for (int i = 0; i < 5; ++i) {
            const double t = x_lo + (x_hi - x_lo) * i / 4.0;
            xticks.push_back(spec.log_x ? std::pow(10.0, t) : t);
        }
    }
    for (double t : xticks) {
        const double x = sx(t);
        s << "<line x1=\"" << num(x) << "\" y1=\"" << num(mt + ph) << "\" x2=\"" << num(x)
          << "\" y2=\"" << num(mt + ph + 5) << "\" stroke=\"black\"/>\n";
        s << "<text x=\"" << num(x) << "\" y=\"" << num(mt + ph + 18)
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
          << tick_label(t) << "</text>\n";
    }
    for (int i = 0; i < 5; ++i) {
        const double v = y_lo + (y_hi - y_lo) * i / 4.0;
        const double y = sy(v);
        s << "<line x1=\"" << num(ml - 5) << "\" y1=\"" << num(y) << "\" x2=\"" << num(ml)
          << "\" y2=\"" << num(y) << "\" stroke=\"black\"/>\n";
        s << "<text x=\"" << num(ml - 8) << "\" y=\"" << num(y + 4)
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << tick_label(v)
          << "</text>\n";
    }
    s << "<text x=\"" << num(ml + pw / 2) << "\" y=\"" << num(height - 10)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << spec.x_label
      << "</text>\n";
    s << "<text x=\"16\" y=\"" << num(mt + ph / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 "
      << num(mt + ph / 2) << ")\">" << spec.y_label << "</text>\n";

    // error bars
    for (const auto& p : points) {
        if (p.stddev <= 0.0) continue;
        const double x = sx(p.x);
        const double y0 = sy(p.mean - p.stddev), y1 = sy(p.mean + p.stddev);
        s << "<line x1=\"" << num(x) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x)
          << "\" y2=\"" << num(y1) << "\" stroke=\"#777777\"/>\n";
        s << "<line x1=\"" << num(x - 4) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x + 4)
          << "\" y2=\"" << num(y0) << "\" stroke=\"#777777\"/>\n";
        s << "<line x1=\"" << num(x - 4) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x + 4)
          << "\" y2=\"" << num(y1) << "\" stroke=\"#777777\"/>\n";
    }

    // polyline and markers
    s << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (const auto& p : points) s << num(sx(p.x)) << "," << num(sy(p.mean)) << " ";
    s << "\"/>\n";
    for (const auto& p : points)
        s << "<circle cx=\"" << num(sx(p.x)) << "\" cy=\"" << num(sy(p.mean))
          << "\" r=\"3\" fill=\"#1f77b4\"/>\n";

    s << "</svg>\n";
    return s.str();
}

void export_plot(const std::string& curve_csv, const std::string& out_svg, bool log_x) {
    std::string x_name;
    const std::vector<CurvePoint> points = read_curve_csv(curve_csv, &x_name);
    PlotSpec spec;
    spec.x_label = x_name;
    spec.log_x = log_x;
    spec.title = "balanced accuracy vs. " + x_name;
    const std::string svg = render_curve_svg(points, spec);  // may throw; file untouched
    std::ofstream out(out_svg);
    if (!out) throw std::runtime_error(out_svg + ": cannot open for writing");
    out << svg;
    if (!out) throw std::runtime_error(out_svg + ": write failed");
}

}  // namespace icsplit
