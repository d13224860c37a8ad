#pragma once

#include <string>
#include <vector>

#include "icsplit/runner.hpp"

namespace icsplit {

struct PlotSpec {
    std::string x_label = "x";
    std::string y_label = "balanced accuracy";
    std::string title;
    bool log_x = false;
};

/// Deterministic standalone SVG line chart with one circle marker per point
/// and vertical error bars from the stddev column. Throws on an empty
/// curve.
std::string render_curve_svg(const std::vector<CurvePoint>& points, const PlotSpec& spec);

/// Read a curve CSV and write the rendered chart; nothing is written when
/// rendering fails.
void export_plot(const std::string& curve_csv, const std::string& out_svg, bool log_x = false);

}  // namespace icsplit
