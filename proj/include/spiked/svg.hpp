#pragma once

#include <string>
#include <vector>

namespace spiked::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool markers = false;  // points instead of a polyline
};

void line_plot(const std::string& path, const std::string& title, const std::string& xlabel,
               const std::vector<Series>& series);

// Bars from bin edges/densities with an optional overlay curve.
void histogram_plot(const std::string& path, const std::string& title, const std::vector<double>& edges,
                    const std::vector<double>& densities, const Series& overlay);

}  // namespace spiked::svg
