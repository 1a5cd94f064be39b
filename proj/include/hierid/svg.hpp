#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace hierid {

// Bare-bones scatter renderer: axes, ticks, circles, diamond markers.
// Data-first outputs live in the CSVs; this is a convenience view only.
struct SvgScatter {
    std::string title;
    std::string x_label;
    std::string y_label;

    struct Series {
        std::vector<std::pair<double, double>> points;
        std::string color = "#777777";
        double radius = 2.5;
    };
    std::vector<Series> series;

    struct Marker {
        double x = 0.0;
        double y = 0.0;
        std::string color = "#000000";
    };
    std::vector<Marker> markers;

    void write(const std::filesystem::path& path) const;
};

}  // namespace hierid
