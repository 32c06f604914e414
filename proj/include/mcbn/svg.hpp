#pragma once

#include <string>
#include <vector>

namespace mcbn::svg {

struct Point {
    double x;
    double y;
};

// Minimal self-contained SVG canvas with linear data-to-pixel mapping.
// Output is deterministic: coordinates are printed with fixed precision.
class Canvas {
public:
    Canvas(double width, double height, double x_min, double x_max, double y_min, double y_max,
           std::string title = "");

    void polyline(const std::vector<Point>& pts, const std::string& color, double stroke_width,
                  bool dashed = false);
    // Filled band between lower and upper curves sharing x coordinates.
    void band(const std::vector<Point>& lower, const std::vector<Point>& upper,
              const std::string& color, double opacity);
    void dots(const std::vector<Point>& pts, const std::string& color, double radius);
    void hline(double y, const std::string& color, double stroke_width, bool dashed);
    void axes(const std::string& x_label, const std::string& y_label);
    std::string render() const;
    void save(const std::string& path) const;

private:
    double px(double x) const;
    double py(double y) const;

    double width_, height_;
    double x_min_, x_max_, y_min_, y_max_;
    std::string title_;
    std::vector<std::string> elements_;
};

}  // namespace mcbn::svg
