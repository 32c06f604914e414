#include "mcbn/svg.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace mcbn::svg {
namespace {

constexpr double kMarginLeft = 56.0;
constexpr double kMarginRight = 16.0;
constexpr double kMarginTop = 28.0;
constexpr double kMarginBottom = 42.0;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

}  // namespace

Canvas::Canvas(double width, double height, double x_min, double x_max, double y_min,
               double y_max, std::string title)
    : width_(width),
      height_(height),
      x_min_(x_min),
      x_max_(x_max),
      y_min_(y_min),
      y_max_(y_max),
      title_(std::move(title)) {
    if (!(x_max_ > x_min_) || !(y_max_ > y_min_))
        throw std::invalid_argument("svg::Canvas: empty data range");
}

double Canvas::px(double x) const {
    return kMarginLeft + (x - x_min_) / (x_max_ - x_min_) * (width_ - kMarginLeft - kMarginRight);
}

double Canvas::py(double y) const {
    return height_ - kMarginBottom -
           (y - y_min_) / (y_max_ - y_min_) * (height_ - kMarginTop - kMarginBottom);
}

void Canvas::polyline(const std::vector<Point>& pts, const std::string& color,
                      double stroke_width, bool dashed) {
    if (pts.size() < 2) return;
    std::string d = "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" +
                    fmt(stroke_width) + "\"";
    if (dashed) d += " stroke-dasharray=\"6,4\"";
    d += " points=\"";
    for (const auto& p : pts) d += fmt(px(p.x)) + "," + fmt(py(p.y)) + " ";
    d += "\"/>";
    elements_.push_back(std::move(d));
}

void Canvas::band(const std::vector<Point>& lower, const std::vector<Point>& upper,
                  const std::string& color, double opacity) {
    if (lower.size() < 2 || lower.size() != upper.size()) return;
    std::string d = "<polygon stroke=\"none\" fill=\"" + color + "\" fill-opacity=\"" +
                    fmt(opacity) + "\" points=\"";
    for (const auto& p : upper) d += fmt(px(p.x)) + "," + fmt(py(p.y)) + " ";
    for (auto it = lower.rbegin(); it != lower.rend(); ++it)
        d += fmt(px(it->x)) + "," + fmt(py(it->y)) + " ";
    d += "\"/>";
    elements_.push_back(std::move(d));
}

void Canvas::dots(const std::vector<Point>& pts, const std::string& color, double radius) {
    for (const auto& p : pts)
        elements_.push_back("<circle cx=\"" + fmt(px(p.x)) + "\" cy=\"" + fmt(py(p.y)) +
                            "\" r=\"" + fmt(radius) + "\" fill=\"" + color +
                            "\" fill-opacity=\"0.55\"/>");
}

void Canvas::hline(double y, const std::string& color, double stroke_width, bool dashed) {
    std::string d = "<line x1=\"" + fmt(px(x_min_)) + "\" y1=\"" + fmt(py(y)) + "\" x2=\"" +
                    fmt(px(x_max_)) + "\" y2=\"" + fmt(py(y)) + "\" stroke=\"" + color +
                    "\" stroke-width=\"" + fmt(stroke_width) + "\"";
    if (dashed) d += " stroke-dasharray=\"6,4\"";
    d += "/>";
    elements_.push_back(std::move(d));
}

void Canvas::axes(const std::string& x_label, const std::string& y_label) {
    const double x0 = px(x_min_), x1 = px(x_max_);
    const double y0 = py(y_min_), y1 = py(y_max_);
    elements_.push_back("<line x1=\"" + fmt(x0) + "\" y1=\"" + fmt(y0) + "\" x2=\"" + fmt(x1) +
                        "\" y2=\"" + fmt(y0) + "\" stroke=\"#333\" stroke-width=\"1\"/>");
    elements_.push_back("<line x1=\"" + fmt(x0) + "\" y1=\"" + fmt(y0) + "\" x2=\"" + fmt(x0) +
                        "\" y2=\"" + fmt(y1) + "\" stroke=\"#333\" stroke-width=\"1\"/>");
    for (int i = 0; i <= 4; ++i) {
        const double xv = x_min_ + (x_max_ - x_min_) * i / 4.0;
        const double yv = y_min_ + (y_max_ - y_min_) * i / 4.0;
        elements_.push_back("<text x=\"" + fmt(px(xv)) + "\" y=\"" + fmt(y0 + 16.0) +
                            "\" font-size=\"10\" text-anchor=\"middle\" fill=\"#333\">" +
                            fmt_tick(xv) + "</text>");
        elements_.push_back("<text x=\"" + fmt(x0 - 6.0) + "\" y=\"" + fmt(py(yv) + 3.0) +
                            "\" font-size=\"10\" text-anchor=\"end\" fill=\"#333\">" +
                            fmt_tick(yv) + "</text>");
    }
    elements_.push_back("<text x=\"" + fmt(0.5 * (x0 + x1)) + "\" y=\"" +
                        fmt(height_ - 8.0) +
                        "\" font-size=\"11\" text-anchor=\"middle\" fill=\"#333\">" + x_label +
                        "</text>");
    elements_.push_back("<text x=\"14\" y=\"" + fmt(0.5 * (py(y_min_) + py(y_max_))) +
                        "\" font-size=\"11\" text-anchor=\"middle\" fill=\"#333\" "
                        "transform=\"rotate(-90 14 " +
                        fmt(0.5 * (py(y_min_) + py(y_max_))) + ")\">" + y_label + "</text>");
}

std::string Canvas::render() const {
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width_) +
                      "\" height=\"" + fmt(height_) + "\" viewBox=\"0 0 " + fmt(width_) + " " +
                      fmt(height_) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title_.empty())
        out += "<text x=\"" + fmt(width_ / 2.0) +
               "\" y=\"18\" font-size=\"13\" text-anchor=\"middle\" fill=\"#111\">" + title_ +
               "</text>\n";
    for (const auto& e : elements_) out += e + "\n";
    out += "</svg>\n";
    return out;
}

void Canvas::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("svg: cannot open " + path);
    out << render();
}

}  // namespace mcbn::svg
