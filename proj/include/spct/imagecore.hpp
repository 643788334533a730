#pragma once

// Core raster types shared by every other module: 8-bit grayscale and RGB
// images, bin-index maps produced by quantization, real-valued scalar maps
// for derived quantities, and integer rectangles.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "spct/error.hpp"

namespace spct {

struct Rect {
    int x = 0, y = 0, w = 0, h = 0;

    int right() const { return x + w; }    // one past last column
    int bottom() const { return y + h; }   // one past last row
    long long area() const { return static_cast<long long>(w) * h; }
    double cx() const { return x + (w - 1) / 2.0; }
    double cy() const { return y + (h - 1) / 2.0; }

    bool contains(double px, double py) const {
        return px >= x && px < x + w && py >= y && py < y + h;
    }
    bool inside(int img_w, int img_h) const {
        return x >= 0 && y >= 0 && w >= 0 && h >= 0 && right() <= img_w && bottom() <= img_h;
    }
    bool operator==(const Rect&) const = default;
};

// Intersection rectangle (w==0 or h==0 when disjoint).
Rect intersect(const Rect& a, const Rect& b);

struct GrayImage {
    int width = 0, height = 0;
    std::vector<std::uint8_t> data;  // row-major

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    bool operator==(const GrayImage&) const = default;
};

struct ColorImage {
    int width = 0, height = 0;
    std::vector<std::uint8_t> r, g, b;  // row-major planes

    ColorImage() = default;
    ColorImage(int w, int h)
        : width(w), height(h),
          r(static_cast<std::size_t>(w) * h, 0),
          g(static_cast<std::size_t>(w) * h, 0),
          b(static_cast<std::size_t>(w) * h, 0) {}

    std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
};

// Result of quantization: per-pixel bin index in [0, bins).
struct BinMap {
    int width = 0, height = 0;
    int bins = 0;
    std::vector<std::uint16_t> data;  // row-major

    BinMap() = default;
    BinMap(int w, int h, int b)
        : width(w), height(h), bins(b), data(static_cast<std::size_t>(w) * h, 0) {}

    std::uint16_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint16_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

// Real-valued raster for derived quantities (gradients, cornerness, flux
// traces, ...). `kind` is a free-form tag naming what the values are.
struct ScalarMap {
    int width = 0, height = 0;
    std::vector<double> data;  // row-major
    std::string kind;

    ScalarMap() = default;
    ScalarMap(int w, int h, double fill = 0.0, std::string k = {})
        : width(w), height(h),
          data(static_cast<std::size_t>(w) * h, fill), kind(std::move(k)) {}

    double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

// Mean of the three channels, rounded to nearest.
GrayImage to_grayscale(const ColorImage& img);

// Uniform quantization of intensity into `bins` equal-width bins spanning
// [lo, hi); values outside are clamped into the first/last bin.
BinMap quantize(const GrayImage& img, int bins, double lo = 0.0, double hi = 256.0);
BinMap quantize(const ScalarMap& map, int bins, double lo, double hi);

ScalarMap to_scalar(const GrayImage& img);
GrayImage to_gray_u8(const ScalarMap& map);  // clamp to [0,255], round

}  // namespace spct
