#include "spct/imagecore.hpp"

#include <algorithm>
#include <cmath>

namespace spct {

Rect intersect(const Rect& a, const Rect& b) {
    int x1 = std::max(a.x, b.x);
    int y1 = std::max(a.y, b.y);
    int x2 = std::min(a.right(), b.right());
    int y2 = std::min(a.bottom(), b.bottom());
    if (x2 <= x1 || y2 <= y1) return Rect{x1, y1, 0, 0};
    return Rect{x1, y1, x2 - x1, y2 - y1};
}

GrayImage to_grayscale(const ColorImage& img) {
    GrayImage out(img.width, img.height);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        int sum = img.r[i] + img.g[i] + img.b[i];
        out.data[i] = static_cast<std::uint8_t>(std::lround(sum / 3.0));
    }
    return out;
}

namespace {

template <typename T>
BinMap quantize_values(const T* values, int w, int h, int bins, double lo, double hi) {
    require(bins >= 1 && bins <= 65536, "quantize: bins must be in [1, 65536]");
    require(hi > lo, "quantize: hi must exceed lo");
    BinMap out(w, h, bins);
    const double scale = bins / (hi - lo);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        double v = (static_cast<double>(values[i]) - lo) * scale;
        int b = static_cast<int>(std::floor(v));
        b = std::clamp(b, 0, bins - 1);
        out.data[i] = static_cast<std::uint16_t>(b);
    }
    return out;
}

}  // namespace

BinMap quantize(const GrayImage& img, int bins, double lo, double hi) {
    require(img.width > 0 && img.height > 0, "quantize: empty image");
    return quantize_values(img.data.data(), img.width, img.height, bins, lo, hi);
}

BinMap quantize(const ScalarMap& map, int bins, double lo, double hi) {
    require(map.width > 0 && map.height > 0, "quantize: empty map");
    return quantize_values(map.data.data(), map.width, map.height, bins, lo, hi);
}

ScalarMap to_scalar(const GrayImage& img) {
    ScalarMap out(img.width, img.height, 0.0, "intensity");
    for (std::size_t i = 0; i < img.data.size(); ++i) out.data[i] = img.data[i];
    return out;
}

GrayImage to_gray_u8(const ScalarMap& map) {
    GrayImage out(map.width, map.height);
    for (std::size_t i = 0; i < map.data.size(); ++i) {
        double v = std::lround(map.data[i]);
        out.data[i] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
    return out;
}

}  // namespace spct
