#include <cmath>

#include "spct/features.hpp"

namespace spct {

namespace {

// Fixed-point scale for gradient-magnitude weights inside the integral
// histogram (which accumulates integers).
constexpr double kMagScale = 65536.0;

constexpr double kPhogSigma = 1.0;

int orientation_bin(double deg, int bins) {
    int b = static_cast<int>(std::floor((deg + 90.0) * bins / 180.0));
    if (b < 0) b = 0;
    if (b >= bins) b = bins - 1;
    return b;
}

}  // namespace

std::size_t phog_length(int levels, int bins) {
    require(levels >= 0 && bins >= 1, "phog_length: need levels >= 0 and bins >= 1");
    std::size_t cells = 0, per_level = 1;
    for (int l = 0; l <= levels; ++l, per_level *= 4) cells += per_level;
    return cells * static_cast<std::size_t>(bins);
}

std::vector<PHoG> pyramid_hog(const GrayImage& window, int levels, int bins,
                              int chip_w, int chip_h) {
    require(levels >= 0 && bins >= 1, "pyramid_hog: need levels >= 0 and bins >= 1");
    require(chip_w >= 1 && chip_h >= 1, "pyramid_hog: chip must be nonempty");
    require(chip_w <= window.width && chip_h <= window.height,
            "pyramid_hog: chip larger than window");
    const int scale = 1 << levels;
    require(chip_w % scale == 0 && chip_h % scale == 0,
            "pyramid_hog: chip dimensions must be divisible by 2^levels");

    // One magnitude-weighted orientation histogram tensor over the edge
    // pixels serves every pyramid level and every chip position.
    GrayImage edges = edge_map_auto(window, kPhogSigma);
    GradientMaps grads = gradient_maps(window, kPhogSigma);
    BinMap obins(window.width, window.height, bins);
    std::vector<std::uint64_t> weights(obins.data.size(), 0);
    for (std::size_t i = 0; i < obins.data.size(); ++i) {
        obins.data[i] =
            static_cast<std::uint16_t>(orientation_bin(grads.orientation.data[i], bins));
        if (edges.data[i])
            weights[i] =
                static_cast<std::uint64_t>(std::llround(grads.magnitude.data[i] * kMagScale));
    }
    IntegralHistogramTensor ih = build_weighted_tensor(obins, weights);

    const int nx = window.width - chip_w + 1, ny = window.height - chip_h + 1;
    std::vector<PHoG> out;
    out.reserve(static_cast<std::size_t>(nx) * ny);
    const std::size_t len = phog_length(levels, bins);
    for (int py = 0; py < ny; ++py)
        for (int px = 0; px < nx; ++px) {
            PHoG d;
            d.levels = levels;
            d.bins = bins;
            d.descriptor.reserve(len);
            for (int l = 0; l <= levels; ++l) {
                int s = 1 << l;
                int cw = chip_w / s, ch = chip_h / s;
                for (int i = 0; i < s; ++i)
                    for (int j = 0; j < s; ++j) {
                        auto h = region_histogram(
                            ih, Rect{px + j * cw, py + i * ch, cw, ch});
                        for (int k = 0; k < bins; ++k)
                            d.descriptor.push_back(static_cast<double>(h[k]) / kMagScale);
                    }
            }
            out.push_back(std::move(d));
        }
    return out;
}

PHoG phog_descriptor(const GrayImage& chip, int levels, int bins) {
    return pyramid_hog(chip, levels, bins, chip.width, chip.height).front();
}

}  // namespace spct
