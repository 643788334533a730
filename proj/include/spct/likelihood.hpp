#pragma once

// Per-channel likelihood surfaces over a search window, their fusion, and
// peak scoring against ground truth.

#include <cstdint>
#include <string>
#include <vector>

#include "spct/features.hpp"
#include "spct/imagecore.hpp"
#include "spct/integral.hpp"

namespace spct {

struct LikelihoodMap {
    int width = 0, height = 0;
    std::vector<double> values;  // row-major, in [0, 1]
    std::string tag;

    double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

// Normalized cross-correlation of `tmpl` slid over `search`, mapped to
// [0, 1] via (gamma + 1) / 2. gamma is defined as 0 where either side has
// zero variance. Values sit at the template-center position; border cells
// outside the valid placement grid replicate the nearest valid value.
LikelihoodMap ncc_map(const ScalarMap& search, const ScalarMap& tmpl);
LikelihoodMap ncc_map(const GrayImage& search, const GrayImage& tmpl);

// 32x32x32 RGB count model of a foreground rect and its surrounding
// background ring (fg dilated by bg_margin, minus fg).
struct ColorModel {
    std::vector<std::uint32_t> fg, bg;  // 32768 counts each, index r5:g5:b5
    std::uint64_t fg_area = 0, bg_area = 0;

    static int bin_index(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        return ((r >> 3) << 10) | ((g >> 3) << 5) | (b >> 3);
    }
};

ColorModel model_fg_bg(const ColorImage& img, const Rect& fg, int bg_margin);

// Per-pixel ratio H_FG / (H_FG + H_BG); 0.5 where both counts are zero.
LikelihoodMap color_ratio_map(const ColorImage& img, const ColorModel& model);

// Intensity analogue of the color model: 32-bin grayscale fg/bg counts.
struct IntensityModel {
    std::vector<std::uint32_t> fg, bg;  // 32 bins each
};
IntensityModel model_fg_bg_gray(const GrayImage& img, const Rect& fg, int bg_margin);
LikelihoodMap intensity_ratio_map(const GrayImage& img, const IntensityModel& model);

// Local-histogram match: at each center, the (kw x kh) window histogram is
// read from `t`, normalized, and compared to the normalized template
// histogram with the Minkowski-p distance. Likelihood = 1 - d / 2^(1/p)
// (the distance bound for two distributions). Borders replicate.
LikelihoodMap hist_distance_map(const IntegralHistogramTensor& t,
                                const std::vector<double>& template_hist,
                                int kw, int kh, double p = 1.0);

// Pyramid match kernel on per-level unit-normalized descriptors:
// kappa = I^0 / 2^L + sum_{l=1..L} I^l / 2^(L-l+1), I^l = sum of mins.
double phog_kernel(const PHoG& x, const PHoG& y);

// Weighted sum of equally sized maps. Weights are normalized to sum 1;
// omitted weights mean equal contribution.
LikelihoodMap fuse_maps(const std::vector<LikelihoodMap>& maps,
                        std::vector<double> weights = {});

struct Peak {
    int x = 0, y = 0;
    double height = 0.0;
    int rank = 0;  // 1 = highest
};

// Strict 8-neighbor local maxima of the 3x3-mean-smoothed map, sorted by
// height (descending), ties broken by row-major scan order.
std::vector<Peak> find_peaks(const LikelihoodMap& map);

// Rank of the best peak whose position falls inside `gt`; k + 1 when none
// of the k peaks does.
int score_map(const LikelihoodMap& map, const Rect& gt);

// Mean score over frames, skipping entries flagged occluded.
double subset_score(const std::vector<int>& scores, const std::vector<bool>& occluded);

}  // namespace spct
