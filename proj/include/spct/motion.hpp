#pragma once

// Motion detection: temporal-median background models (integral-histogram
// and sorting variants), background subtraction with morphology and blob
// labeling, the flux trace of spatiotemporal gradient change, depth-based
// false-positive suppression, and geodesic active-contour refinement.

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "spct/imagecore.hpp"
#include "spct/integral.hpp"

namespace spct {

// Sliding stack of frames; the detectors operate on the center frame.
struct FrameWindow {
    std::vector<GrayImage> frames;  // odd count, uniform dims

    int center() const { return static_cast<int>(frames.size()) / 2; }
    void validate() const;
};

struct Blob {
    int id = 0;
    Rect bbox;
    long long area = 0;
};

struct MotionMask {
    int width = 0, height = 0;
    std::vector<std::uint8_t> fg;      // {0,1}
    std::vector<std::int32_t> labels;  // 0 background, else blob id
    std::vector<Blob> blobs;
    long long min_blob = 0;            // area floor the blobs satisfied

    std::uint8_t at(int x, int y) const { return fg[static_cast<std::size_t>(y) * width + x]; }
};

// Joint integral histogram over the whole window; per pixel, the median is
// the smallest bin whose m x n neighborhood CDF reaches half the samples,
// reported as the bin-center intensity. Windows clipped at borders.
// Maintains the model incrementally: slide() adds the new frame's tensor
// and subtracts the tensor of the frame falling out of the window.
class MedianBackgroundIH {
public:
    MedianBackgroundIH(const FrameWindow& window, int bins, int m, int n);

    void slide(const GrayImage& next);
    GrayImage background() const;

    int bins() const { return bins_; }

private:
    void add_frame(const GrayImage& f, int sign);

    int bins_, m_, n_;
    int width_ = 0, height_ = 0;
    std::deque<GrayImage> frames_;
    std::vector<std::uint64_t> joint_;  // bins x (h+1) x (w+1)
};

GrayImage median_background_ih(const FrameWindow& window, int bins, int m, int n);

// Exact per-pixel temporal median (odd window -> middle order statistic).
GrayImage median_background_sort(const FrameWindow& window);

// |frame - background| > tau, then 3x3 binary opening and closing, then
// 8-connected labeling discarding blobs smaller than min_blob.
MotionMask subtract_threshold(const GrayImage& frame, const GrayImage& background,
                              int tau, long long min_blob);

// Relabel a raw binary foreground into a MotionMask (no morphology).
MotionMask label_mask(const std::vector<std::uint8_t>& fg, int w, int h, long long min_blob);

// Flux trace at the window's center frame: squared temporal derivatives of
// the spatiotemporal gradient (x, y and t components), box-averaged over
// avg_window. sigma_d > 0 uses Gaussian-derivative spatial gradients.
ScalarMap flux_trace(const FrameWindow& window, double sigma_d = 1.0, int avg_window = 5);

// Threshold a nonnegative response map into a labeled motion mask.
MotionMask threshold_response(const ScalarMap& response, double tau, long long min_blob);

struct DepthMap {
    int width = 0, height = 0;
    std::vector<double> depth;  // meters; NaN = no data

    double at(int x, int y) const { return depth[static_cast<std::size_t>(y) * width + x]; }
};

DepthMap load_depth(const std::string& path);
void save_depth(const DepthMap& d, const std::string& path);

// Clears foreground wherever depth > h_tau (no-data pixels are kept), then
// relabels with the mask's original blob-area floor.
MotionMask depth_filter(const MotionMask& mask, const DepthMap& depth, double h_tau);

// Edge-stopping indicator g = 1 / (1 + trace).
ScalarMap edge_indicator(const ScalarMap& trace);

struct GacParams {
    double c = 0.2;     // constant inward speed
    double dt = 0.25;   // explicit step, CFL-bounded
    int iters = 100;
    int reinit_every = 20;
};

// Level-set refinement of an initial mask under
//   phi += dt * ( g * (c + kappa) * |grad phi| + grad phi . grad g ),
// phi initialized to the signed distance of the mask (negative inside),
// re-distanced every reinit_every iterations. Throws on divergence
// (non-finite phi). Returns the final {phi < 0} mask.
std::vector<std::uint8_t> gac_refine(const std::vector<std::uint8_t>& init_mask,
                                     int w, int h, const ScalarMap& g,
                                     const GacParams& params);

// Exact Euclidean signed distance of a binary mask (negative inside).
ScalarMap signed_distance(const std::vector<std::uint8_t>& mask, int w, int h);

}  // namespace spct
