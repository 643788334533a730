#pragma once

// Spatially weighted local histograms in O(1) per query. The kernel weight
// is a Manhattan-distance ramp, maximal at the center:
//     w(dx,dy) = C - |dx| - |dy|,   C = floor(kw/2) + floor(kh/2) + 1,
// so every cell in the window keeps weight >= 1. The window splits into
// four quadrants (the center cell belongs to SE; extents are ceil(k/2)
// toward SE and floor(k/2) toward NW). Each quadrant's ramp is linear, so
// a full-image linear weight field per direction turns the quadrant sum
// into a rectangle query on a weighted integral histogram. Opposite
// directions use mirrored ramps that sum to a constant S, which makes the
// plain per-bin count recoverable as (F_dir + F_opp)/S; subtracting the
// constant offset between the field ramp and the kernel ramp then yields
// the exact kernel-weighted sum. All accumulation is 16.16 fixed point, so
// the equivalence with the brute-force path is bit-decidable.

#include <array>
#include <cstdint>
#include <vector>

#include "spct/integral.hpp"

namespace spct {

enum class Quadrant { NW = 0, NE = 1, SW = 2, SE = 3 };

const char* to_string(Quadrant q);

struct KernelSpec {
    int kw = 1, kh = 1;
    bool operator==(const KernelSpec&) const = default;
};

// Quadrant extents: toward SE the half including the center, toward NW the
// complementary half.
struct KernelExtents {
    int sxl, sxr;  // columns left of center / columns from center rightward
    int syt, syb;  // rows above center / rows from center downward
    int c;         // peak weight at the center
};
KernelExtents kernel_extents(const KernelSpec& spec);

// Fixed-point scale: weights are accumulated as round(w * 2^16).
inline constexpr std::int64_t kWeightScale = 1 << 16;
std::uint64_t quantize_weight(double w);

struct WeightField {
    int width = 0, height = 0;
    std::vector<double> w;  // row-major, nonnegative
    Quadrant dir = Quadrant::SE;

    double at(int x, int y) const { return w[static_cast<std::size_t>(y) * width + x]; }
};

// The four full-image ramps. Each extends its quadrant's kernel ramp:
// weight decreases by 1 per step away from the direction's anchor corner
// along each axis that the kernel actually spans (degenerate axes, where
// both quadrant extents are <= 1 cell, stay constant — a 1x1 kernel gives
// four constant fields). Opposite fields sum to the same constant
// everywhere, which is what the exact count recovery in swlh_query needs.
std::array<WeightField, 4> quadrant_weight_fields(int img_w, int img_h, const KernelSpec& spec);

// Weighted integral histogram of an arbitrary nonnegative real field,
// quantized to 16.16 fixed point. Usable with any scan schedule.
IntegralHistogramTensor build_weighted_ih(const BinMap& bins, const WeightField& field,
                                          const ScanSchedule& schedule = {});

struct WeightedQuadrantSet {
    KernelSpec kernel;
    int sx = 0, sy = 0;  // ramp slope per axis (0 on degenerate axes)
    std::int64_t pair_sum = 0;  // S: value of w_dir + w_opposite (constant), 16.16
    std::array<IntegralHistogramTensor, 4> tensors;  // indexed by Quadrant
};

WeightedQuadrantSet build_quadrant_set(const BinMap& bins, const KernelSpec& spec,
                                       const ScanSchedule& schedule = {});

// Exact kernel-weighted local histogram around (cx, cy), 16.16 fixed point.
// Requires the whole kernel window inside the image.
std::vector<std::int64_t> swlh_query_fixed(const WeightedQuadrantSet& set, int cx, int cy,
                                           const KernelSpec& spec);
// Same, normalized to unit mass.
std::vector<double> swlh_query(const WeightedQuadrantSet& set, int cx, int cy,
                               const KernelSpec& spec);

// Oracle: direct double loop over the window, same fixed-point pipeline.
std::vector<std::int64_t> brute_force_swlh_fixed(const BinMap& bins, int cx, int cy,
                                                 const KernelSpec& spec);
std::vector<double> brute_force_swlh(const BinMap& bins, int cx, int cy,
                                     const KernelSpec& spec);

// Baseline approximation: nested rectangular rings with a constant weight
// per ring (the kernel weight at the ring's inner edge). layers = 1
// degenerates to the plain local histogram.
std::vector<double> wedding_cake_swlh(const IntegralHistogramTensor& plain, int cx, int cy,
                                      const KernelSpec& spec, int layers);

// Mean squared difference between two histograms of equal length.
double histogram_mse(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace spct
