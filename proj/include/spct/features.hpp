#pragma once

// Dense per-pixel feature maps: gradients, structure-tensor and Hessian
// eigenvalue features, LBP codes, Canny edges, and the pyramid HOG
// descriptor built on a magnitude-weighted integral histogram of edge
// orientations.

#include <string>
#include <vector>

#include "spct/imagecore.hpp"
#include "spct/integral.hpp"

namespace spct {

struct GradientMaps {
    ScalarMap gx, gy;          // central differences (Gaussian-smoothed when sigma > 0)
    ScalarMap magnitude;       // sqrt(gx^2 + gy^2)
    ScalarMap orientation;     // degrees in (-90, 90], sign-folded; 0 where flat
};

// sigma == 0: plain central differences with clamped borders.
// sigma > 0:  separable Gaussian smoothing first, then central differences.
GradientMaps gradient_maps(const GrayImage& img, double sigma = 0.0);
GradientMaps gradient_maps(const ScalarMap& img, double sigma = 0.0);

// Separable Gaussian smoothing with replicated borders; sigma <= 0 returns
// the input unchanged.
ScalarMap gaussian_blur(const ScalarMap& img, double sigma);

// Supported kinds:
//   gradient-magnitude, orientation-degrees,
//   beltrami, harris, shi-tomasi, cumani            (structure tensor),
//   shape-index, nci, eigvec-orientation            (Hessian),
//   lbp-code                                        (P=16, R=2).
ScalarMap feature_map(const GrayImage& img, const std::string& kind, double sigma = 1.0);

// Closed-form eigenvalues of the symmetric 2x2 matrix [[a, b], [b, c]],
// returned as (lambda1 >= lambda2).
void symmetric_eigenvalues(double a, double b, double c, double& l1, double& l2);

// Canny: Gaussian smoothing, gradient, 4-sector non-maximum suppression,
// then hysteresis with strict thresholds (keep mag > hi seeds, grow through
// mag > lo). lo = hi = 0 keeps every pixel with nonzero NMS response.
GrayImage edge_map(const GrayImage& img, double lo, double hi, double sigma = 1.0);

// Default Canny thresholds: lo = 0.1 * max magnitude, hi = 0.2 * max.
GrayImage edge_map_auto(const GrayImage& img, double sigma = 1.0);

struct PHoG {
    int levels = 0;                  // pyramid depth L
    int bins = 0;                    // orientation bins per cell
    std::vector<double> descriptor;  // cells concatenated level 0..L, row-major per level
};

// Descriptor length for levels L, bins k: k * sum_{l=0..L} 4^l.
std::size_t phog_length(int levels, int bins);

// Pyramid HOG of one chip: Canny edge mask, gradient-magnitude-weighted
// orientation histogram per pyramid cell, all cells fetched from one
// weighted integral histogram. Chip dims must be divisible by 2^levels.
PHoG phog_descriptor(const GrayImage& chip, int levels, int bins);

// All descriptors of a sliding chip over `window`, row-major positions,
// stride 1: (W - chip_w + 1) * (H - chip_h + 1) entries.
std::vector<PHoG> pyramid_hog(const GrayImage& window, int levels, int bins,
                              int chip_w, int chip_h);

}  // namespace spct
