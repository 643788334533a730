#include "spct/features.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <utility>

namespace spct {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<double> gaussian_kernel(double sigma) {
    int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        double v = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        k[i + radius] = v;
        sum += v;
    }
    for (double& v : k) v /= sum;
    return k;
}

int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

// Separable convolution with replicated borders.
ScalarMap gaussian_smooth(const ScalarMap& in, double sigma) {
    if (sigma <= 0.0) return in;
    const auto k = gaussian_kernel(sigma);
    const int radius = static_cast<int>(k.size() / 2);
    ScalarMap tmp(in.width, in.height);
    for (int y = 0; y < in.height; ++y)
        for (int x = 0; x < in.width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += k[i + radius] * in.at(clampi(x + i, 0, in.width - 1), y);
            tmp.at(x, y) = acc;
        }
    ScalarMap out(in.width, in.height);
    for (int y = 0; y < in.height; ++y)
        for (int x = 0; x < in.width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += k[i + radius] * tmp.at(x, clampi(y + i, 0, in.height - 1));
            out.at(x, y) = acc;
        }
    return out;
}

ScalarMap diff_x(const ScalarMap& in) {
    ScalarMap out(in.width, in.height);
    for (int y = 0; y < in.height; ++y)
        for (int x = 0; x < in.width; ++x)
            out.at(x, y) = (in.at(clampi(x + 1, 0, in.width - 1), y) -
                            in.at(clampi(x - 1, 0, in.width - 1), y)) / 2.0;
    return out;
}

ScalarMap diff_y(const ScalarMap& in) {
    ScalarMap out(in.width, in.height);
    for (int y = 0; y < in.height; ++y)
        for (int x = 0; x < in.width; ++x)
            out.at(x, y) = (in.at(x, clampi(y + 1, 0, in.height - 1)) -
                            in.at(x, clampi(y - 1, 0, in.height - 1))) / 2.0;
    return out;
}

// atan of dy/dx mapped to degrees in (-90, 90]; 0 for a flat point.
double fold_orientation(double dx, double dy) {
    if (dx == 0.0 && dy == 0.0) return 0.0;
    if (dx == 0.0) return 90.0;
    return std::atan(dy / dx) * 180.0 / kPi;
}

GradientMaps gradient_maps_impl(ScalarMap base, double sigma) {
    GradientMaps g;
    base = gaussian_smooth(base, sigma);
    g.gx = diff_x(base);
    g.gy = diff_y(base);
    g.gx.kind = "gx";
    g.gy.kind = "gy";
    g.magnitude = ScalarMap(base.width, base.height, 0.0, "gradient-magnitude");
    g.orientation = ScalarMap(base.width, base.height, 0.0, "orientation-degrees");
    for (std::size_t i = 0; i < g.magnitude.data.size(); ++i) {
        double dx = g.gx.data[i], dy = g.gy.data[i];
        g.magnitude.data[i] = std::sqrt(dx * dx + dy * dy);
        g.orientation.data[i] = fold_orientation(dx, dy);
    }
    return g;
}

struct HessianMaps {
    ScalarMap ixx, ixy, iyy;
    ScalarMap smoothed;
};

HessianMaps hessian_maps(const GrayImage& img, double sigma) {
    HessianMaps h;
    h.smoothed = gaussian_smooth(to_scalar(img), sigma);
    const ScalarMap& s = h.smoothed;
    h.ixx = ScalarMap(s.width, s.height);
    h.iyy = ScalarMap(s.width, s.height);
    h.ixy = ScalarMap(s.width, s.height);
    for (int y = 0; y < s.height; ++y)
        for (int x = 0; x < s.width; ++x) {
            int xl = clampi(x - 1, 0, s.width - 1), xr = clampi(x + 1, 0, s.width - 1);
            int yu = clampi(y - 1, 0, s.height - 1), yd = clampi(y + 1, 0, s.height - 1);
            h.ixx.at(x, y) = s.at(xr, y) - 2.0 * s.at(x, y) + s.at(xl, y);
            h.iyy.at(x, y) = s.at(x, yd) - 2.0 * s.at(x, y) + s.at(x, yu);
            h.ixy.at(x, y) =
                (s.at(xr, yd) - s.at(xr, yu) - s.at(xl, yd) + s.at(xl, yu)) / 4.0;
        }
    return h;
}

// Structure tensor entries: Gaussian-windowed products of first derivatives.
struct TensorMaps {
    ScalarMap jxx, jxy, jyy;
};

TensorMaps structure_tensor(const GrayImage& img, double sigma) {
    GradientMaps g = gradient_maps_impl(to_scalar(img), sigma);
    TensorMaps t;
    t.jxx = ScalarMap(g.gx.width, g.gx.height);
    t.jxy = ScalarMap(g.gx.width, g.gx.height);
    t.jyy = ScalarMap(g.gx.width, g.gx.height);
    for (std::size_t i = 0; i < t.jxx.data.size(); ++i) {
        t.jxx.data[i] = g.gx.data[i] * g.gx.data[i];
        t.jxy.data[i] = g.gx.data[i] * g.gy.data[i];
        t.jyy.data[i] = g.gy.data[i] * g.gy.data[i];
    }
    t.jxx = gaussian_smooth(t.jxx, sigma);
    t.jxy = gaussian_smooth(t.jxy, sigma);
    t.jyy = gaussian_smooth(t.jyy, sigma);
    return t;
}

double bilinear(const ScalarMap& s, double x, double y) {
    int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
    double fx = x - x0, fy = y - y0;
    int x0c = clampi(x0, 0, s.width - 1), x1c = clampi(x0 + 1, 0, s.width - 1);
    int y0c = clampi(y0, 0, s.height - 1), y1c = clampi(y0 + 1, 0, s.height - 1);
    return (1 - fx) * (1 - fy) * s.at(x0c, y0c) + fx * (1 - fy) * s.at(x1c, y0c) +
           (1 - fx) * fy * s.at(x0c, y1c) + fx * fy * s.at(x1c, y1c);
}

// 16 samples on a radius-2 circle, bilinearly interpolated with fixed-point
// weights that sum to exactly one per sample. Working in integers makes the
// comparison s(g_p - g_c) exactly invariant to adding a constant to every
// pixel (no float rounding can flip a sign).
ScalarMap lbp_map(const GrayImage& img) {
    constexpr int kSamples = 16;
    constexpr double kRadius = 2.0;
    constexpr std::int64_t kOne = 1 << 16;
    struct Tap {
        int dx, dy;           // top-left corner offset of the 2x2 cell
        std::int64_t w[4];    // weights for (0,0) (1,0) (0,1) (1,1); sum == kOne
    };
    Tap taps[kSamples];
    for (int p = 0; p < kSamples; ++p) {
        double a = 2.0 * kPi * p / kSamples;
        double sx = kRadius * std::cos(a), sy = kRadius * std::sin(a);
        double flx = std::floor(sx), fly = std::floor(sy);
        double fx = sx - flx, fy = sy - fly;
        Tap& t = taps[p];
        t.dx = static_cast<int>(flx);
        t.dy = static_cast<int>(fly);
        t.w[3] = std::llround(fx * fy * kOne);
        t.w[1] = std::llround(fx * (1.0 - fy) * kOne);
        t.w[2] = std::llround((1.0 - fx) * fy * kOne);
        t.w[0] = kOne - t.w[1] - t.w[2] - t.w[3];
    }
    ScalarMap out(img.width, img.height, 0.0, "lbp-code");
    auto sample = [&](int x, int y) {
        return static_cast<std::int64_t>(
            img.at(clampi(x, 0, img.width - 1), clampi(y, 0, img.height - 1)));
    };
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            std::int64_t center = kOne * static_cast<std::int64_t>(img.at(x, y));
            std::uint32_t code = 0;
            for (int p = 0; p < kSamples; ++p) {
                const Tap& t = taps[p];
                std::int64_t v = t.w[0] * sample(x + t.dx, y + t.dy) +
                                 t.w[1] * sample(x + t.dx + 1, y + t.dy) +
                                 t.w[2] * sample(x + t.dx, y + t.dy + 1) +
                                 t.w[3] * sample(x + t.dx + 1, y + t.dy + 1);
                if (v >= center) code |= (1u << p);
            }
            out.at(x, y) = static_cast<double>(code);
        }
    return out;
}

}  // namespace

GradientMaps gradient_maps(const GrayImage& img, double sigma) {
    require(sigma >= 0.0, "gradient_maps: sigma must be nonnegative");
    return gradient_maps_impl(to_scalar(img), sigma);
}

ScalarMap gaussian_blur(const ScalarMap& img, double sigma) {
    return gaussian_smooth(img, sigma);
}

GradientMaps gradient_maps(const ScalarMap& img, double sigma) {
    require(sigma >= 0.0, "gradient_maps: sigma must be nonnegative");
    return gradient_maps_impl(img, sigma);
}

void symmetric_eigenvalues(double a, double b, double c, double& l1, double& l2) {
    double mean = 0.5 * (a + c);
    double disc = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
    l1 = mean + disc;
    l2 = mean - disc;
}

ScalarMap feature_map(const GrayImage& img, const std::string& kind, double sigma) {
    require(sigma >= 0.0, "feature_map: sigma must be nonnegative");
    if (kind == "gradient-magnitude") return gradient_maps(img, sigma).magnitude;
    if (kind == "orientation-degrees") return gradient_maps(img, sigma).orientation;
    if (kind == "lbp-code") return lbp_map(img);

    if (kind == "beltrami" || kind == "harris" || kind == "shi-tomasi" || kind == "cumani") {
        TensorMaps t = structure_tensor(img, sigma);
        ScalarMap out(img.width, img.height, 0.0, kind);
        for (std::size_t i = 0; i < out.data.size(); ++i) {
            double l1, l2;
            symmetric_eigenvalues(t.jxx.data[i], t.jxy.data[i], t.jyy.data[i], l1, l2);
            double v = 0.0;
            if (kind == "beltrami")
                v = 1.0 + (l1 + l2) + l1 * l2;
            else if (kind == "harris")
                v = l1 * l2 - 0.04 * (l1 + l2) * (l1 + l2);
            else if (kind == "shi-tomasi")
                v = l2;
            else
                v = l1;
            out.data[i] = v;
        }
        return out;
    }

    if (kind == "shape-index" || kind == "nci" || kind == "eigvec-orientation") {
        HessianMaps h = hessian_maps(img, sigma);
        ScalarMap out(img.width, img.height, 0.0, kind);
        for (std::size_t i = 0; i < out.data.size(); ++i) {
            double lmax, lmin;
            symmetric_eigenvalues(h.ixx.data[i], h.ixy.data[i], h.iyy.data[i], lmax, lmin);
            if (kind == "shape-index") {
                out.data[i] = (lmax == 0.0 && lmin == 0.0) ? 0.0 : std::atan2(lmin, lmax);
            } else if (kind == "nci") {
                out.data[i] = std::atan(std::sqrt(lmax * lmax + lmin * lmin) /
                                        (1.0 + h.smoothed.data[i]));
            } else {
                out.data[i] = fold_orientation(lmax - h.iyy.data[i], h.ixy.data[i]);
            }
        }
        return out;
    }

    throw contract_error("feature_map: unknown kind '" + kind + "'");
}

GrayImage edge_map(const GrayImage& img, double lo, double hi, double sigma) {
    require(lo >= 0.0 && lo <= hi, "edge_map: need 0 <= lo <= hi");
    GradientMaps g = gradient_maps(img, sigma);
    const int w = img.width, h = img.height;

    // Non-maximum suppression along the quantized gradient direction.
    auto mag_at = [&](int x, int y) -> double {
        if (x < 0 || y < 0 || x >= w || y >= h) return 0.0;
        return g.magnitude.at(x, y);
    };
    ScalarMap nms(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double m = g.magnitude.at(x, y);
            if (m == 0.0) continue;
            double ang = std::atan2(g.gy.at(x, y), g.gx.at(x, y)) * 180.0 / kPi;
            if (ang < 0.0) ang += 180.0;  // gradient axis, not direction
            int dx1, dy1, dx2, dy2;
            if (ang < 22.5 || ang >= 157.5) {
                dx1 = -1; dy1 = 0; dx2 = 1; dy2 = 0;
            } else if (ang < 67.5) {
                dx1 = -1; dy1 = -1; dx2 = 1; dy2 = 1;
            } else if (ang < 112.5) {
                dx1 = 0; dy1 = -1; dx2 = 0; dy2 = 1;
            } else {
                dx1 = 1; dy1 = -1; dx2 = -1; dy2 = 1;
            }
            if (m > mag_at(x + dx1, y + dy1) && m >= mag_at(x + dx2, y + dy2))
                nms.at(x, y) = m;
        }

    // Hysteresis: grow from strong responses through weak ones.
    GrayImage out(w, h, 0);
    std::deque<std::pair<int, int>> frontier;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (nms.at(x, y) > hi) {
                out.at(x, y) = 1;
                frontier.emplace_back(x, y);
            }
    while (!frontier.empty()) {
        auto [x, y] = frontier.front();
        frontier.pop_front();
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                int nx = x + dx, ny = y + dy;
                if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                if (out.at(nx, ny) || nms.at(nx, ny) <= lo) continue;
                out.at(nx, ny) = 1;
                frontier.emplace_back(nx, ny);
            }
    }
    return out;
}

GrayImage edge_map_auto(const GrayImage& img, double sigma) {
    GradientMaps g = gradient_maps(img, sigma);
    double maxmag = 0.0;
    for (double v : g.magnitude.data) maxmag = std::max(maxmag, v);
    return edge_map(img, 0.1 * maxmag, 0.2 * maxmag, sigma);
}

}  // namespace spct
