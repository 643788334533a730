#include "spct/likelihood.hpp"

#include <algorithm>
#include <cmath>

namespace spct {

namespace {

constexpr double kVarEps = 1e-9;

int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

// (w+1) x (h+1) zero-padded prefix sums of v and v^2.
struct PrefixSums {
    int w, h;
    std::vector<double> s1, s2;

    explicit PrefixSums(const ScalarMap& m) : w(m.width), h(m.height) {
        s1.assign(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
        s2.assign(s1.size(), 0.0);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                std::size_t i = static_cast<std::size_t>(y + 1) * (w + 1) + (x + 1);
                std::size_t up = i - (w + 1);
                double v = m.at(x, y);
                s1[i] = s1[i - 1] + s1[up] - s1[up - 1] + v;
                s2[i] = s2[i - 1] + s2[up] - s2[up - 1] + v * v;
            }
    }

    double sum(const std::vector<double>& s, int x, int y, int rw, int rh) const {
        std::size_t stride = w + 1;
        return s[static_cast<std::size_t>(y + rh) * stride + (x + rw)] -
               s[static_cast<std::size_t>(y) * stride + (x + rw)] -
               s[static_cast<std::size_t>(y + rh) * stride + x] +
               s[static_cast<std::size_t>(y) * stride + x];
    }
};

// Replicate values computed on the valid placement grid out to the borders.
LikelihoodMap spread_valid(int width, int height, int cx0, int cy0, int nu, int nv,
                           const std::vector<double>& valid, std::string tag) {
    LikelihoodMap map;
    map.width = width;
    map.height = height;
    map.tag = std::move(tag);
    map.values.resize(static_cast<std::size_t>(width) * height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            int vx = clampi(x, cx0, cx0 + nu - 1) - cx0;
            int vy = clampi(y, cy0, cy0 + nv - 1) - cy0;
            map.at(x, y) = valid[static_cast<std::size_t>(vy) * nu + vx];
        }
    return map;
}

LikelihoodMap ncc_map_impl(const ScalarMap& search, const ScalarMap& tmpl) {
    require(tmpl.width >= 1 && tmpl.height >= 1, "ncc_map: empty template");
    require(tmpl.width <= search.width && tmpl.height <= search.height,
            "ncc_map: template larger than search window");

    const int tw = tmpl.width, th = tmpl.height;
    const double n = static_cast<double>(tw) * th;
    double tmean = 0.0;
    for (double v : tmpl.data) tmean += v;
    tmean /= n;
    std::vector<double> tc(tmpl.data.size());
    double tvar = 0.0;
    for (std::size_t i = 0; i < tc.size(); ++i) {
        tc[i] = tmpl.data[i] - tmean;
        tvar += tc[i] * tc[i];
    }

    PrefixSums ps(search);
    const int nu = search.width - tw + 1, nv = search.height - th + 1;
    std::vector<double> valid(static_cast<std::size_t>(nu) * nv, 0.5);
    for (int v = 0; v < nv; ++v)
        for (int u = 0; u < nu; ++u) {
            double sf = ps.sum(ps.s1, u, v, tw, th);
            double fvar = ps.sum(ps.s2, u, v, tw, th) - sf * sf / n;
            if (fvar <= kVarEps || tvar <= kVarEps) continue;  // gamma := 0 -> 0.5
            double num = 0.0;
            for (int dy = 0; dy < th; ++dy)
                for (int dx = 0; dx < tw; ++dx)
                    num += search.at(u + dx, v + dy) * tc[static_cast<std::size_t>(dy) * tw + dx];
            double gamma = num / std::sqrt(fvar * tvar);
            gamma = std::max(-1.0, std::min(1.0, gamma));
            valid[static_cast<std::size_t>(v) * nu + u] = (gamma + 1.0) / 2.0;
        }
    return spread_valid(search.width, search.height, (tw - 1) / 2, (th - 1) / 2,
                        nu, nv, valid, "ncc");
}

}  // namespace

LikelihoodMap ncc_map(const ScalarMap& search, const ScalarMap& tmpl) {
    return ncc_map_impl(search, tmpl);
}

LikelihoodMap ncc_map(const GrayImage& search, const GrayImage& tmpl) {
    return ncc_map_impl(to_scalar(search), to_scalar(tmpl));
}

ColorModel model_fg_bg(const ColorImage& img, const Rect& fg, int bg_margin) {
    require(fg.w > 0 && fg.h > 0 && fg.inside(img.width, img.height),
            "model_fg_bg: foreground rect must lie inside the image");
    require(bg_margin >= 0, "model_fg_bg: negative background margin");

    ColorModel m;
    m.fg.assign(32 * 32 * 32, 0);
    m.bg.assign(32 * 32 * 32, 0);
    Rect ring = intersect(Rect{fg.x - bg_margin, fg.y - bg_margin,
                               fg.w + 2 * bg_margin, fg.h + 2 * bg_margin},
                          Rect{0, 0, img.width, img.height});
    for (int y = ring.y; y < ring.bottom(); ++y)
        for (int x = ring.x; x < ring.right(); ++x) {
            std::size_t i = img.idx(x, y);
            int bin = ColorModel::bin_index(img.r[i], img.g[i], img.b[i]);
            if (fg.contains(x, y)) {
                ++m.fg[bin];
                ++m.fg_area;
            } else {
                ++m.bg[bin];
                ++m.bg_area;
            }
        }
    require(m.bg_area > 0, "model_fg_bg: background ring is empty");
    return m;
}

LikelihoodMap color_ratio_map(const ColorImage& img, const ColorModel& model) {
    require(model.fg.size() == 32768 && model.bg.size() == 32768,
            "color_ratio_map: malformed model");
    LikelihoodMap map;
    map.width = img.width;
    map.height = img.height;
    map.tag = "color-ratio";
    map.values.resize(static_cast<std::size_t>(img.width) * img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            std::size_t i = img.idx(x, y);
            int bin = ColorModel::bin_index(img.r[i], img.g[i], img.b[i]);
            double hf = model.fg[bin], hb = model.bg[bin];
            map.at(x, y) = (hf + hb == 0.0) ? 0.5 : hf / (hf + hb);
        }
    return map;
}

IntensityModel model_fg_bg_gray(const GrayImage& img, const Rect& fg, int bg_margin) {
    require(fg.w > 0 && fg.h > 0 && fg.inside(img.width, img.height),
            "model_fg_bg_gray: foreground rect must lie inside the image");
    require(bg_margin >= 0, "model_fg_bg_gray: negative background margin");
    IntensityModel m;
    m.fg.assign(32, 0);
    m.bg.assign(32, 0);
    Rect ring = intersect(Rect{fg.x - bg_margin, fg.y - bg_margin,
                               fg.w + 2 * bg_margin, fg.h + 2 * bg_margin},
                          Rect{0, 0, img.width, img.height});
    std::uint64_t bg_area = 0;
    for (int y = ring.y; y < ring.bottom(); ++y)
        for (int x = ring.x; x < ring.right(); ++x) {
            int bin = img.at(x, y) >> 3;
            if (fg.contains(x, y)) {
                ++m.fg[bin];
            } else {
                ++m.bg[bin];
                ++bg_area;
            }
        }
    require(bg_area > 0, "model_fg_bg_gray: background ring is empty");
    return m;
}

LikelihoodMap intensity_ratio_map(const GrayImage& img, const IntensityModel& model) {
    require(model.fg.size() == 32 && model.bg.size() == 32,
            "intensity_ratio_map: malformed model");
    LikelihoodMap map;
    map.width = img.width;
    map.height = img.height;
    map.tag = "intensity-ratio";
    map.values.resize(static_cast<std::size_t>(img.width) * img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double hf = model.fg[img.at(x, y) >> 3], hb = model.bg[img.at(x, y) >> 3];
            map.at(x, y) = (hf + hb == 0.0) ? 0.5 : hf / (hf + hb);
        }
    return map;
}

LikelihoodMap hist_distance_map(const IntegralHistogramTensor& t,
                                const std::vector<double>& template_hist,
                                int kw, int kh, double p) {
    require(p >= 1.0, "hist_distance_map: Minkowski order must be >= 1");
    require(kw >= 1 && kh >= 1 && kw <= t.width && kh <= t.height,
            "hist_distance_map: kernel exceeds image");
    require(static_cast<int>(template_hist.size()) == t.bins,
            "hist_distance_map: template bin count mismatch");
    double tsum = 0.0;
    for (double v : template_hist) {
        require(v >= 0.0, "hist_distance_map: negative template entry");
        tsum += v;
    }
    require(std::abs(tsum - 1.0) <= 1e-6, "hist_distance_map: template must be normalized");

    const double dmax = std::pow(2.0, 1.0 / p);
    const int nu = t.width - kw + 1, nv = t.height - kh + 1;
    std::vector<double> valid(static_cast<std::size_t>(nu) * nv, 0.0);
    for (int v = 0; v < nv; ++v)
        for (int u = 0; u < nu; ++u) {
            auto h = region_histogram(t, Rect{u, v, kw, kh});
            double total = 0.0;
            for (auto c : h) total += static_cast<double>(c);
            if (total <= 0.0) continue;  // massless window: no match
            double d = 0.0;
            for (int k = 0; k < t.bins; ++k)
                d += std::pow(std::abs(h[k] / total - template_hist[k]), p);
            d = std::pow(d, 1.0 / p);
            valid[static_cast<std::size_t>(v) * nu + u] = clamp01(1.0 - d / dmax);
        }
    return spread_valid(t.width, t.height, (kw - 1) / 2, (kh - 1) / 2, nu, nv,
                        valid, "hist-distance");
}

double phog_kernel(const PHoG& x, const PHoG& y) {
    require(x.levels == y.levels && x.bins == y.bins,
            "phog_kernel: descriptor layout mismatch");
    require(x.descriptor.size() == phog_length(x.levels, x.bins) &&
                y.descriptor.size() == x.descriptor.size(),
            "phog_kernel: descriptor length mismatch");

    const int L = x.levels;
    double kappa = 0.0;
    std::size_t offset = 0;
    for (int l = 0; l <= L; ++l) {
        std::size_t len = static_cast<std::size_t>(x.bins) << (2 * l);
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
            mx += x.descriptor[offset + i];
            my += y.descriptor[offset + i];
        }
        double inter = 0.0;
        if (mx > 0.0 && my > 0.0) {
            for (std::size_t i = 0; i < len; ++i)
                inter += std::min(x.descriptor[offset + i] / mx,
                                  y.descriptor[offset + i] / my);
        }
        double weight = (l == 0) ? std::ldexp(1.0, -L) : std::ldexp(1.0, -(L - l + 1));
        kappa += weight * inter;
        offset += len;
    }
    return clamp01(kappa);
}

LikelihoodMap fuse_maps(const std::vector<LikelihoodMap>& maps, std::vector<double> weights) {
    require(!maps.empty(), "fuse_maps: no maps to fuse");
    const int w = maps[0].width, h = maps[0].height;
    for (const auto& m : maps)
        require(m.width == w && m.height == h, "fuse_maps: map dimensions differ");
    if (weights.empty()) weights.assign(maps.size(), 1.0 / maps.size());
    require(weights.size() == maps.size(), "fuse_maps: weight count mismatch");
    double wsum = 0.0;
    for (double wv : weights) {
        require(wv >= 0.0, "fuse_maps: negative weight");
        wsum += wv;
    }
    require(wsum > 0.0, "fuse_maps: weights sum to zero");

    LikelihoodMap out;
    out.width = w;
    out.height = h;
    out.tag = "fused";
    out.values.assign(static_cast<std::size_t>(w) * h, 0.0);
    for (std::size_t m = 0; m < maps.size(); ++m) {
        double wt = weights[m] / wsum;
        for (std::size_t i = 0; i < out.values.size(); ++i)
            out.values[i] += wt * maps[m].values[i];
    }
    for (double& v : out.values) v = clamp01(v);
    return out;
}

std::vector<Peak> find_peaks(const LikelihoodMap& map) {
    require(map.width > 0 && map.height > 0, "find_peaks: empty map");
    const int w = map.width, h = map.height;

    // 3x3 mean over the in-bounds neighborhood suppresses flat plateaus.
    std::vector<double> smooth(static_cast<std::size_t>(w) * h, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            int cnt = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    int nx = x + dx, ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                    acc += map.at(nx, ny);
                    ++cnt;
                }
            smooth[static_cast<std::size_t>(y) * w + x] = acc / cnt;
        }

    // A peak must beat every neighbor by more than the rounding noise of
    // the clipped means (border cells divide by 4 or 6, interior by 9, so a
    // perfectly flat map wiggles by a few ulps and must yield no peaks).
    constexpr double kFlatEps = 1e-9;
    std::vector<Peak> peaks;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double v = smooth[static_cast<std::size_t>(y) * w + x];
            bool is_peak = true;
            for (int dy = -1; dy <= 1 && is_peak; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    int nx = x + dx, ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                    if (smooth[static_cast<std::size_t>(ny) * w + nx] + kFlatEps >= v) {
                        is_peak = false;
                        break;
                    }
                }
            if (is_peak) peaks.push_back(Peak{x, y, v, 0});
        }
    std::stable_sort(peaks.begin(), peaks.end(),
                     [](const Peak& a, const Peak& b) { return a.height > b.height; });
    for (std::size_t i = 0; i < peaks.size(); ++i) peaks[i].rank = static_cast<int>(i) + 1;
    return peaks;
}

int score_map(const LikelihoodMap& map, const Rect& gt) {
    require(gt.w > 0 && gt.h > 0 && gt.inside(map.width, map.height),
            "score_map: ground truth rect must lie inside the map");
    auto peaks = find_peaks(map);
    for (const auto& p : peaks)
        if (gt.contains(p.x, p.y)) return p.rank;
    return static_cast<int>(peaks.size()) + 1;
}

double subset_score(const std::vector<int>& scores, const std::vector<bool>& occluded) {
    require(scores.size() == occluded.size(), "subset_score: length mismatch");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (occluded[i]) continue;
        sum += scores[i];
        ++n;
    }
    require(n > 0, "subset_score: no non-occluded frames");
    return sum / n;
}

}  // namespace spct
