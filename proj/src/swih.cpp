#include "spct/swih.hpp"

#include <algorithm>
#include <cmath>

namespace spct {

const char* to_string(Quadrant q) {
    switch (q) {
        case Quadrant::NW: return "NW";
        case Quadrant::NE: return "NE";
        case Quadrant::SW: return "SW";
        case Quadrant::SE: return "SE";
    }
    return "?";
}

KernelExtents kernel_extents(const KernelSpec& spec) {
    require(spec.kw >= 1 && spec.kh >= 1, "kernel extents must be >= 1");
    KernelExtents e{};
    e.sxl = spec.kw / 2;
    e.sxr = spec.kw - e.sxl;  // ceil(kw/2): the half that includes the center
    e.syt = spec.kh / 2;
    e.syb = spec.kh - e.syt;
    e.c = e.sxl + e.syt + 1;  // peak weight; corner cells keep weight 1
    return e;
}

std::uint64_t quantize_weight(double w) {
    require(std::isfinite(w) && w >= 0.0, "weights must be finite and nonnegative");
    return static_cast<std::uint64_t>(std::llround(w * kWeightScale));
}

namespace {

// Ramp slope per axis: 1 when the kernel spans more than one cell on that
// axis in some quadrant, else the axis is degenerate and the fields stay
// constant along it (both choices are exact; constant keeps a 1x1 kernel's
// fields flat).
void ramp_slopes(const KernelSpec& spec, int& sx, int& sy) {
    sx = spec.kw >= 3 ? 1 : 0;
    sy = spec.kh >= 3 ? 1 : 0;
}

double field_value(Quadrant dir, int x, int y, int w, int h, int sx, int sy) {
    switch (dir) {
        case Quadrant::SE: return 1.0 + sx * (w - 1 - x) + sy * (h - 1 - y);
        case Quadrant::NW: return 1.0 + sx * x + sy * y;
        case Quadrant::NE: return 1.0 + sx * (w - 1 - x) + sy * y;
        case Quadrant::SW: return 1.0 + sx * x + sy * (h - 1 - y);
    }
    return 0.0;
}

struct QuadrantGeom {
    Rect rect;            // pixels of this quadrant for a center (cx, cy)
    int anchor_dx, anchor_dy;  // center-adjacent cell, relative to center
};

std::array<QuadrantGeom, 4> quadrant_geometry(int cx, int cy, const KernelExtents& e) {
    std::array<QuadrantGeom, 4> q;
    q[static_cast<int>(Quadrant::NW)] = {Rect{cx - e.sxl, cy - e.syt, e.sxl, e.syt}, -1, -1};
    q[static_cast<int>(Quadrant::NE)] = {Rect{cx, cy - e.syt, e.sxr, e.syt}, 0, -1};
    q[static_cast<int>(Quadrant::SW)] = {Rect{cx - e.sxl, cy, e.sxl, e.syb}, -1, 0};
    q[static_cast<int>(Quadrant::SE)] = {Rect{cx, cy, e.sxr, e.syb}, 0, 0};
    return q;
}

void check_window(int cx, int cy, const KernelExtents& e, int w, int h) {
    require(cx - e.sxl >= 0 && cy - e.syt >= 0 && cx + e.sxr <= w && cy + e.syb <= h,
            "kernel window must lie inside the image");
}

Quadrant opposite(Quadrant q) {
    switch (q) {
        case Quadrant::NW: return Quadrant::SE;
        case Quadrant::SE: return Quadrant::NW;
        case Quadrant::NE: return Quadrant::SW;
        case Quadrant::SW: return Quadrant::NE;
    }
    return Quadrant::SE;
}

}  // namespace

std::array<WeightField, 4> quadrant_weight_fields(int img_w, int img_h, const KernelSpec& spec) {
    require(img_w > 0 && img_h > 0, "quadrant_weight_fields: empty image");
    kernel_extents(spec);  // validates the spec
    int sx, sy;
    ramp_slopes(spec, sx, sy);
    std::array<WeightField, 4> out;
    for (int d = 0; d < 4; ++d) {
        WeightField& f = out[d];
        f.width = img_w;
        f.height = img_h;
        f.dir = static_cast<Quadrant>(d);
        f.w.resize(static_cast<std::size_t>(img_w) * img_h);
        for (int y = 0; y < img_h; ++y)
            for (int x = 0; x < img_w; ++x)
                f.w[static_cast<std::size_t>(y) * img_w + x] =
                    field_value(f.dir, x, y, img_w, img_h, sx, sy);
    }
    return out;
}

IntegralHistogramTensor build_weighted_ih(const BinMap& bins, const WeightField& field,
                                          const ScanSchedule& schedule) {
    require(field.width == bins.width && field.height == bins.height,
            "build_weighted_ih: field/bin map size mismatch");
    std::vector<std::uint64_t> wq(field.w.size());
    for (std::size_t i = 0; i < wq.size(); ++i) wq[i] = quantize_weight(field.w[i]);
    return build_weighted_tensor(bins, wq, schedule);
}

WeightedQuadrantSet build_quadrant_set(const BinMap& bins, const KernelSpec& spec,
                                       const ScanSchedule& schedule) {
    WeightedQuadrantSet set;
    set.kernel = spec;
    ramp_slopes(spec, set.sx, set.sy);
    set.pair_sum = 2 + static_cast<std::int64_t>(set.sx) * (bins.width - 1) +
                   static_cast<std::int64_t>(set.sy) * (bins.height - 1);
    auto fields = quadrant_weight_fields(bins.width, bins.height, spec);
    for (int d = 0; d < 4; ++d)
        set.tensors[d] = build_weighted_ih(bins, fields[d], schedule);
    return set;
}

std::vector<std::int64_t> swlh_query_fixed(const WeightedQuadrantSet& set, int cx, int cy,
                                           const KernelSpec& spec) {
    require(spec == set.kernel, "swlh_query: kernel spec differs from the built set");
    const KernelExtents e = kernel_extents(spec);
    const IntegralHistogramTensor& t0 = set.tensors[0];
    check_window(cx, cy, e, t0.width, t0.height);

    const int bins = t0.bins;
    std::vector<std::int64_t> out(bins, 0);
    auto geom = quadrant_geometry(cx, cy, e);
    for (int d = 0; d < 4; ++d) {
        const QuadrantGeom& q = geom[d];
        if (q.rect.w == 0 || q.rect.h == 0) continue;
        const Quadrant dir = static_cast<Quadrant>(d);
        const Quadrant opp = opposite(dir);
        // Constant offset between the field ramp and the kernel ramp over
        // this quadrant, evaluated at the center-adjacent cell.
        const int ax = cx + q.anchor_dx, ay = cy + q.anchor_dy;
        const std::int64_t field_at_anchor = static_cast<std::int64_t>(
            field_value(dir, ax, ay, t0.width, t0.height, set.sx, set.sy));
        const std::int64_t true_at_anchor =
            e.c - std::abs(q.anchor_dx) - std::abs(q.anchor_dy);
        const std::int64_t delta = field_at_anchor - true_at_anchor;

        const auto f_dir = region_histogram(set.tensors[d], q.rect);
        const auto f_opp = region_histogram(set.tensors[static_cast<int>(opp)], q.rect);
        for (int k = 0; k < bins; ++k) {
            const std::int64_t sum = static_cast<std::int64_t>(f_dir[k] + f_opp[k]);
            // Mirrored ramps sum to pair_sum at every pixel, so this is an
            // exact multiple: sum = count_k * pair_sum (in 16.16).
            require(sum % set.pair_sum == 0, "swlh_query: inconsistent quadrant tensors");
            const std::int64_t count_fx = sum / set.pair_sum;
            out[k] += static_cast<std::int64_t>(f_dir[k]) - delta * count_fx;
        }
    }
    return out;
}

std::vector<std::int64_t> brute_force_swlh_fixed(const BinMap& bins, int cx, int cy,
                                                 const KernelSpec& spec) {
    const KernelExtents e = kernel_extents(spec);
    check_window(cx, cy, e, bins.width, bins.height);
    std::vector<std::int64_t> out(bins.bins, 0);
    for (int dy = -e.syt; dy < e.syb; ++dy)
        for (int dx = -e.sxl; dx < e.sxr; ++dx) {
            const int w = e.c - std::abs(dx) - std::abs(dy);
            const int bin = bins.at(cx + dx, cy + dy);
            out[bin] += static_cast<std::int64_t>(w) * kWeightScale;
        }
    return out;
}

namespace {

std::vector<double> normalize_fixed(const std::vector<std::int64_t>& fixed) {
    long double total = 0;
    for (std::int64_t v : fixed) total += v;
    std::vector<double> out(fixed.size(), 0.0);
    if (total <= 0) return out;
    for (std::size_t k = 0; k < fixed.size(); ++k)
        out[k] = static_cast<double>(fixed[k] / total);
    return out;
}

}  // namespace

std::vector<double> swlh_query(const WeightedQuadrantSet& set, int cx, int cy,
                               const KernelSpec& spec) {
    return normalize_fixed(swlh_query_fixed(set, cx, cy, spec));
}

std::vector<double> brute_force_swlh(const BinMap& bins, int cx, int cy,
                                     const KernelSpec& spec) {
    return normalize_fixed(brute_force_swlh_fixed(bins, cx, cy, spec));
}

std::vector<double> wedding_cake_swlh(const IntegralHistogramTensor& plain, int cx, int cy,
                                      const KernelSpec& spec, int layers) {
    require(layers >= 1, "wedding_cake_swlh: layers must be >= 1");
    const KernelExtents e = kernel_extents(spec);
    check_window(cx, cy, e, plain.width, plain.height);

    // Nested rectangles, shrinking linearly toward the center; each keeps
    // at least the center cell.
    struct Extent { int xl, xr, yt, yb; };
    std::vector<Extent> rects(layers);
    for (int l = 0; l < layers; ++l) {
        const double f = static_cast<double>(layers - l) / layers;
        rects[l].xl = static_cast<int>(std::lround(e.sxl * f));
        rects[l].xr = std::max(1, static_cast<int>(std::lround(e.sxr * f)));
        rects[l].yt = static_cast<int>(std::lround(e.syt * f));
        rects[l].yb = std::max(1, static_cast<int>(std::lround(e.syb * f)));
    }

    auto hist_of = [&](const Extent& r) {
        return region_histogram(plain, Rect{cx - r.xl, cy - r.yt, r.xl + r.xr, r.yt + r.yb});
    };
    // Closed forms over a rect spanning dx in [-xl, xr), dy in [-yt, yb):
    // cell count and the total pyramid weight sum(c - |dx| - |dy|).
    auto area_of = [](const Extent& r) {
        return static_cast<std::int64_t>(r.xl + r.xr) * (r.yt + r.yb);
    };
    auto mass_of = [&](const Extent& r) {
        const std::int64_t nx = r.xl + r.xr, ny = r.yt + r.yb;
        const std::int64_t sx = static_cast<std::int64_t>(r.xl) * (r.xl + 1) / 2 +
                                static_cast<std::int64_t>(r.xr - 1) * r.xr / 2;
        const std::int64_t sy = static_cast<std::int64_t>(r.yt) * (r.yt + 1) / 2 +
                                static_cast<std::int64_t>(r.yb - 1) * r.yb / 2;
        return e.c * nx * ny - sx * ny - sy * nx;
    };

    std::vector<std::int64_t> acc(plain.bins, 0);
    std::vector<std::uint64_t> outer = hist_of(rects[0]);
    Extent outer_rect = rects[0];
    for (int l = 0; l < layers; ++l) {
        // Ring between rect l and rect l+1 (innermost keeps the full rect),
        // weighted by the exact mean pyramid weight over the ring so that a
        // finer layering is a strict refinement of a coarser one.
        std::vector<std::uint64_t> inner(plain.bins, 0);
        Extent inner_rect{0, 0, 0, 0};
        if (l + 1 < layers) {
            inner = hist_of(rects[l + 1]);
            inner_rect = rects[l + 1];
        }
        const std::int64_t d_area = area_of(outer_rect) - area_of(inner_rect);
        if (d_area > 0) {
            const std::int64_t d_mass = mass_of(outer_rect) - mass_of(inner_rect);
            const std::int64_t wfix =
                (2 * d_mass * kWeightScale + d_area) / (2 * d_area);  // round half up
            for (int k = 0; k < plain.bins; ++k)
                acc[k] += static_cast<std::int64_t>(outer[k] - inner[k]) * wfix;
        }
        outer = std::move(inner);
        outer_rect = inner_rect;
    }
    return normalize_fixed(acc);
}

double histogram_mse(const std::vector<double>& a, const std::vector<double>& b) {
    require(a.size() == b.size() && !a.empty(), "histogram_mse: size mismatch");
    double acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return acc / static_cast<double>(a.size());
}

}  // namespace spct
