#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "spct/motion.hpp"

namespace spct {

ScalarMap edge_indicator(const ScalarMap& trace) {
    ScalarMap g(trace.width, trace.height, 0.0, "edge-indicator");
    for (std::size_t i = 0; i < g.data.size(); ++i) {
        require(trace.data[i] >= 0.0, "edge_indicator: negative trace value");
        g.data[i] = 1.0 / (1.0 + trace.data[i]);
    }
    return g;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1-D squared-distance transform (lower envelope of parabolas).
void dt1d(const std::vector<double>& f, std::vector<double>& d, int n) {
    static thread_local std::vector<int> v;
    static thread_local std::vector<double> z;
    v.assign(n, 0);
    z.assign(n + 1, 0.0);
    int k = 0;
    z[0] = -kInf;
    z[1] = kInf;
    for (int q = 1; q < n; ++q) {
        double s;
        while (true) {
            int p = v[k];
            s = ((f[q] + q * static_cast<double>(q)) - (f[p] + p * static_cast<double>(p))) /
                (2.0 * (q - p));
            if (s > z[k]) break;
            --k;
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        double dq = q - static_cast<double>(v[k]);
        d[q] = dq * dq + f[v[k]];
    }
}

// Acts as +infinity for squared pixel distances while keeping the parabola
// intersections finite: a column with no sources would otherwise feed
// inf - inf = NaN into dt1d and underflow its envelope stack. Real squared
// distances are at most w^2 + h^2, far below this.
constexpr double kFar2 = 1e12;

// Squared Euclidean distance to the nearest source pixel; ~kFar2 when the
// image has no sources.
std::vector<double> edt_squared(const std::vector<std::uint8_t>& src, int w, int h,
                                std::uint8_t source_value) {
    std::vector<double> d(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < d.size(); ++i)
        d[i] = (src[i] == source_value) ? 0.0 : kFar2;

    std::vector<double> f(std::max(w, h)), out(std::max(w, h));
    for (int x = 0; x < w; ++x) {  // columns
        for (int y = 0; y < h; ++y) f[y] = d[static_cast<std::size_t>(y) * w + x];
        dt1d(f, out, h);
        for (int y = 0; y < h; ++y) d[static_cast<std::size_t>(y) * w + x] = out[y];
    }
    for (int y = 0; y < h; ++y) {  // rows
        for (int x = 0; x < w; ++x) f[x] = d[static_cast<std::size_t>(y) * w + x];
        dt1d(f, out, w);
        for (int x = 0; x < w; ++x) d[static_cast<std::size_t>(y) * w + x] = out[x];
    }
    return d;
}

}  // namespace

ScalarMap signed_distance(const std::vector<std::uint8_t>& mask, int w, int h) {
    require(w > 0 && h > 0 && mask.size() == static_cast<std::size_t>(w) * h,
            "signed_distance: dimension mismatch");
    const double far = w + h + 1.0;  // finite stand-in when one phase is absent
    bool any_fg = false, any_bg = false;
    for (auto v : mask) (v ? any_fg : any_bg) = true;

    ScalarMap phi(w, h, 0.0, "signed-distance");
    if (!any_fg) {
        for (double& v : phi.data) v = far;
        return phi;
    }
    if (!any_bg) {
        for (double& v : phi.data) v = -far;
        return phi;
    }
    std::vector<double> to_fg = edt_squared(mask, w, h, 1);
    std::vector<double> to_bg = edt_squared(mask, w, h, 0);
    for (std::size_t i = 0; i < phi.data.size(); ++i)
        phi.data[i] = mask[i] ? -std::sqrt(to_bg[i]) : std::sqrt(to_fg[i]);
    return phi;
}

std::vector<std::uint8_t> gac_refine(const std::vector<std::uint8_t>& init_mask,
                                     int w, int h, const ScalarMap& g,
                                     const GacParams& params) {
    require(w > 0 && h > 0 && init_mask.size() == static_cast<std::size_t>(w) * h,
            "gac_refine: mask dimension mismatch");
    require(g.width == w && g.height == h, "gac_refine: indicator dimension mismatch");
    require(params.dt > 0.0 && params.dt <= 0.25,
            "gac_refine: time step must be in (0, 0.25]");
    require(params.iters >= 1, "gac_refine: need at least one iteration");
    require(params.reinit_every >= 1, "gac_refine: reinit interval must be positive");
    require(std::isfinite(params.c), "gac_refine: balloon constant must be finite");

    constexpr double kCurvEps = 1e-8;
    auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * w + x; };
    auto cl = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };

    // The indicator gradient is evolution-invariant: compute once.
    std::vector<double> ggx(g.data.size()), ggy(g.data.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            ggx[idx(x, y)] = (g.at(cl(x + 1, w - 1), y) - g.at(cl(x - 1, w - 1), y)) / 2.0;
            ggy[idx(x, y)] = (g.at(x, cl(y + 1, h - 1)) - g.at(x, cl(y - 1, h - 1))) / 2.0;
        }

    ScalarMap phi = signed_distance(init_mask, w, h);
    std::vector<double> next(phi.data.size());
    for (int it = 0; it < params.iters; ++it) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const std::size_t i = idx(x, y);
                const double p = phi.data[i];
                const double pxm = phi.at(cl(x - 1, w - 1), y);
                const double pxp = phi.at(cl(x + 1, w - 1), y);
                const double pym = phi.at(x, cl(y - 1, h - 1));
                const double pyp = phi.at(x, cl(y + 1, h - 1));
                const double dmx = p - pxm, dpx = pxp - p;
                const double dmy = p - pym, dpy = pyp - p;
                const double cx = (pxp - pxm) / 2.0, cy = (pyp - pym) / 2.0;

                // Curvature (Eq. of the divergence of the unit normal).
                const double pxx = pxp - 2.0 * p + pxm;
                const double pyy = pyp - 2.0 * p + pym;
                const double pxy =
                    (phi.at(cl(x + 1, w - 1), cl(y + 1, h - 1)) -
                     phi.at(cl(x + 1, w - 1), cl(y - 1, h - 1)) -
                     phi.at(cl(x - 1, w - 1), cl(y + 1, h - 1)) +
                     phi.at(cl(x - 1, w - 1), cl(y - 1, h - 1))) / 4.0;
                const double grad2 = cx * cx + cy * cy;
                const double kappa =
                    (pxx * cy * cy - 2.0 * cx * cy * pxy + pyy * cx * cx) /
                    (std::pow(grad2, 1.5) + kCurvEps);

                // Balloon term with Godunov upwinding on the speed sign.
                const double a = g.data[i] * params.c;
                double grad_up;
                if (a > 0.0)
                    grad_up = std::sqrt(std::min(dmx, 0.0) * std::min(dmx, 0.0) +
                                        std::max(dpx, 0.0) * std::max(dpx, 0.0) +
                                        std::min(dmy, 0.0) * std::min(dmy, 0.0) +
                                        std::max(dpy, 0.0) * std::max(dpy, 0.0));
                else
                    grad_up = std::sqrt(std::max(dmx, 0.0) * std::max(dmx, 0.0) +
                                        std::min(dpx, 0.0) * std::min(dpx, 0.0) +
                                        std::max(dmy, 0.0) * std::max(dmy, 0.0) +
                                        std::min(dpy, 0.0) * std::min(dpy, 0.0));

                // Advection along the indicator gradient, upwinded per axis.
                const double adv =
                    std::max(ggx[i], 0.0) * dpx + std::min(ggx[i], 0.0) * dmx +
                    std::max(ggy[i], 0.0) * dpy + std::min(ggy[i], 0.0) * dmy;

                next[i] = p + params.dt * (a * grad_up +
                                           g.data[i] * kappa * std::sqrt(grad2) + adv);
            }
        phi.data.swap(next);

        for (double v : phi.data)
            if (!std::isfinite(v))
                throw std::runtime_error("gac_refine: level set diverged at iteration " +
                                         std::to_string(it + 1));

        if ((it + 1) % params.reinit_every == 0 && it + 1 < params.iters) {
            std::vector<std::uint8_t> cur(phi.data.size());
            for (std::size_t i = 0; i < cur.size(); ++i) cur[i] = phi.data[i] < 0.0;
            phi = signed_distance(cur, w, h);
        }
    }

    std::vector<std::uint8_t> out(phi.data.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = phi.data[i] < 0.0 ? 1 : 0;
    return out;
}

}  // namespace spct
