#include <algorithm>
#include <cmath>

#include "spct/parallel.hpp"
#include "spct/tracker.hpp"

namespace spct {

namespace {

GrayImage crop_gray(const GrayImage& img, const Rect& r) {
    GrayImage out(r.w, r.h);
    for (int y = 0; y < r.h; ++y)
        for (int x = 0; x < r.w; ++x) out.at(x, y) = img.at(r.x + x, r.y + y);
    return out;
}

ColorImage crop_color(const ColorImage& img, const Rect& r) {
    ColorImage out(r.w, r.h);
    for (int y = 0; y < r.h; ++y)
        for (int x = 0; x < r.w; ++x) {
            std::size_t d = out.idx(x, y), s = img.idx(r.x + x, r.y + y);
            out.r[d] = img.r[s];
            out.g[d] = img.g[s];
            out.b[d] = img.b[s];
        }
    return out;
}

// Replicate-pad on the right/bottom so both dims are multiples of m (the
// pyramid descriptor needs power-of-two divisible chips).
GrayImage pad_to_multiple(const GrayImage& chip, int m) {
    int pw = (chip.width + m - 1) / m * m;
    int ph = (chip.height + m - 1) / m * m;
    if (pw == chip.width && ph == chip.height) return chip;
    GrayImage out(pw, ph);
    for (int y = 0; y < ph; ++y)
        for (int x = 0; x < pw; ++x)
            out.at(x, y) = chip.at(std::min(x, chip.width - 1), std::min(y, chip.height - 1));
    return out;
}

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

LikelihoodMap flat_map(int w, int h, double v, const char* tag) {
    LikelihoodMap m;
    m.width = w;
    m.height = h;
    m.values.assign(static_cast<std::size_t>(w) * h, v);
    m.tag = tag;
    return m;
}

// Copy the nearest value of the already-filled valid region
// [x0,x1]x[y0,y1] (inclusive) into the border cells.
void replicate_borders(LikelihoodMap& m, int x0, int x1, int y0, int y1) {
    for (int y = 0; y < m.height; ++y) {
        int sy = std::clamp(y, y0, y1);
        for (int x = 0; x < m.width; ++x) {
            int sx = std::clamp(x, x0, x1);
            if (sx != x || sy != y) m.at(x, y) = m.at(sx, sy);
        }
    }
}

void validate_config(const TrackConfig& cfg) {
    require(cfg.w_ncc >= 0 && cfg.w_color >= 0 && cfg.w_hist >= 0 && cfg.w_phog >= 0,
            "track: channel weights must be nonnegative");
    require(cfg.alpha >= 0.0 && cfg.alpha <= 1.0, "track: alpha must be in [0,1]");
    require(cfg.conf_tau >= 0.0 && cfg.conf_tau <= 1.0, "track: conf_tau must be in [0,1]");
    require(cfg.search_factor >= 1.0, "track: search_factor must be >= 1");
    require(cfg.bins >= 1 && cfg.bins <= 256, "track: bins must be in [1,256]");
    require(cfg.phog_levels >= 0 && cfg.phog_bins >= 1, "track: bad pyramid descriptor layout");
    require(cfg.camshift_delta > 0.0 && cfg.camshift_max_iter >= 1,
            "track: bad centroid refinement parameters");
    require(cfg.bg_margin >= 0, "track: bg_margin must be nonnegative");
}

bool bg_ring_nonempty(int img_w, int img_h, const Rect& fg, int margin) {
    if (margin <= 0) return false;
    Rect dil{fg.x - margin, fg.y - margin, fg.w + 2 * margin, fg.h + 2 * margin};
    return intersect(dil, Rect{0, 0, img_w, img_h}).area() > fg.area();
}

int clamp_coord(double c, int extent, int limit) {
    int v = static_cast<int>(std::lround(c - (extent - 1) / 2.0));
    return std::max(0, std::min(v, limit - extent));
}

// theta is always a whole number of compass quarters here.
void rotate_back(double px, double py, double cx, double cy, int quarter,
                 double& qx, double& qy) {
    static const int kCos[4] = {1, 0, -1, 0};
    static const int kSin[4] = {0, 1, 0, -1};
    int c = kCos[quarter & 3], s = kSin[quarter & 3];
    qx = cx + c * (px - cx) + s * (py - cy);
    qy = cy - s * (px - cx) + c * (py - cy);
}

// Initial localization polish: mean-shift style centroid iteration on the
// fg/bg ratio map of the init box (color when available, intensity
// otherwise). The box keeps its size and only translates.
Rect refine_init(const Sequence& seq, std::size_t frame, Rect box, const TrackConfig& cfg) {
    const int img_w = seq.gray[frame].width, img_h = seq.gray[frame].height;
    if (!bg_ring_nonempty(img_w, img_h, box, cfg.bg_margin)) return box;
    LikelihoodMap ratio;
    if (seq.has_color()) {
        ColorModel cm = model_fg_bg(seq.color[frame], box, cfg.bg_margin);
        ratio = color_ratio_map(seq.color[frame], cm);
    } else {
        IntensityModel im = model_fg_bg_gray(seq.gray[frame], box, cfg.bg_margin);
        ratio = intensity_ratio_map(seq.gray[frame], im);
    }
    CamshiftResult cs = camshift_refine(ratio, box.cx(), box.cy(), box.w, box.h,
                                        cfg.camshift_delta, cfg.camshift_max_iter);
    if (!cs.zero_mass) {
        box.x = clamp_coord(cs.cx, box.w, img_w);
        box.y = clamp_coord(cs.cy, box.h, img_h);
    }
    return box;
}

}  // namespace

TargetModel build_model(const Sequence& seq, std::size_t frame, const Rect& box,
                        const TrackConfig& cfg) {
    require(frame < seq.size(), "build_model: frame out of range");
    validate_config(cfg);
    const GrayImage& img = seq.gray[frame];
    require(box.w >= 1 && box.h >= 1 && box.inside(img.width, img.height),
            "build_model: box must lie inside the frame");

    TargetModel m;
    m.w = box.w;
    m.h = box.h;
    m.bins = cfg.bins;
    m.phog_levels = cfg.phog_levels;
    m.phog_bins = cfg.phog_bins;

    GrayImage chip = crop_gray(img, box);
    m.tmpl = to_scalar(chip);

    KernelSpec spec{box.w, box.h};
    KernelExtents e = kernel_extents(spec);
    WeightedQuadrantSet set = build_quadrant_set(quantize(chip, cfg.bins), spec);
    m.swlh = swlh_query(set, e.sxl, e.syt, spec);

    m.phog = phog_descriptor(pad_to_multiple(chip, 1 << cfg.phog_levels),
                             cfg.phog_levels, cfg.phog_bins);

    if (seq.has_color() && bg_ring_nonempty(img.width, img.height, box, cfg.bg_margin)) {
        m.color = model_fg_bg(seq.color[frame], box, cfg.bg_margin);
        m.color_fg.assign(m.color.fg.begin(), m.color.fg.end());
        m.color_bg.assign(m.color.bg.begin(), m.color.bg.end());
        for (double& v : m.color_fg) v /= static_cast<double>(m.color.fg_area);
        for (double& v : m.color_bg) v /= static_cast<double>(m.color.bg_area);
        m.has_color = true;
    }
    return m;
}

Tracklet track_sequence(const Sequence& seq, std::size_t start, Rect init,
                        const TrackConfig& cfg) {
    require(!seq.gray.empty(), "track_sequence: empty sequence");
    require(start < seq.size(), "track_sequence: start frame out of range");
    validate_config(cfg);
    const int img_w = seq.gray[start].width, img_h = seq.gray[start].height;
    for (const GrayImage& g : seq.gray)
        require(g.width == img_w && g.height == img_h, "track_sequence: frame sizes differ");
    if (seq.has_color()) {
        require(seq.color.size() == seq.gray.size(),
                "track_sequence: color/gray frame counts differ");
        for (const ColorImage& c : seq.color)
            require(c.width == img_w && c.height == img_h,
                    "track_sequence: color frame sizes differ");
    }
    require(init.w >= 1 && init.h >= 1 && init.inside(img_w, img_h),
            "track_sequence: init box must lie inside the frame");

    Rect box = refine_init(seq, start, init, cfg);
    TargetModel model = build_model(seq, start, box, cfg);

    Tracklet track;
    track.push_back(TrackRecord{static_cast<int>(start), box.cx(), box.cy(), box, 1.0,
                                TrackSource::features});

    KalmanState kf = kalman_init(box.cx(), box.cy());
    bool dynamics_seeded = false;

    const int pad = 1 << cfg.phog_levels;
    const int phog_w = (model.w + pad - 1) / pad * pad;
    const int phog_h = (model.h + pad - 1) / pad * pad;

    WorkerPool pool(cfg.parallel_channels ? 4 : 1);

    for (std::size_t f = start + 1; f < seq.size(); ++f) {
        kalman_predict(kf);
        Rect win = search_window(kf, model.w, model.h, cfg.search_factor, img_w, img_h);
        GrayImage wg = crop_gray(seq.gray[f], win);
        const double wcx = (win.w - 1) / 2.0, wcy = (win.h - 1) / 2.0;

        // Direction-aligned matching: rotate the window content so the
        // target appears at the model's native travel orientation.
        int quarter = 0;
        if (cfg.use_direction && model.dir != Direction::Unknown) {
            Direction cur = learn_direction(track, direction_min_dist(model.w, model.h));
            if (cur != Direction::Unknown && cur != model.dir) {
                double theta = direction_angle(cur) - direction_angle(model.dir);
                if (theta < 0) theta += 360.0;
                quarter = static_cast<int>(std::lround(theta / 90.0)) & 3;
            }
        }
        GrayImage mg = quarter ? align_roi(wg, wcx, wcy, quarter * 90.0) : wg;
        ColorImage mc;
        if (model.has_color) {
            mc = crop_color(seq.color[f], win);
            if (quarter) {
                double theta = quarter * 90.0;
                for (auto plane : {&ColorImage::r, &ColorImage::g, &ColorImage::b}) {
                    GrayImage p;
                    p.width = win.w;
                    p.height = win.h;
                    p.data = mc.*plane;
                    mc.*plane = align_roi(p, wcx, wcy, theta).data;
                }
            }
        }

        // Channel likelihoods in a fixed order; each job owns one slot so
        // the fan-out cannot change the result.
        std::vector<LikelihoodMap> maps;
        std::vector<double> weights;
        std::vector<std::function<void()>> jobs;
        maps.reserve(4);

        maps.emplace_back();
        weights.push_back(cfg.w_ncc);
        {
            LikelihoodMap* slot = &maps.back();
            jobs.emplace_back([slot, &mg, &model] { *slot = ncc_map(to_scalar(mg), model.tmpl); });
        }

        if (model.has_color) {
            maps.emplace_back();
            weights.push_back(cfg.w_color);
            LikelihoodMap* slot = &maps.back();
            jobs.emplace_back([slot, &mc, &model] {
                LikelihoodMap cm = flat_map(mc.width, mc.height, 0.5, "color");
                for (int y = 0; y < mc.height; ++y)
                    for (int x = 0; x < mc.width; ++x) {
                        std::size_t i = mc.idx(x, y);
                        int bin = ColorModel::bin_index(mc.r[i], mc.g[i], mc.b[i]);
                        double fg = model.color_fg[bin], bg = model.color_bg[bin];
                        if (fg + bg > 0.0) cm.at(x, y) = fg / (fg + bg);
                    }
                *slot = std::move(cm);
            });
        }

        maps.emplace_back();
        weights.push_back(cfg.w_hist);
        {
            LikelihoodMap* slot = &maps.back();
            jobs.emplace_back([slot, &mg, &model, &cfg] {
                if (mg.width < model.w || mg.height < model.h) {
                    *slot = flat_map(mg.width, mg.height, 0.5, "swlh-distance");
                    return;
                }
                KernelSpec spec{model.w, model.h};
                KernelExtents e = kernel_extents(spec);
                WeightedQuadrantSet set = build_quadrant_set(quantize(mg, cfg.bins), spec);
                LikelihoodMap hm = flat_map(mg.width, mg.height, 0.5, "swlh-distance");
                for (int cy = e.syt; cy <= mg.height - e.syb; ++cy)
                    for (int cx = e.sxl; cx <= mg.width - e.sxr; ++cx) {
                        std::vector<double> q = swlh_query(set, cx, cy, spec);
                        double d = 0.0;
                        for (int k = 0; k < cfg.bins; ++k) d += std::abs(q[k] - model.swlh[k]);
                        hm.at(cx, cy) = clamp01(1.0 - d / 2.0);
                    }
                replicate_borders(hm, e.sxl, mg.width - e.sxr, e.syt, mg.height - e.syb);
                *slot = std::move(hm);
            });
        }

        maps.emplace_back();
        weights.push_back(cfg.w_phog);
        {
            LikelihoodMap* slot = &maps.back();
            jobs.emplace_back([slot, &mg, &model, &cfg, phog_w, phog_h] {
                if (mg.width < phog_w || mg.height < phog_h) {
                    *slot = flat_map(mg.width, mg.height, 0.5, "phog-kernel");
                    return;
                }
                std::vector<PHoG> descs =
                    pyramid_hog(mg, cfg.phog_levels, cfg.phog_bins, phog_w, phog_h);
                LikelihoodMap pm = flat_map(mg.width, mg.height, 0.0, "phog-kernel");
                int gw = mg.width - phog_w + 1, gh = mg.height - phog_h + 1;
                int ox = (phog_w - 1) / 2, oy = (phog_h - 1) / 2;
                for (int i = 0; i < gh; ++i)
                    for (int j = 0; j < gw; ++j)
                        pm.at(j + ox, i + oy) =
                            clamp01(phog_kernel(descs[static_cast<std::size_t>(i) * gw + j],
                                                model.phog));
                replicate_borders(pm, ox, ox + gw - 1, oy, oy + gh - 1);
                *slot = std::move(pm);
            });
        }

        if (cfg.parallel_channels)
            pool.parallel_for(jobs.size(), [&](std::size_t b, std::size_t e2) {
                for (std::size_t i = b; i < e2; ++i) jobs[i]();
            });
        else
            for (auto& job : jobs) job();

        LikelihoodMap fused = fuse_maps(maps, weights);
        std::vector<Peak> peaks = find_peaks(fused);

        double conf = 0.0;
        double px = wcx, py = wcy;  // aligned-window coords
        if (!peaks.empty()) {
            conf = peaks.front().height;
            px = peaks.front().x;
            py = peaks.front().y;
        }

        double mx, my;  // measurement in image coords
        rotate_back(px, py, wcx, wcy, quarter, mx, my);
        mx += win.x;
        my += win.y;

        if (!dynamics_seeded && conf >= cfg.conf_tau && f > start) {
            // Re-seed the filter once: position from this measurement,
            // velocity from the first two confident localizations.
            double gap = static_cast<double>(f) - track.back().frame;
            kf = kalman_init(mx, my, (mx - track.back().cx) / gap,
                             (my - track.back().cy) / gap);
            dynamics_seeded = true;
        } else {
            kalman_fuse(kf, mx, my, conf);
        }

        double out_cx, out_cy;
        TrackSource source;
        if (conf >= cfg.conf_tau) {
            source = TrackSource::features;
            CamshiftResult cs = camshift_refine(fused, px, py, model.w, model.h,
                                                cfg.camshift_delta, cfg.camshift_max_iter);
            double sx = px, sy = py;
            if (!cs.zero_mass) {
                sx = cs.cx;
                sy = cs.cy;
            }
            rotate_back(sx, sy, wcx, wcy, quarter, out_cx, out_cy);
            out_cx += win.x;
            out_cy += win.y;
        } else {
            source = TrackSource::fused_kf;
            out_cx = kf.x[0];
            out_cy = kf.x[1];
        }

        Rect bbox{clamp_coord(out_cx, model.w, img_w), clamp_coord(out_cy, model.h, img_h),
                  model.w, model.h};
        out_cx = std::min(static_cast<double>(img_w - 1), std::max(0.0, out_cx));
        out_cy = std::min(static_cast<double>(img_h - 1), std::max(0.0, out_cy));

        TargetModel fresh = build_model(seq, f, bbox, cfg);
        if (model.has_color && !fresh.has_color) {
            // The background ring vanished against the frame edge; carry
            // the color model forward unchanged.
            fresh.color_fg = model.color_fg;
            fresh.color_bg = model.color_bg;
            fresh.has_color = true;
        }
        update_model(model, fresh, cfg.alpha);

        track.push_back(TrackRecord{static_cast<int>(f), out_cx, out_cy, bbox, conf, source});

        if (cfg.use_direction && model.dir == Direction::Unknown) {
            Direction cur = learn_direction(track, direction_min_dist(model.w, model.h));
            if (cur != Direction::Unknown) model.dir = cur;
        }
    }
    return track;
}

}  // namespace spct
