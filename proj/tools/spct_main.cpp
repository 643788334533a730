// spct: command-line front end for the detection/tracking library.

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "spct/config.hpp"
#include "spct/eval.hpp"
#include "spct/features.hpp"
#include "spct/integral.hpp"
#include "spct/likelihood.hpp"
#include "spct/motion.hpp"
#include "spct/pipeline.hpp"
#include "spct/pnm.hpp"
#include "spct/swih.hpp"
#include "spct/tracker.hpp"

namespace {

using namespace spct;
namespace fs = std::filesystem;

double now_ms() {
    using namespace std::chrono;
    return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

void parse_dims(const std::string& s, int& w, int& h, const char* what) {
    std::size_t x = s.find('x');
    require(x != std::string::npos && x > 0 && x + 1 < s.size(),
            std::string(what) + ": expected WxH, got '" + s + "'");
    try {
        w = std::stoi(s.substr(0, x));
        h = std::stoi(s.substr(x + 1));
    } catch (const std::exception&) {
        throw contract_error(std::string(what) + ": expected WxH, got '" + s + "'");
    }
}

std::vector<std::string> read_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open sequence list '" + path + "'");
    std::vector<std::string> out;
    std::string line;
    fs::path base = fs::path(path).parent_path();
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        fs::path p(line);
        out.push_back(p.is_absolute() || base.empty() ? p.string() : (base / p).string());
    }
    require(!out.empty(), "sequence list '" + path + "' names no frames");
    return out;
}

Sequence load_sequence(const std::string& list_path) {
    Sequence seq;
    std::vector<std::string> paths = read_list(list_path);
    bool all_color = true;
    std::vector<LoadedImage> loaded;
    loaded.reserve(paths.size());
    for (const std::string& p : paths) {
        loaded.push_back(load_image(p));
        if (!std::holds_alternative<ColorImage>(loaded.back())) all_color = false;
    }
    for (LoadedImage& li : loaded) {
        if (std::holds_alternative<ColorImage>(li)) {
            ColorImage& c = std::get<ColorImage>(li);
            seq.gray.push_back(to_grayscale(c));
            if (all_color) seq.color.push_back(std::move(c));
        } else {
            seq.gray.push_back(std::move(std::get<GrayImage>(li)));
        }
    }
    return seq;
}

GrayImage scale_to_gray(const ScalarMap& m) {
    double lo = m.data.empty() ? 0.0 : m.data[0], hi = lo;
    for (double v : m.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    GrayImage out(m.width, m.height);
    double span = hi - lo;
    for (std::size_t i = 0; i < m.data.size(); ++i)
        out.data[i] = span > 0.0
                          ? static_cast<std::uint8_t>(std::lround(255.0 * (m.data[i] - lo) / span))
                          : 0;
    return out;
}

GrayImage likelihood_to_gray(const LikelihoodMap& m) {
    GrayImage out(m.width, m.height);
    for (std::size_t i = 0; i < m.values.size(); ++i)
        out.data[i] = static_cast<std::uint8_t>(
            std::lround(255.0 * std::min(1.0, std::max(0.0, m.values[i]))));
    return out;
}

LikelihoodMap gray_to_likelihood(const GrayImage& img) {
    LikelihoodMap m;
    m.width = img.width;
    m.height = img.height;
    m.tag = "loaded";
    m.values.resize(img.data.size());
    for (std::size_t i = 0; i < img.data.size(); ++i) m.values[i] = img.data[i] / 255.0;
    return m;
}

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

TrackConfig config_to_track(const Config& c) {
    TrackConfig t;
    t.w_ncc = c.get_double("weights.ncc", t.w_ncc);
    t.w_color = c.get_double("weights.color", t.w_color);
    t.w_hist = c.get_double("weights.hist", t.w_hist);
    t.w_phog = c.get_double("weights.phog", t.w_phog);
    t.alpha = c.get_double("alpha", t.alpha);
    t.conf_tau = c.get_double("conf_tau", t.conf_tau);
    t.search_factor = c.get_double("search_factor", t.search_factor);
    t.bins = c.get_int("bins", t.bins);
    t.phog_levels = c.get_int("phog.levels", t.phog_levels);
    t.phog_bins = c.get_int("phog.bins", t.phog_bins);
    t.camshift_delta = c.get_double("camshift.delta", t.camshift_delta);
    t.camshift_max_iter = c.get_int("camshift.max_iter", t.camshift_max_iter);
    t.bg_margin = c.get_int("bg_margin", t.bg_margin);
    t.use_direction = c.get_bool("use_direction", t.use_direction);
    t.parallel_channels = c.get_bool("parallel_channels", t.parallel_channels);
    return t;
}

std::ofstream open_out(const std::string& path, const char* what) {
    std::ofstream out(path);
    if (!out) throw io_error(std::string(what) + ": cannot open '" + path + "'");
    return out;
}

// ------------------------------------------------------------ subcommands

struct IntegralOpts {
    std::string in, out, schedule = "sequential";
    int bins = 32, tile = 32, threads = 1;
};

void run_integral(const IntegralOpts& o) {
    GrayImage img = load_gray(o.in);
    ScanSchedule sched{schedule_from_string(o.schedule), o.tile, o.threads};
    double t0 = now_ms();
    IntegralHistogramTensor t = build_integral_histogram(quantize(img, o.bins), sched);
    double t1 = now_ms();
    dump_tensor(t, o.out);
    std::cout << "schedule=" << to_string(sched.kind) << "\nbins=" << t.bins
              << "\nwidth=" << t.width << "\nheight=" << t.height
              << "\nbuild_ms=" << t1 - t0 << "\n";
}

struct BenchOpts {
    int width = 1024, height = 1024, bins = 32, tile = 32, threads = 8;
    unsigned seed = 1;
};

void run_bench(const BenchOpts& o) {
    require(o.width >= 1 && o.height >= 1, "bench-ih: empty image");
    GrayImage img(o.width, o.height);
    // xorshift-filled test pattern, deterministic per seed
    std::uint32_t s = o.seed ? o.seed : 1;
    for (auto& px : img.data) {
        s ^= s << 13;
        s ^= s >> 17;
        s ^= s << 5;
        px = static_cast<std::uint8_t>(s & 0xff);
    }
    BinMap bins = quantize(img, o.bins);
    const ScanScheduleKind kinds[] = {
        ScanScheduleKind::Sequential, ScanScheduleKind::ScanTransposeScan,
        ScanScheduleKind::CrossWeaveTiled, ScanScheduleKind::WavefrontTiled};
    IntegralHistogramTensor ref;
    bool equal = true;
    for (ScanScheduleKind k : kinds) {
        ScanSchedule sched{k, o.tile, o.threads};
        double t0 = now_ms();
        IntegralHistogramTensor t = build_integral_histogram(bins, sched);
        double t1 = now_ms();
        std::cout << "schedule=" << to_string(k) << " ms=" << t1 - t0 << "\n";
        if (ref.data.empty())
            ref = std::move(t);
        else if (t.data != ref.data)
            equal = false;
    }
    std::cout << "equal=" << (equal ? 1 : 0) << "\n";
    require(equal, "bench-ih: schedules disagree");
}

struct SwlhOpts {
    std::string in, out, kernel = "31x31", method = "exact", target;
    int bins = 16, layers = 3;
};

void run_swlh(const SwlhOpts& o) {
    GrayImage img = load_gray(o.in);
    int kw = 0, kh = 0;
    parse_dims(o.kernel, kw, kh, "swlh --kernel");
    KernelSpec spec{kw, kh};
    KernelExtents e = kernel_extents(spec);
    BinMap bins = quantize(img, o.bins);
    require(kw >= 1 && kh >= 1 && kw <= img.width && kh <= img.height,
            "swlh: kernel must fit inside the image");

    int tx = img.width / 2, ty = img.height / 2;
    if (!o.target.empty()) {
        Rect r = parse_rect(o.target + ",1,1");
        tx = r.x;
        ty = r.y;
    }
    tx = std::clamp(tx, e.sxl, img.width - e.sxr);
    ty = std::clamp(ty, e.syt, img.height - e.syb);

    WeightedQuadrantSet set;
    IntegralHistogramTensor plain;
    if (o.method == "exact")
        set = build_quadrant_set(bins, spec);
    else if (o.method == "cake")
        plain = build_integral_histogram(bins);
    else
        require(o.method == "brute", "swlh: method must be exact, cake or brute");

    auto local_hist = [&](int cx, int cy) {
        if (o.method == "exact") return swlh_query(set, cx, cy, spec);
        if (o.method == "cake") return wedding_cake_swlh(plain, cx, cy, spec, o.layers);
        return brute_force_swlh(bins, cx, cy, spec);
    };

    std::vector<double> model = local_hist(tx, ty);
    LikelihoodMap map;
    map.width = img.width;
    map.height = img.height;
    map.tag = "swlh-match";
    map.values.assign(static_cast<std::size_t>(img.width) * img.height, 0.0);
    for (int cy = e.syt; cy <= img.height - e.syb; ++cy)
        for (int cx = e.sxl; cx <= img.width - e.sxr; ++cx) {
            std::vector<double> h = local_hist(cx, cy);
            double d = 0.0;
            for (std::size_t k = 0; k < h.size(); ++k) d += std::abs(h[k] - model[k]);
            map.at(cx, cy) = std::max(0.0, 1.0 - d / 2.0);
        }
    save_image(likelihood_to_gray(map), o.out);
    std::cout << "method=" << o.method << "\ntarget=" << tx << "," << ty << "\n";
}

struct FeatureOpts {
    std::string in, kind = "harris", out;
    double sigma = 1.0;
};

void run_feature(const FeatureOpts& o) {
    GrayImage img = load_gray(o.in);
    ScalarMap m = feature_map(img, o.kind, o.sigma);
    save_image(scale_to_gray(m), o.out);
    std::cout << "kind=" << o.kind << "\nwidth=" << m.width << "\nheight=" << m.height << "\n";
}

struct PhogOpts {
    std::string in, out, chip = "32x32";
    int levels = 2, bins = 16;
};

void run_phog(const PhogOpts& o) {
    GrayImage img = load_gray(o.in);
    int cw = 0, ch = 0;
    parse_dims(o.chip, cw, ch, "phog --chip");
    std::vector<PHoG> descs = pyramid_hog(img, o.levels, o.bins, cw, ch);
    std::ofstream out = open_out(o.out, "phog");
    out.precision(9);
    for (const PHoG& d : descs) {
        for (std::size_t i = 0; i < d.descriptor.size(); ++i)
            out << (i ? " " : "") << d.descriptor[i];
        out << "\n";
    }
    require(static_cast<bool>(out), "phog: write failed");
    std::cout << "descriptors=" << descs.size()
              << "\nlength=" << phog_length(o.levels, o.bins) << "\n";
}

struct LikelihoodOpts {
    std::string search, tmpl, channel = "ncc", out;
    int bins = 16, levels = 2, phog_bins = 9;
    double p = 1.0;
};

void run_likelihood(const LikelihoodOpts& o) {
    LikelihoodMap map;
    if (o.channel == "ncc") {
        map = ncc_map(load_gray(o.search), load_gray(o.tmpl));
    } else if (o.channel == "color") {
        LoadedImage sl = load_image(o.search), tl = load_image(o.tmpl);
        require(std::holds_alternative<ColorImage>(sl) && std::holds_alternative<ColorImage>(tl),
                "likelihood: the color channel needs P6 inputs");
        const ColorImage& sc = std::get<ColorImage>(sl);
        const ColorImage& tc = std::get<ColorImage>(tl);
        ColorModel model;
        model.fg.assign(32768, 0);
        model.bg.assign(32768, 0);
        for (std::size_t i = 0; i < tc.r.size(); ++i)
            ++model.fg[static_cast<std::size_t>(ColorModel::bin_index(tc.r[i], tc.g[i], tc.b[i]))];
        for (std::size_t i = 0; i < sc.r.size(); ++i)
            ++model.bg[static_cast<std::size_t>(ColorModel::bin_index(sc.r[i], sc.g[i], sc.b[i]))];
        model.fg_area = tc.r.size();
        model.bg_area = sc.r.size();
        map = color_ratio_map(sc, model);
    } else if (o.channel == "hist") {
        GrayImage search = load_gray(o.search), tmpl = load_gray(o.tmpl);
        BinMap tb = quantize(tmpl, o.bins);
        std::vector<double> hist(static_cast<std::size_t>(o.bins), 0.0);
        for (std::uint16_t b : tb.data) hist[b] += 1.0;
        for (double& v : hist) v /= static_cast<double>(tb.data.size());
        IntegralHistogramTensor t = build_integral_histogram(quantize(search, o.bins));
        map = hist_distance_map(t, hist, tmpl.width, tmpl.height, o.p);
    } else if (o.channel == "phog") {
        GrayImage search = load_gray(o.search);
        GrayImage tmpl = pad_to_multiple(load_gray(o.tmpl), 1 << o.levels);
        require(search.width >= tmpl.width && search.height >= tmpl.height,
                "likelihood: template larger than search image");
        PHoG model = phog_descriptor(tmpl, o.levels, o.phog_bins);
        std::vector<PHoG> descs =
            pyramid_hog(search, o.levels, o.phog_bins, tmpl.width, tmpl.height);
        map.width = search.width;
        map.height = search.height;
        map.tag = "phog-kernel";
        map.values.assign(static_cast<std::size_t>(search.width) * search.height, 0.0);
        int gw = search.width - tmpl.width + 1, gh = search.height - tmpl.height + 1;
        int ox = (tmpl.width - 1) / 2, oy = (tmpl.height - 1) / 2;
        for (int i = 0; i < gh; ++i)
            for (int j = 0; j < gw; ++j)
                map.at(j + ox, i + oy) = std::min(
                    1.0, std::max(0.0, phog_kernel(descs[static_cast<std::size_t>(i) * gw + j],
                                                   model)));
    } else {
        throw contract_error("likelihood: unknown channel '" + o.channel + "'");
    }
    save_image(likelihood_to_gray(map), o.out);
    std::cout << "channel=" << o.channel << "\nwidth=" << map.width
              << "\nheight=" << map.height << "\n";
}

struct ScoreOpts {
    std::string map, gt;
};

void run_score(const ScoreOpts& o) {
    LikelihoodMap map = gray_to_likelihood(load_gray(o.map));
    int rank = score_map(map, parse_rect(o.gt));
    std::cout << "rank=" << rank << "\n";
}

struct DetectOpts {
    std::string seq, method = "median-ih", depth, out_dir, csv;
    int bins = 256, window = 9, tau = 25, m = 1, n = 1, avg_window = 5;
    long long min_blob = 8;
    double sigma = 1.0, h_tau = 20.0;
    double flux_tau = 100.0;
};

void run_detect(const DetectOpts& o) {
    Sequence seq = load_sequence(o.seq);
    const std::size_t n = seq.size();
    std::optional<DepthMap> depth;
    if (!o.depth.empty()) depth = load_depth(o.depth);

    fs::create_directories(o.out_dir);
    std::vector<MotionMask> masks;

    if (o.method == "median-ih" || o.method == "median-sort") {
        int wlen = std::min<std::size_t>(o.window, n);
        if (wlen % 2 == 0) --wlen;
        require(wlen >= 1, "detect: median window is empty");
        FrameWindow fw;
        if (o.method == "median-ih") {
            // The histogram median runs in bin space; its background comes
            // back on mid-bin gray levels, comparable with the raw frames.
            for (int i = 0; i < wlen; ++i) {
                BinMap bm = quantize(seq.gray[i], o.bins);
                GrayImage q(bm.width, bm.height);
                for (std::size_t p = 0; p < bm.data.size(); ++p)
                    q.data[p] = static_cast<std::uint8_t>(bm.data[p]);
                fw.frames.push_back(std::move(q));
            }
        } else {
            fw.frames.assign(seq.gray.begin(), seq.gray.begin() + wlen);
        }
        GrayImage bg = o.method == "median-ih" ? median_background_ih(fw, o.bins, o.m, o.n)
                                               : median_background_sort(fw);
        for (std::size_t i = 0; i < n; ++i)
            masks.push_back(subtract_threshold(seq.gray[i], bg, o.tau, o.min_blob));
    } else if (o.method == "flux") {
        int wlen = std::min<std::size_t>(std::max(o.window, 3), n);
        if (wlen % 2 == 0) --wlen;
        require(wlen >= 3, "detect: flux needs at least three frames");
        int half = wlen / 2;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t lo = std::min(n - static_cast<std::size_t>(wlen),
                                      static_cast<std::size_t>(
                                          std::max<long long>(0, static_cast<long long>(i) - half)));
            FrameWindow fw;
            fw.frames.assign(seq.gray.begin() + lo, seq.gray.begin() + lo + wlen);
            ScalarMap resp = flux_trace(fw, o.sigma, o.avg_window);
            masks.push_back(threshold_response(resp, o.flux_tau, o.min_blob));
        }
    } else {
        throw contract_error("detect: unknown method '" + o.method + "'");
    }

    if (depth)
        for (MotionMask& m : masks) m = depth_filter(m, *depth, o.h_tau);

    long long total_blobs = 0;
    std::ofstream csv;
    if (!o.csv.empty()) {
        csv = open_out(o.csv, "detect --csv");
        csv << "frame,blobs,fg_pixels\n";
    }
    char name[32];
    for (std::size_t i = 0; i < masks.size(); ++i) {
        std::snprintf(name, sizeof name, "mask_%05zu.pgm", i);
        save_mask(masks[i].fg, masks[i].width, masks[i].height,
                  (fs::path(o.out_dir) / name).string());
        total_blobs += static_cast<long long>(masks[i].blobs.size());
        if (csv.is_open()) {
            long long fgpx = 0;
            for (std::uint8_t v : masks[i].fg) fgpx += v;
            csv << i << ',' << masks[i].blobs.size() << ',' << fgpx << "\n";
        }
    }
    std::cout << "method=" << o.method << "\nframes=" << masks.size()
              << "\nblobs=" << total_blobs << "\ndepth_filtered=" << (depth ? 1 : 0) << "\n";
}

struct TrackOpts {
    std::string seq, init, config, out, csv;
    std::size_t start = 0;
};

void run_track(const TrackOpts& o) {
    Sequence seq = load_sequence(o.seq);
    TrackConfig cfg = o.config.empty() ? TrackConfig{} : config_to_track(Config::load(o.config));
    Tracklet t = track_sequence(seq, o.start, parse_rect(o.init), cfg);
    save_tracklet(t, o.out);
    double mean_conf = 0.0;
    int fused = 0;
    for (const TrackRecord& r : t) {
        mean_conf += r.conf;
        fused += r.source == TrackSource::fused_kf ? 1 : 0;
    }
    if (!t.empty()) mean_conf /= static_cast<double>(t.size());
    if (!o.csv.empty()) {
        std::ofstream csv = open_out(o.csv, "track --csv");
        csv << "frame,cx,cy,conf,source\n";
        csv.precision(10);
        for (const TrackRecord& r : t)
            csv << r.frame << ',' << r.cx << ',' << r.cy << ',' << r.conf << ','
                << to_string(r.source) << "\n";
    }
    std::cout << "frames=" << t.size() << "\nmean_conf=" << mean_conf
              << "\nfused_kf_frames=" << fused << "\n";
}

struct EvalTrackOpts {
    std::string seq, gt, config, csv;
};

void run_eval_track(const EvalTrackOpts& o) {
    Sequence seq = load_sequence(o.seq);
    std::vector<GtEntry> gt = load_track_gt(o.gt);
    require(gt.size() == seq.size(), "eval-track: ground truth / sequence length mismatch");
    TrackConfig cfg = o.config.empty() ? TrackConfig{} : config_to_track(Config::load(o.config));

    SegmentTracker tracker = [&](std::size_t start, const Rect& init) {
        return track_sequence(seq, start, init, cfg);
    };
    ResetEvalReport rep = eval_reset(tracker, gt);
    std::cout << "accuracy=" << rep.accuracy << "\nfailures=" << rep.failures
              << "\nmfr=" << rep.mfr << "\ntotal_frames=" << rep.total_frames
              << "\nevaluated_frames=" << rep.evaluated_frames << "\n";

    if (!o.csv.empty()) {
        // Per-frame series of a single uninterrupted run from the first
        // non-occluded frame.
        std::size_t start = 0;
        while (start < gt.size() && gt[start].occluded) ++start;
        Tracklet t = tracker(start, gt[start].box);
        std::ofstream csv = open_out(o.csv, "eval-track --csv");
        csv << "frame,cx,cy,conf,source,occluded,overlap\n";
        csv.precision(10);
        for (const TrackRecord& r : t) {
            std::size_t f = static_cast<std::size_t>(r.frame);
            bool occ = f < gt.size() && gt[f].occluded;
            double ov = (f < gt.size() && !occ) ? overlap(r.bbox, gt[f].box) : 0.0;
            csv << r.frame << ',' << r.cx << ',' << r.cy << ',' << r.conf << ','
                << to_string(r.source) << ',' << (occ ? 1 : 0) << ',' << ov << "\n";
        }
    }
}

struct EvalDetOpts {
    std::string masks, gt, csv;
    double tau = 0.5;
    long long min_blob = 1;
};

void run_eval_det(const EvalDetOpts& o) {
    std::vector<std::string> paths;
    {
        std::error_code ec;
        fs::directory_iterator it(o.masks, ec);
        if (ec) throw io_error("eval-det: cannot read directory '" + o.masks + "'");
        for (const auto& entry : it)
            if (entry.is_regular_file() && entry.path().extension() == ".pgm")
                paths.push_back(entry.path().string());
    }
    std::sort(paths.begin(), paths.end());
    require(!paths.empty(), "eval-det: no .pgm masks in '" + o.masks + "'");

    std::vector<MotionMask> masks;
    for (const std::string& p : paths) {
        GrayImage img = load_gray(p);
        std::vector<std::uint8_t> fg(img.data.size());
        for (std::size_t i = 0; i < fg.size(); ++i) fg[i] = img.data[i] > 127 ? 1 : 0;
        masks.push_back(label_mask(fg, img.width, img.height, o.min_blob));
    }
    std::vector<std::vector<Rect>> gt = load_det_gt(o.gt);
    require(gt.size() == masks.size(), "eval-det: ground truth / mask count mismatch");

    DetEvalReport px = eval_pixelwise(masks, gt);
    DetEvalReport ob = eval_objectwise(masks, gt, o.tau);
    std::cout << "pixel.precision=" << px.precision << "\npixel.recall=" << px.recall
              << "\npixel.f=" << px.f_measure << "\nobject.precision=" << ob.precision
              << "\nobject.recall=" << ob.recall << "\nobject.f=" << ob.f_measure
              << "\nzero_gt=" << (px.zero_gt || ob.zero_gt ? 1 : 0) << "\n";

    if (!o.csv.empty()) {
        std::ofstream csv = open_out(o.csv, "eval-det --csv");
        csv << "frame,pixel_p,pixel_r,pixel_f,object_p,object_r,object_f\n";
        csv.precision(10);
        for (std::size_t i = 0; i < masks.size(); ++i) {
            std::vector<MotionMask> m1{masks[i]};
            std::vector<std::vector<Rect>> g1{gt[i]};
            DetEvalReport p1 = eval_pixelwise(m1, g1);
            DetEvalReport o1 = eval_objectwise(m1, g1, o.tau);
            csv << i << ',' << p1.precision << ',' << p1.recall << ',' << p1.f_measure << ','
                << o1.precision << ',' << o1.recall << ',' << o1.f_measure << "\n";
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"integral-histogram detection and tracking toolkit"};
    app.require_subcommand(1);

    IntegralOpts io_;
    auto* sub_integral = app.add_subcommand("integral", "build and dump an integral histogram");
    sub_integral->add_option("--in", io_.in)->required();
    sub_integral->add_option("--bins", io_.bins);
    sub_integral->add_option("--schedule", io_.schedule);
    sub_integral->add_option("--tile", io_.tile);
    sub_integral->add_option("--threads", io_.threads);
    sub_integral->add_option("--out", io_.out)->required();
    sub_integral->callback([&] { run_integral(io_); });

    BenchOpts bo;
    auto* sub_bench = app.add_subcommand("bench-ih", "time the construction schedules");
    sub_bench->add_option("--width", bo.width);
    sub_bench->add_option("--height", bo.height);
    sub_bench->add_option("--bins", bo.bins);
    sub_bench->add_option("--tile", bo.tile);
    sub_bench->add_option("--threads", bo.threads);
    sub_bench->add_option("--seed", bo.seed);
    sub_bench->callback([&] { run_bench(bo); });

    SwlhOpts so;
    auto* sub_swlh = app.add_subcommand("swlh", "spatially weighted local histogram matching");
    sub_swlh->add_option("--in", so.in)->required();
    sub_swlh->add_option("--bins", so.bins);
    sub_swlh->add_option("--kernel", so.kernel);
    sub_swlh->add_option("--method", so.method);
    sub_swlh->add_option("--layers", so.layers);
    sub_swlh->add_option("--target", so.target, "model center as 'x,y' (default: image center)");
    sub_swlh->add_option("--out", so.out)->required();
    sub_swlh->callback([&] { run_swlh(so); });

    FeatureOpts fo;
    auto* sub_feature = app.add_subcommand("feature", "single feature map, min-max scaled");
    sub_feature->add_option("--in", fo.in)->required();
    sub_feature->add_option("--kind", fo.kind);
    sub_feature->add_option("--sigma", fo.sigma);
    sub_feature->add_option("--out", fo.out)->required();
    sub_feature->callback([&] { run_feature(fo); });

    PhogOpts po;
    auto* sub_phog = app.add_subcommand("phog", "sliding pyramid HOG descriptors");
    sub_phog->add_option("--in", po.in)->required();
    sub_phog->add_option("--levels", po.levels);
    sub_phog->add_option("--bins", po.bins);
    sub_phog->add_option("--chip", po.chip);
    sub_phog->add_option("--out", po.out)->required();
    sub_phog->callback([&] { run_phog(po); });

    LikelihoodOpts lo;
    auto* sub_like = app.add_subcommand("likelihood", "single-channel likelihood map");
    sub_like->add_option("--search", lo.search)->required();
    sub_like->add_option("--template", lo.tmpl)->required();
    sub_like->add_option("--channel", lo.channel);
    sub_like->add_option("--bins", lo.bins);
    sub_like->add_option("--levels", lo.levels);
    sub_like->add_option("--phog-bins", lo.phog_bins);
    sub_like->add_option("-p,--minkowski", lo.p);
    sub_like->add_option("--out", lo.out)->required();
    sub_like->callback([&] { run_likelihood(lo); });

    ScoreOpts sc;
    auto* sub_score = app.add_subcommand("score", "rank of the best peak inside a box");
    sub_score->add_option("--map", sc.map)->required();
    sub_score->add_option("--gt", sc.gt)->required();
    sub_score->callback([&] { run_score(sc); });

    DetectOpts det;
    auto* sub_detect = app.add_subcommand("detect", "motion masks for a sequence");
    sub_detect->add_option("--seq", det.seq)->required();
    sub_detect->add_option("--method", det.method, "median-ih | median-sort | flux");
    sub_detect->add_option("--bins", det.bins);
    sub_detect->add_option("--window", det.window);
    sub_detect->add_option("--tau", det.tau, "subtraction threshold (median methods)");
    sub_detect->add_option("--flux-tau", det.flux_tau, "response threshold (flux)");
    sub_detect->add_option("--min-blob", det.min_blob);
    sub_detect->add_option("--m", det.m);
    sub_detect->add_option("--n", det.n);
    sub_detect->add_option("--avg-window", det.avg_window);
    sub_detect->add_option("--sigma", det.sigma);
    sub_detect->add_option("--depth", det.depth);
    sub_detect->add_option("--h-tau", det.h_tau);
    sub_detect->add_option("--out-dir", det.out_dir)->required();
    sub_detect->add_option("--csv", det.csv);
    sub_detect->callback([&] { run_detect(det); });

    TrackOpts tr;
    auto* sub_track = app.add_subcommand("track", "single-target tracking");
    sub_track->add_option("--seq", tr.seq)->required();
    sub_track->add_option("--init", tr.init, "init box 'x,y,w,h'")->required();
    sub_track->add_option("--start", tr.start);
    sub_track->add_option("--config", tr.config);
    sub_track->add_option("--out", tr.out)->required();
    sub_track->add_option("--csv", tr.csv);
    sub_track->callback([&] { run_track(tr); });

    EvalTrackOpts et;
    auto* sub_et = app.add_subcommand("eval-track", "reset-protocol tracking evaluation");
    sub_et->add_option("--seq", et.seq)->required();
    sub_et->add_option("--gt", et.gt)->required();
    sub_et->add_option("--config", et.config);
    sub_et->add_option("--csv", et.csv);
    sub_et->callback([&] { run_eval_track(et); });

    EvalDetOpts ed;
    auto* sub_ed = app.add_subcommand("eval-det", "detection evaluation against box ground truth");
    sub_ed->add_option("--masks", ed.masks)->required();
    sub_ed->add_option("--gt", ed.gt)->required();
    sub_ed->add_option("--tau", ed.tau);
    sub_ed->add_option("--min-blob", ed.min_blob);
    sub_ed->add_option("--csv", ed.csv);
    sub_ed->callback([&] { run_eval_det(ed); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const spct::contract_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const spct::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
