#include "spct/motion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "spct/features.hpp"

namespace spct {

void FrameWindow::validate() const {
    require(!frames.empty(), "FrameWindow: empty window");
    require(frames.size() % 2 == 1, "FrameWindow: window length must be odd");
    const int w = frames[0].width, h = frames[0].height;
    require(w > 0 && h > 0, "FrameWindow: empty frames");
    for (const auto& f : frames)
        require(f.width == w && f.height == h, "FrameWindow: frame dimensions differ");
}

namespace {

void check_quantized(const GrayImage& f, int bins) {
    for (auto v : f.data)
        require(v < bins, "median_background_ih: frame value exceeds bin count");
}

// Intensity represented by bin k of `bins` uniform bins over [0, 256).
std::uint8_t bin_center(int k, int bins) {
    return static_cast<std::uint8_t>((2 * k + 1) * 128 / bins);
}

}  // namespace

MedianBackgroundIH::MedianBackgroundIH(const FrameWindow& window, int bins, int m, int n)
    : bins_(bins), m_(m), n_(n) {
    window.validate();
    require(bins >= 1 && bins <= 256, "median_background_ih: bins must be in [1,256]");
    require(m >= 1 && n >= 1 && m % 2 == 1 && n % 2 == 1,
            "median_background_ih: kernel sides must be odd and positive");
    width_ = window.frames[0].width;
    height_ = window.frames[0].height;
    require(m <= width_ && n <= height_, "median_background_ih: kernel exceeds image");
    joint_.assign(static_cast<std::size_t>(bins_) * (height_ + 1) * (width_ + 1), 0);
    for (const auto& f : window.frames) {
        add_frame(f, +1);
        frames_.push_back(f);
    }
}

void MedianBackgroundIH::add_frame(const GrayImage& f, int sign) {
    check_quantized(f, bins_);
    BinMap bm(width_, height_, bins_);
    for (std::size_t i = 0; i < f.data.size(); ++i) bm.data[i] = f.data[i];
    IntegralHistogramTensor t = build_integral_histogram(bm);
    if (sign > 0)
        for (std::size_t i = 0; i < joint_.size(); ++i) joint_[i] += t.data[i];
    else
        for (std::size_t i = 0; i < joint_.size(); ++i) joint_[i] -= t.data[i];
}

void MedianBackgroundIH::slide(const GrayImage& next) {
    require(next.width == width_ && next.height == height_,
            "median_background_ih: slide frame dimensions differ");
    add_frame(next, +1);
    add_frame(frames_.front(), -1);
    frames_.pop_front();
    frames_.push_back(next);
}

GrayImage MedianBackgroundIH::background() const {
    const std::size_t rs = width_ + 1;
    const std::size_t ps = rs * (height_ + 1);
    const int rx = (m_ - 1) / 2, ry = (n_ - 1) / 2;
    GrayImage out(width_, height_);
    for (int y = 0; y < height_; ++y)
        for (int x = 0; x < width_; ++x) {
            int x0 = std::max(0, x - rx), x1 = std::min(width_, x + rx + 1);
            int y0 = std::max(0, y - ry), y1 = std::min(height_, y + ry + 1);
            std::uint64_t count = static_cast<std::uint64_t>(x1 - x0) * (y1 - y0) *
                                  frames_.size();
            std::uint64_t need = (count + 1) / 2;
            std::uint64_t cdf = 0;
            int med = bins_ - 1;
            for (int k = 0; k < bins_; ++k) {
                const std::uint64_t* pl = joint_.data() + k * ps;
                cdf += pl[static_cast<std::size_t>(y1) * rs + x1] -
                       pl[static_cast<std::size_t>(y0) * rs + x1] -
                       pl[static_cast<std::size_t>(y1) * rs + x0] +
                       pl[static_cast<std::size_t>(y0) * rs + x0];
                if (cdf >= need) {
                    med = k;
                    break;
                }
            }
            out.at(x, y) = bin_center(med, bins_);
        }
    return out;
}

GrayImage median_background_ih(const FrameWindow& window, int bins, int m, int n) {
    return MedianBackgroundIH(window, bins, m, n).background();
}

GrayImage median_background_sort(const FrameWindow& window) {
    window.validate();
    const int w = window.frames[0].width, h = window.frames[0].height;
    GrayImage out(w, h);
    std::vector<std::uint8_t> vals(window.frames.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            for (std::size_t f = 0; f < window.frames.size(); ++f)
                vals[f] = window.frames[f].at(x, y);
            auto mid = vals.begin() + vals.size() / 2;
            std::nth_element(vals.begin(), mid, vals.end());
            out.at(x, y) = *mid;
        }
    return out;
}

namespace {

// 3x3 erosion/dilation with out-of-bounds treated as background.
std::vector<std::uint8_t> morph3(const std::vector<std::uint8_t>& in, int w, int h,
                                 bool dilate) {
    std::vector<std::uint8_t> out(in.size(), 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            bool acc = !dilate;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    int nx = x + dx, ny = y + dy;
                    bool v = nx >= 0 && ny >= 0 && nx < w && ny < h &&
                             in[static_cast<std::size_t>(ny) * w + nx];
                    acc = dilate ? (acc || v) : (acc && v);
                }
            out[static_cast<std::size_t>(y) * w + x] = acc ? 1 : 0;
        }
    return out;
}

}  // namespace

MotionMask label_mask(const std::vector<std::uint8_t>& fg, int w, int h,
                      long long min_blob) {
    require(w > 0 && h > 0 && fg.size() == static_cast<std::size_t>(w) * h,
            "label_mask: dimension mismatch");
    MotionMask mask;
    mask.width = w;
    mask.height = h;
    mask.min_blob = min_blob;
    mask.fg.assign(fg.size(), 0);
    mask.labels.assign(fg.size(), 0);

    std::vector<std::int32_t> raw(fg.size(), 0);
    std::vector<std::size_t> stack;
    std::int32_t next_id = 0;
    for (std::size_t start = 0; start < fg.size(); ++start) {
        if (!fg[start] || raw[start]) continue;
        ++next_id;
        Blob blob;
        blob.id = next_id;
        int minx = w, miny = h, maxx = -1, maxy = -1;
        stack.push_back(start);
        raw[start] = next_id;
        std::vector<std::size_t> members;
        while (!stack.empty()) {
            std::size_t i = stack.back();
            stack.pop_back();
            members.push_back(i);
            int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
            minx = std::min(minx, x);
            maxx = std::max(maxx, x);
            miny = std::min(miny, y);
            maxy = std::max(maxy, y);
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    int nx = x + dx, ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                    std::size_t ni = static_cast<std::size_t>(ny) * w + nx;
                    if (!fg[ni] || raw[ni]) continue;
                    raw[ni] = next_id;
                    stack.push_back(ni);
                }
        }
        blob.area = static_cast<long long>(members.size());
        if (blob.area < min_blob) continue;
        blob.id = static_cast<std::int32_t>(mask.blobs.size()) + 1;
        blob.bbox = Rect{minx, miny, maxx - minx + 1, maxy - miny + 1};
        for (std::size_t i : members) {
            mask.fg[i] = 1;
            mask.labels[i] = blob.id;
        }
        mask.blobs.push_back(blob);
    }
    return mask;
}

MotionMask subtract_threshold(const GrayImage& frame, const GrayImage& background,
                              int tau, long long min_blob) {
    require(frame.width == background.width && frame.height == background.height,
            "subtract_threshold: dimension mismatch");
    require(tau >= 0, "subtract_threshold: negative threshold");
    const int w = frame.width, h = frame.height;
    std::vector<std::uint8_t> fg(frame.data.size(), 0);
    for (std::size_t i = 0; i < fg.size(); ++i)
        fg[i] = std::abs(static_cast<int>(frame.data[i]) -
                         static_cast<int>(background.data[i])) > tau;
    // Opening then closing with the 3x3 structuring element.
    fg = morph3(morph3(fg, w, h, false), w, h, true);
    fg = morph3(morph3(fg, w, h, true), w, h, false);
    return label_mask(fg, w, h, min_blob);
}

ScalarMap flux_trace(const FrameWindow& window, double sigma_d, int avg_window) {
    window.validate();
    require(window.frames.size() >= 3, "flux_trace: window must hold at least 3 frames");
    require(avg_window >= 1 && avg_window % 2 == 1,
            "flux_trace: averaging window must be odd and positive");
    const int c = window.center();
    const int w = window.frames[0].width, h = window.frames[0].height;

    GradientMaps prev = gradient_maps(window.frames[c - 1], sigma_d);
    GradientMaps next = gradient_maps(window.frames[c + 1], sigma_d);
    ScalarMap sp = gaussian_blur(to_scalar(window.frames[c - 1]), sigma_d);
    ScalarMap sc = gaussian_blur(to_scalar(window.frames[c]), sigma_d);
    ScalarMap sn = gaussian_blur(to_scalar(window.frames[c + 1]), sigma_d);

    ScalarMap raw(w, h);
    for (std::size_t i = 0; i < raw.data.size(); ++i) {
        double ixt = (next.gx.data[i] - prev.gx.data[i]) / 2.0;
        double iyt = (next.gy.data[i] - prev.gy.data[i]) / 2.0;
        double itt = sn.data[i] - 2.0 * sc.data[i] + sp.data[i];
        raw.data[i] = ixt * ixt + iyt * iyt + itt * itt;
    }

    // Box average over the in-bounds part of the Omega neighborhood.
    ScalarMap out(w, h, 0.0, "flux-trace");
    const int r = avg_window / 2;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            int cnt = 0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    int nx = x + dx, ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                    acc += raw.at(nx, ny);
                    ++cnt;
                }
            out.at(x, y) = acc / cnt;
        }
    return out;
}

MotionMask threshold_response(const ScalarMap& response, double tau, long long min_blob) {
    require(tau >= 0.0, "threshold_response: negative threshold");
    std::vector<std::uint8_t> fg(response.data.size(), 0);
    for (std::size_t i = 0; i < fg.size(); ++i) fg[i] = response.data[i] > tau;
    return label_mask(fg, response.width, response.height, min_blob);
}

DepthMap load_depth(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("load_depth: cannot open '" + path + "'");
    DepthMap d;
    if (!(in >> d.width >> d.height) || d.width <= 0 || d.height <= 0)
        throw io_error("load_depth: bad header in '" + path + "'");
    d.depth.resize(static_cast<std::size_t>(d.width) * d.height);
    std::string tok;
    for (auto& v : d.depth) {
        if (!(in >> tok)) throw io_error("load_depth: truncated data in '" + path + "'");
        try {
            v = std::stod(tok);
        } catch (const std::exception&) {
            throw io_error("load_depth: bad value '" + tok + "' in '" + path + "'");
        }
    }
    return d;
}

void save_depth(const DepthMap& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("save_depth: cannot open '" + path + "'");
    out << d.width << " " << d.height << "\n";
    for (int y = 0; y < d.height; ++y) {
        for (int x = 0; x < d.width; ++x) {
            if (x) out << " ";
            double v = d.at(x, y);
            if (std::isnan(v))
                out << "nan";
            else
                out << v;
        }
        out << "\n";
    }
    if (!out) throw io_error("save_depth: write failed for '" + path + "'");
}

MotionMask depth_filter(const MotionMask& mask, const DepthMap& depth, double h_tau) {
    require(mask.width == depth.width && mask.height == depth.height,
            "depth_filter: dimension mismatch");
    std::vector<std::uint8_t> fg(mask.fg);
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (fg[static_cast<std::size_t>(y) * mask.width + x] &&
                depth.at(x, y) > h_tau)  // NaN compares false: no-data pixels stay
                fg[static_cast<std::size_t>(y) * mask.width + x] = 0;
    return label_mask(fg, mask.width, mask.height, mask.min_blob);
}

}  // namespace spct
