#include "spct/tracker.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace spct {

// ---------------------------------------------------------------- kalman

Eigen::Matrix4d KalmanState::transition() {
    Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
    f(0, 2) = 1.0;
    f(1, 3) = 1.0;
    return f;
}

Eigen::Matrix<double, 2, 4> KalmanState::observation() {
    Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
    h(0, 0) = 1.0;
    h(1, 1) = 1.0;
    return h;
}

KalmanState kalman_init(double cx, double cy, double vx, double vy) {
    KalmanState s;
    s.x << cx, cy, vx, vy;
    s.P = kKalmanInitCov * Eigen::Matrix4d::Identity();
    return s;
}

void kalman_predict(KalmanState& s) {
    const Eigen::Matrix4d f = KalmanState::transition();
    const Eigen::Matrix4d q = kKalmanProcessNoise * Eigen::Matrix4d::Identity();
    s.x = f * s.x;
    s.P = f * s.P * f.transpose() + q;
}

void kalman_fuse(KalmanState& s, double zx, double zy, double conf) {
    require(std::isfinite(zx) && std::isfinite(zy), "kalman_fuse: non-finite measurement");
    require(std::isfinite(conf), "kalman_fuse: non-finite confidence");
    const double c = std::max(conf, kConfEpsilon);

    const auto h = KalmanState::observation();
    const Eigen::Matrix4d q = kKalmanProcessNoise * Eigen::Matrix4d::Identity();
    const Eigen::Matrix2d r = (kMeasurementBeta / c) * Eigen::Matrix2d::Identity();

    Eigen::Matrix2d sm = h * s.P * h.transpose() + r;
    s.last_fuse_regularized = false;
    if (std::abs(sm.determinant()) < 1e-12) {
        sm += 1e-9 * Eigen::Matrix2d::Identity();
        s.last_fuse_regularized = true;
    }
    const Eigen::Matrix<double, 4, 2> w = s.P * h.transpose() * sm.inverse();
    const Eigen::Vector2d z(zx, zy);
    s.x = s.x + w * (z - h * s.x);
    s.P = s.P - w * sm * w.transpose() + q;
    s.P = ((s.P + s.P.transpose()) / 2.0).eval();
}

Rect search_window(const KalmanState& s, int tmpl_w, int tmpl_h,
                   double search_factor, int img_w, int img_h) {
    require(tmpl_w >= 1 && tmpl_h >= 1, "search_window: empty template");
    require(search_factor >= 1.0, "search_window: factor must be >= 1");
    require(img_w >= 1 && img_h >= 1, "search_window: empty image");
    int w = std::min(img_w, std::max(tmpl_w, static_cast<int>(std::lround(tmpl_w * search_factor))));
    int h = std::min(img_h, std::max(tmpl_h, static_cast<int>(std::lround(tmpl_h * search_factor))));
    int x = static_cast<int>(std::lround(s.x[0] - (w - 1) / 2.0));
    int y = static_cast<int>(std::lround(s.x[1] - (h - 1) / 2.0));
    x = std::max(0, std::min(x, img_w - w));
    y = std::max(0, std::min(y, img_h - h));
    return Rect{x, y, w, h};
}

// -------------------------------------------------------------- camshift

CamshiftResult camshift_refine(const LikelihoodMap& map, double cx, double cy,
                               int win_w, int win_h, double delta, int max_iter) {
    require(map.width > 0 && map.height > 0, "camshift_refine: empty map");
    require(cx >= 0 && cy >= 0 && cx < map.width && cy < map.height,
            "camshift_refine: start point outside the map");
    require(win_w >= 1 && win_h >= 1, "camshift_refine: empty window");
    require(delta > 0.0, "camshift_refine: delta must be positive");
    require(max_iter >= 1, "camshift_refine: need at least one iteration");

    CamshiftResult res;
    res.cx = cx;
    res.cy = cy;
    for (int it = 0; it < max_iter; ++it) {
        int x0 = static_cast<int>(std::lround(res.cx - (win_w - 1) / 2.0));
        int y0 = static_cast<int>(std::lround(res.cy - (win_h - 1) / 2.0));
        Rect win = intersect(Rect{x0, y0, win_w, win_h}, Rect{0, 0, map.width, map.height});
        double m00 = 0.0, m10 = 0.0, m01 = 0.0;
        for (int y = win.y; y < win.bottom(); ++y)
            for (int x = win.x; x < win.right(); ++x) {
                double p = map.at(x, y);
                m00 += p;
                m10 += x * p;
                m01 += y * p;
            }
        if (m00 <= 0.0) {
            res.zero_mass = true;
            return res;
        }
        double nx = m10 / m00, ny = m01 / m00;
        double d = std::hypot(nx - res.cx, ny - res.cy);
        res.cx = nx;
        res.cy = ny;
        ++res.iterations;
        if (d < delta) break;
    }
    return res;
}

// ------------------------------------------------------------- direction

const char* to_string(Direction d) {
    switch (d) {
        case Direction::E: return "E";
        case Direction::N: return "N";
        case Direction::W: return "W";
        case Direction::S: return "S";
        default: return "unknown";
    }
}

double direction_angle(Direction d) {
    switch (d) {
        case Direction::E: return 0.0;
        case Direction::N: return 90.0;
        case Direction::W: return 180.0;
        case Direction::S: return 270.0;
        default: throw contract_error("direction_angle: direction is unknown");
    }
}

Direction learn_direction(const Tracklet& t, double min_dist) {
    require(min_dist > 0.0, "learn_direction: min_dist must be positive");
    if (t.size() < 2) return Direction::Unknown;
    const TrackRecord& cur = t.back();
    for (std::size_t back = t.size() - 1; back-- > 0;) {
        double dx = cur.cx - t[back].cx;
        double dy = cur.cy - t[back].cy;
        if (std::hypot(dx, dy) < min_dist) continue;
        if (std::abs(dx) >= std::abs(dy))  // dominant axis; x wins ties
            return dx >= 0 ? Direction::E : Direction::W;
        return dy >= 0 ? Direction::S : Direction::N;  // image y grows downward
    }
    return Direction::Unknown;
}

double direction_min_dist(int tmpl_w, int tmpl_h) {
    return 2.0 * std::max(tmpl_w, tmpl_h);
}

// --------------------------------------------------------------- warping

namespace {

double bilinear_or_zero(const GrayImage& img, double x, double y) {
    int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
    double fx = x - x0, fy = y - y0;
    auto px = [&](int xi, int yi) -> double {
        if (xi < 0 || yi < 0 || xi >= img.width || yi >= img.height) return 0.0;
        return img.at(xi, yi);
    };
    return (1 - fx) * (1 - fy) * px(x0, y0) + fx * (1 - fy) * px(x0 + 1, y0) +
           (1 - fx) * fy * px(x0, y0 + 1) + fx * fy * px(x0 + 1, y0 + 1);
}

void compass_trig(double theta_deg, double& c, double& s) {
    if (theta_deg == 90.0) {
        c = 0.0; s = 1.0;
    } else if (theta_deg == 180.0) {
        c = -1.0; s = 0.0;
    } else if (theta_deg == 270.0) {
        c = 0.0; s = -1.0;
    } else {
        double rad = theta_deg * 3.14159265358979323846 / 180.0;
        c = std::cos(rad);
        s = std::sin(rad);
    }
}

}  // namespace

GrayImage align_roi(const GrayImage& roi, double cx, double cy, double theta_deg) {
    require(theta_deg >= 0.0 && theta_deg < 360.0, "align_roi: angle must be in [0, 360)");
    if (theta_deg == 0.0) return roi;  // exact identity

    double c, s;
    compass_trig(theta_deg, c, s);
    GrayImage out(roi.width, roi.height);
    for (int y = 0; y < roi.height; ++y)
        for (int x = 0; x < roi.width; ++x) {
            // Inverse rotation about (cx, cy): sample where the content
            // came from.
            double dx = x - cx, dy = y - cy;
            double sx = cx + c * dx + s * dy;
            double sy = cy - s * dx + c * dy;
            double v = bilinear_or_zero(roi, sx, sy);
            out.at(x, y) = static_cast<std::uint8_t>(std::lround(std::min(255.0, std::max(0.0, v))));
        }
    return out;
}

// ----------------------------------------------------------------- model

const char* to_string(TrackSource s) {
    return s == TrackSource::features ? "features" : "fused-kf";
}

namespace {

void blend(std::vector<double>& old_v, const std::vector<double>& new_v, double alpha,
           bool renormalize) {
    require(old_v.size() == new_v.size(), "update_model: descriptor length mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < old_v.size(); ++i) {
        old_v[i] = alpha * new_v[i] + (1.0 - alpha) * old_v[i];
        sum += old_v[i];
    }
    if (renormalize && sum > 0.0)
        for (double& v : old_v) v /= sum;
}

}  // namespace

void update_model(TargetModel& model, const TargetModel& fresh, double alpha) {
    require(alpha >= 0.0 && alpha <= 1.0, "update_model: alpha must be in [0,1]");
    require(model.w == fresh.w && model.h == fresh.h, "update_model: template size mismatch");
    require(model.bins == fresh.bins, "update_model: histogram bin mismatch");
    require(model.phog_levels == fresh.phog_levels && model.phog_bins == fresh.phog_bins,
            "update_model: descriptor layout mismatch");
    require(model.has_color == fresh.has_color, "update_model: color availability mismatch");

    blend(model.tmpl.data, fresh.tmpl.data, alpha, false);
    blend(model.swlh, fresh.swlh, alpha, true);
    blend(model.phog.descriptor, fresh.phog.descriptor, alpha, true);
    if (model.has_color) {
        blend(model.color_fg, fresh.color_fg, alpha, true);
        blend(model.color_bg, fresh.color_bg, alpha, true);
    }
}

// ------------------------------------------------------------ tracklet io

void save_tracklet(const Tracklet& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("save_tracklet: cannot open '" + path + "'");
    out << "frame,cx,cy,x,y,w,h,conf,source\n";
    for (const auto& r : t) {
        std::ostringstream line;
        line.precision(10);
        line << r.frame << ',' << r.cx << ',' << r.cy << ',' << r.bbox.x << ','
             << r.bbox.y << ',' << r.bbox.w << ',' << r.bbox.h << ',' << r.conf << ','
             << to_string(r.source) << '\n';
        out << line.str();
    }
    if (!out) throw io_error("save_tracklet: write failed for '" + path + "'");
}

Tracklet load_tracklet(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("load_tracklet: cannot open '" + path + "'");
    Tracklet t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first && line.rfind("frame,", 0) == 0) {
            first = false;
            continue;
        }
        first = false;
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 9)
            throw io_error("load_tracklet: bad line '" + line + "'");
        try {
            TrackRecord r;
            r.frame = std::stoi(fields[0]);
            r.cx = std::stod(fields[1]);
            r.cy = std::stod(fields[2]);
            r.bbox = Rect{std::stoi(fields[3]), std::stoi(fields[4]),
                          std::stoi(fields[5]), std::stoi(fields[6])};
            r.conf = std::stod(fields[7]);
            if (fields[8] == "features")
                r.source = TrackSource::features;
            else if (fields[8] == "fused-kf")
                r.source = TrackSource::fused_kf;
            else
                throw io_error("load_tracklet: unknown source '" + fields[8] + "'");
            if (!t.empty() && r.frame <= t.back().frame)
                throw io_error("load_tracklet: frame indices must increase");
            t.push_back(r);
        } catch (const io_error&) {
            throw;
        } catch (const std::exception&) {
            throw io_error("load_tracklet: bad line '" + line + "'");
        }
    }
    return t;
}

}  // namespace spct
