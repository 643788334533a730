// Tracker tests: Kalman filter algebra, mean-shift refinement, direction
// learning and ROI alignment, appearance-model blending, tracklet IO, and
// small end-to-end runs of the per-frame loop.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "spct/error.hpp"
#include "spct/tracker.hpp"
#include "test_util.hpp"

using namespace spct;
using namespace spct::testutil;

TEST_CASE("kalman transition and observation matrices") {
    Eigen::Matrix4d F = KalmanState::transition();
    Eigen::Vector4d x(3.0, -2.0, 0.5, 1.5);
    Eigen::Vector4d y = F * x;
    CHECK(y[0] == doctest::Approx(3.5));
    CHECK(y[1] == doctest::Approx(-0.5));
    CHECK(y[2] == doctest::Approx(0.5));
    CHECK(y[3] == doctest::Approx(1.5));

    Eigen::Matrix<double, 2, 4> H = KalmanState::observation();
    Eigen::Vector2d z = H * x;
    CHECK(z[0] == doctest::Approx(3.0));
    CHECK(z[1] == doctest::Approx(-2.0));
}

TEST_CASE("kalman init and predict") {
    KalmanState s = kalman_init(10.0, 20.0, 2.0, -1.0);
    CHECK(s.x[0] == 10.0);
    CHECK(s.x[3] == -1.0);
    CHECK(s.P(0, 0) == doctest::Approx(kKalmanInitCov));
    CHECK(s.P(0, 1) == doctest::Approx(0.0));

    SUBCASE("noiseless constant-velocity propagation") {
        for (int i = 0; i < 5; ++i) kalman_predict(s);
        CHECK(s.x[0] == doctest::Approx(20.0));
        CHECK(s.x[1] == doctest::Approx(15.0));
        CHECK(s.x[2] == doctest::Approx(2.0));
        CHECK(s.x[3] == doctest::Approx(-1.0));
    }
    SUBCASE("covariance follows F P F' + Q") {
        kalman_predict(s);
        CHECK(s.P(0, 0) == doctest::Approx(2.0 + kKalmanProcessNoise));
        CHECK(s.P(0, 2) == doctest::Approx(1.0));
        CHECK(s.P(2, 0) == doctest::Approx(1.0));
        CHECK(s.P(2, 2) == doctest::Approx(1.0 + kKalmanProcessNoise));
    }
    SUBCASE("two predicts move the mean by F squared") {
        KalmanState a = kalman_init(1.0, 2.0, 3.0, 4.0);
        KalmanState b = a;
        kalman_predict(a);
        kalman_predict(a);
        Eigen::Matrix4d F = KalmanState::transition();
        Eigen::Vector4d want = F * F * b.x;
        for (int i = 0; i < 4; ++i) CHECK(a.x[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
}

TEST_CASE("kalman fuse: hand-computed single update") {
    // From P = I and conf = 1: S = 5 I, so the position moves by z / 5.
    KalmanState s = kalman_init(0.0, 0.0);
    kalman_fuse(s, 5.0, 0.0, 1.0);
    CHECK(s.x[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.x[1] == doctest::Approx(0.0));
    // P <- P - W S W' + Q with W S W' = diag(0.2, 0.2, 0, 0).
    CHECK(s.P(0, 0) == doctest::Approx(0.8 + kKalmanProcessNoise).epsilon(1e-12));
    CHECK(s.P(1, 1) == doctest::Approx(0.8 + kKalmanProcessNoise).epsilon(1e-12));
    CHECK(s.P(2, 2) == doctest::Approx(1.0 + kKalmanProcessNoise).epsilon(1e-12));
    CHECK(s.last_fuse_regularized == false);
    // Symmetry is maintained.
    CHECK((s.P - s.P.transpose()).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("kalman fuse: confidence scales trust in the measurement") {
    KalmanState hi = kalman_init(0.0, 0.0);
    KalmanState lo = kalman_init(0.0, 0.0);
    kalman_fuse(hi, 10.0, 0.0, 1.0);
    kalman_fuse(lo, 10.0, 0.0, 0.01);
    CHECK(hi.x[0] > lo.x[0]);
    // Zero confidence is floored at the epsilon, giving a near-inert update.
    KalmanState z = kalman_init(0.0, 0.0);
    kalman_fuse(z, 10.0, 0.0, 0.0);
    CHECK(std::abs(z.x[0]) < 0.01);
}

TEST_CASE("kalman fuse: repeated high-confidence fusion locks onto a track") {
    KalmanState s = kalman_init(0.0, 0.0);
    double cx = 0.0, cy = 0.0;
    for (int f = 1; f <= 12; ++f) {
        cx += 1.5;
        cy += -0.5;
        kalman_predict(s);
        kalman_fuse(s, cx, cy, 1.0);
    }
    CHECK(std::abs(s.x[0] - cx) < 0.5);
    CHECK(std::abs(s.x[1] - cy) < 0.5);
    CHECK(s.x[2] == doctest::Approx(1.5).epsilon(0.1));
    CHECK(s.x[3] == doctest::Approx(-0.5).epsilon(0.1));
}

TEST_CASE("kalman fuse: singular innovation is regularized, not propagated") {
    KalmanState s = kalman_init(0.0, 0.0);
    s.P.setZero();
    kalman_fuse(s, 1.0, 1.0, 1e12);  // R ~ 4e-12 I, S nearly singular
    CHECK(s.last_fuse_regularized == true);
    CHECK(std::isfinite(s.x[0]));
    CHECK(std::isfinite(s.P(0, 0)));
}

TEST_CASE("search window placement and clamping") {
    KalmanState s = kalman_init(50.0, 40.0);
    SUBCASE("centered on the state, extent = template x factor") {
        Rect r = search_window(s, 10, 8, 2.0, 100, 80);
        CHECK(r.w == 20);
        CHECK(r.h == 16);
        CHECK(r.x == 41);  // lround(50 - 19/2)
        CHECK(r.y == 33);  // lround(40 - 15/2)
    }
    SUBCASE("never smaller than the template") {
        Rect r = search_window(s, 10, 8, 1.0, 100, 80);
        CHECK(r.w == 10);
        CHECK(r.h == 8);
        CHECK_THROWS_AS((void)search_window(s, 10, 8, 0.5, 100, 80), contract_error);
    }
    SUBCASE("capped at the image and clamped inside") {
        Rect r = search_window(s, 10, 8, 100.0, 100, 80);
        CHECK(r.w == 100);
        CHECK(r.h == 80);
        CHECK(r.x == 0);
        CHECK(r.y == 0);

        KalmanState corner = kalman_init(1.0, 1.0);
        Rect c = search_window(corner, 10, 8, 2.0, 100, 80);
        CHECK(c.x == 0);
        CHECK(c.y == 0);
        KalmanState far = kalman_init(99.0, 79.0);
        Rect f = search_window(far, 10, 8, 2.0, 100, 80);
        CHECK(f.x == 100 - 20);
        CHECK(f.y == 80 - 16);
    }
}

TEST_CASE("camshift refinement") {
    SUBCASE("single impulse: converges to the impulse position") {
        LikelihoodMap map{12, 12, std::vector<double>(144, 0.0), "test"};
        map.at(5, 7) = 1.0;
        CamshiftResult r = camshift_refine(map, 3.0, 3.0, 9, 9);
        CHECK(r.zero_mass == false);
        CHECK(r.cx == doctest::Approx(5.0));
        CHECK(r.cy == doctest::Approx(7.0));
        CHECK(r.iterations >= 1);
    }
    SUBCASE("zero mass: flag raised, center untouched") {
        LikelihoodMap map{10, 10, std::vector<double>(100, 0.0), "test"};
        CamshiftResult r = camshift_refine(map, 4.0, 4.0, 5, 5);
        CHECK(r.zero_mass == true);
        CHECK(r.cx == doctest::Approx(4.0));
        CHECK(r.cy == doctest::Approx(4.0));
    }
    SUBCASE("uniform interior window stays put") {
        LikelihoodMap map{20, 20, std::vector<double>(400, 0.25), "test"};
        CamshiftResult r = camshift_refine(map, 10.0, 9.0, 5, 5);
        CHECK(r.cx == doctest::Approx(10.0));
        CHECK(r.cy == doctest::Approx(9.0));
    }
}

TEST_CASE("direction quantization") {
    CHECK(direction_angle(Direction::E) == doctest::Approx(0.0));
    CHECK(direction_angle(Direction::N) == doctest::Approx(90.0));
    CHECK(direction_angle(Direction::W) == doctest::Approx(180.0));
    CHECK(direction_angle(Direction::S) == doctest::Approx(270.0));
    CHECK_THROWS_AS(direction_angle(Direction::Unknown), contract_error);
    CHECK(std::string(to_string(Direction::E)) == "E");
    CHECK(std::string(to_string(Direction::Unknown)).size() > 0);

    auto make_track = [](std::vector<std::pair<double, double>> pts) {
        Tracklet t;
        int f = 0;
        for (auto [x, y] : pts) {
            TrackRecord r;
            r.frame = f++;
            r.cx = x;
            r.cy = y;
            t.push_back(r);
        }
        return t;
    };
    SUBCASE("dominant-axis quantization, image y pointing down") {
        CHECK(learn_direction(make_track({{0, 0}, {5, 1}}), 3.0) == Direction::E);
        CHECK(learn_direction(make_track({{5, 0}, {0, 1}}), 3.0) == Direction::W);
        CHECK(learn_direction(make_track({{0, 0}, {1, 6}}), 3.0) == Direction::S);
        CHECK(learn_direction(make_track({{0, 6}, {1, 0}}), 3.0) == Direction::N);
        // Ties go to the horizontal axis.
        CHECK(learn_direction(make_track({{0, 0}, {4, 4}}), 3.0) == Direction::E);
    }
    SUBCASE("walks back past nearby records to reach min_dist") {
        auto t = make_track({{0, 0}, {4, 0}, {8, 0}, {9, 0}});
        CHECK(learn_direction(t, 6.0) == Direction::E);
    }
    SUBCASE("history exhausted before min_dist gives Unknown") {
        CHECK(learn_direction(make_track({{0, 0}, {1, 0}}), 10.0) == Direction::Unknown);
        CHECK(learn_direction(make_track({{3, 3}}), 0.5) == Direction::Unknown);
        CHECK(learn_direction({}, 1.0) == Direction::Unknown);
    }
    CHECK(direction_min_dist(10, 6) == doctest::Approx(20.0));
    CHECK(direction_min_dist(4, 14) == doctest::Approx(28.0));
}

TEST_CASE("roi alignment") {
    GrayImage img(6, 6);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 6; ++x)
            img.at(x, y) = static_cast<std::uint8_t>(10 * y + x + 1);
    const double c = (6 - 1) / 2.0;

    SUBCASE("zero rotation is a byte-exact identity") {
        GrayImage out = align_roi(img, c, c, 0.0);
        CHECK(out.data == img.data);
    }
    SUBCASE("quarter turn permutes pixels exactly on a square") {
        GrayImage out = align_roi(img, c, c, 90.0);
        for (int y = 0; y < 6; ++y)
            for (int x = 0; x < 6; ++x)
                CHECK(out.at(x, y) == img.at(y, 6 - 1 - x));
    }
    SUBCASE("half turn is a point reflection") {
        GrayImage rect(7, 5);
        for (int y = 0; y < 5; ++y)
            for (int x = 0; x < 7; ++x)
                rect.at(x, y) = static_cast<std::uint8_t>(20 * y + x);
        GrayImage out = align_roi(rect, (7 - 1) / 2.0, (5 - 1) / 2.0, 180.0);
        for (int y = 0; y < 5; ++y)
            for (int x = 0; x < 7; ++x)
                CHECK(out.at(x, y) == rect.at(6 - x, 4 - y));
    }
    SUBCASE("four quarter turns compose to the identity") {
        GrayImage cur = img;
        for (int i = 0; i < 4; ++i) cur = align_roi(cur, c, c, 90.0);
        CHECK(cur.data == img.data);
    }
    SUBCASE("out-of-bounds source reads as zero") {
        GrayImage flat(9, 9);
        std::fill(flat.data.begin(), flat.data.end(), std::uint8_t{200});
        GrayImage out = align_roi(flat, 4.0, 4.0, 45.0);
        CHECK(out.at(4, 4) == 200);  // center is a fixed point
        CHECK(out.at(0, 0) == 0);    // corner maps outside the square
    }
}

namespace {

Sequence gray_sequence(std::vector<GrayImage> frames) {
    Sequence s;
    s.gray = std::move(frames);
    return s;
}

// Frames with a textured patch pasted at (x0 + t*dx, y0 + t*dy).
Sequence moving_patch_sequence(int w, int h, int frames, const GrayImage& patch,
                               int x0, int y0, int dx, int dy) {
    std::vector<GrayImage> seq;
    for (int t = 0; t < frames; ++t) {
        GrayImage img(w, h);
        std::fill(img.data.begin(), img.data.end(), std::uint8_t{100});
        int px = x0 + t * dx, py = y0 + t * dy;
        for (int y = 0; y < patch.height; ++y)
            for (int x = 0; x < patch.width; ++x)
                img.at(px + x, py + y) = patch.at(x, y);
        seq.push_back(std::move(img));
    }
    return gray_sequence(std::move(seq));
}

}  // namespace

TEST_CASE("build_model captures the template and normalized descriptors") {
    GrayImage patch = smooth_image(12, 12, 31);
    Sequence seq = moving_patch_sequence(48, 40, 2, patch, 10, 8, 0, 0);
    TrackConfig cfg;
    Rect box{10, 8, 12, 12};
    TargetModel m = build_model(seq, 0, box, cfg);

    CHECK(m.w == 12);
    CHECK(m.h == 12);
    CHECK(m.bins == cfg.bins);
    CHECK(m.has_color == false);
    REQUIRE(m.tmpl.width == 12);
    REQUIRE(m.tmpl.height == 12);
    for (int y = 0; y < 12; ++y)
        for (int x = 0; x < 12; ++x)
            CHECK(m.tmpl.at(x, y) == doctest::Approx(double(patch.at(x, y))));
    CHECK(std::accumulate(m.swlh.begin(), m.swlh.end(), 0.0) == doctest::Approx(1.0));
    CHECK(m.phog.levels == cfg.phog_levels);
    CHECK(m.dir == Direction::Unknown);
}

TEST_CASE("build_model color path: background ring availability decides has_color") {
    const int w = 30, h = 24;
    std::vector<ColorImage> color;
    std::vector<GrayImage> gray;
    ColorImage c(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            bool inside = x >= 10 && x < 18 && y >= 8 && y < 16;
            std::size_t i = c.idx(x, y);
            c.r[i] = inside ? 200 : 40;
            c.g[i] = 40;
            c.b[i] = inside ? 40 : 200;
        }
    color.push_back(c);
    gray.push_back(to_grayscale(c));
    Sequence seq;
    seq.gray = gray;
    seq.color = color;

    TrackConfig cfg;
    TargetModel interior = build_model(seq, 0, Rect{10, 8, 8, 8}, cfg);
    CHECK(interior.has_color == true);
    CHECK(std::accumulate(interior.color_fg.begin(), interior.color_fg.end(), 0.0) ==
          doctest::Approx(1.0));
    CHECK(std::accumulate(interior.color_bg.begin(), interior.color_bg.end(), 0.0) ==
          doctest::Approx(1.0));

    // A box covering the whole frame leaves no background ring.
    TargetModel full = build_model(seq, 0, Rect{0, 0, w, h}, cfg);
    CHECK(full.has_color == false);
}

TEST_CASE("update_model blends descriptors and renormalizes histograms") {
    GrayImage pa = smooth_image(12, 12, 7);
    GrayImage pb = smooth_image(12, 12, 8);
    Sequence sa = moving_patch_sequence(40, 40, 1, pa, 6, 6, 0, 0);
    Sequence sb = moving_patch_sequence(40, 40, 1, pb, 6, 6, 0, 0);
    TrackConfig cfg;
    Rect box{6, 6, 12, 12};
    TargetModel old_model = build_model(sa, 0, box, cfg);
    TargetModel fresh = build_model(sb, 0, box, cfg);

    SUBCASE("alpha 0 keeps the old model") {
        TargetModel m = old_model;
        update_model(m, fresh, 0.0);
        CHECK(m.tmpl.data == old_model.tmpl.data);
        CHECK(m.swlh == old_model.swlh);
    }
    SUBCASE("alpha 1 adopts the fresh model") {
        TargetModel m = old_model;
        update_model(m, fresh, 1.0);
        for (std::size_t i = 0; i < m.tmpl.data.size(); ++i)
            CHECK(m.tmpl.data[i] == doctest::Approx(fresh.tmpl.data[i]));
        for (std::size_t i = 0; i < m.swlh.size(); ++i)
            CHECK(m.swlh[i] == doctest::Approx(fresh.swlh[i]));
    }
    SUBCASE("intermediate alpha is a convex combination; histograms stay unit mass") {
        TargetModel m = old_model;
        update_model(m, fresh, 0.3);
        for (std::size_t i = 0; i < m.tmpl.data.size(); ++i)
            CHECK(m.tmpl.data[i] ==
                  doctest::Approx(0.3 * fresh.tmpl.data[i] + 0.7 * old_model.tmpl.data[i]));
        CHECK(std::accumulate(m.swlh.begin(), m.swlh.end(), 0.0) == doctest::Approx(1.0));
        double phog_mass =
            std::accumulate(m.phog.descriptor.begin(), m.phog.descriptor.end(), 0.0);
        CHECK(phog_mass > 0.0);
    }
    SUBCASE("mismatched geometry is rejected") {
        TargetModel m = old_model;
        TargetModel wrong = build_model(sb, 0, Rect{6, 6, 8, 8}, cfg);
        CHECK_THROWS_AS(update_model(m, wrong, 0.5), contract_error);
    }
}

TEST_CASE("tracklet file round trip") {
    Tracklet t;
    TrackRecord a;
    a.frame = 0;
    a.cx = 12.25;
    a.cy = 9.5;
    a.bbox = Rect{8, 5, 9, 9};
    a.conf = 1.0;
    a.source = TrackSource::features;
    TrackRecord b = a;
    b.frame = 3;
    b.cx = 15.125;
    b.conf = 0.25;
    b.source = TrackSource::fused_kf;
    t = {a, b};

    const std::string path = "/tmp/spct_tracklet_test.csv";
    save_tracklet(t, path);
    Tracklet r = load_tracklet(path);
    REQUIRE(r.size() == 2);
    CHECK(r[0].frame == 0);
    CHECK(r[1].frame == 3);
    CHECK(r[0].cx == doctest::Approx(12.25).epsilon(1e-9));
    CHECK(r[1].cx == doctest::Approx(15.125).epsilon(1e-9));
    CHECK(r[1].bbox.x == 8);
    CHECK(r[1].bbox.h == 9);
    CHECK(r[0].source == TrackSource::features);
    CHECK(r[1].source == TrackSource::fused_kf);
    std::remove(path.c_str());

    SUBCASE("malformed files are rejected") {
        const std::string bad = "/tmp/spct_tracklet_bad.csv";
        auto write = [&](const char* text) {
            std::FILE* f = std::fopen(bad.c_str(), "w");
            std::fputs(text, f);
            std::fclose(f);
        };
        write("frame,cx,cy,x,y,w,h,conf,source\n1,2,3\n");
        CHECK_THROWS_AS(load_tracklet(bad), io_error);
        write("frame,cx,cy,x,y,w,h,conf,source\n1,2,3,4,5,6,7,0.5,warp\n");
        CHECK_THROWS_AS(load_tracklet(bad), io_error);
        write("frame,cx,cy,x,y,w,h,conf,source\n"
              "2,2,3,4,5,6,7,0.5,features\n1,2,3,4,5,6,7,0.5,features\n");
        CHECK_THROWS_AS(load_tracklet(bad), io_error);
        std::remove(bad.c_str());
        CHECK_THROWS_AS(load_tracklet("/tmp/spct_no_such_tracklet.csv"), io_error);
    }
}

TEST_CASE("track_sequence follows a static target") {
    GrayImage patch = smooth_image(12, 12, 5);
    Sequence seq = moving_patch_sequence(64, 48, 10, patch, 20, 16, 0, 0);
    TrackConfig cfg;
    cfg.use_direction = false;
    Tracklet t = track_sequence(seq, 0, Rect{20, 16, 12, 12}, cfg);
    REQUIRE(t.size() == 10);
    CHECK(t[0].frame == 0);
    CHECK(t[0].conf == doctest::Approx(1.0));
    const double cx0 = t[0].cx, cy0 = t[0].cy;
    for (const auto& r : t) {
        CHECK(std::abs(r.cx - cx0) <= 1.5);
        CHECK(std::abs(r.cy - cy0) <= 1.5);
    }
    // A stationary, unoccluded, high-contrast target is feature-tracked.
    int feature_frames = 0;
    for (const auto& r : t)
        if (r.source == TrackSource::features) ++feature_frames;
    CHECK(feature_frames >= 8);
}

TEST_CASE("track_sequence follows linear motion") {
    GrayImage patch = smooth_image(12, 12, 9);
    Sequence seq = moving_patch_sequence(96, 48, 16, patch, 8, 18, 2, 0);
    TrackConfig cfg;
    cfg.use_direction = false;
    Tracklet t = track_sequence(seq, 0, Rect{8, 18, 12, 12}, cfg);
    REQUIRE(t.size() == 16);
    for (int f = 1; f < 16; ++f) {
        double true_cx = 8 + 2 * f + (12 - 1) / 2.0;
        double true_cy = 18 + (12 - 1) / 2.0;
        CHECK(std::abs(t[f].cx - true_cx) <= 2.0);
        CHECK(std::abs(t[f].cy - true_cy) <= 2.0);
    }
}

TEST_CASE("track_sequence validates its inputs") {
    GrayImage patch = smooth_image(8, 8, 3);
    Sequence seq = moving_patch_sequence(32, 32, 3, patch, 4, 4, 0, 0);
    TrackConfig cfg;
    CHECK_THROWS_AS(track_sequence(seq, 0, Rect{30, 30, 8, 8}, cfg), contract_error);
    CHECK_THROWS_AS(track_sequence(seq, 5, Rect{4, 4, 8, 8}, cfg), contract_error);
    CHECK_THROWS_AS(track_sequence(Sequence{}, 0, Rect{0, 0, 4, 4}, cfg), contract_error);
    TrackConfig bad = cfg;
    bad.alpha = 1.5;
    CHECK_THROWS_AS(track_sequence(seq, 0, Rect{4, 4, 8, 8}, bad), contract_error);
}
