// Evaluation harness tests: IoU overlap, ground-truth file parsing, the
// reset protocol with scripted trackers, and pixel-/object-wise detection
// scoring against hand-computed fixtures.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "spct/error.hpp"
#include "spct/eval.hpp"
#include "spct/motion.hpp"

using namespace spct;

namespace {

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

// A scripted tracker: returns, for any start frame, records following the
// given per-frame boxes.
SegmentTracker scripted(std::vector<Rect> boxes) {
    return [boxes](std::size_t start, const Rect&) {
        Tracklet t;
        for (std::size_t f = start; f < boxes.size(); ++f) {
            TrackRecord r;
            r.frame = static_cast<int>(f);
            r.bbox = boxes[f];
            r.cx = boxes[f].x + (boxes[f].w - 1) / 2.0;
            r.cy = boxes[f].y + (boxes[f].h - 1) / 2.0;
            r.conf = 1.0;
            t.push_back(r);
        }
        return t;
    };
}

std::vector<GtEntry> static_gt(int n, Rect box) {
    std::vector<GtEntry> gt(n);
    for (auto& e : gt) e.box = box;
    return gt;
}

MotionMask mask_from_rects(int w, int h, const std::vector<Rect>& rects,
                           long long min_blob = 1) {
    std::vector<std::uint8_t> fg(static_cast<std::size_t>(w) * h, 0);
    for (const Rect& r : rects)
        for (int y = r.y; y < r.y + r.h; ++y)
            for (int x = r.x; x < r.x + r.w; ++x)
                fg[static_cast<std::size_t>(y) * w + x] = 1;
    return label_mask(fg, w, h, min_blob);
}

}  // namespace

TEST_CASE("overlap is intersection over union") {
    Rect a{0, 0, 10, 10};
    CHECK(overlap(a, a) == doctest::Approx(1.0));
    CHECK(overlap(a, Rect{20, 20, 10, 10}) == doctest::Approx(0.0));
    CHECK(overlap(a, Rect{5, 0, 10, 10}) == doctest::Approx(1.0 / 3.0));
    CHECK(overlap(a, Rect{10, 0, 10, 10}) == doctest::Approx(0.0));  // touching
    CHECK(overlap(Rect{2, 2, 4, 4}, Rect{0, 0, 10, 10}) ==
          doctest::Approx(16.0 / 100.0));  // containment
    CHECK(overlap(a, Rect{0, 5, 10, 10}) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("tracking ground-truth file parsing") {
    const std::string path = "/tmp/spct_track_gt_test.txt";
    SUBCASE("boxes and occlusion flags") {
        write_file(path, "10,20,30,40\noccluded\n1,2,3,4\n");
        auto gt = load_track_gt(path);
        REQUIRE(gt.size() == 3);
        CHECK(gt[0].box == Rect{10, 20, 30, 40});
        CHECK(gt[0].occluded == false);
        CHECK(gt[1].occluded == true);
        CHECK(gt[2].box == Rect{1, 2, 3, 4});
    }
    SUBCASE("trailing blank lines are dropped, interior blanks rejected") {
        write_file(path, "1,2,3,4\n5,6,7,8\n\n");
        CHECK(load_track_gt(path).size() == 2);
        write_file(path, "1,2,3,4\n\n5,6,7,8\n");
        CHECK_THROWS_AS(load_track_gt(path), io_error);
    }
    SUBCASE("malformed boxes are rejected") {
        write_file(path, "1,2,3\n");
        CHECK_THROWS_AS(load_track_gt(path), io_error);
        write_file(path, "a,b,c,d\n");
        CHECK_THROWS_AS(load_track_gt(path), io_error);
    }
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_track_gt("/tmp/spct_no_such_gt.txt"), io_error);
}

TEST_CASE("reset protocol: perfect tracker") {
    Rect box{10, 10, 8, 8};
    auto gt = static_gt(20, box);
    auto rep = eval_reset(scripted(std::vector<Rect>(20, box)), gt);
    CHECK(rep.accuracy == doctest::Approx(1.0));
    CHECK(rep.failures == 0);
    CHECK(rep.mfr == doctest::Approx(0.0));
    CHECK(rep.total_frames == 20);
    CHECK(rep.evaluated_frames == 19);  // all but the init frame
}

TEST_CASE("reset protocol: one failure on frame 10 of 100") {
    Rect box{10, 10, 8, 8};
    std::vector<Rect> boxes(100, box);
    boxes[10] = Rect{90, 90, 8, 8};  // disjoint from gt
    auto rep = eval_reset(scripted(boxes), static_gt(100, box));
    CHECK(rep.failures == 1);
    CHECK(rep.mfr == doctest::Approx(0.01));
    // Runs from 0 (frames 1..9 evaluated) and from 15 (frames 16..99).
    CHECK(rep.evaluated_frames == 9 + 84);
    CHECK(rep.accuracy == doctest::Approx(1.0));
}

TEST_CASE("reset protocol: accuracy equals the hand-averaged overlap series") {
    Rect box{0, 0, 10, 10};
    std::vector<Rect> boxes = {
        box,                 // frame 0: init (not evaluated)
        box,                 // overlap 1
        Rect{5, 0, 10, 10},  // overlap 1/3
        Rect{2, 0, 10, 10},  // overlap 80/120 = 2/3
        box,                 // overlap 1
    };
    auto rep = eval_reset(scripted(boxes), static_gt(5, box));
    CHECK(rep.failures == 0);
    CHECK(rep.evaluated_frames == 4);
    CHECK(rep.accuracy == doctest::Approx((1.0 + 1.0 / 3.0 + 2.0 / 3.0 + 1.0) / 4.0));
}

TEST_CASE("reset protocol: occluded frames are excluded, not failures") {
    Rect box{4, 4, 6, 6};
    auto gt = static_gt(8, box);
    gt[3].occluded = true;
    gt[4].occluded = true;
    std::vector<Rect> boxes(8, box);
    boxes[3] = Rect{50, 50, 6, 6};  // disjoint during occlusion: ignored
    boxes[4] = Rect{50, 50, 6, 6};
    auto rep = eval_reset(scripted(boxes), gt);
    CHECK(rep.failures == 0);
    CHECK(rep.evaluated_frames == 5);  // frames 1,2,5,6,7
    CHECK(rep.accuracy == doctest::Approx(1.0));
}

TEST_CASE("reset protocol: reinit lands after the skip and past occlusion") {
    Rect box{4, 4, 6, 6};
    auto gt = static_gt(12, box);
    gt[7].occluded = true;
    gt[8].occluded = true;

    std::vector<std::size_t> starts;
    SegmentTracker tr = [&](std::size_t start, const Rect& init) {
        starts.push_back(start);
        Tracklet t;
        for (std::size_t f = start; f < 12; ++f) {
            TrackRecord r;
            r.frame = static_cast<int>(f);
            // First run: lose the target on frame 2. Later runs: perfect.
            r.bbox = (start == 0 && f == 2) ? Rect{40, 40, 6, 6} : init;
            t.push_back(r);
        }
        return t;
    };
    auto rep = eval_reset(tr, gt);
    CHECK(rep.failures == 1);
    REQUIRE(starts.size() == 2);
    CHECK(starts[0] == 0);
    CHECK(starts[1] == 9);  // 2 + 5 = 7 is occluded, 8 occluded, 9 clear
    CHECK(rep.evaluated_frames == 1 + 2);  // frame 1, then frames 10,11
    CHECK(rep.mfr == doctest::Approx(1.0 / 12.0));
}

TEST_CASE("reset protocol: tracker exceptions carry the start frame") {
    Rect box{0, 0, 4, 4};
    SegmentTracker boom = [](std::size_t, const Rect&) -> Tracklet {
        throw std::runtime_error("boom");
    };
    try {
        eval_reset(boom, static_gt(5, box));
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        std::string msg = e.what();
        CHECK(msg.find("boom") != std::string::npos);
        CHECK(msg.find("frame 0") != std::string::npos);
    }
}

TEST_CASE("reset protocol contract checks") {
    Rect box{0, 0, 4, 4};
    std::vector<GtEntry> occluded(3);
    for (auto& e : occluded) {
        e.occluded = true;
        e.box = box;
    }
    CHECK_THROWS_AS(eval_reset(scripted({box, box, box}), occluded), contract_error);
    CHECK_THROWS_AS(eval_reset(scripted({box, box, box}), {}), contract_error);

    SegmentTracker late = [](std::size_t start, const Rect& init) {
        Tracklet t;
        TrackRecord r;
        r.frame = static_cast<int>(start) + 1;  // does not start at init frame
        r.bbox = init;
        t.push_back(r);
        return t;
    };
    CHECK_THROWS_AS(eval_reset(late, static_gt(4, box)), contract_error);
}

TEST_CASE("pixel-wise detection scores") {
    SUBCASE("mask equal to the union of boxes is perfect") {
        std::vector<Rect> boxes = {{2, 2, 4, 3}, {10, 5, 3, 3}};
        auto m = mask_from_rects(16, 12, boxes);
        auto rep = eval_pixelwise({m}, {boxes});
        CHECK(rep.precision == doctest::Approx(1.0));
        CHECK(rep.recall == doctest::Approx(1.0));
        CHECK(rep.f_measure == doctest::Approx(1.0));
        CHECK(rep.zero_gt == false);
    }
    SUBCASE("empty mask against nonempty ground truth is all zeros") {
        auto m = mask_from_rects(16, 12, {});
        auto rep = eval_pixelwise({m}, {{Rect{2, 2, 4, 3}}});
        CHECK(rep.precision == doctest::Approx(0.0));
        CHECK(rep.recall == doctest::Approx(0.0));
        CHECK(rep.f_measure == doctest::Approx(0.0));
    }
    SUBCASE("TP=3, FP=1, FN=2 gives P=0.75, R=0.6, F=2/3") {
        // gt box holds 5 pixels; the mask marks 3 of them plus 1 outside.
        auto m = mask_from_rects(12, 6, {{0, 0, 3, 1}, {8, 4, 1, 1}});
        auto rep = eval_pixelwise({m}, {{Rect{0, 0, 5, 1}}});
        CHECK(rep.precision == doctest::Approx(0.75).epsilon(1e-12));
        CHECK(rep.recall == doctest::Approx(0.6).epsilon(1e-12));
        CHECK(rep.f_measure == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    }
    SUBCASE("frame averaging") {
        std::vector<Rect> boxes = {{2, 2, 4, 3}};
        auto good = mask_from_rects(16, 12, boxes);
        auto empty = mask_from_rects(16, 12, {});
        auto rep = eval_pixelwise({good, empty}, {boxes, boxes});
        CHECK(rep.precision == doctest::Approx(0.5));
        CHECK(rep.recall == doctest::Approx(0.5));
    }
    SUBCASE("empty ground truth: recall 1 with the zero-gt flag") {
        auto empty = mask_from_rects(16, 12, {});
        auto rep = eval_pixelwise({empty}, {{}});
        CHECK(rep.precision == doctest::Approx(1.0));  // no positives claimed
        CHECK(rep.recall == doctest::Approx(1.0));
        CHECK(rep.zero_gt == true);

        auto spurious = mask_from_rects(16, 12, {{1, 1, 2, 2}});
        auto rep2 = eval_pixelwise({spurious}, {{}});
        CHECK(rep2.precision == doctest::Approx(0.0));
        CHECK(rep2.recall == doctest::Approx(1.0));
        CHECK(rep2.zero_gt == true);
    }
    SUBCASE("frame count mismatch throws") {
        auto m = mask_from_rects(8, 8, {});
        CHECK_THROWS_AS(eval_pixelwise({m}, {{}, {}}), contract_error);
        CHECK_THROWS_AS(eval_pixelwise({}, {}), contract_error);
    }
}

TEST_CASE("object-wise detection scores") {
    SUBCASE("one aligned blob per box") {
        std::vector<Rect> boxes = {{2, 2, 4, 4}, {10, 6, 3, 3}};
        auto m = mask_from_rects(20, 14, boxes);
        auto rep = eval_objectwise({m}, {boxes}, 0.5);
        CHECK(rep.precision == doctest::Approx(1.0));
        CHECK(rep.recall == doctest::Approx(1.0));
    }
    SUBCASE("a merged blob spanning two boxes matches both") {
        // One 20x5 blob; two 8x5 gt boxes fully inside it.
        auto m = mask_from_rects(24, 8, {{0, 0, 20, 5}});
        REQUIRE(m.blobs.size() == 1);
        std::vector<Rect> boxes = {{0, 0, 8, 5}, {12, 0, 8, 5}};
        auto rep = eval_objectwise({m}, {boxes}, 0.5);
        CHECK(rep.precision == doctest::Approx(1.0));
        CHECK(rep.recall == doctest::Approx(1.0));
    }
    SUBCASE("fragmented blobs inside one box all match") {
        auto m = mask_from_rects(24, 8, {{2, 2, 3, 3}, {8, 2, 3, 3}});
        REQUIRE(m.blobs.size() == 2);
        std::vector<Rect> boxes = {{1, 1, 12, 6}};
        auto rep = eval_objectwise({m}, {boxes}, 0.5);
        CHECK(rep.precision == doctest::Approx(1.0));
        CHECK(rep.recall == doctest::Approx(1.0));
    }
    SUBCASE("spurious blob on empty ground truth") {
        auto m = mask_from_rects(16, 8, {{1, 1, 3, 3}});
        auto rep = eval_objectwise({m}, {{}}, 0.5);
        CHECK(rep.precision == doctest::Approx(0.0));
        CHECK(rep.recall == doctest::Approx(1.0));
        CHECK(rep.zero_gt == true);
    }
    SUBCASE("no blobs at all: precision defaults to 1") {
        auto m = mask_from_rects(16, 8, {});
        auto rep = eval_objectwise({m}, {{Rect{1, 1, 3, 3}}}, 0.5);
        CHECK(rep.precision == doctest::Approx(1.0));
        CHECK(rep.recall == doctest::Approx(0.0));
    }
    SUBCASE("sub-threshold overlap does not match") {
        // Blob 10x4 at (0,0); box 10x4 at (8,0): intersection 2x4 = 8 px,
        // 20% of either side, below tau = 0.5.
        auto m = mask_from_rects(24, 8, {{0, 0, 10, 4}});
        std::vector<Rect> boxes = {{8, 0, 10, 4}};
        auto rep = eval_objectwise({m}, {boxes}, 0.5);
        CHECK(rep.precision == doctest::Approx(0.0));
        CHECK(rep.recall == doctest::Approx(0.0));
        // The same fixture matches when tau drops to 0.2.
        auto rep2 = eval_objectwise({m}, {boxes}, 0.2);
        CHECK(rep2.precision == doctest::Approx(1.0));
        CHECK(rep2.recall == doctest::Approx(1.0));
    }
    SUBCASE("tau outside (0,1] is rejected") {
        auto m = mask_from_rects(8, 8, {});
        CHECK_THROWS_AS(eval_objectwise({m}, {{}}, 0.0), contract_error);
        CHECK_THROWS_AS(eval_objectwise({m}, {{}}, 1.5), contract_error);
        CHECK_NOTHROW(eval_objectwise({m}, {{}}, 1.0));
    }
}

TEST_CASE("detection ground-truth file parsing") {
    const std::string path = "/tmp/spct_det_gt_test.txt";
    write_file(path, "1,2,3,4;5,6,7,8\n\n9,9,2,2\n");
    auto gt = load_det_gt(path);
    REQUIRE(gt.size() == 3);
    REQUIRE(gt[0].size() == 2);
    CHECK(gt[0][0] == Rect{1, 2, 3, 4});
    CHECK(gt[0][1] == Rect{5, 6, 7, 8});
    CHECK(gt[1].empty());
    REQUIRE(gt[2].size() == 1);
    CHECK(gt[2][0] == Rect{9, 9, 2, 2});

    write_file(path, "1,2,3\n");
    CHECK_THROWS_AS(load_det_gt(path), io_error);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_det_gt("/tmp/spct_no_such_det_gt.txt"), io_error);
}
