#include <cmath>
#include <random>

#include "doctest.h"
#include "spct/likelihood.hpp"
#include "test_util.hpp"

using namespace spct;
using namespace spct::testutil;

namespace {

ScalarMap to_map(const GrayImage& img) { return to_scalar(img); }

// Direct double-loop normalized cross correlation at one placement.
double ncc_direct(const ScalarMap& search, const ScalarMap& tmpl, int u, int v) {
    const int tw = tmpl.width, th = tmpl.height;
    double fm = 0, tm = 0;
    for (int y = 0; y < th; ++y)
        for (int x = 0; x < tw; ++x) {
            fm += search.at(u + x, v + y);
            tm += tmpl.at(x, y);
        }
    fm /= tw * th;
    tm /= tw * th;
    double num = 0, fv = 0, tv = 0;
    for (int y = 0; y < th; ++y)
        for (int x = 0; x < tw; ++x) {
            double a = search.at(u + x, v + y) - fm, b = tmpl.at(x, y) - tm;
            num += a * b;
            fv += a * a;
            tv += b * b;
        }
    if (fv <= 0 || tv <= 0) return 0.0;
    return num / std::sqrt(fv * tv);
}

}  // namespace

TEST_CASE("ncc: self-match, flat search, direct oracle, affine invariance") {
    GrayImage search = smooth_image(32, 28, 11);
    Rect crop{9, 7, 8, 6};
    GrayImage tmpl(crop.w, crop.h);
    for (int y = 0; y < crop.h; ++y)
        for (int x = 0; x < crop.w; ++x) tmpl.at(x, y) = search.at(crop.x + x, crop.y + y);

    LikelihoodMap map = ncc_map(search, tmpl);
    REQUIRE(map.width == 32);
    REQUIRE(map.height == 28);
    int cx = crop.x + (crop.w - 1) / 2, cy = crop.y + (crop.h - 1) / 2;
    CHECK(map.at(cx, cy) == doctest::Approx(1.0).epsilon(1e-9));
    for (double v : map.values) {
        CHECK(v >= -1e-12);
        CHECK(v <= 1.0 + 1e-12);
    }

    GrayImage flat(20, 20, 77);
    LikelihoodMap fm = ncc_map(flat, tmpl);
    for (double v : fm.values) CHECK(v == 0.5);

    // direct-loop oracle over every valid placement
    ScalarMap ss = to_map(search), ts = to_map(tmpl);
    LikelihoodMap m2 = ncc_map(ss, ts);
    for (int v = 0; v + crop.h <= 28; ++v)
        for (int u = 0; u + crop.w <= 32; ++u) {
            double gamma = ncc_direct(ss, ts, u, v);
            double want = (gamma + 1.0) / 2.0;
            CHECK(m2.at(u + (crop.w - 1) / 2, v + (crop.h - 1) / 2) ==
                  doctest::Approx(want).epsilon(1e-9));
        }

    // affine template changes leave the map unchanged
    ScalarMap taff = ts;
    for (double& v : taff.data) v = 3.0 * v + 17.0;
    LikelihoodMap m3 = ncc_map(ss, taff);
    for (std::size_t i = 0; i < m2.values.size(); ++i)
        CHECK(m3.values[i] == doctest::Approx(m2.values[i]).epsilon(1e-9));

    GrayImage big(50, 50, 0);
    CHECK_THROWS_AS((void)ncc_map(tmpl, big), contract_error);
}

TEST_CASE("color model: disjoint fg/bg, conservation, empty ring") {
    ColorImage img(20, 20);
    Rect fg{6, 6, 8, 8};
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 20; ++x) {
            std::size_t i = img.idx(x, y);
            if (fg.contains(x, y))
                img.r[i] = 250;  // red foreground
            else
                img.b[i] = 250;  // blue background
        }
    ColorModel m = model_fg_bg(img, fg, 3);
    std::uint64_t fg_sum = 0, bg_sum = 0;
    int fg_cells = 0, bg_cells = 0;
    for (int i = 0; i < 32768; ++i) {
        fg_sum += m.fg[i];
        bg_sum += m.bg[i];
        fg_cells += m.fg[i] ? 1 : 0;
        bg_cells += m.bg[i] ? 1 : 0;
        CHECK((m.fg[i] == 0 || m.bg[i] == 0));  // disjoint
    }
    CHECK(fg_sum == m.fg_area);
    CHECK(bg_sum == m.bg_area);
    CHECK(m.fg_area == 64);
    CHECK(m.bg_area == 14 * 14 - 64);
    CHECK(fg_cells == 1);
    CHECK(bg_cells == 1);

    CHECK_THROWS_AS((void)model_fg_bg(img, Rect{0, 0, 20, 20}, 3), contract_error);

    LikelihoodMap ratio = color_ratio_map(img, m);
    CHECK(ratio.at(8, 8) == doctest::Approx(1.0));
    CHECK(ratio.at(1, 1) == doctest::Approx(0.0));
}

TEST_CASE("color ratio arithmetic and unseen-bin convention") {
    ColorModel m;
    m.fg.assign(32768, 0);
    m.bg.assign(32768, 0);
    int bin = ColorModel::bin_index(100, 100, 100);
    m.fg[static_cast<std::size_t>(bin)] = 8;
    m.bg[static_cast<std::size_t>(bin)] = 2;
    int bg_only = ColorModel::bin_index(200, 10, 10);
    m.bg[static_cast<std::size_t>(bg_only)] = 5;
    m.fg_area = 8;
    m.bg_area = 7;

    ColorImage img(3, 1);
    auto set = [&](int x, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        img.r[static_cast<std::size_t>(x)] = r;
        img.g[static_cast<std::size_t>(x)] = g;
        img.b[static_cast<std::size_t>(x)] = b;
    };
    set(0, 100, 100, 100);
    set(1, 200, 10, 10);
    set(2, 30, 240, 30);  // unseen
    LikelihoodMap map = color_ratio_map(img, m);
    CHECK(map.at(0, 0) == doctest::Approx(0.8));
    CHECK(map.at(1, 0) == doctest::Approx(0.0));
    CHECK(map.at(2, 0) == doctest::Approx(0.5));
}

TEST_CASE("intensity fg/bg ratio behaves like the color path") {
    GrayImage img(16, 16, 10);
    Rect fg{5, 5, 6, 6};
    for (int y = fg.y; y < fg.bottom(); ++y)
        for (int x = fg.x; x < fg.right(); ++x) img.at(x, y) = 240;
    IntensityModel m = model_fg_bg_gray(img, fg, 3);
    LikelihoodMap ratio = intensity_ratio_map(img, m);
    CHECK(ratio.at(7, 7) == doctest::Approx(1.0));
    CHECK(ratio.at(3, 3) == doctest::Approx(0.0));
}

TEST_CASE("hist distance: identity, disjoint, hand fixture, brute spot checks") {
    // window == template histogram -> likelihood 1
    GrayImage img(12, 10);
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> d(0, 255);
    for (auto& p : img.data) p = static_cast<std::uint8_t>(d(rng));
    const int bins = 8;
    BinMap bm = quantize(img, bins);
    IntegralHistogramTensor t = build_integral_histogram(bm);

    // template = exact histogram of the centered 5x4 window
    Rect win{4, 3, 5, 4};
    std::vector<double> th(bins, 0.0);
    for (int y = win.y; y < win.bottom(); ++y)
        for (int x = win.x; x < win.right(); ++x) th[bm.at(x, y)] += 1.0;
    for (double& v : th) v /= win.area();
    LikelihoodMap map = hist_distance_map(t, th, win.w, win.h, 1.0);
    CHECK(map.at(win.x + 2, win.y + 1) == doctest::Approx(1.0).epsilon(1e-12));

    // disjoint supports, p = 1 -> likelihood 0
    GrayImage dark(9, 9, 10);
    IntegralHistogramTensor td = build_integral_histogram(quantize(dark, 4));
    std::vector<double> bright(4, 0.0);
    bright[3] = 1.0;
    LikelihoodMap zero = hist_distance_map(td, bright, 3, 3, 1.0);
    for (double v : zero.values) CHECK(v == doctest::Approx(0.0));

    // hand-computed fixture: counts [1,2,3]/6 vs [2,2,1]/5, p=1 -> 0.7
    GrayImage six(2, 3);
    six.at(0, 0) = 0;
    six.at(1, 0) = 100;
    six.at(0, 1) = 100;
    six.at(1, 1) = 200;
    six.at(0, 2) = 200;
    six.at(1, 2) = 200;
    IntegralHistogramTensor t6 = build_integral_histogram(quantize(six, 3));
    std::vector<double> t225{2.0 / 5, 2.0 / 5, 1.0 / 5};
    LikelihoodMap h6 = hist_distance_map(t6, t225, 2, 3, 1.0);
    CHECK(h6.at(0, 1) == doctest::Approx(0.7).epsilon(1e-12));

    // random spot checks against per-window recomputation, p = 2
    GrayImage spot = noise_image(30, 22, 19);
    BinMap sb = quantize(spot, bins);
    IntegralHistogramTensor st = build_integral_histogram(sb);
    std::vector<double> tmpl(bins, 1.0 / bins);
    LikelihoodMap sm = hist_distance_map(st, tmpl, 7, 5, 2.0);
    std::uniform_int_distribution<int> ux(0, 30 - 7), uy(0, 22 - 5);
    for (int trial = 0; trial < 40; ++trial) {
        int x0 = ux(rng), y0 = uy(rng);
        std::vector<double> h(bins, 0.0);
        for (int y = y0; y < y0 + 5; ++y)
            for (int x = x0; x < x0 + 7; ++x) h[sb.at(x, y)] += 1.0;
        double dm = 0;
        for (int k = 0; k < bins; ++k) {
            double diff = std::abs(h[k] / 35.0 - tmpl[k]);
            dm += diff * diff;
        }
        double want = std::max(0.0, 1.0 - std::sqrt(dm) / std::sqrt(2.0));
        CHECK(sm.at(x0 + 3, y0 + 2) == doctest::Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("phog kernel: self-match, arithmetic, disjoint, mismatch") {
    const int bins = 5;
    auto unit_levels = [&](int levels, int hot) {
        PHoG p;
        p.levels = levels;
        p.bins = bins;
        p.descriptor.assign(phog_length(levels, bins), 0.0);
        std::size_t off = 0;
        for (int l = 0; l <= levels; ++l) {
            int cells = (1 << l) * (1 << l);
            // put the level's unit mass in one cell's `hot` bin
            p.descriptor[off + static_cast<std::size_t>(hot)] = 1.0;
            off += static_cast<std::size_t>(cells) * bins;
        }
        return p;
    };

    PHoG x = unit_levels(2, 0);
    CHECK(phog_kernel(x, x) == doctest::Approx(1.0).epsilon(1e-12));

    // L=1, intersections m at both levels -> kappa = m
    double m = 0.3;
    PHoG a, b;
    a.levels = b.levels = 1;
    a.bins = b.bins = bins;
    a.descriptor.assign(phog_length(1, bins), 0.0);
    b.descriptor.assign(phog_length(1, bins), 0.0);
    // level 0: a = [m, 1-m, 0..], b = [m, 0, 1-m, 0..] -> intersection m
    a.descriptor[0] = m;
    a.descriptor[1] = 1 - m;
    b.descriptor[0] = m;
    b.descriptor[2] = 1 - m;
    // level 1 (4 cells): same arrangement inside the first cell
    a.descriptor[bins + 0] = m;
    a.descriptor[bins + 1] = 1 - m;
    b.descriptor[bins + 0] = m;
    b.descriptor[bins + 2] = 1 - m;
    CHECK(phog_kernel(a, b) == doctest::Approx(m).epsilon(1e-12));
    CHECK(phog_kernel(a, b) == doctest::Approx(phog_kernel(b, a)).epsilon(1e-15));

    PHoG dx = unit_levels(2, 0), dy = unit_levels(2, 1);
    CHECK(phog_kernel(dx, dy) == doctest::Approx(0.0));

    PHoG other = unit_levels(1, 0);
    CHECK_THROWS_AS((void)phog_kernel(x, other), contract_error);
}

TEST_CASE("phog kernel dominance of self-match") {
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int bins = 4, levels = 1;
    auto random_unit = [&]() {
        PHoG p;
        p.levels = levels;
        p.bins = bins;
        p.descriptor.assign(phog_length(levels, bins), 0.0);
        std::size_t off = 0;
        for (int l = 0; l <= levels; ++l) {
            int n = (1 << l) * (1 << l) * bins;
            double sum = 0;
            for (int i = 0; i < n; ++i) {
                p.descriptor[off + i] = u(rng);
                sum += p.descriptor[off + i];
            }
            for (int i = 0; i < n; ++i) p.descriptor[off + i] /= sum;
            off += static_cast<std::size_t>(n);
        }
        return p;
    };
    for (int trial = 0; trial < 50; ++trial) {
        PHoG x = random_unit(), y = random_unit();
        double xx = phog_kernel(x, x), xy = phog_kernel(x, y), yx = phog_kernel(y, x);
        CHECK(xx == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(xy == doctest::Approx(yx).epsilon(1e-12));
        CHECK(xx >= xy - 1e-12);
    }
}

TEST_CASE("fuse_maps: identity, convexity, arithmetic, errors") {
    LikelihoodMap a;
    a.width = 4;
    a.height = 3;
    a.values.assign(12, 0.2);
    LikelihoodMap b = a;
    for (double& v : b.values) v = 0.8;

    LikelihoodMap one = fuse_maps({a});
    CHECK(one.values == a.values);

    LikelihoodMap same = fuse_maps({a, a}, {0.3, 0.7});
    for (double v : same.values) CHECK(v == doctest::Approx(0.2));

    LikelihoodMap mid = fuse_maps({a, b});
    for (double v : mid.values) CHECK(v == doctest::Approx(0.5));

    LikelihoodMap c;
    c.width = 5;
    c.height = 3;
    c.values.assign(15, 0.1);
    CHECK_THROWS_AS((void)fuse_maps({a, c}), contract_error);
    CHECK_THROWS_AS((void)fuse_maps({}), contract_error);
    CHECK_THROWS_AS((void)fuse_maps({a, b}, {1.0}), contract_error);
}

namespace {

LikelihoodMap bump_map(int w, int h, std::vector<std::pair<Rect, double>> bumps) {
    LikelihoodMap m;
    m.width = w;
    m.height = h;
    m.values.assign(static_cast<std::size_t>(w) * h, 0.0);
    for (const auto& [r, v] : bumps)
        for (int y = r.y; y < r.bottom(); ++y)
            for (int x = r.x; x < r.right(); ++x)
                m.at(x, y) = std::max(m.at(x, y), v * (1.0 - 0.15 * (std::abs(x - (r.x + r.w / 2)) +
                                                                     std::abs(y - (r.y + r.h / 2)))));
    return m;
}

}  // namespace

TEST_CASE("peaks and rank scores") {
    // one dominant bump inside gt
    LikelihoodMap m = bump_map(30, 24, {{Rect{10, 8, 5, 5}, 1.0}});
    std::vector<Peak> peaks = find_peaks(m);
    REQUIRE(!peaks.empty());
    CHECK(peaks.front().rank == 1);
    for (std::size_t i = 1; i < peaks.size(); ++i)
        CHECK(peaks[i - 1].height >= peaks[i].height);
    CHECK(score_map(m, Rect{9, 7, 8, 8}) == 1);

    // two bumps, higher one outside gt -> rank 2
    LikelihoodMap two = bump_map(40, 30, {{Rect{5, 5, 5, 5}, 1.0}, {Rect{28, 20, 5, 5}, 0.6}});
    CHECK(score_map(two, Rect{26, 18, 9, 9}) == 2);

    // no peak inside gt -> k + 1
    std::vector<Peak> tp = find_peaks(two);
    CHECK(score_map(two, Rect{20, 2, 4, 4}) == static_cast<int>(tp.size()) + 1);

    // positive scaling leaves the score unchanged
    LikelihoodMap scaled = two;
    for (double& v : scaled.values) v *= 0.25;
    CHECK(score_map(scaled, Rect{26, 18, 9, 9}) == 2);

    CHECK_THROWS_AS((void)score_map(two, Rect{38, 28, 5, 5}), contract_error);
}

TEST_CASE("subset_score averages non-occluded frames") {
    std::vector<int> scores{1, 5, 2, 9};
    std::vector<bool> occ{false, true, false, false};
    CHECK(subset_score(scores, occ) == doctest::Approx(4.0));
    CHECK_THROWS_AS((void)subset_score(scores, std::vector<bool>{true, true, true, true}),
                    contract_error);
}
