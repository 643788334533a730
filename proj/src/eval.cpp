#include "spct/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace spct {

double overlap(const Rect& a, const Rect& b) {
    long long inter = intersect(a, b).area();
    long long uni = a.area() + b.area() - inter;
    if (uni <= 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

Rect parse_box(const std::string& text, const std::string& path) {
    std::istringstream ls(text);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ls, field, ',')) fields.push_back(trim(field));
    if (fields.size() != 4)
        throw io_error("ground truth '" + path + "': bad box '" + text + "'");
    try {
        return Rect{std::stoi(fields[0]), std::stoi(fields[1]), std::stoi(fields[2]),
                    std::stoi(fields[3])};
    } catch (const std::exception&) {
        throw io_error("ground truth '" + path + "': bad box '" + text + "'");
    }
}

}  // namespace

std::vector<GtEntry> load_track_gt(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("load_track_gt: cannot open '" + path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(trim(line));
    while (!lines.empty() && lines.back().empty()) lines.pop_back();

    std::vector<GtEntry> gt;
    for (const std::string& l : lines) {
        if (l.empty()) throw io_error("load_track_gt: blank line in '" + path + "'");
        GtEntry e;
        if (l == "occluded")
            e.occluded = true;
        else
            e.box = parse_box(l, path);
        gt.push_back(e);
    }
    return gt;
}

ResetEvalReport eval_reset(const SegmentTracker& tracker, const std::vector<GtEntry>& gt) {
    require(!gt.empty(), "eval_reset: empty ground truth");
    const std::size_t n = gt.size();

    ResetEvalReport rep;
    rep.total_frames = static_cast<int>(n);

    std::size_t init = 0;
    while (init < n && gt[init].occluded) ++init;
    require(init < n, "eval_reset: every frame is occluded");

    double sum = 0.0;
    while (init < n) {
        Tracklet t;
        try {
            t = tracker(init, gt[init].box);
        } catch (const contract_error& e) {
            throw contract_error(std::string(e.what()) + " [eval_reset: tracker run starting at frame " +
                                 std::to_string(init) + "]");
        } catch (const io_error& e) {
            throw io_error(std::string(e.what()) + " [eval_reset: tracker run starting at frame " +
                           std::to_string(init) + "]");
        } catch (const std::exception& e) {
            throw std::runtime_error(std::string(e.what()) +
                                     " [eval_reset: tracker run starting at frame " +
                                     std::to_string(init) + "]");
        }
        require(!t.empty() && t.front().frame == static_cast<int>(init),
                "eval_reset: tracker output must start at the init frame");

        bool failed = false;
        std::size_t fail_frame = 0;
        for (std::size_t i = 1; i < t.size(); ++i) {
            std::size_t frame = static_cast<std::size_t>(t[i].frame);
            if (frame >= n) break;
            if (gt[frame].occluded) continue;
            double o = overlap(t[i].bbox, gt[frame].box);
            if (o == 0.0) {
                ++rep.failures;
                failed = true;
                fail_frame = frame;
                break;
            }
            sum += o;
            ++rep.evaluated_frames;
        }
        if (!failed) break;

        // Five skipped frames, then re-initialize from ground truth
        // (advancing past occluded frames).
        init = fail_frame + 5;
        while (init < n && gt[init].occluded) ++init;
    }

    rep.accuracy = rep.evaluated_frames > 0 ? sum / rep.evaluated_frames : 0.0;
    rep.mfr = static_cast<double>(rep.failures) / static_cast<double>(n);
    return rep;
}

namespace {

void check_masks(const std::vector<MotionMask>& masks,
                 const std::vector<std::vector<Rect>>& gt, const char* who) {
    require(!masks.empty(), std::string(who) + ": no frames");
    require(masks.size() == gt.size(), std::string(who) + ": mask/gt frame count mismatch");
    for (const MotionMask& m : masks)
        require(m.width > 0 && m.height > 0, std::string(who) + ": empty mask");
}

double f_measure(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

}  // namespace

DetEvalReport eval_pixelwise(const std::vector<MotionMask>& masks,
                             const std::vector<std::vector<Rect>>& gt) {
    check_masks(masks, gt, "eval_pixelwise");
    DetEvalReport rep;
    double sp = 0, sr = 0, sf = 0;
    for (std::size_t f = 0; f < masks.size(); ++f) {
        const MotionMask& m = masks[f];
        long long tp = 0, fp = 0, fn = 0;
        for (int y = 0; y < m.height; ++y)
            for (int x = 0; x < m.width; ++x) {
                bool pos = false;
                for (const Rect& b : gt[f])
                    if (b.contains(x, y)) {
                        pos = true;
                        break;
                    }
                if (m.at(x, y)) {
                    (pos ? tp : fp) += 1;
                } else if (pos) {
                    ++fn;
                }
            }
        double p, r;
        if (tp + fp > 0)
            p = static_cast<double>(tp) / static_cast<double>(tp + fp);
        else
            p = (tp + fn == 0) ? 1.0 : 0.0;
        if (tp + fn > 0) {
            r = static_cast<double>(tp) / static_cast<double>(tp + fn);
        } else {
            r = 1.0;
            rep.zero_gt = true;
        }
        sp += p;
        sr += r;
        sf += f_measure(p, r);
    }
    double n = static_cast<double>(masks.size());
    rep.precision = sp / n;
    rep.recall = sr / n;
    rep.f_measure = sf / n;
    return rep;
}

DetEvalReport eval_objectwise(const std::vector<MotionMask>& masks,
                              const std::vector<std::vector<Rect>>& gt, double tau) {
    check_masks(masks, gt, "eval_objectwise");
    require(tau > 0.0 && tau <= 1.0, "eval_objectwise: tau must be in (0,1]");
    DetEvalReport rep;
    double sp = 0, sr = 0, sf = 0;
    for (std::size_t f = 0; f < masks.size(); ++f) {
        const MotionMask& m = masks[f];
        const std::vector<Rect>& boxes = gt[f];

        // Pixel-accurate intersection of every blob with every box.
        std::vector<std::vector<long long>> inter(
            m.blobs.size(), std::vector<long long>(boxes.size(), 0));
        if (!m.blobs.empty() && !boxes.empty()) {
            std::vector<int> blob_index(m.blobs.size() + 1, -1);
            for (std::size_t i = 0; i < m.blobs.size(); ++i)
                blob_index[static_cast<std::size_t>(m.blobs[i].id)] = static_cast<int>(i);
            for (std::size_t j = 0; j < boxes.size(); ++j) {
                Rect b = intersect(boxes[j], Rect{0, 0, m.width, m.height});
                for (int y = b.y; y < b.bottom(); ++y)
                    for (int x = b.x; x < b.right(); ++x) {
                        std::int32_t id = m.labels[static_cast<std::size_t>(y) * m.width + x];
                        if (id > 0) inter[static_cast<std::size_t>(blob_index[id])][j] += 1;
                    }
            }
        }

        std::vector<bool> blob_hit(m.blobs.size(), false), box_hit(boxes.size(), false);
        for (std::size_t i = 0; i < m.blobs.size(); ++i)
            for (std::size_t j = 0; j < boxes.size(); ++j) {
                double ov = static_cast<double>(inter[i][j]);
                bool match = (m.blobs[i].area > 0 && ov / m.blobs[i].area >= tau) ||
                             (boxes[j].area() > 0 && ov / boxes[j].area() >= tau);
                if (match) {
                    blob_hit[i] = true;
                    box_hit[j] = true;
                }
            }

        double p = m.blobs.empty()
                       ? 1.0
                       : static_cast<double>(std::count(blob_hit.begin(), blob_hit.end(), true)) /
                             static_cast<double>(m.blobs.size());
        double r;
        if (boxes.empty()) {
            r = 1.0;
            rep.zero_gt = true;
        } else {
            r = static_cast<double>(std::count(box_hit.begin(), box_hit.end(), true)) /
                static_cast<double>(boxes.size());
        }
        sp += p;
        sr += r;
        sf += f_measure(p, r);
    }
    double n = static_cast<double>(masks.size());
    rep.precision = sp / n;
    rep.recall = sr / n;
    rep.f_measure = sf / n;
    return rep;
}

std::vector<std::vector<Rect>> load_det_gt(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("load_det_gt: cannot open '" + path + "'");
    std::vector<std::vector<Rect>> gt;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<Rect> boxes;
        std::string t = trim(line);
        if (!t.empty()) {
            std::istringstream ls(t);
            std::string part;
            while (std::getline(ls, part, ';')) {
                part = trim(part);
                if (!part.empty()) boxes.push_back(parse_box(part, path));
            }
        }
        gt.push_back(std::move(boxes));
    }
    return gt;
}

}  // namespace spct
