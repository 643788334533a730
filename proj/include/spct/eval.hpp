#pragma once

// Evaluation harnesses: reset-protocol tracking accuracy/robustness,
// pixel-wise and object-wise detection scores.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spct/imagecore.hpp"
#include "spct/motion.hpp"
#include "spct/tracker.hpp"

namespace spct {

// Intersection-over-union of two boxes.
double overlap(const Rect& a, const Rect& b);

struct GtEntry {
    bool occluded = false;
    Rect box;
};

// Ground-truth file: one line per frame, "x,y,w,h" or the word "occluded".
std::vector<GtEntry> load_track_gt(const std::string& path);

// Produces tracker output from frame `start` (initialized at the given
// box) to the end of the sequence.
using SegmentTracker =
    std::function<Tracklet(std::size_t start, const Rect& init)>;

struct ResetEvalReport {
    double accuracy = 0;   // mean overlap over evaluated frames
    int failures = 0;
    double mfr = 0;        // failures / total frames
    int total_frames = 0;
    int evaluated_frames = 0;
};

// Reset protocol: a failure is overlap == 0 on a non-occluded frame; the
// tracker is re-initialized from ground truth five frames later (the five
// frames after the failure are skipped and excluded from accuracy, as are
// occluded frames and each re-initialization frame itself).
ResetEvalReport eval_reset(const SegmentTracker& tracker, const std::vector<GtEntry>& gt);

struct DetEvalReport {
    double precision = 0, recall = 0, f_measure = 0;
    bool zero_gt = false;  // some frame had no ground truth; its recall was set to 1
};

// Pixel-wise precision/recall/F against per-frame ground-truth boxes
// (union of boxes = positive region), averaged over frames.
DetEvalReport eval_pixelwise(const std::vector<MotionMask>& masks,
                             const std::vector<std::vector<Rect>>& gt);

// Object-wise: a blob matches a box (and vice versa) when the overlap
// covers >= tau of either one, so merges and fragmentation still count.
// Precision = matched blobs / blobs, recall = matched boxes / boxes,
// averaged over frames.
DetEvalReport eval_objectwise(const std::vector<MotionMask>& masks,
                              const std::vector<std::vector<Rect>>& gt,
                              double tau = 0.5);

// Detection ground truth: one line per frame, semicolon-separated
// "x,y,w,h" boxes; an empty line means no objects.
std::vector<std::vector<Rect>> load_det_gt(const std::string& path);

}  // namespace spct
