#pragma once

// Single-target tracker: multi-channel likelihood fusion (intensity NCC,
// color ratio, spatially weighted histogram match, pyramid HOG kernel),
// a constant-velocity Kalman filter fused in on low confidence, mean-shift
// style centroid refinement, travel-direction learning with ROI
// re-alignment, and running appearance-model updates.

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spct/features.hpp"
#include "spct/imagecore.hpp"
#include "spct/likelihood.hpp"
#include "spct/swih.hpp"

namespace spct {

// ---------------------------------------------------------------- kalman

struct KalmanState {
    Eigen::Vector4d x = Eigen::Vector4d::Zero();  // [cx, cy, vx, vy]
    Eigen::Matrix4d P = Eigen::Matrix4d::Identity();
    bool last_fuse_regularized = false;  // S was singular and got nudged

    static Eigen::Matrix4d transition();        // constant-velocity F
    static Eigen::Matrix<double, 2, 4> observation();
};

inline constexpr double kKalmanProcessNoise = 0.01;  // Q = 0.01 I
inline constexpr double kKalmanInitCov = 1.0;        // P0 = 1.0 I
inline constexpr double kMeasurementBeta = 4.0;      // R = (1/conf) * beta * I
inline constexpr double kConfEpsilon = 1e-3;         // conf floor in R

KalmanState kalman_init(double cx, double cy, double vx = 0.0, double vy = 0.0);

// x <- F x, P <- F P F' + Q.
void kalman_predict(KalmanState& s);

// Measurement update with confidence-scaled R; P <- P - W S W' + Q.
void kalman_fuse(KalmanState& s, double zx, double zy, double conf);

// Search window of extent (model scale x search_factor) centered on the
// predicted position, clamped into the image.
Rect search_window(const KalmanState& s, int tmpl_w, int tmpl_h,
                   double search_factor, int img_w, int img_h);

// -------------------------------------------------------------- camshift

struct CamshiftResult {
    double cx = 0, cy = 0;
    int iterations = 0;
    bool zero_mass = false;  // window mass was zero; center left at init
};

// Iterates the weighted centroid of a (win_w x win_h) window over `map`
// until the displacement drops below delta or max_iter is reached.
CamshiftResult camshift_refine(const LikelihoodMap& map, double cx, double cy,
                               int win_w, int win_h, double delta = 0.5,
                               int max_iter = 20);

// ------------------------------------------------------------- direction

enum class Direction { Unknown, E, N, W, S };
const char* to_string(Direction d);
double direction_angle(Direction d);  // E=0, N=90, W=180, S=270 (degrees)

// ----------------------------------------------------------------- model

enum class TrackSource { features, fused_kf };
const char* to_string(TrackSource s);

struct TrackRecord {
    int frame = 0;
    double cx = 0, cy = 0;
    Rect bbox;
    double conf = 0;
    TrackSource source = TrackSource::features;
};

using Tracklet = std::vector<TrackRecord>;

// Walks back from the newest record until the straight-line displacement
// reaches min_dist; quantizes that displacement to the dominant axis.
// Unknown when the history is exhausted first.
Direction learn_direction(const Tracklet& t, double min_dist);

// Suggested min_dist: twice the larger template extent.
double direction_min_dist(int tmpl_w, int tmpl_h);

// Rotates the ROI content by theta degrees about (cx, cy): inverse warp
// with bilinear sampling, out-of-bounds reads as 0. Exact trig for the
// four compass angles so 0 is a byte-exact identity.
GrayImage align_roi(const GrayImage& roi, double cx, double cy, double theta_deg);

struct TargetModel {
    int w = 0, h = 0;                    // template extent
    ScalarMap tmpl;                      // intensity template (real-valued)
    std::vector<double> swlh;            // spatially weighted intensity histogram
    PHoG phog;
    ColorModel color;                    // counts as real-valued after blending
    std::vector<double> color_fg, color_bg;  // blended color tensors
    bool has_color = false;
    int bins = 16;                       // intensity histogram bins
    int phog_levels = 2, phog_bins = 9;
    Direction dir = Direction::Unknown;
};

// Blend every descriptor: f <- alpha * fresh + (1 - alpha) * old, histogram
// descriptors renormalized. alpha = 0 keeps the model, 1 replaces it.
void update_model(TargetModel& model, const TargetModel& fresh, double alpha);

// ------------------------------------------------------------ track loop

struct TrackConfig {
    double w_ncc = 1.0, w_color = 1.0, w_hist = 1.0, w_phog = 1.0;
    double alpha = 0.1;            // model blending rate
    double conf_tau = 0.4;         // below: fall back to Kalman fusion
    double search_factor = 2.0;    // search window = template * factor
    int bins = 16;                 // intensity histogram bins
    int phog_levels = 2, phog_bins = 9;
    double camshift_delta = 0.5;
    int camshift_max_iter = 20;
    int bg_margin = 8;             // background ring for the color model
    bool use_direction = true;
    bool parallel_channels = false;
};

struct Sequence {
    std::vector<GrayImage> gray;
    std::vector<ColorImage> color;  // empty when the input was grayscale
    bool has_color() const { return !color.empty(); }
    std::size_t size() const { return gray.size(); }
};

TargetModel build_model(const Sequence& seq, std::size_t frame, const Rect& box,
                        const TrackConfig& cfg);

// Runs the full per-frame loop from `start` to the end of the sequence;
// record 0 is the (refined) initialization.
Tracklet track_sequence(const Sequence& seq, std::size_t start, Rect init,
                        const TrackConfig& cfg);

// Tracklet file line: frame,cx,cy,x,y,w,h,conf,source
void save_tracklet(const Tracklet& t, const std::string& path);
Tracklet load_tracklet(const std::string& path);

}  // namespace spct
