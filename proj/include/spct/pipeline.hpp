#pragma once

// Double-buffered frame pipeline: a decode thread prefetches into a
// bounded queue while the compute/encode stage consumes frames in order,
// so output is bit-identical to the serial loop for any buffer count.

#include <cstddef>
#include <functional>
#include <vector>

#include "spct/imagecore.hpp"

namespace spct {

struct PipelineStages {
    // Frames [i - window_radius, i + window_radius] are handed to compute;
    // the range is clamped at the sequence ends.
    int window_radius = 0;
    std::function<GrayImage(std::size_t)> decode;
    std::function<GrayImage(std::size_t, const std::vector<const GrayImage*>&)> compute;
    std::function<void(std::size_t, const GrayImage&)> encode;  // optional
};

struct PipelineReport {
    std::size_t frames = 0;
    double wall_ms = 0;
    double fps = 0;
};

// buffers = 1 runs strictly serially; buffers >= 2 lets decode run up to
// (buffers - 1) frames ahead of compute.
PipelineReport run_pipeline(std::size_t n_frames, const PipelineStages& stages, int buffers);

}  // namespace spct
