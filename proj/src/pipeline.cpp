#include "spct/pipeline.hpp"

#include <chrono>
#include <condition_variable>
#include <deque>
#include <exception>
#include <mutex>
#include <thread>

#include "spct/error.hpp"

namespace spct {

namespace {

using Clock = std::chrono::steady_clock;

struct WindowCache {
    std::deque<std::pair<std::size_t, GrayImage>> frames;  // consecutive, front oldest

    void push(std::size_t idx, GrayImage img) { frames.emplace_back(idx, std::move(img)); }

    std::size_t newest() const { return frames.back().first; }

    // Drop everything no later compute step can reference.
    void trim(std::size_t next_i, int radius) {
        while (!frames.empty() &&
               frames.front().first + static_cast<std::size_t>(radius) < next_i)
            frames.pop_front();
    }

    std::vector<const GrayImage*> view(std::size_t i, int radius, std::size_t n) const {
        std::size_t lo = i >= static_cast<std::size_t>(radius) ? i - radius : 0;
        std::size_t hi = std::min(n - 1, i + static_cast<std::size_t>(radius));
        std::vector<const GrayImage*> ptrs;
        ptrs.reserve(hi - lo + 1);
        std::size_t base = frames.front().first;
        for (std::size_t j = lo; j <= hi; ++j) ptrs.push_back(&frames[j - base].second);
        return ptrs;
    }
};

}  // namespace

PipelineReport run_pipeline(std::size_t n_frames, const PipelineStages& stages, int buffers) {
    require(buffers >= 1, "run_pipeline: buffers must be >= 1");
    require(stages.window_radius >= 0, "run_pipeline: window_radius must be >= 0");
    require(static_cast<bool>(stages.decode) && static_cast<bool>(stages.compute),
            "run_pipeline: decode and compute stages are required");

    const auto t0 = Clock::now();
    PipelineReport rep;
    rep.frames = n_frames;
    if (n_frames == 0) return rep;

    const int r = stages.window_radius;
    WindowCache window;

    auto compute_one = [&](std::size_t i) {
        GrayImage out = stages.compute(i, window.view(i, r, n_frames));
        if (stages.encode) stages.encode(i, out);
        window.trim(i + 1, r);
    };

    if (buffers == 1) {
        std::size_t next_decode = 0;
        for (std::size_t i = 0; i < n_frames; ++i) {
            std::size_t need = std::min(n_frames - 1, i + static_cast<std::size_t>(r));
            while (next_decode <= need) {
                window.push(next_decode, stages.decode(next_decode));
                ++next_decode;
            }
            compute_one(i);
        }
    } else {
        const std::size_t cap = static_cast<std::size_t>(buffers) - 1;  // prefetch depth
        std::mutex mu;
        std::condition_variable cv_space, cv_data;
        std::deque<std::pair<std::size_t, GrayImage>> queue;
        bool abort = false, decode_done = false;
        std::exception_ptr decode_err;

        std::thread decoder([&] {
            try {
                for (std::size_t j = 0; j < n_frames; ++j) {
                    {
                        std::unique_lock lk(mu);
                        cv_space.wait(lk, [&] { return queue.size() < cap || abort; });
                        if (abort) return;
                    }
                    GrayImage img = stages.decode(j);
                    {
                        std::lock_guard lk(mu);
                        queue.emplace_back(j, std::move(img));
                    }
                    cv_data.notify_one();
                }
                {
                    std::lock_guard lk(mu);
                    decode_done = true;
                }
                cv_data.notify_one();
            } catch (...) {
                {
                    std::lock_guard lk(mu);
                    decode_err = std::current_exception();
                    decode_done = true;
                }
                cv_data.notify_one();
            }
        });

        try {
            for (std::size_t i = 0; i < n_frames; ++i) {
                std::size_t need = std::min(n_frames - 1, i + static_cast<std::size_t>(r));
                while (window.frames.empty() || window.newest() < need) {
                    std::pair<std::size_t, GrayImage> item;
                    {
                        std::unique_lock lk(mu);
                        cv_data.wait(lk, [&] { return !queue.empty() || decode_done; });
                        if (queue.empty()) {
                            // Decoder stopped early: propagate its failure.
                            std::exception_ptr err = decode_err;
                            lk.unlock();
                            decoder.join();
                            if (err) std::rethrow_exception(err);
                            throw io_error("run_pipeline: decoder ended before the last frame");
                        }
                        item = std::move(queue.front());
                        queue.pop_front();
                    }
                    cv_space.notify_one();
                    window.push(item.first, std::move(item.second));
                }
                compute_one(i);
            }
        } catch (...) {
            {
                std::lock_guard lk(mu);
                abort = true;
            }
            cv_space.notify_all();
            if (decoder.joinable()) decoder.join();
            throw;
        }
        decoder.join();
    }

    double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    rep.wall_ms = ms;
    rep.fps = ms > 0.0 ? 1000.0 * static_cast<double>(n_frames) / ms : 0.0;
    return rep;
}

}  // namespace spct
