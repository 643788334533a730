#pragma once

// Small fixed-size worker pool used by the tensor build schedules. Work is
// always split into `threads` contiguous chunks so the partitioning (and
// therefore every write) is identical for any execution interleaving.

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace spct {

class WorkerPool {
public:
    // threads >= 1; `threads - 1` workers are spawned, the calling thread
    // always executes chunk 0.
    explicit WorkerPool(int threads) : threads_(threads < 1 ? 1 : threads) {
        for (int slot = 1; slot < threads_; ++slot)
            workers_.emplace_back([this, slot] { worker_loop(slot); });
    }

    ~WorkerPool() {
        {
            std::lock_guard lk(mu_);
            stop_ = true;
        }
        cv_task_.notify_all();
        for (auto& w : workers_) w.join();
    }

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    int threads() const { return threads_; }

    // Blocks until fn(begin, end) has covered [0, n) in `threads`
    // contiguous chunks (chunk i handled by thread slot i).
    void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
        if (n == 0) return;
        if (threads_ == 1) {
            fn(0, n);
            return;
        }
        {
            std::lock_guard lk(mu_);
            task_n_ = n;
            task_fn_ = &fn;
            pending_ = threads_ - 1;
            ++generation_;
        }
        cv_task_.notify_all();
        run_chunk(0);
        std::unique_lock lk(mu_);
        cv_done_.wait(lk, [this] { return pending_ == 0; });
        task_fn_ = nullptr;
    }

private:
    void run_chunk(int slot) {
        std::size_t lo = task_n_ * slot / threads_;
        std::size_t hi = task_n_ * (slot + 1) / threads_;
        if (lo < hi) (*task_fn_)(lo, hi);
    }

    void worker_loop(int slot) {
        std::size_t seen = 0;
        for (;;) {
            std::unique_lock lk(mu_);
            cv_task_.wait(lk, [&] { return stop_ || generation_ != seen; });
            if (stop_) return;
            seen = generation_;
            lk.unlock();
            run_chunk(slot);
            lk.lock();
            if (--pending_ == 0) {
                lk.unlock();
                cv_done_.notify_one();
            }
        }
    }

    int threads_;
    std::vector<std::thread> workers_;
    std::mutex mu_;
    std::condition_variable cv_task_, cv_done_;
    std::size_t generation_ = 0;
    int pending_ = 0;
    bool stop_ = false;
    std::size_t task_n_ = 0;
    const std::function<void(std::size_t, std::size_t)>* task_fn_ = nullptr;
};

}  // namespace spct
