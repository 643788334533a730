#pragma once

// Integral histogram tensor: per bin k, a zero-padded (h+1)x(w+1) plane of
// 64-bit prefix counts H(y,x,k) = sum over rows r<y, cols c<x of
// [bin(r,c)==k]. Any axis-aligned region histogram then costs four reads
// per bin. Four construction schedules produce byte-identical tensors; the
// tiled ones are CPU analogues of strip/wavefront GPU kernels.

#include <cstddef>
#include <cstdint>
#include <new>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spct/imagecore.hpp"

namespace spct {

enum class ScanScheduleKind {
    Sequential,         // direct two-term recurrence, one plane at a time
    ScanTransposeScan,  // row prefix per plane, transpose, second row prefix
    CrossWeaveTiled,    // tiled horizontal strips, then tiled vertical strips
    WavefrontTiled,     // anti-diagonal tile waves, carried boundary column
};

const char* to_string(ScanScheduleKind k);
ScanScheduleKind schedule_from_string(const std::string& s);

struct ScanSchedule {
    ScanScheduleKind kind = ScanScheduleKind::Sequential;
    int tile = 32;     // tile edge for the tiled schedules
    int threads = 1;   // worker threads for the parallel schedules
};

namespace detail {
// One-slot recycler for large tensor payloads (definitions in integral.cpp).
void* tensor_block_acquire(std::size_t bytes);
void tensor_block_release(void* p, std::size_t bytes) noexcept;
}  // namespace detail

// Allocator for the tensor payload. Two deviations from std::allocator,
// both aimed at workloads that rebuild equally-sized tensors back to back
// (per-frame pipelines, schedule comparisons): freed blocks above a size
// threshold are kept and handed to the next same-sized request, so rebuilds
// do not re-fault hundreds of megabytes of freshly mapped pages; and
// resize() default-initializes the trivial elements instead of zeroing
// them, because the builders write every cell (padding included) exactly
// once and a 269 MB tensor would otherwise be written twice.
template <class T>
struct TensorAllocator {
    using value_type = T;

    TensorAllocator() noexcept = default;
    template <class U>
    TensorAllocator(const TensorAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) {
        return static_cast<T*>(detail::tensor_block_acquire(n * sizeof(T)));
    }
    void deallocate(T* p, std::size_t n) noexcept {
        detail::tensor_block_release(p, n * sizeof(T));
    }
    template <class U, class... Args>
    void construct(U* p, Args&&... args) {
        if constexpr (sizeof...(Args) == 0)
            ::new (static_cast<void*>(p)) U;
        else
            ::new (static_cast<void*>(p)) U(std::forward<Args>(args)...);
    }
    bool operator==(const TensorAllocator&) const noexcept { return true; }
    bool operator!=(const TensorAllocator&) const noexcept { return false; }
};

using TensorBuffer = std::vector<std::uint64_t, TensorAllocator<std::uint64_t>>;

struct IntegralHistogramTensor {
    int bins = 0;
    int height = 0, width = 0;          // source image dims; planes are (h+1)x(w+1)
    TensorBuffer data;                  // plane-major, then row-major

    std::size_t plane_stride() const {
        return static_cast<std::size_t>(height + 1) * (width + 1);
    }
    std::size_t row_stride() const { return static_cast<std::size_t>(width + 1); }

    std::uint64_t at(int k, int y, int x) const {
        return data[k * plane_stride() + static_cast<std::size_t>(y) * row_stride() + x];
    }
    std::uint64_t* plane(int k) { return data.data() + k * plane_stride(); }
    const std::uint64_t* plane(int k) const { return data.data() + k * plane_stride(); }
};

// Default build budget: refuse tensors whose padded size exceeds this.
inline constexpr std::uint64_t kDefaultMemoryBudget = 2ull << 30;

IntegralHistogramTensor build_integral_histogram(
    const BinMap& bins, const ScanSchedule& schedule = {},
    std::uint64_t memory_budget = kDefaultMemoryBudget);

// Same prefix structure over per-pixel 64-bit weights instead of unit
// counts: plane k accumulates weight(y,x) wherever bin(y,x)==k. All four
// schedules are available and byte-identical here as well.
IntegralHistogramTensor build_weighted_tensor(
    const BinMap& bins, const std::vector<std::uint64_t>& weights,
    const ScanSchedule& schedule = {},
    std::uint64_t memory_budget = kDefaultMemoryBudget);

// Histogram of the pixels inside `r` via the four-corner combination.
std::vector<std::uint64_t> region_histogram(const IntegralHistogramTensor& t, const Rect& r);

// Single-bin variant of the same query.
std::uint64_t region_count(const IntegralHistogramTensor& t, int bin, const Rect& r);

struct ScheduleStats {
    long long wavefront_iterations;  // ceil(w/tile) + ceil(h/tile) - 1
    long long tile_count;            // tiles covering the padded image
    double scan_efficiency;          // 3(n-1) / (n log2 n) for scan length n
};

ScheduleStats schedule_stats(int w, int h, int tile, int scan_len);

struct MemoryEstimate {
    std::uint64_t padded_bytes;  // b * (h+1) * (w+1) * elem_bytes
    std::uint64_t raw_bytes;     // b * h * w * elem_bytes
    bool degenerate;             // any dimension was zero
};

MemoryEstimate estimate_memory(int w, int h, int bins, int elem_bytes);

// Binary dump: magic "IHT1", little-endian u32 bins/h/w/elem_bytes, then
// the planes in storage order as little-endian u64.
void dump_tensor(const IntegralHistogramTensor& t, const std::string& path);
IntegralHistogramTensor load_tensor(const std::string& path);

}  // namespace spct
