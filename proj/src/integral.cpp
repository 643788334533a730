#include "spct/integral.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>

#if defined(__SSE2__)
#include <immintrin.h>
#endif

#include "spct/parallel.hpp"

namespace spct {

namespace detail {

namespace {
std::mutex g_block_mutex;
void* g_block = nullptr;
std::size_t g_block_bytes = 0;
// Blocks below this size go straight to the heap; recycling only pays for
// allocations large enough that re-faulting their pages dominates the build.
constexpr std::size_t kRecycleMinBytes = std::size_t{8} << 20;
}  // namespace

void* tensor_block_acquire(std::size_t bytes) {
    if (bytes >= kRecycleMinBytes) {
        std::lock_guard<std::mutex> lock(g_block_mutex);
        if (g_block && g_block_bytes == bytes) {
            void* p = g_block;
            g_block = nullptr;
            g_block_bytes = 0;
            return p;
        }
    }
    return ::operator new(bytes);
}

void tensor_block_release(void* p, std::size_t bytes) noexcept {
    if (bytes >= kRecycleMinBytes) {
        std::lock_guard<std::mutex> lock(g_block_mutex);
        std::swap(p, g_block);
        std::swap(bytes, g_block_bytes);
        // fall through to free the displaced block (if any)
    }
    ::operator delete(p);
}

}  // namespace detail

const char* to_string(ScanScheduleKind k) {
    switch (k) {
        case ScanScheduleKind::Sequential: return "sequential";
        case ScanScheduleKind::ScanTransposeScan: return "sts";
        case ScanScheduleKind::CrossWeaveTiled: return "cw-tis";
        case ScanScheduleKind::WavefrontTiled: return "wf-tis";
    }
    return "?";
}

ScanScheduleKind schedule_from_string(const std::string& s) {
    if (s == "sequential" || s == "seq") return ScanScheduleKind::Sequential;
    if (s == "sts" || s == "scan-transpose-scan") return ScanScheduleKind::ScanTransposeScan;
    if (s == "cw-tis" || s == "crossweave") return ScanScheduleKind::CrossWeaveTiled;
    if (s == "wf-tis" || s == "wavefront") return ScanScheduleKind::WavefrontTiled;
    throw contract_error("unknown schedule '" + s + "'");
}

namespace {

// Per-row index of the maximal constant runs of each bin. Quantized
// imagery repeats the same bin over long spans, so the scan-based
// schedules work run by run — a constant fill across the gap before a run
// and a unit ramp inside it — instead of testing every pixel.
struct RowRuns {
    int w = 0, h = 0, bins = 0;
    std::vector<std::int32_t> lo, hi;  // run x-spans [lo, hi), grouped by (row, bin)
    std::vector<std::int32_t> start;   // h*(bins+1) offsets into lo/hi

    std::size_t row_begin(int y, int k) const {
        return static_cast<std::size_t>(
            start[static_cast<std::size_t>(y) * (bins + 1) + k]);
    }
    std::size_t row_end(int y, int k) const {
        return static_cast<std::size_t>(
            start[static_cast<std::size_t>(y) * (bins + 1) + k + 1]);
    }
};

// Transition positions within one row: indices x in [1, w) with
// row[x] != row[x-1], appended to out. Returns the count.
inline int find_transitions(const std::uint16_t* row, int w, std::int32_t* out) {
    int n = 0;
    int x = 1;
#if defined(__SSE2__)
    for (; x + 8 <= w; x += 8) {
        __m128i a = _mm_loadu_si128(reinterpret_cast<const __m128i*>(row + x));
        __m128i b = _mm_loadu_si128(reinterpret_cast<const __m128i*>(row + x - 1));
        int m = _mm_movemask_epi8(_mm_cmpeq_epi16(a, b)) ^ 0xffff;
        while (m) {
            int bit = __builtin_ctz(m);
            out[n++] = x + bit / 2;
            m &= m - 1;
            m &= m - 1;  // each 16-bit lane sets two mask bits
        }
    }
#endif
    for (; x < w; ++x)
        if (row[x] != row[x - 1]) out[n++] = x;
    return n;
}

RowRuns build_runs(const BinMap& bm) {
    RowRuns rr;
    rr.w = bm.width;
    rr.h = bm.height;
    rr.bins = bm.bins;
    rr.start.resize(static_cast<std::size_t>(bm.height) * (bm.bins + 1));
    // Worst case one run per pixel, but sized to the actual row contents.
    std::vector<std::int32_t> edge(bm.width + 1);
    std::vector<std::int32_t> count(bm.bins), cur(bm.bins);
    for (int y = 0; y < bm.height; ++y) {
        const std::uint16_t* row = bm.data.data() + static_cast<std::size_t>(y) * bm.width;
        edge[0] = 0;
        int n = 1 + find_transitions(row, bm.width, edge.data() + 1);
        edge[n] = bm.width;
        std::fill(count.begin(), count.end(), 0);
        for (int i = 0; i < n; ++i) ++count[row[edge[i]]];
        std::int32_t* st = rr.start.data() + static_cast<std::size_t>(y) * (bm.bins + 1);
        std::int32_t base = static_cast<std::int32_t>(rr.lo.size());
        st[0] = base;
        for (int k = 0; k < bm.bins; ++k) st[k + 1] = st[k] + count[k];
        rr.lo.resize(rr.lo.size() + n);
        rr.hi.resize(rr.hi.size() + n);
        std::copy(st, st + bm.bins, cur.begin());
        for (int i = 0; i < n; ++i) {
            std::int32_t slot = cur[row[edge[i]]]++;
            rr.lo[slot] = edge[i];
            rr.hi[slot] = edge[i + 1];
        }
    }
    return rr;
}

// Unit-count source (plain integral histogram).
struct IndicatorSource {
    static constexpr bool unit_weight = true;
    const BinMap& bm;

    std::uint64_t value(int k, int y, int x) const {
        return bm.data[static_cast<std::size_t>(y) * bm.width + x] == k ? 1u : 0u;
    }
    std::uint64_t hit_weight(int y, int x) const {
        (void)y;
        (void)x;
        return 1;
    }
};

// Per-pixel 64-bit weights (already fixed-point scaled by the caller).
struct WeightedSource {
    static constexpr bool unit_weight = false;
    const BinMap& bm;
    const std::uint64_t* wq;

    std::uint64_t value(int k, int y, int x) const {
        std::size_t i = static_cast<std::size_t>(y) * bm.width + x;
        return bm.data[i] == k ? wq[i] : 0u;
    }
    std::uint64_t hit_weight(int y, int x) const {
        return wq[static_cast<std::size_t>(y) * bm.width + x];
    }
};

// The tensor is written once at build time and queried much later, so the
// tiled builders fold each row into a cache-resident accumulator and then
// stream it out with nontemporal stores: a cached store would first read
// every line in just to overwrite it, doubling the DRAM traffic of the
// pass. Odd head/tail cells use 64-bit nontemporal stores as well — one
// regular store into a streamed line bounces it between the cache and the
// write-combining buffers — and full-width tiles emit the padding cells
// too, so each plane is written as one unbroken sequence and no line is
// ever flushed half-filled. Callers fence (sfence) before the pool join
// hands the rows to another thread.

// acc[i] += add for i in [0, n).
inline void add_run(std::uint64_t* acc, std::size_t n, std::uint64_t add) {
    std::size_t i = 0;
#if defined(__SSE2__)
    const __m128i v = _mm_set1_epi64x(static_cast<long long>(add));
    for (; i + 4 <= n; i += 4) {
        __m128i a = _mm_loadu_si128(reinterpret_cast<const __m128i*>(acc + i));
        __m128i b = _mm_loadu_si128(reinterpret_cast<const __m128i*>(acc + i + 2));
        _mm_storeu_si128(reinterpret_cast<__m128i*>(acc + i), _mm_add_epi64(a, v));
        _mm_storeu_si128(reinterpret_cast<__m128i*>(acc + i + 2), _mm_add_epi64(b, v));
    }
#endif
    for (; i < n; ++i) acc[i] += add;
}

// dst[i] = base + i + 1 for i in [0, n): the prefix ramp inside a unit run.
inline void fill_ramp(std::uint64_t* dst, std::size_t n, std::uint64_t base) {
    std::size_t i = 0;
#if defined(__SSE2__)
    __m128i v = _mm_set_epi64x(static_cast<long long>(base + 2),
                               static_cast<long long>(base + 1));
    const __m128i step = _mm_set1_epi64x(2);
    for (; i + 2 <= n; i += 2) {
        _mm_storeu_si128(reinterpret_cast<__m128i*>(dst + i), v);
        v = _mm_add_epi64(v, step);
    }
#endif
    for (; i < n; ++i) dst[i] = base + i + 1;
}

// acc[i] += base + i + 1 for i in [0, n).
inline void add_ramp(std::uint64_t* acc, std::size_t n, std::uint64_t base) {
    std::size_t i = 0;
#if defined(__SSE2__)
    __m128i v = _mm_set_epi64x(static_cast<long long>(base + 2),
                               static_cast<long long>(base + 1));
    const __m128i step = _mm_set1_epi64x(2);
    for (; i + 2 <= n; i += 2) {
        __m128i a = _mm_loadu_si128(reinterpret_cast<const __m128i*>(acc + i));
        _mm_storeu_si128(reinterpret_cast<__m128i*>(acc + i), _mm_add_epi64(a, v));
        v = _mm_add_epi64(v, step);
    }
#endif
    for (; i < n; ++i) acc[i] += base + i + 1;
}

inline void stream_copy(std::uint64_t* out, const std::uint64_t* src, std::size_t n) {
    std::size_t i = 0;
#if defined(__SSE2__) && defined(__x86_64__)
    if (n >= 16) {
        if (reinterpret_cast<std::uintptr_t>(out) & 15u) {
            _mm_stream_si64(reinterpret_cast<long long*>(out),
                            static_cast<long long>(src[0]));
            i = 1;
        }
        for (; i + 2 <= n; i += 2)
            _mm_stream_si128(reinterpret_cast<__m128i*>(out + i),
                             _mm_loadu_si128(reinterpret_cast<const __m128i*>(src + i)));
        if (i < n) {
            _mm_stream_si64(reinterpret_cast<long long*>(out + i),
                            static_cast<long long>(src[i]));
            i = n;
        }
    }
#endif
    for (; i < n; ++i) out[i] = src[i];
}

inline void stream_fence() {
#if defined(__SSE2__)
    _mm_sfence();
#endif
}

// Inclusive row prefix of plane k over image columns [x0, x1) starting
// from `carry`, written to dst[0 .. x1-x0). Returns the final prefix. The
// prefix is constant across the gap before each run and a unit ramp inside
// it (per-pixel for weighted sources).
template <typename Source>
std::uint64_t fill_row_prefix(const Source& src, const RowRuns& rr, int k, int y,
                              int x0, int x1, std::uint64_t carry, std::uint64_t* dst) {
    std::size_t p = rr.row_begin(y, k);
    const std::size_t e = rr.row_end(y, k);
    // Runs are disjoint and sorted, so lo and hi are both ascending; find
    // the first run still overlapping [x0, x1).
    p = static_cast<std::size_t>(
        std::upper_bound(rr.hi.begin() + p, rr.hi.begin() + e, x0) - rr.hi.begin());
    std::uint64_t run = carry;
    int xcur = x0;
    for (; p != e && rr.lo[p] < x1; ++p) {
        const int a = std::max(rr.lo[p], x0);
        const int b = std::min(rr.hi[p], x1);
        std::fill(dst + (xcur - x0), dst + (a - x0), run);
        if constexpr (Source::unit_weight) {
            fill_ramp(dst + (a - x0), static_cast<std::size_t>(b - a), run);
            run += static_cast<std::uint64_t>(b - a);
        } else {
            for (int x = a; x < b; ++x) {
                run += src.hit_weight(y, x);
                dst[x - x0] = run;
            }
        }
        xcur = b;
    }
    std::fill(dst + (xcur - x0), dst + (x1 - x0), run);
    return run;
}

// Same prefix, folded onto the accumulator instead (acc[i] holds the
// finalized cell one row up for column x0+i). Returns the final prefix.
template <typename Source>
std::uint64_t fold_row_prefix(const Source& src, const RowRuns& rr, int k, int y,
                              int x0, int x1, std::uint64_t carry, std::uint64_t* acc) {
    std::size_t p = rr.row_begin(y, k);
    const std::size_t e = rr.row_end(y, k);
    p = static_cast<std::size_t>(
        std::upper_bound(rr.hi.begin() + p, rr.hi.begin() + e, x0) - rr.hi.begin());
    // A plane whose bin neither occurs in this span nor carries a count
    // from the left adds zero everywhere; skipping it keeps the fold
    // proportional to the planes actually active on the row.
    if (carry == 0 && (p == e || rr.lo[p] >= x1)) return 0;
    std::uint64_t run = carry;
    int xcur = x0;
    for (; p != e && rr.lo[p] < x1; ++p) {
        const int a = std::max(rr.lo[p], x0);
        const int b = std::min(rr.hi[p], x1);
        add_run(acc + (xcur - x0), static_cast<std::size_t>(a - xcur), run);
        if constexpr (Source::unit_weight) {
            add_ramp(acc + (a - x0), static_cast<std::size_t>(b - a), run);
            run += static_cast<std::uint64_t>(b - a);
        } else {
            for (int x = a; x < b; ++x) {
                run += src.hit_weight(y, x);
                acc[x - x0] += run;
            }
        }
        xcur = b;
    }
    add_run(acc + (xcur - x0), static_cast<std::size_t>(x1 - xcur), run);
    return run;
}

void check_budget(const BinMap& bm, std::uint64_t budget) {
    MemoryEstimate est = estimate_memory(bm.width, bm.height, bm.bins, 8);
    if (est.padded_bytes > budget)
        throw contract_error("tensor of " + std::to_string(est.padded_bytes) +
                             " bytes exceeds the memory budget of " + std::to_string(budget));
}

void validate_binmap(const BinMap& bm) {
    require(bm.width > 0 && bm.height > 0, "build: empty bin map");
    require(bm.bins >= 1, "build: bins must be >= 1");
    std::uint16_t mx = 0;
    for (std::uint16_t v : bm.data) mx = std::max(mx, v);
    require(mx < bm.bins, "build: bin index out of range");
}

// ------------------------------------------------------------ sequential
// Direct transcription of the two-dimensional recurrence, one plane at a
// time: H(y,x) = H(y,x-1) + H(y-1,x) - H(y-1,x-1) + q(y-1,x-1).
template <typename Source>
void build_sequential(IntegralHistogramTensor& t, const Source& src) {
    const int h = t.height, w = t.width;
    const std::size_t rs = t.row_stride();
    for (int k = 0; k < t.bins; ++k) {
        std::uint64_t* pl = t.plane(k);
        for (int y = 1; y <= h; ++y) {
            std::uint64_t* row = pl + static_cast<std::size_t>(y) * rs;
            const std::uint64_t* up = row - rs;
            for (int x = 1; x <= w; ++x)
                row[x] = row[x - 1] + up[x] - up[x - 1] + src.value(k, y - 1, x - 1);
        }
    }
}

// ---------------------------------------------------- scan-transpose-scan
// Row prefix per plane, explicit transpose, second row prefix (which is
// the vertical prefix of the original), transpose back.
template <typename Source>
void build_sts(IntegralHistogramTensor& t, const Source& src, const RowRuns& rr,
               WorkerPool& pool) {
    const int h = t.height, w = t.width;
    const std::size_t rs = t.row_stride();
    std::vector<std::uint64_t> scratch(static_cast<std::size_t>(w + 1) * (h + 1));
    const std::size_t srs = static_cast<std::size_t>(h + 1);
    constexpr int B = 32;  // transpose block edge

    for (int k = 0; k < t.bins; ++k) {
        std::uint64_t* pl = t.plane(k);
        pool.parallel_for(h, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t y = lo + 1; y <= hi; ++y)
                fill_row_prefix(src, rr, k, static_cast<int>(y) - 1, 0, w, 0,
                                pl + y * rs + 1);
        });
        pool.parallel_for(h + 1, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t yb = lo; yb < hi; yb += B)
                for (std::size_t xb = 0; xb <= static_cast<std::size_t>(w); xb += B)
                    for (std::size_t y = yb; y < std::min(hi, yb + B); ++y)
                        for (std::size_t x = xb; x < std::min<std::size_t>(w + 1, xb + B); ++x)
                            scratch[x * srs + y] = pl[y * rs + x];
        });
        pool.parallel_for(w, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t u = lo + 1; u <= hi; ++u) {
                std::uint64_t* row = scratch.data() + u * srs;
                std::uint64_t run = 0;
                for (int v = 1; v <= h; ++v) {
                    run += row[v];
                    row[v] = run;
                }
            }
        });
        pool.parallel_for(h + 1, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t yb = lo; yb < hi; yb += B)
                for (std::size_t xb = 0; xb <= static_cast<std::size_t>(w); xb += B)
                    for (std::size_t y = yb; y < std::min(hi, yb + B); ++y)
                        for (std::size_t x = xb; x < std::min<std::size_t>(w + 1, xb + B); ++x)
                            pl[y * rs + x] = scratch[x * srs + y];
        });
    }
}

// ------------------------------------------------------- cross-weave tiled
// Horizontal-then-vertical weave, fused over bands of `tile` rows so the
// intermediate row prefixes never leave the cache: per plane, each band
// row's horizontal prefix is folded directly onto an accumulator row
// seeded from the last finalized output row, which is streamed out as it
// advances. Bands run in sequence — each needs the previous band's bottom
// row — with the independent planes split across threads.
template <typename Source>
void build_cwtis(IntegralHistogramTensor& t, const Source& src, const RowRuns& rr,
                 WorkerPool& pool, int tile) {
    const int h = t.height, w = t.width;
    const std::size_t rs = t.row_stride();
    const int bands = (h + tile - 1) / tile;

    for (int band = 0; band < bands; ++band) {
        const int y0 = band * tile;
        const int y1 = std::min(h, y0 + tile);
        pool.parallel_for(static_cast<std::size_t>(t.bins),
                          [&](std::size_t lo, std::size_t hi) {
            // acc[0] is the padding cell, emitted with every row so the
            // plane is streamed without gaps.
            thread_local std::vector<std::uint64_t> acc;
            acc.resize(static_cast<std::size_t>(w) + 1);
            acc[0] = 0;
            for (std::size_t k = lo; k < hi; ++k) {
                std::uint64_t* pl = t.plane(static_cast<int>(k));
                std::memcpy(acc.data() + 1, pl + static_cast<std::size_t>(y0) * rs + 1,
                            static_cast<std::size_t>(w) * sizeof(std::uint64_t));
                if (y0 == 0) stream_copy(pl, acc.data(), rs);  // padding row
                for (int y = y0; y < y1; ++y) {
                    fold_row_prefix(src, rr, static_cast<int>(k), y, 0, w, 0,
                                    acc.data() + 1);
                    stream_copy(pl + static_cast<std::size_t>(y + 1) * rs, acc.data(), rs);
                }
            }
            stream_fence();
        });
    }
}

// -------------------------------------------------------- wavefront tiled
// Tiles advance along anti-diagonals; tiles on one diagonal are
// independent (they share no rows, and their left/up neighbors finished on
// earlier diagonals). Each tile consumes the carried horizontal prefix of
// its left neighbor and the finalized bottom row of the tile above — read
// once into a cache-resident accumulator that then walks down the tile —
// and finishes its cells in a single fused pass.
template <typename Source>
void build_wftis(IntegralHistogramTensor& t, const Source& src, const RowRuns& rr,
                 WorkerPool& pool, int tile) {
    const int h = t.height, w = t.width;
    const std::size_t rs = t.row_stride();
    const int tilesX = (w + tile - 1) / tile;
    const int tilesY = (h + tile - 1) / tile;
    // Per plane, one column of horizontal-scan carries (h entries).
    std::vector<std::uint64_t> hcarry(static_cast<std::size_t>(t.bins) * h, 0);

    for (int d = 0; d <= tilesX + tilesY - 2; ++d) {
        const int tiLo = std::max(0, d - (tilesX - 1));
        const int tiHi = std::min(tilesY - 1, d);
        if (tiLo > tiHi) continue;
        const std::size_t nItems = static_cast<std::size_t>(t.bins) * (tiHi - tiLo + 1);
        pool.parallel_for(nItems, [&](std::size_t lo, std::size_t hi) {
            // acc[0] is the padding cell for full-width tiles, so their
            // rows stream out without gaps; narrower tiles stream just the
            // interior span.
            thread_local std::vector<std::uint64_t> acc;
            acc.resize(static_cast<std::size_t>(tile) + 1);
            acc[0] = 0;
            const int span = tiHi - tiLo + 1;
            for (std::size_t it = lo; it < hi; ++it) {
                int k = static_cast<int>(it / span);
                int ti = tiLo + static_cast<int>(it % span);
                int tj = d - ti;
                int y0 = ti * tile, y1 = std::min(h, y0 + tile);
                int x0 = tj * tile, x1 = std::min(w, x0 + tile);
                const bool full = (x0 == 0 && x1 == w);
                std::uint64_t* pl = t.plane(k);
                std::uint64_t* carry = hcarry.data() + static_cast<std::size_t>(k) * h;
                std::memcpy(acc.data() + 1, pl + static_cast<std::size_t>(y0) * rs + 1 + x0,
                            static_cast<std::size_t>(x1 - x0) * sizeof(std::uint64_t));
                if (full && y0 == 0) stream_copy(pl, acc.data(), rs);  // padding row
                for (int y = y0; y < y1; ++y) {
                    carry[y] = fold_row_prefix(src, rr, k, y, x0, x1, carry[y],
                                               acc.data() + 1);
                    if (full)
                        stream_copy(pl + static_cast<std::size_t>(y + 1) * rs,
                                    acc.data(), rs);
                    else
                        stream_copy(pl + static_cast<std::size_t>(y + 1) * rs + 1 + x0,
                                    acc.data() + 1, static_cast<std::size_t>(x1 - x0));
                }
            }
            stream_fence();
        });
    }
}

template <typename Source>
IntegralHistogramTensor build_tensor(const BinMap& bm, const Source& src,
                                     const ScanSchedule& schedule, std::uint64_t budget) {
    validate_binmap(bm);
    require(schedule.tile >= 2 && schedule.tile <= 4096, "build: tile must be in [2, 4096]");
    require(schedule.threads >= 1 && schedule.threads <= 64,
            "build: threads must be in [1, 64]");
    check_budget(bm, budget);

    IntegralHistogramTensor t;
    t.bins = bm.bins;
    t.height = bm.height;
    t.width = bm.width;
    // The buffer comes back uninitialized (and possibly recycled); zero the
    // padding row and column of each plane — the only cells no schedule
    // writes — instead of memset-ing the whole tensor twice over.
    t.data.resize(static_cast<std::size_t>(bm.bins) * t.plane_stride());
    const std::size_t rs0 = t.row_stride();
    for (int k = 0; k < t.bins; ++k) {
        std::uint64_t* pl = t.plane(k);
        std::memset(pl, 0, rs0 * sizeof(std::uint64_t));
        for (int y = 1; y <= t.height; ++y) pl[static_cast<std::size_t>(y) * rs0] = 0;
    }

    if (schedule.kind == ScanScheduleKind::Sequential) {
        build_sequential(t, src);  // reference path, single-threaded by definition
        return t;
    }
    RowRuns rr = build_runs(bm);
    WorkerPool pool(schedule.threads);
    switch (schedule.kind) {
        case ScanScheduleKind::ScanTransposeScan: build_sts(t, src, rr, pool); break;
        case ScanScheduleKind::CrossWeaveTiled: build_cwtis(t, src, rr, pool, schedule.tile); break;
        case ScanScheduleKind::WavefrontTiled: build_wftis(t, src, rr, pool, schedule.tile); break;
        default: break;
    }
    return t;
}

}  // namespace

IntegralHistogramTensor build_integral_histogram(const BinMap& bins, const ScanSchedule& schedule,
                                                 std::uint64_t memory_budget) {
    return build_tensor(bins, IndicatorSource{bins}, schedule, memory_budget);
}

IntegralHistogramTensor build_weighted_tensor(const BinMap& bins,
                                              const std::vector<std::uint64_t>& weights,
                                              const ScanSchedule& schedule,
                                              std::uint64_t memory_budget) {
    require(weights.size() == bins.data.size(), "build_weighted_tensor: weight size mismatch");
    return build_tensor(bins, WeightedSource{bins, weights.data()}, schedule, memory_budget);
}

std::vector<std::uint64_t> region_histogram(const IntegralHistogramTensor& t, const Rect& r) {
    require(r.w >= 0 && r.h >= 0, "region_histogram: negative extent");
    require(r.inside(t.width, t.height), "region_histogram: rect outside image");
    std::vector<std::uint64_t> out(t.bins);
    for (int k = 0; k < t.bins; ++k) out[k] = region_count(t, k, r);
    return out;
}

std::uint64_t region_count(const IntegralHistogramTensor& t, int bin, const Rect& r) {
    require(bin >= 0 && bin < t.bins, "region_count: bin out of range");
    require(r.inside(t.width, t.height), "region_count: rect outside image");
    const std::uint64_t* pl = t.plane(bin);
    const std::size_t rs = t.row_stride();
    const int x1 = r.x, y1 = r.y, x2 = r.right(), y2 = r.bottom();
    return pl[static_cast<std::size_t>(y2) * rs + x2] - pl[static_cast<std::size_t>(y1) * rs + x2] -
           pl[static_cast<std::size_t>(y2) * rs + x1] + pl[static_cast<std::size_t>(y1) * rs + x1];
}

ScheduleStats schedule_stats(int w, int h, int tile, int scan_len) {
    require(w > 0 && h > 0 && tile > 0, "schedule_stats: positive dims required");
    require(scan_len >= 2, "schedule_stats: scan_len must be >= 2");
    ScheduleStats s{};
    const long long tx = (w + tile - 1) / tile;
    const long long ty = (h + tile - 1) / tile;
    s.wavefront_iterations = tx + ty - 1;
    s.tile_count = tx * ty;  // tiles over the zero-padded image
    const double n = scan_len;
    s.scan_efficiency = 3.0 * (n - 1.0) / (n * std::log2(n));
    return s;
}

MemoryEstimate estimate_memory(int w, int h, int bins, int elem_bytes) {
    require(w >= 0 && h >= 0 && bins >= 0 && elem_bytes >= 0, "estimate_memory: negative input");
    MemoryEstimate e{};
    e.degenerate = (w == 0 || h == 0 || bins == 0 || elem_bytes == 0);
    e.padded_bytes = static_cast<std::uint64_t>(bins) * (h + 1) * (w + 1) * elem_bytes;
    e.raw_bytes = static_cast<std::uint64_t>(bins) * h * w * elem_bytes;
    return e;
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (in.gcount() != 4) throw io_error("truncated tensor header: " + path);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void dump_tensor(const IntegralHistogramTensor& t, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write tensor: " + path);
    out.write("IHT1", 4);
    put_u32(out, static_cast<std::uint32_t>(t.bins));
    put_u32(out, static_cast<std::uint32_t>(t.height));
    put_u32(out, static_cast<std::uint32_t>(t.width));
    put_u32(out, 8);
    for (std::uint64_t v : t.data) {
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        out.write(reinterpret_cast<char*>(b), 8);
    }
    if (!out) throw io_error("write failed: " + path);
}

IntegralHistogramTensor load_tensor(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open tensor: " + path);
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, "IHT1", 4) != 0)
        throw io_error("bad tensor magic: " + path);
    IntegralHistogramTensor t;
    t.bins = static_cast<int>(get_u32(in, path));
    t.height = static_cast<int>(get_u32(in, path));
    t.width = static_cast<int>(get_u32(in, path));
    std::uint32_t elem = get_u32(in, path);
    if (elem != 8) throw io_error("unsupported element size: " + path);
    if (t.bins <= 0 || t.height <= 0 || t.width <= 0)
        throw io_error("bad tensor dimensions: " + path);
    t.data.resize(static_cast<std::size_t>(t.bins) * t.plane_stride());
    for (std::uint64_t& v : t.data) {
        unsigned char b[8];
        in.read(reinterpret_cast<char*>(b), 8);
        if (in.gcount() != 8) throw io_error("truncated tensor payload: " + path);
        v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    }
    return t;
}

}  // namespace spct
