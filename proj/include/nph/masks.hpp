#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "nph/errors.hpp"
#include "nph/patterns.hpp"
#include "nph/rng.hpp"

namespace nph {

enum class MaskOrigin { Full, Random, Window, TopK };

// Support set of memory indices a sparse-structured model sums over.
// Indices are 0-based, strictly increasing, within [0, M). The builder
// parameters are kept for reporting.
class SupportMask {
public:
    SupportMask(std::vector<Index> indices, Index universe, MaskOrigin origin)
        : indices_(std::move(indices)), universe_(universe), origin_(origin) {
        if (indices_.empty()) throw InvalidMaskError("support mask must be nonempty");
        if (universe_ < 1) throw InvalidMaskError("mask universe must be >= 1");
        for (std::size_t i = 0; i < indices_.size(); ++i) {
            if (indices_[i] < 0 || indices_[i] >= universe_) {
                throw InvalidMaskError("mask index out of range");
            }
            if (i > 0 && indices_[i] <= indices_[i - 1]) {
                throw InvalidMaskError("mask indices must be strictly increasing");
            }
        }
    }

    const std::vector<Index>& indices() const { return indices_; }
    Index size() const { return static_cast<Index>(indices_.size()); }
    Index universe() const { return universe_; }
    MaskOrigin origin() const { return origin_; }
    bool full() const { return size() == universe_; }

    bool contains(Index mu) const {
        return std::binary_search(indices_.begin(), indices_.end(), mu);
    }

    // Builder parameters, meaningful per origin.
    std::uint64_t seed = 0;
    Index window_width = 0;
    Index top_k = 0;

private:
    std::vector<Index> indices_;
    Index universe_;
    MaskOrigin origin_;
};

inline SupportMask mask_full(Index M) {
    if (M < 1) throw KOutOfRangeError("memory count must be >= 1");
    std::vector<Index> idx(static_cast<std::size_t>(M));
    std::iota(idx.begin(), idx.end(), Index{0});
    return SupportMask(std::move(idx), M, MaskOrigin::Full);
}

/// Uniform k-subset without replacement (seeded Fisher-Yates prefix).
inline SupportMask mask_random(Index M, Index k, std::uint64_t seed) {
    if (k < 1 || k > M) throw KOutOfRangeError("mask size must lie in [1, M]");
    std::vector<Index> pool(static_cast<std::size_t>(M));
    std::iota(pool.begin(), pool.end(), Index{0});
    Rng rng(seed);
    for (Index i = 0; i < k; ++i) {
        const auto j = i + static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(M - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    std::vector<Index> idx(pool.begin(), pool.begin() + k);
    std::sort(idx.begin(), idx.end());
    SupportMask mask(std::move(idx), M, MaskOrigin::Random);
    mask.seed = seed;
    return mask;
}

/// Window width the sliding-window model defaults to: round(sqrt(L)).
inline Index default_window_width(Index L) {
    return std::max<Index>(1, static_cast<Index>(std::llround(std::sqrt(static_cast<double>(L)))));
}

/// Sliding window of width w around query position q (0-based), truncated at
/// the sequence edges. Self-attention alignment: requires M == L.
inline SupportMask mask_window(Index L, Index M, Index q, Index w) {
    if (M != L) throw ShapeMismatchError("window masks need memory count == query count");
    if (q < 0 || q >= L) throw PositionOutOfRangeError("window position out of range");
    if (w < 1 || w > M) throw KOutOfRangeError("window width must lie in [1, M]");
    const Index lo = std::max<Index>(0, q - w / 2);
    const Index hi = std::min<Index>(M - 1, q + (w + 1) / 2 - 1);
    std::vector<Index> idx;
    idx.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (Index i = lo; i <= hi; ++i) idx.push_back(i);
    SupportMask mask(std::move(idx), M, MaskOrigin::Window);
    mask.window_width = w;
    return mask;
}

/// Indices of the K largest scores <x, xi_mu> over the clean memories.
/// Ties at the cutoff go to the lower index, so the mask has exactly K members.
inline SupportMask mask_topk(const MemoryStore& store, const Vector& x, Index K) {
    const Index M = store.count();
    if (K < 1 || K > M) throw KOutOfRangeError("K must lie in [1, M]");
    check_query(store, x);
    const Vector scores = store.memories().transpose() * x;
    std::vector<Index> order(static_cast<std::size_t>(M));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    std::vector<Index> idx(order.begin(), order.begin() + K);
    std::sort(idx.begin(), idx.end());
    SupportMask mask(std::move(idx), M, MaskOrigin::TopK);
    mask.top_k = K;
    return mask;
}

}  // namespace nph
