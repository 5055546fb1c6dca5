#pragma once

#include "splatsort/preprocess.hpp"
#include "splatsort/raster.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace splatsort {

/// Peak signal-to-noise ratio over RGB in [0, 1]; +infinity for identical images.
/// Throws ContractError on a dimension mismatch.
double psnr(const FrameImage &a, const FrameImage &b);

/// |prev ∩ cur| / |prev|, and 1.0 when prev is empty.
double retentionFraction(std::span<const GaussianId> prev, std::span<const GaussianId> cur);

struct Percentiles {
    std::size_t p90 = 0, p95 = 0, p99 = 0;
    bool operator==(const Percentiles &) const = default;
};

/// Nearest-rank percentile of `samples` (need not be sorted); nullopt when empty.
std::optional<std::size_t> nearestRank(std::vector<std::size_t> samples, double percent);

/// |rank_cur - rank_prev| for every id present in both orders, ranks taken among the
/// shared ids only. Returned in prev order.
std::vector<std::size_t> rankDisplacements(std::span<const GaussianId> prevOrder, std::span<const GaussianId> curOrder);

/// p90/p95/p99 of rankDisplacements; nullopt when the orders share no id.
std::optional<Percentiles> displacementPercentiles(std::span<const GaussianId> prevOrder,
                                                   std::span<const GaussianId> curOrder);

/// Depth order of a tile's assignments: ids sorted by (depth key, id).
std::vector<GaussianId> depthOrder(std::span<const TableEntry> assigned);

struct FrameSimilarity {
    std::int64_t frameIndex = 0;
    std::vector<std::optional<double>> retention; // per tile; absent when the previous tile was empty
    std::size_t emptyPrevTiles = 0;
    std::optional<Percentiles> displacement;     // pooled over the frame's tiles
};

inline constexpr std::size_t kCdfBins = 101; // samples at 0.00, 0.01, ..., 1.00

struct SimilarityReport {
    std::vector<FrameSimilarity> frames; // transitions (t-1 -> t), starting at t = 1
    std::array<double, kCdfBins> retentionCdf{}; // fraction of (frame, tile) samples with retention <= x
    std::size_t retentionSamples = 0;
    std::optional<Percentiles> displacement; // pooled over the whole run
};

/// Similarity of consecutive frames' tile assignments (ids) and depth orders.
SimilarityReport analyzeSimilarity(const std::vector<TileAssignments> &frames);

/// Fraction of frames on which at least `tileShare` of the tiles retain >= `threshold`.
double fractionOfFramesRetaining(const SimilarityReport &report, double threshold, double tileShare);

} // namespace splatsort
