#include "splatsort/analysis.hpp"

#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>

namespace splatsort {

double
psnr(const FrameImage &a, const FrameImage &b) {
    require(a.width == b.width && a.height == b.height && a.rgb.size() == b.rgb.size(),
            "psnr: image dimensions differ");
    if (a.rgb.empty()) {
        return std::numeric_limits<double>::infinity();
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.rgb.size(); ++i) {
        const double d = static_cast<double>(a.rgb[i]) - static_cast<double>(b.rgb[i]);
        sum += d * d;
    }
    const double mse = sum / static_cast<double>(a.rgb.size());
    if (mse == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return 10.0 * std::log10(1.0 / mse);
}

double
retentionFraction(std::span<const GaussianId> prev, std::span<const GaussianId> cur) {
    if (prev.empty()) {
        return 1.0;
    }
    const std::unordered_set<GaussianId> current(cur.begin(), cur.end());
    std::size_t kept = 0;
    for (const auto id : prev) {
        kept += current.count(id);
    }
    return static_cast<double>(kept) / static_cast<double>(prev.size());
}

std::optional<std::size_t>
nearestRank(std::vector<std::size_t> samples, double percent) {
    if (samples.empty()) {
        return std::nullopt;
    }
    auto rank = static_cast<std::size_t>(std::ceil(percent / 100.0 * static_cast<double>(samples.size())));
    rank      = std::clamp<std::size_t>(rank, 1, samples.size());
    std::nth_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(rank - 1), samples.end());
    return samples[rank - 1];
}

std::vector<std::size_t>
rankDisplacements(std::span<const GaussianId> prevOrder, std::span<const GaussianId> curOrder) {
    const std::unordered_set<GaussianId> inPrev(prevOrder.begin(), prevOrder.end());
    std::unordered_map<GaussianId, std::size_t> curRank;
    for (const auto id : curOrder) {
        if (inPrev.count(id)) {
            curRank.emplace(id, curRank.size());
        }
    }
    std::vector<std::size_t> out;
    out.reserve(curRank.size());
    std::size_t prevRank = 0;
    for (const auto id : prevOrder) {
        const auto it = curRank.find(id);
        if (it == curRank.end()) {
            continue;
        }
        out.push_back(it->second > prevRank ? it->second - prevRank : prevRank - it->second);
        ++prevRank;
    }
    return out;
}

namespace {

std::optional<Percentiles>
percentilesOf(const std::vector<std::size_t> &samples) {
    if (samples.empty()) {
        return std::nullopt;
    }
    return Percentiles{*nearestRank(samples, 90.0), *nearestRank(samples, 95.0), *nearestRank(samples, 99.0)};
}

std::vector<GaussianId>
idsOf(std::span<const TableEntry> entries) {
    std::vector<GaussianId> ids;
    ids.reserve(entries.size());
    for (const auto &e : entries) {
        ids.push_back(e.id);
    }
    return ids;
}

} // namespace

std::optional<Percentiles>
displacementPercentiles(std::span<const GaussianId> prevOrder, std::span<const GaussianId> curOrder) {
    return percentilesOf(rankDisplacements(prevOrder, curOrder));
}

std::vector<GaussianId>
depthOrder(std::span<const TableEntry> assigned) {
    std::vector<TableEntry> sorted(assigned.begin(), assigned.end());
    std::sort(sorted.begin(), sorted.end(), entryLess);
    return idsOf(sorted);
}

SimilarityReport
analyzeSimilarity(const std::vector<TileAssignments> &frames) {
    SimilarityReport report;
    std::vector<double> allRetention;
    std::vector<std::size_t> allDisplacement;
    for (std::size_t f = 1; f < frames.size(); ++f) {
        const auto &prev = frames[f - 1];
        const auto &cur  = frames[f];
        require(prev.size() == cur.size(), "analyzeSimilarity: tile count changed between frames");
        FrameSimilarity fs;
        fs.frameIndex = static_cast<std::int64_t>(f);
        fs.retention.resize(cur.size());
        std::vector<std::size_t> frameDisplacement;
        for (std::size_t t = 0; t < cur.size(); ++t) {
            const auto prevIds = idsOf(prev[t]);
            const auto curIds  = idsOf(cur[t]);
            if (prevIds.empty()) {
                ++fs.emptyPrevTiles;
            } else {
                fs.retention[t] = retentionFraction(prevIds, curIds);
                allRetention.push_back(*fs.retention[t]);
            }
            const auto d = rankDisplacements(depthOrder(prev[t]), depthOrder(cur[t]));
            frameDisplacement.insert(frameDisplacement.end(), d.begin(), d.end());
        }
        fs.displacement = percentilesOf(frameDisplacement);
        allDisplacement.insert(allDisplacement.end(), frameDisplacement.begin(), frameDisplacement.end());
        report.frames.push_back(std::move(fs));
    }

    report.retentionSamples = allRetention.size();
    std::sort(allRetention.begin(), allRetention.end());
    for (std::size_t k = 0; k < kCdfBins; ++k) {
        if (allRetention.empty()) {
            report.retentionCdf[k] = 1.0;
            continue;
        }
        const double x        = static_cast<double>(k) / static_cast<double>(kCdfBins - 1);
        const auto below      = std::upper_bound(allRetention.begin(), allRetention.end(), x) - allRetention.begin();
        report.retentionCdf[k] = static_cast<double>(below) / static_cast<double>(allRetention.size());
    }
    report.displacement = percentilesOf(allDisplacement);
    return report;
}

double
fractionOfFramesRetaining(const SimilarityReport &report, double threshold, double tileShare) {
    std::size_t frames = 0, passing = 0;
    for (const auto &fs : report.frames) {
        std::size_t tiles = 0, retaining = 0;
        for (const auto &r : fs.retention) {
            if (r) {
                ++tiles;
                retaining += *r >= threshold ? 1 : 0;
            }
        }
        if (tiles == 0) {
            continue;
        }
        ++frames;
        if (static_cast<double>(retaining) >= tileShare * static_cast<double>(tiles)) {
            ++passing;
        }
    }
    return frames == 0 ? 1.0 : static_cast<double>(passing) / static_cast<double>(frames);
}

} // namespace splatsort
