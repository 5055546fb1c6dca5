#include "splatsort/traffic.hpp"

namespace splatsort {

std::string
toString(Stage stage) {
    switch (stage) {
    case Stage::Preprocess: return "preprocess";
    case Stage::SortReorder: return "sort_reorder";
    case Stage::SortIncoming: return "sort_incoming";
    case Stage::SortMerge: return "sort_merge";
    case Stage::RasterFeatureRead: return "raster_feature_read";
    case Stage::RasterWriteback: return "raster_writeback";
    case Stage::ImageWrite: return "image_write";
    }
    return "?";
}

Stage
parseStage(const std::string &name) {
    for (const auto s : kAllStages) {
        if (toString(s) == name) {
            return s;
        }
    }
    throw Error("unknown traffic stage '" + name + "'");
}

bool
isSortStage(Stage stage) {
    return stage == Stage::SortReorder || stage == Stage::SortIncoming || stage == Stage::SortMerge;
}

void
CostModel::validate() const {
    require(entryBytes > 0 && featureBytes > 0 && baselineRadixPasses > 0 && pixelBytes > 0,
            "cost model sizes must be positive");
}

void
TrafficLedger::record(Stage stage, std::uint64_t readBytes, std::uint64_t writeBytes) {
    auto &s = mStages[static_cast<std::size_t>(stage)];
    s.read += readBytes;
    s.write += writeBytes;
}

void
TrafficLedger::record(const std::string &stage, std::uint64_t readBytes, std::uint64_t writeBytes) {
    record(parseStage(stage), readBytes, writeBytes);
}

void
TrafficLedger::merge(const TrafficLedger &other) {
    for (std::size_t i = 0; i < kStageCount; ++i) {
        mStages[i].read += other.mStages[i].read;
        mStages[i].write += other.mStages[i].write;
    }
}

std::uint64_t
TrafficLedger::sortBytes() const {
    std::uint64_t sum = 0;
    for (const auto s : kAllStages) {
        if (isSortStage(s)) {
            sum += at(s).total();
        }
    }
    return sum;
}

std::uint64_t
TrafficLedger::totalBytes() const {
    std::uint64_t sum = 0;
    for (const auto &s : mStages) {
        sum += s.total();
    }
    return sum;
}

std::uint64_t
baselineSortTraffic(std::uint64_t n, const CostModel &cost) {
    return cost.baselineRadixPasses * 2 * n * cost.entryBytes + 2 * n * cost.entryBytes;
}

TrafficSummary
summarize(const std::vector<TrafficLedger> &frames) {
    require(!frames.empty(), "traffic summary needs at least one frame");
    TrafficLedger total;
    for (const auto &f : frames) {
        total.merge(f);
    }
    TrafficSummary s;
    s.frames = frames.size();
    for (std::size_t i = 0; i < kStageCount; ++i) {
        s.totals[i]          = total.at(kAllStages[i]);
        s.perFrameAverage[i] = static_cast<double>(s.totals[i].total()) / static_cast<double>(frames.size());
    }
    s.sortBytes  = total.sortBytes();
    s.totalBytes = total.totalBytes();
    s.sortShare  = s.totalBytes == 0 ? 0.0 : static_cast<double>(s.sortBytes) / static_cast<double>(s.totalBytes);
    return s;
}

std::optional<double>
reductionPercent(std::uint64_t baseline, std::uint64_t candidate) {
    if (baseline == 0) {
        return std::nullopt;
    }
    return 100.0 * (1.0 - static_cast<double>(candidate) / static_cast<double>(baseline));
}

} // namespace splatsort
