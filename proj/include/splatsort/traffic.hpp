#pragma once

#include "splatsort/common.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace splatsort {

/// Pipeline stages with their own DRAM byte counters.
enum class Stage : std::uint8_t {
    Preprocess,
    SortReorder,
    SortIncoming,
    SortMerge,
    RasterFeatureRead,
    RasterWriteback,
    ImageWrite,
};

inline constexpr std::size_t kStageCount = 7;

inline constexpr std::array<Stage, kStageCount> kAllStages{
    Stage::Preprocess,        Stage::SortReorder,     Stage::SortIncoming, Stage::SortMerge,
    Stage::RasterFeatureRead, Stage::RasterWriteback, Stage::ImageWrite,
};

std::string toString(Stage stage);
/// Throws Error for an unknown stage name.
Stage parseStage(const std::string &name);

bool isSortStage(Stage stage);

/// Byte sizes of the modeled off-chip records.
struct CostModel {
    std::uint64_t entryBytes          = 8;  // 4-byte id (valid bit on top) + 4-byte depth key
    std::uint64_t featureBytes        = 48; // one projected-feature record
    std::uint64_t baselineRadixPasses = 4;  // 8-bit digits over a 32-bit key
    std::uint64_t pixelBytes          = 3;

    void validate() const;
};

struct StageBytes {
    std::uint64_t read  = 0;
    std::uint64_t write = 0;

    std::uint64_t total() const { return read + write; }
    bool operator==(const StageBytes &) const = default;
};

/// Simulated DRAM traffic per stage. Merging is plain addition, so per-tile
/// ledgers can be combined in any order.
class TrafficLedger {
  public:
    void record(Stage stage, std::uint64_t readBytes, std::uint64_t writeBytes);
    /// String-keyed variant for config/bindings; throws Error for an unknown stage.
    void record(const std::string &stage, std::uint64_t readBytes, std::uint64_t writeBytes);

    void merge(const TrafficLedger &other);

    const StageBytes &at(Stage stage) const { return mStages[static_cast<std::size_t>(stage)]; }
    std::uint64_t sortBytes() const;
    std::uint64_t totalBytes() const;

    bool operator==(const TrafficLedger &) const = default;

  private:
    std::array<StageBytes, kStageCount> mStages{};
};

/// Modeled bytes of sorting n key-value pairs from scratch: every radix pass reads
/// and writes each pair, plus the duplication write and the initial read.
std::uint64_t baselineSortTraffic(std::uint64_t n, const CostModel &cost = {});

struct TrafficSummary {
    std::size_t frames = 0;
    std::array<StageBytes, kStageCount> totals{};
    std::array<double, kStageCount> perFrameAverage{};
    std::uint64_t sortBytes  = 0;
    std::uint64_t totalBytes = 0;
    double sortShare         = 0.0; // sortBytes / totalBytes, 0 when nothing moved
};

/// Throws ContractError when `frames` is empty.
TrafficSummary summarize(const std::vector<TrafficLedger> &frames);

/// Percentage of `baseline` bytes removed by `candidate`; absent when baseline is 0.
std::optional<double> reductionPercent(std::uint64_t baseline, std::uint64_t candidate);

} // namespace splatsort
