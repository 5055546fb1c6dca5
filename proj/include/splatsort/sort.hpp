#pragma once

#include "splatsort/table.hpp"
#include "splatsort/traffic.hpp"

#include <span>
#include <vector>

namespace splatsort {

enum class Parity { Odd, Even };

/// Parity of a frame: odd iff frameIndex mod 2 == 1.
inline Parity
frameParity(std::int64_t frameIndex) {
    return (frameIndex % 2 == 1) ? Parity::Odd : Parity::Even;
}

struct Range {
    std::size_t start = 0;
    std::size_t end   = 0;

    std::size_t size() const { return end - start; }
    bool operator==(const Range &) const = default;
};

/// Sorting windows of one Dynamic Partial Sorting pass over a table of `length`.
/// Odd parity tiles [0,C), [C,2C), ...; even parity starts with a half chunk
/// [0,C/2) and continues with full chunks shifted by C/2. Windows are clipped at
/// `length` and partition [0, length) exactly.
std::vector<Range> chunkBoundaries(std::size_t length, std::size_t chunk, Parity parity);

/// Sorts up to 16 entries in place with a fixed bitonic compare-exchange network.
/// Unused lanes are padded with keys that order after every real entry.
void bitonicSort16(std::span<TableEntry> entries);

/// Stable k-way merge of sorted runs. With `verify`, an unsorted run throws ContractError.
std::vector<TableEntry> mergeRuns(const std::vector<std::vector<TableEntry>> &runs, bool verify = false);

/// On-chip chunk sort: network-sort each `sub`-wide slice, then merge the slices.
void sortChunk(std::span<TableEntry> chunk, std::size_t sub = 16);

/// From-scratch sort (baseline mode and the frame-0 bootstrap). Ledgers the radix
/// baseline cost under SortReorder. Throws ContractError on duplicate ids.
GaussianTable fullSort(TileId tile, std::vector<TableEntry> entries, const ChunkConfig &cfg,
                       const CostModel &cost, TrafficLedger &ledger);

/// One Dynamic Partial Sorting pass for `frameIndex` (>= 1). Each window is sorted
/// independently; exactly one read and one write of every entry is ledgered.
GaussianTable dynamicPartialSort(GaussianTable table, std::int64_t frameIndex, const ChunkConfig &cfg,
                                 const CostModel &cost, TrafficLedger &ledger);

/// Conventional sort of a tile's incoming list; ledgers one read and write of it.
std::vector<TableEntry> sortIncoming(std::vector<TableEntry> incoming, const ChunkConfig &cfg,
                                     const CostModel &cost, TrafficLedger &ledger);

/// Single merge pass that drops invalid entries of `reused` and inserts the sorted
/// `incoming` entries. The reused table's stream is consumed during its reorder
/// write-back, so only the incoming stream and the inserted entries are ledgered.
/// Throws ContractError when an incoming id is also a valid reused id, or when
/// `incoming` is not sorted.
GaussianTable mergeUpdate(const GaussianTable &reused, std::span<const TableEntry> incoming,
                          std::int64_t frameIndex, const CostModel &cost, TrafficLedger &ledger);

} // namespace splatsort
