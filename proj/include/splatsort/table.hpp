#pragma once

#include "splatsort/common.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace splatsort {

/// One row of a per-tile Gaussian table. Ordered by (depthKey, id).
struct TableEntry {
    GaussianId id  = 0;
    float depthKey = 0.0f;
    bool valid     = true;

    bool operator==(const TableEntry &) const = default;
};

inline bool
entryLess(const TableEntry &a, const TableEntry &b) {
    return a.depthKey < b.depthKey || (a.depthKey == b.depthKey && a.id < b.id);
}

bool isStrictlySorted(std::span<const TableEntry> entries);

/// Per-tile depth-ordered list reused across frames.
struct GaussianTable {
    TileId tile = 0;
    std::vector<TableEntry> entries;
    /// Frame index whose merge last produced this order; -1 before the first sort.
    std::int64_t sortedFrame = -1;

    std::size_t size() const { return entries.size(); }
    bool operator==(const GaussianTable &) const = default;
};

struct ChunkConfig {
    std::size_t capacity = 256; // entries per on-chip chunk
    std::size_t sub      = 16;  // sub-chunk width handled by the 16-lane network

    /// Throws ContractError unless capacity is even, a multiple of sub, and sub <= 16.
    void validate() const;
    bool operator==(const ChunkConfig &) const = default;
};

} // namespace splatsort
