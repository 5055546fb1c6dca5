#include "splatsort/sort.hpp"

#include <array>
#include <queue>
#include <unordered_set>

namespace splatsort {

bool
isStrictlySorted(std::span<const TableEntry> entries) {
    for (std::size_t i = 1; i < entries.size(); ++i) {
        if (!entryLess(entries[i - 1], entries[i])) {
            return false;
        }
    }
    return true;
}

void
ChunkConfig::validate() const {
    require(capacity >= 2 && capacity % 2 == 0, "chunk capacity must be even and >= 2");
    require(sub >= 1 && sub <= 16, "sub-chunk width must be in [1, 16]");
    require(capacity % sub == 0, "chunk capacity must be a multiple of the sub-chunk width");
}

std::vector<Range>
chunkBoundaries(std::size_t length, std::size_t chunk, Parity parity) {
    require(chunk >= 2, "chunk size must be >= 2");
    std::vector<Range> ranges;
    if (length == 0) {
        return ranges;
    }
    std::size_t start = 0;
    std::size_t end   = parity == Parity::Odd ? chunk : chunk / 2;
    for (;;) {
        ranges.push_back({start, std::min(end, length)});
        if (end >= length) {
            break;
        }
        start = end;
        end += chunk;
    }
    return ranges;
}

namespace {

struct Lane {
    TableEntry entry;
    bool pad = true;
};

inline bool
laneLess(const Lane &a, const Lane &b) {
    if (a.pad || b.pad) {
        return !a.pad && b.pad;
    }
    return entryLess(a.entry, b.entry);
}

} // namespace

void
bitonicSort16(std::span<TableEntry> entries) {
    require(entries.size() <= 16, "bitonic network sorts at most 16 entries");
    std::array<Lane, 16> lanes{};
    for (std::size_t i = 0; i < entries.size(); ++i) {
        lanes[i] = {entries[i], false};
    }
    for (std::size_t k = 2; k <= 16; k <<= 1) {
        for (std::size_t j = k >> 1; j > 0; j >>= 1) {
            for (std::size_t i = 0; i < 16; ++i) {
                const std::size_t partner = i ^ j;
                if (partner <= i) {
                    continue;
                }
                const bool ascending = (i & k) == 0;
                const bool outOfOrder =
                    ascending ? laneLess(lanes[partner], lanes[i]) : laneLess(lanes[i], lanes[partner]);
                if (outOfOrder) {
                    std::swap(lanes[i], lanes[partner]);
                }
            }
        }
    }
    // padding lanes sort last, so the first size() lanes are the real entries
    for (std::size_t i = 0; i < entries.size(); ++i) {
        entries[i] = lanes[i].entry;
    }
}

std::vector<TableEntry>
mergeRuns(const std::vector<std::vector<TableEntry>> &runs, bool verify) {
    std::size_t total = 0;
    for (const auto &run : runs) {
        if (verify) {
            for (std::size_t i = 1; i < run.size(); ++i) {
                require(!entryLess(run[i], run[i - 1]), "mergeRuns: input run is not sorted");
            }
        }
        total += run.size();
    }
    std::vector<TableEntry> out;
    out.reserve(total);
    if (runs.size() == 1) {
        out = runs.front();
        return out;
    }

    struct Head {
        std::size_t run;
        std::size_t pos;
    };
    // min-heap on (entry, run index): equal entries leave in run order
    auto after = [&runs](const Head &a, const Head &b) {
        const auto &ea = runs[a.run][a.pos];
        const auto &eb = runs[b.run][b.pos];
        if (entryLess(eb, ea)) return true;
        if (entryLess(ea, eb)) return false;
        return a.run > b.run;
    };
    std::priority_queue<Head, std::vector<Head>, decltype(after)> heap(after);
    for (std::size_t r = 0; r < runs.size(); ++r) {
        if (!runs[r].empty()) {
            heap.push({r, 0});
        }
    }
    while (!heap.empty()) {
        const Head h = heap.top();
        heap.pop();
        out.push_back(runs[h.run][h.pos]);
        if (h.pos + 1 < runs[h.run].size()) {
            heap.push({h.run, h.pos + 1});
        }
    }
    return out;
}

void
sortChunk(std::span<TableEntry> chunk, std::size_t sub) {
    require(sub >= 1 && sub <= 16, "sub-chunk width must be in [1, 16]");
    if (chunk.size() <= 1) {
        return;
    }
    std::vector<std::vector<TableEntry>> runs;
    runs.reserve((chunk.size() + sub - 1) / sub);
    for (std::size_t start = 0; start < chunk.size(); start += sub) {
        const std::size_t len = std::min(sub, chunk.size() - start);
        std::vector<TableEntry> run(chunk.begin() + static_cast<std::ptrdiff_t>(start),
                                    chunk.begin() + static_cast<std::ptrdiff_t>(start + len));
        bitonicSort16(run);
        runs.push_back(std::move(run));
    }
    const auto merged = mergeRuns(runs);
    std::copy(merged.begin(), merged.end(), chunk.begin());
}

GaussianTable
fullSort(TileId tile, std::vector<TableEntry> entries, const ChunkConfig &cfg, const CostModel &cost,
         TrafficLedger &ledger) {
    cfg.validate();
    {
        std::unordered_set<GaussianId> seen;
        seen.reserve(entries.size());
        for (const auto &e : entries) {
            require(seen.insert(e.id).second, "fullSort: duplicate id " + std::to_string(e.id) + " in tile");
        }
    }
    // conventional engine flow: sort chunks on-chip, then one global merge
    std::vector<std::vector<TableEntry>> chunks;
    for (std::size_t start = 0; start < entries.size(); start += cfg.capacity) {
        const std::size_t len = std::min(cfg.capacity, entries.size() - start);
        std::vector<TableEntry> chunk(entries.begin() + static_cast<std::ptrdiff_t>(start),
                                      entries.begin() + static_cast<std::ptrdiff_t>(start + len));
        sortChunk(chunk, cfg.sub);
        chunks.push_back(std::move(chunk));
    }
    GaussianTable table;
    table.tile    = tile;
    table.entries = chunks.empty() ? std::vector<TableEntry>{} : mergeRuns(chunks);
    for (auto &e : table.entries) {
        e.valid = true;
    }
    table.sortedFrame = 0;

    const std::uint64_t bytes = baselineSortTraffic(entries.size(), cost);
    ledger.record(Stage::SortReorder, bytes / 2, bytes - bytes / 2);
    return table;
}

GaussianTable
dynamicPartialSort(GaussianTable table, std::int64_t frameIndex, const ChunkConfig &cfg, const CostModel &cost,
                   TrafficLedger &ledger) {
    cfg.validate();
    require(frameIndex >= 1, "dynamicPartialSort needs frameIndex >= 1");
    const auto ranges = chunkBoundaries(table.entries.size(), cfg.capacity, frameParity(frameIndex));
    std::span<TableEntry> all(table.entries);
    for (const auto &r : ranges) {
        sortChunk(all.subspan(r.start, r.size()), cfg.sub);
    }
    const std::uint64_t bytes = table.entries.size() * cost.entryBytes;
    ledger.record(Stage::SortReorder, bytes, bytes);
    return table;
}

std::vector<TableEntry>
sortIncoming(std::vector<TableEntry> incoming, const ChunkConfig &cfg, const CostModel &cost,
             TrafficLedger &ledger) {
    cfg.validate();
    std::vector<std::vector<TableEntry>> chunks;
    for (std::size_t start = 0; start < incoming.size(); start += cfg.capacity) {
        const std::size_t len = std::min(cfg.capacity, incoming.size() - start);
        std::vector<TableEntry> chunk(incoming.begin() + static_cast<std::ptrdiff_t>(start),
                                      incoming.begin() + static_cast<std::ptrdiff_t>(start + len));
        sortChunk(chunk, cfg.sub);
        chunks.push_back(std::move(chunk));
    }
    const std::uint64_t bytes = incoming.size() * cost.entryBytes;
    ledger.record(Stage::SortIncoming, bytes, bytes);
    return chunks.empty() ? std::vector<TableEntry>{} : mergeRuns(chunks);
}

GaussianTable
mergeUpdate(const GaussianTable &reused, std::span<const TableEntry> incoming, std::int64_t frameIndex,
            const CostModel &cost, TrafficLedger &ledger) {
    std::unordered_set<GaussianId> incomingIds;
    incomingIds.reserve(incoming.size());
    for (std::size_t i = 0; i < incoming.size(); ++i) {
        require(i == 0 || entryLess(incoming[i - 1], incoming[i]),
                "mergeUpdate: incoming entries are not strictly sorted");
        require(incomingIds.insert(incoming[i].id).second,
                "mergeUpdate: duplicate incoming id " + std::to_string(incoming[i].id));
    }
    for (const auto &e : reused.entries) {
        require(!e.valid || !incomingIds.count(e.id),
                "mergeUpdate: id " + std::to_string(e.id) + " is both reused and incoming");
    }

    GaussianTable out;
    out.tile = reused.tile;
    out.entries.reserve(reused.entries.size() + incoming.size());
    std::size_t r = 0, i = 0;
    while (r < reused.entries.size() || i < incoming.size()) {
        if (r < reused.entries.size() && !reused.entries[r].valid) {
            ++r; // outgoing: dropped without shifting anything
            continue;
        }
        const bool takeIncoming =
            r == reused.entries.size() || (i < incoming.size() && entryLess(incoming[i], reused.entries[r]));
        TableEntry e = takeIncoming ? incoming[i++] : reused.entries[r++];
        e.valid      = true;
        out.entries.push_back(e);
    }
    out.sortedFrame = frameIndex;

    const std::uint64_t bytes = incoming.size() * cost.entryBytes;
    ledger.record(Stage::SortMerge, bytes, bytes);
    return out;
}

} // namespace splatsort
