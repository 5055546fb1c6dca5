#pragma once

#include "splatsort/preprocess.hpp"
#include "splatsort/raster.hpp"
#include "splatsort/sort.hpp"

#include <string>

namespace splatsort {

enum class RenderMode { Reuse, FullSort };

std::string toString(RenderMode mode);
RenderMode parseRenderMode(const std::string &name);

struct RenderConfig {
    ChunkConfig chunk;
    CostModel cost;
    RasterOptions raster;
    unsigned workers = 1;
};

/// Everything carried from one frame to the next in reuse mode.
struct RenderState {
    std::vector<GaussianTable> tables; // indexed by tile id; empty before the first frame
    TileMembership membership;

    bool empty() const { return tables.empty(); }
};

struct FrameReport {
    std::int64_t frameIndex = 0;
    RenderMode mode         = RenderMode::Reuse;
    bool bootstrap          = false; // tables rebuilt from scratch this frame
    TrafficLedger traffic;
    ProjectionDiagnostics diagnostics;
    std::size_t visible = 0;
    // per tile, indexed by tile id
    std::vector<std::size_t> reusedEntries; // table length entering the reorder pass
    std::vector<std::uint64_t> reorderBytes; // SortReorder bytes ledgered for the tile
    std::vector<std::size_t> incoming;
    std::vector<std::size_t> outgoing;
    std::vector<std::size_t> tableEntries;  // entries rasterized
    /// Tiles whose rasterization order differs from a from-scratch sort on this frame's depths.
    std::size_t tilesOutOfOrder = 0;
    std::size_t blendedTerms    = 0;
};

struct FrameResult {
    FrameImage image;
    RenderState state;
    FrameReport report;
    /// Per-tile assignments of this frame (ascending by id), for similarity analysis.
    TileAssignments assignments;
};

/// Renders one frame. Reuse mode on an empty state (frame 0) bootstraps with a full
/// sort; later frames run detect-incoming, the partial sort, the incoming sort, the
/// merge, rasterization and the deferred depth update. FullSort mode rebuilds every
/// table from scratch and carries no state.
FrameResult renderFrame(const Scene &scene, const Camera &camera, RenderState state, std::int64_t frameIndex,
                        RenderMode mode, const RenderConfig &cfg);

/// Renders a whole trajectory, frame indices starting at 0.
struct SequenceResult {
    std::vector<FrameImage> images;
    std::vector<FrameReport> reports;
    std::vector<TileAssignments> assignments;
    RenderState finalState;
};

SequenceResult renderSequence(const Scene &scene, const Trajectory &trajectory, RenderMode mode,
                              const RenderConfig &cfg);

} // namespace splatsort
