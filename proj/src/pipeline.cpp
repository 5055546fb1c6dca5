#include "splatsort/pipeline.hpp"

namespace splatsort {

std::string
toString(RenderMode mode) {
    return mode == RenderMode::Reuse ? "reuse" : "full_sort";
}

RenderMode
parseRenderMode(const std::string &name) {
    if (name == "reuse") return RenderMode::Reuse;
    if (name == "full_sort") return RenderMode::FullSort;
    throw Error("unknown render mode '" + name + "' (expected reuse or full_sort)");
}

namespace {

bool
inCurrentOrder(const GaussianTable &table, const FeatureTable &features) {
    const Gaussian2D *prev = nullptr;
    for (const auto &e : table.entries) {
        const Gaussian2D *g = features.find(e.id);
        if (!g) {
            continue;
        }
        if (prev && !entryLess({prev->id, prev->depthKey(), true}, {g->id, g->depthKey(), true})) {
            return false;
        }
        prev = g;
    }
    return true;
}

} // namespace

FrameResult
renderFrame(const Scene &scene, const Camera &camera, RenderState state, std::int64_t frameIndex, RenderMode mode,
            const RenderConfig &cfg) {
    camera.validate();
    cfg.chunk.validate();
    cfg.cost.validate();
    require(frameIndex >= 0, "frame index must be non-negative");

    const TileGrid grid(camera.width, camera.height);
    const std::size_t tiles = grid.tileCount();

    FrameResult out;
    auto &report      = out.report;
    report.frameIndex = frameIndex;
    report.mode       = mode;

    // stages 1-2: cull, project, duplicate into tiles
    auto projected        = projectScene(scene, camera, cfg.workers, &report.diagnostics);
    report.visible        = projected.size();
    const auto features   = buildFeatureTable(std::move(projected), cfg.cost, report.traffic);
    out.assignments       = binFeatures(features, grid, cfg.workers);

    const bool bootstrap = mode == RenderMode::FullSort || state.empty();
    if (!bootstrap) {
        require(state.tables.size() == tiles && state.membership.tileCount() == tiles,
                "render state does not match the tile grid");
    }
    report.bootstrap = bootstrap;
    const auto incoming = bootstrap ? std::vector<IncomingTable>{} : detectIncoming(out.assignments, state.membership);

    report.reusedEntries.assign(tiles, 0);
    report.reorderBytes.assign(tiles, 0);
    report.incoming.assign(tiles, 0);
    report.outgoing.assign(tiles, 0);
    report.tableEntries.assign(tiles, 0);

    RenderState next;
    next.tables.resize(tiles);
    next.membership = TileMembership(tiles);
    out.image       = FrameImage(camera.width, camera.height);
    std::vector<TrafficLedger> tileLedgers(tiles);
    std::vector<std::size_t> blended(tiles, 0);
    std::vector<std::uint8_t> outOfOrder(tiles, 0);

    parallelFor(tiles, cfg.workers, [&](std::size_t t) {
        const auto tile = static_cast<TileId>(t);
        auto &ledger    = tileLedgers[t];
        GaussianTable table;
        if (bootstrap) {
            table                  = fullSort(tile, out.assignments[t], cfg.chunk, cfg.cost, ledger);
            report.incoming[t]     = out.assignments[t].size();
            report.reorderBytes[t] = ledger.at(Stage::SortReorder).total();
        } else {
            GaussianTable reused     = std::move(state.tables[t]);
            report.reusedEntries[t]  = reused.size();
            const auto before        = ledger.at(Stage::SortReorder).total();
            reused                   = dynamicPartialSort(std::move(reused), frameIndex, cfg.chunk, cfg.cost, ledger);
            report.reorderBytes[t]   = ledger.at(Stage::SortReorder).total() - before;
            const auto sortedIncoming = sortIncoming(incoming[t].entries, cfg.chunk, cfg.cost, ledger);
            report.incoming[t]       = sortedIncoming.size();
            table                    = mergeUpdate(reused, sortedIncoming, frameIndex, cfg.cost, ledger);
        }
        report.tableEntries[t] = table.size();
        outOfOrder[t]          = inCurrentOrder(table, features) ? 0 : 1;

        const bool writeback = mode == RenderMode::Reuse;
        auto raster = rasterizeTile(table, features, grid, cfg.raster, writeback, cfg.cost, ledger, out.image);
        report.outgoing[t] = raster.outgoing;
        blended[t]         = raster.blendedTerms;
        if (mode == RenderMode::Reuse) {
            table = applyUpdates(std::move(table), raster.updates);
            next.membership.refresh(tile, table.entries);
        }
        next.tables[t] = std::move(table);
    });

    for (std::size_t t = 0; t < tiles; ++t) {
        report.traffic.merge(tileLedgers[t]);
        report.blendedTerms += blended[t];
        report.tilesOutOfOrder += outOfOrder[t];
    }
    report.traffic.record(Stage::ImageWrite, 0,
                          static_cast<std::uint64_t>(camera.width) * camera.height * cfg.cost.pixelBytes);

    if (mode == RenderMode::Reuse) {
        out.state = std::move(next);
    }
    return out;
}

SequenceResult
renderSequence(const Scene &scene, const Trajectory &trajectory, RenderMode mode, const RenderConfig &cfg) {
    trajectory.validate();
    SequenceResult seq;
    RenderState state;
    for (std::size_t f = 0; f < trajectory.frames.size(); ++f) {
        auto frame = renderFrame(scene, trajectory.frames[f], std::move(state), static_cast<std::int64_t>(f), mode, cfg);
        state      = std::move(frame.state);
        seq.images.push_back(std::move(frame.image));
        seq.reports.push_back(std::move(frame.report));
        seq.assignments.push_back(std::move(frame.assignments));
    }
    seq.finalState = std::move(state);
    return seq;
}

} // namespace splatsort
