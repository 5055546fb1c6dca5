#include "splatsort/runner.hpp"

#include "splatsort/ply.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

namespace splatsort {

namespace fs = std::filesystem;

namespace {

std::string
dumpName(std::size_t f) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%04zu.bin", f);
    return buf;
}

} // namespace

std::string
toString(RunMode mode) {
    switch (mode) {
    case RunMode::Reuse: return "reuse";
    case RunMode::FullSort: return "full_sort";
    case RunMode::Both: return "both";
    }
    return "both";
}

RunMode
parseRunMode(const std::string &name) {
    if (name == "reuse") return RunMode::Reuse;
    if (name == "full_sort") return RunMode::FullSort;
    if (name == "both") return RunMode::Both;
    throw Error("unknown mode '" + name + "' (expected reuse, full_sort or both)");
}

void
RunConfig::validate() const {
    require(width > 0 && height > 0, "resolution must be positive");
    require(trajectory.frames >= 1, "trajectory.frames must be >= 1");
    require(trajectory.speedMultiplier > 0.0, "trajectory.speed_multiplier must be positive");
    require(workers >= 1, "workers must be >= 1");
    chunk.validate();
    cost.validate();
}

namespace {

template <typename T>
void
readKey(const Json &j, const char *key, T &out, const std::string &path) {
    if (!j.contains(key)) {
        return;
    }
    try {
        out = j.at(key).get<T>();
    } catch (const Json::exception &e) {
        throw Error("config: bad value for '" + path + key + "': " + e.what());
    }
}

} // namespace

RunConfig
runConfigFromJson(const Json &j) {
    if (!j.is_object()) {
        throw Error("config: top level must be a JSON object");
    }
    RunConfig cfg;
    if (j.contains("scene")) {
        const auto &s = j.at("scene");
        readKey(s, "ply", cfg.scene.plyPath, "scene.");
        readKey(s, "n", cfg.scene.count, "scene.");
        readKey(s, "extent", cfg.scene.extent, "scene.");
        readKey(s, "seed", cfg.scene.seed, "scene.");
    }
    if (j.contains("trajectory")) {
        const auto &t = j.at("trajectory");
        std::string kind = toString(cfg.trajectory.kind);
        readKey(t, "kind", kind, "trajectory.");
        cfg.trajectory.kind = parseTrajectoryKind(kind);
        readKey(t, "frames", cfg.trajectory.frames, "trajectory.");
        readKey(t, "speed_multiplier", cfg.trajectory.speedMultiplier, "trajectory.");
        readKey(t, "seed", cfg.trajectory.seed, "trajectory.");
        readKey(t, "hold_frames", cfg.trajectory.holdFrames, "trajectory.");
        auto &o = cfg.trajectory.options;
        readKey(t, "fov_y", o.fovY, "trajectory.");
        readKey(t, "radius", o.radius, "trajectory.");
        readKey(t, "elevation", o.elevation, "trajectory.");
        readKey(t, "step_radians", o.stepRadians, "trajectory.");
        readKey(t, "dolly_step", o.dollyStep, "trajectory.");
        readKey(t, "near", o.near, "trajectory.");
        readKey(t, "far", o.far, "trajectory.");
    }
    if (j.contains("seed")) {
        // a top-level seed seeds whatever the sections leave unset
        std::uint64_t seed = 0;
        readKey(j, "seed", seed, "");
        if (!j.contains("scene") || !j.at("scene").contains("seed")) cfg.scene.seed = seed;
        if (!j.contains("trajectory") || !j.at("trajectory").contains("seed")) cfg.trajectory.seed = seed;
    }
    readKey(j, "width", cfg.width, "");
    readKey(j, "height", cfg.height, "");
    std::string mode = toString(cfg.mode);
    readKey(j, "mode", mode, "");
    cfg.mode = parseRunMode(mode);
    if (j.contains("chunk")) {
        readKey(j.at("chunk"), "capacity", cfg.chunk.capacity, "chunk.");
        readKey(j.at("chunk"), "sub", cfg.chunk.sub, "chunk.");
    }
    if (j.contains("cost")) {
        const auto &c = j.at("cost");
        readKey(c, "entry_bytes", cfg.cost.entryBytes, "cost.");
        readKey(c, "feature_bytes", cfg.cost.featureBytes, "cost.");
        readKey(c, "baseline_radix_passes", cfg.cost.baselineRadixPasses, "cost.");
        readKey(c, "pixel_bytes", cfg.cost.pixelBytes, "cost.");
    }
    if (j.contains("background")) {
        std::vector<double> bg;
        readKey(j, "background", bg, "");
        if (bg.size() != 3) {
            throw Error("config: 'background' must be an RGB triplet");
        }
        cfg.background = {bg[0], bg[1], bg[2]};
    }
    readKey(j, "output", cfg.outputDir, "");
    readKey(j, "workers", cfg.workers, "");
    readKey(j, "write_images", cfg.writeImages, "");
    readKey(j, "dump_tables", cfg.dumpTables, "");
    cfg.validate();
    return cfg;
}

Json
runConfigToJson(const RunConfig &cfg) {
    const auto &o = cfg.trajectory.options;
    Json scene    = {{"n", cfg.scene.count}, {"extent", cfg.scene.extent}, {"seed", cfg.scene.seed}};
    if (!cfg.scene.plyPath.empty()) {
        scene["ply"] = cfg.scene.plyPath;
    }
    return {{"version", kJsonFormatVersion},
            {"scene", scene},
            {"trajectory",
             {{"kind", toString(cfg.trajectory.kind)},
              {"frames", cfg.trajectory.frames},
              {"speed_multiplier", cfg.trajectory.speedMultiplier},
              {"seed", cfg.trajectory.seed},
              {"hold_frames", cfg.trajectory.holdFrames},
              {"fov_y", o.fovY},
              {"radius", o.radius},
              {"elevation", o.elevation},
              {"step_radians", o.stepRadians},
              {"dolly_step", o.dollyStep},
              {"near", o.near},
              {"far", o.far}}},
            {"width", cfg.width},
            {"height", cfg.height},
            {"mode", toString(cfg.mode)},
            {"chunk", {{"capacity", cfg.chunk.capacity}, {"sub", cfg.chunk.sub}}},
            {"cost",
             {{"entry_bytes", cfg.cost.entryBytes},
              {"feature_bytes", cfg.cost.featureBytes},
              {"baseline_radix_passes", cfg.cost.baselineRadixPasses},
              {"pixel_bytes", cfg.cost.pixelBytes}}},
            {"background", {cfg.background.x(), cfg.background.y(), cfg.background.z()}},
            {"output", cfg.outputDir},
            {"workers", cfg.workers},
            {"write_images", cfg.writeImages},
            {"dump_tables", cfg.dumpTables}};
}

Scene
loadScene(const SceneSource &source) {
    if (!source.plyPath.empty()) {
        return loadPlyFile(source.plyPath);
    }
    return synthScene(source.count, source.extent, source.seed);
}

Trajectory
buildTrajectory(const RunConfig &cfg) {
    auto opts   = cfg.trajectory.options;
    opts.width  = cfg.width;
    opts.height = cfg.height;
    auto traj   = synthTrajectory(cfg.trajectory.kind, cfg.trajectory.frames, cfg.trajectory.speedMultiplier,
                                  cfg.trajectory.seed, opts);
    const Camera last = traj.frames.back();
    for (std::size_t i = 0; i < cfg.trajectory.holdFrames; ++i) {
        traj.frames.push_back(last);
    }
    return traj;
}

std::vector<TileAssignments>
computeAssignments(const Scene &scene, const Trajectory &trajectory, unsigned workers) {
    trajectory.validate();
    std::vector<TileAssignments> out;
    CostModel cost;
    for (const auto &cam : trajectory.frames) {
        TrafficLedger scratch;
        const TileGrid grid(cam.width, cam.height);
        const auto features = buildFeatureTable(projectScene(scene, cam, workers), cost, scratch);
        out.push_back(binFeatures(features, grid, workers));
    }
    return out;
}

std::vector<GaussianTable>
assignmentsToTables(const TileAssignments &assignments) {
    std::vector<GaussianTable> tables(assignments.size());
    for (std::size_t t = 0; t < assignments.size(); ++t) {
        tables[t].tile    = static_cast<TileId>(t);
        tables[t].entries = assignments[t];
    }
    return tables;
}

std::vector<TileAssignments>
loadAssignmentDump(const std::string &dir) {
    std::vector<TileAssignments> frames;
    for (std::size_t f = 0;; ++f) {
        const fs::path path = fs::path(dir) / dumpName(f);
        if (!fs::exists(path)) {
            break;
        }
        const auto data   = readFile(path.string());
        const auto tables = decodeTables(std::as_bytes(std::span(data.data(), data.size())));
        TileAssignments a(tables.size());
        for (std::size_t t = 0; t < tables.size(); ++t) {
            if (tables[t].tile != t) {
                throw Error(path.string() + ": tables are not indexed by tile id");
            }
            a[t] = tables[t].entries;
        }
        frames.push_back(std::move(a));
    }
    if (frames.empty()) {
        throw Error(dir + ": no frame_0000.bin assignment dump found");
    }
    return frames;
}

namespace {

std::string
frameName(std::size_t f) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%04zu.ppm", f);
    return buf;
}

std::optional<double>
median(std::vector<double> v) {
    if (v.empty()) {
        return std::nullopt;
    }
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

} // namespace

RunResult
run(const RunConfig &cfg, bool keepImages) {
    cfg.validate();
    const Scene scene     = loadScene(cfg.scene);
    const Trajectory traj = buildTrajectory(cfg);

    RenderConfig rc;
    rc.chunk             = cfg.chunk;
    rc.cost              = cfg.cost;
    rc.raster.background = cfg.background;
    rc.workers           = cfg.workers;

    const fs::path outDir(cfg.outputDir);
    fs::create_directories(outDir);
    writeFile((outDir / "config.json").string(), runConfigToJson(cfg).dump(2) + "\n");

    std::vector<RenderMode> modes;
    if (cfg.mode != RunMode::FullSort) modes.push_back(RenderMode::Reuse);
    if (cfg.mode != RunMode::Reuse) modes.push_back(RenderMode::FullSort);

    RunResult result;
    std::vector<TileAssignments> assignments;
    std::vector<std::vector<FrameImage>> images;
    for (const auto mode : modes) {
        const fs::path dir = outDir / toString(mode);
        fs::create_directories(dir);
        auto seq = renderSequence(scene, traj, mode, rc);

        if (cfg.writeImages) {
            for (std::size_t f = 0; f < seq.images.size(); ++f) {
                writeFile((dir / frameName(f)).string(), encodePpm(seq.images[f]));
            }
        }
        Json reports = Json::array();
        std::vector<TrafficLedger> ledgers;
        for (const auto &r : seq.reports) {
            reports.push_back(frameReportToJson(r));
            ledgers.push_back(r.traffic);
        }
        writeFile((dir / "frames.json").string(), reports.dump(1) + "\n");
        writeFile((dir / "traffic.csv").string(), trafficCsv(ledgers));

        ModeRun mr;
        mr.mode    = mode;
        mr.traffic = summarize(ledgers);
        writeFile((dir / "traffic.json").string(), summaryToJson(mr.traffic).dump(2) + "\n");
        if (cfg.dumpTables && mode == RenderMode::Reuse) {
            writeFile((dir / "tables_final.bin").string(), encodeTables(seq.finalState.tables));
            writeFile((dir / "tables_final.json").string(), tablesToJson(seq.finalState.tables).dump() + "\n");
        }
        mr.reports = std::move(seq.reports);
        if (assignments.empty()) {
            assignments = std::move(seq.assignments);
        }
        images.push_back(std::move(seq.images));
        result.modes.push_back(std::move(mr));
    }

    if (cfg.dumpTables) {
        const fs::path dir = outDir / "assignments";
        fs::create_directories(dir);
        for (std::size_t f = 0; f < assignments.size(); ++f) {
            writeFile((dir / dumpName(f)).string(), encodeTables(assignmentsToTables(assignments[f])));
        }
    }

    result.similarity = analyzeSimilarity(assignments);
    writeFile((outDir / "similarity.json").string(), similarityToJson(result.similarity).dump(1) + "\n");

    if (modes.size() == 2) {
        std::string csv = "frame,psnr_db\n";
        Json perFrame   = Json::array();
        for (std::size_t f = 0; f < images[0].size(); ++f) {
            const double db = psnr(images[0][f], images[1][f]);
            result.psnr.push_back(db);
            csv += std::to_string(f) + "," + (std::isinf(db) ? std::string("inf") : std::to_string(db)) + "\n";
            perFrame.push_back(psnrToJson(db));
        }
        result.medianPsnr = median(result.psnr);
        result.minPsnr    = *std::min_element(result.psnr.begin(), result.psnr.end());
        result.sortReductionPercent =
            reductionPercent(result.modes[1].traffic.sortBytes, result.modes[0].traffic.sortBytes);
        const auto totalReduction =
            reductionPercent(result.modes[1].traffic.totalBytes, result.modes[0].traffic.totalBytes);
        writeFile((outDir / "psnr.csv").string(), csv);
        Json cmp = {{"psnr_db", perFrame},
                    {"median_psnr_db", psnrToJson(*result.medianPsnr)},
                    {"min_psnr_db", psnrToJson(*result.minPsnr)},
                    {"sort_bytes_reuse", result.modes[0].traffic.sortBytes},
                    {"sort_bytes_full_sort", result.modes[1].traffic.sortBytes},
                    {"sort_reduction_percent", result.sortReductionPercent ? Json(*result.sortReductionPercent) : Json(nullptr)},
                    {"total_reduction_percent", totalReduction ? Json(*totalReduction) : Json(nullptr)}};
        writeFile((outDir / "comparison.json").string(), cmp.dump(2) + "\n");
    }

    if (keepImages) {
        for (std::size_t m = 0; m < result.modes.size(); ++m) {
            result.modes[m].images = std::move(images[m]);
        }
    }
    return result;
}

} // namespace splatsort
