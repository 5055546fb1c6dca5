#include "splatsort/ply.hpp"
#include "splatsort/runner.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>

using namespace splatsort;
namespace fs = std::filesystem;

namespace {

struct Overrides {
    std::string config;
    std::optional<std::string> ply, trajectory, mode, output;
    std::optional<std::size_t> n, frames, holdFrames, capacity, sub;
    std::optional<double> extent, speed;
    std::optional<std::uint64_t> seed;
    std::optional<int> width, height;
    std::optional<unsigned> workers;
    std::vector<double> background;
    bool noImages   = false;
    bool dumpTables = false;
};

void
addRunOptions(CLI::App &cmd, Overrides &o) {
    cmd.add_option("-c,--config", o.config, "JSON run config; flags below override it")->check(CLI::ExistingFile);
    cmd.add_option("--ply", o.ply, "load the scene from a PLY file");
    cmd.add_option("-n,--count", o.n, "synthetic scene size");
    cmd.add_option("--extent", o.extent, "synthetic scene extent");
    cmd.add_option("--seed", o.seed, "seed for scene and trajectory");
    cmd.add_option("--trajectory", o.trajectory, "orbit | dolly | static");
    cmd.add_option("--frames", o.frames, "number of frames");
    cmd.add_option("--speed", o.speed, "trajectory speed multiplier");
    cmd.add_option("--hold-frames", o.holdFrames, "extra frames holding the last pose");
    cmd.add_option("--width", o.width);
    cmd.add_option("--height", o.height);
    cmd.add_option("--chunk-capacity", o.capacity);
    cmd.add_option("--chunk-sub", o.sub);
    cmd.add_option("--background", o.background, "r g b in [0,1]")->expected(3);
    cmd.add_option("-j,--workers", o.workers);
    cmd.add_option("-o,--output", o.output, "output directory");
}

RunConfig
resolve(const Overrides &o) {
    RunConfig cfg;
    if (!o.config.empty()) {
        Json j;
        try {
            j = Json::parse(readFile(o.config));
        } catch (const Json::parse_error &e) {
            throw Error(o.config + ": " + e.what());
        }
        cfg = runConfigFromJson(j);
    }
    if (o.ply) cfg.scene.plyPath = *o.ply;
    if (o.n) cfg.scene.count = *o.n;
    if (o.extent) cfg.scene.extent = *o.extent;
    if (o.seed) cfg.scene.seed = cfg.trajectory.seed = *o.seed;
    if (o.trajectory) cfg.trajectory.kind = parseTrajectoryKind(*o.trajectory);
    if (o.frames) cfg.trajectory.frames = *o.frames;
    if (o.speed) cfg.trajectory.speedMultiplier = *o.speed;
    if (o.holdFrames) cfg.trajectory.holdFrames = *o.holdFrames;
    if (o.width) cfg.width = *o.width;
    if (o.height) cfg.height = *o.height;
    if (o.capacity) cfg.chunk.capacity = *o.capacity;
    if (o.sub) cfg.chunk.sub = *o.sub;
    if (o.background.size() == 3) cfg.background = {o.background[0], o.background[1], o.background[2]};
    if (o.workers) cfg.workers = *o.workers;
    if (o.mode) cfg.mode = parseRunMode(*o.mode);
    if (o.output) cfg.outputDir = *o.output;
    if (o.noImages) cfg.writeImages = false;
    if (o.dumpTables) cfg.dumpTables = true;
    cfg.validate();
    return cfg;
}

std::string
fmtDb(double db) {
    return std::isinf(db) ? "inf" : std::to_string(db);
}

std::vector<TrafficLedger>
loadLedgers(const std::string &path) {
    return parseTrafficCsv(readFile(path));
}

int
cmdRender(const Overrides &o) {
    const auto cfg = resolve(o);
    const auto res = run(cfg);
    for (const auto &m : res.modes) {
        std::cout << toString(m.mode) << ": frames=" << m.traffic.frames << " sort_bytes=" << m.traffic.sortBytes
                  << " total_bytes=" << m.traffic.totalBytes << "\n";
    }
    if (res.medianPsnr) {
        std::cout << "psnr median=" << fmtDb(*res.medianPsnr) << " min=" << fmtDb(*res.minPsnr) << " dB\n";
    }
    if (res.sortReductionPercent) {
        std::cout << "sort traffic reduction=" << *res.sortReductionPercent << "%\n";
    }
    std::cout << "wrote " << cfg.outputDir << "\n";
    return 0;
}

int
cmdCompare(const std::string &a, const std::string &b, const std::string &out) {
    auto load = [](const fs::path &p) {
        const auto data = readFile(p.string());
        return decodePpm(std::as_bytes(std::span(data.data(), data.size())));
    };
    Json result;
    if (fs::is_directory(a) && fs::is_directory(b)) {
        std::vector<std::string> names;
        for (const auto &e : fs::directory_iterator(a)) {
            if (e.path().extension() == ".ppm") names.push_back(e.path().filename().string());
        }
        std::sort(names.begin(), names.end());
        if (names.empty()) {
            throw Error(a + ": no .ppm frames found");
        }
        Json frames = Json::array();
        double worst = std::numeric_limits<double>::infinity();
        for (const auto &name : names) {
            if (!fs::exists(fs::path(b) / name)) {
                throw Error(b + ": missing " + name);
            }
            const double db = psnr(load(fs::path(a) / name), load(fs::path(b) / name));
            worst           = std::min(worst, db);
            frames.push_back({{"frame", name}, {"psnr_db", psnrToJson(db)}});
            std::cout << name << " " << fmtDb(db) << "\n";
        }
        result = {{"frames", frames}, {"min_psnr_db", psnrToJson(worst)}};
    } else {
        const double db = psnr(load(a), load(b));
        std::cout << fmtDb(db) << "\n";
        result = {{"psnr_db", psnrToJson(db)}};
    }
    if (!out.empty()) {
        writeFile(out, result.dump(2) + "\n");
    }
    return 0;
}

int
cmdSimilarity(const Overrides &o, const std::string &dumpDir) {
    const auto cfg = resolve(o);
    std::vector<TileAssignments> frames;
    if (!dumpDir.empty()) {
        frames = loadAssignmentDump(dumpDir);
    } else {
        frames = computeAssignments(loadScene(cfg.scene), buildTrajectory(cfg), cfg.workers);
    }
    const auto rep = analyzeSimilarity(frames);
    fs::create_directories(cfg.outputDir);
    const auto path = (fs::path(cfg.outputDir) / "similarity.json").string();
    writeFile(path, similarityToJson(rep).dump(1) + "\n");
    std::cout << "frames retaining (>=90% tiles at >=0.78): " << fractionOfFramesRetaining(rep, 0.78, 0.9) << "\n";
    if (rep.displacement) {
        std::cout << "displacement p90/p95/p99: " << rep.displacement->p90 << "/" << rep.displacement->p95 << "/"
                  << rep.displacement->p99 << "\n";
    }
    std::cout << "wrote " << path << "\n";
    return 0;
}

int
cmdTraffic(const std::string &csv, const std::string &baseline, const std::string &out) {
    const auto summary = summarize(loadLedgers(csv));
    Json j             = summaryToJson(summary);
    if (!baseline.empty()) {
        const auto base      = summarize(loadLedgers(baseline));
        const auto reduction = reductionPercent(base.sortBytes, summary.sortBytes);
        j["baseline_sort_bytes"]     = base.sortBytes;
        j["sort_reduction_percent"]  = reduction ? Json(*reduction) : Json(nullptr);
    }
    const auto text = j.dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        writeFile(out, text);
    }
    return 0;
}

int
cmdSynth(std::size_t n, double extent, std::uint64_t seed, const std::string &out) {
    const auto scene = synthScene(n, extent, seed);
    if (fs::path(out).extension() == ".json") {
        writeFile(out, sceneToJson(scene).dump() + "\n");
    } else {
        savePlyFile(scene, out);
    }
    std::cout << "wrote " << scene.gaussians.size() << " gaussians to " << out << "\n";
    return 0;
}

} // namespace

int
main(int argc, char **argv) {
    CLI::App app{"Tile-based gaussian splatting renderer with reuse-and-update sorting"};
    app.require_subcommand(1);

    Overrides renderOpts;
    auto *render = app.add_subcommand("render", "render a trajectory and write images and reports");
    addRunOptions(*render, renderOpts);
    render->add_option("--mode", renderOpts.mode, "reuse | full_sort | both");
    render->add_flag("--no-images", renderOpts.noImages, "skip writing PPM frames");
    render->add_flag("--dump-tables", renderOpts.dumpTables, "dump final reuse tables");

    std::string cmpA, cmpB, cmpOut;
    auto *compare = app.add_subcommand("compare", "PSNR between two PPM files or two frame directories");
    compare->add_option("a", cmpA)->required();
    compare->add_option("b", cmpB)->required();
    compare->add_option("-o,--output", cmpOut, "write JSON result here");

    Overrides simOpts;
    auto *similarity = app.add_subcommand("analyze-similarity", "per-tile retention and sort-order displacement");
    addRunOptions(*similarity, simOpts);
    std::string simDump;
    similarity->add_option("--from-dump", simDump, "recompute from a run's assignments/ directory")
        ->check(CLI::ExistingDirectory);

    std::string trafficCsvPath, trafficBaseline, trafficOut;
    auto *traffic = app.add_subcommand("traffic-report", "summarize a per-frame traffic CSV");
    traffic->add_option("csv", trafficCsvPath)->required()->check(CLI::ExistingFile);
    traffic->add_option("--baseline", trafficBaseline, "traffic CSV of the full-sort run")->check(CLI::ExistingFile);
    traffic->add_option("-o,--output", trafficOut);

    std::size_t synthN   = 20000;
    double synthExtent   = 10.0;
    std::uint64_t synthSeed = 7;
    std::string synthOut;
    auto *synth = app.add_subcommand("synth-scene", "write a synthetic scene (.ply, or .json)");
    synth->add_option("-n,--count", synthN);
    synth->add_option("--extent", synthExtent);
    synth->add_option("--seed", synthSeed);
    synth->add_option("-o,--output", synthOut)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (render->parsed()) return cmdRender(renderOpts);
        if (compare->parsed()) return cmdCompare(cmpA, cmpB, cmpOut);
        if (similarity->parsed()) return cmdSimilarity(simOpts, simDump);
        if (traffic->parsed()) return cmdTraffic(trafficCsvPath, trafficBaseline, trafficOut);
        if (synth->parsed()) return cmdSynth(synthN, synthExtent, synthSeed, synthOut);
    } catch (const PlyError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
