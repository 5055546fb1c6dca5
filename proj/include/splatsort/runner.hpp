#pragma once

#include "splatsort/io.hpp"

#include <optional>
#include <string>
#include <vector>

namespace splatsort {

struct SceneSource {
    std::string plyPath;    // when set, the scene is loaded from this file
    std::size_t count = 20000;
    double extent     = 10.0;
    std::uint64_t seed = 7;
};

struct TrajectorySpec {
    TrajectoryKind kind = TrajectoryKind::Orbit;
    std::size_t frames  = 60;
    double speedMultiplier = 1.0;
    std::uint64_t seed  = 0;
    /// Extra frames repeating the last pose (motion stops).
    std::size_t holdFrames = 0;
    TrajectoryOptions options;
};

enum class RunMode { Reuse, FullSort, Both };

struct RunConfig {
    SceneSource scene;
    TrajectorySpec trajectory;
    int width  = 512;
    int height = 512;
    RunMode mode = RunMode::Both;
    ChunkConfig chunk;
    CostModel cost;
    Eigen::Vector3d background = Eigen::Vector3d::Zero();
    std::string outputDir = "out";
    unsigned workers      = 1;
    bool writeImages      = true;
    bool dumpTables       = false;

    void validate() const;
};

/// Reads a JSON run config; absent keys keep their defaults. Throws Error naming the
/// offending key on a type or value problem.
RunConfig runConfigFromJson(const Json &j);
Json runConfigToJson(const RunConfig &cfg);

Scene loadScene(const SceneSource &source);
Trajectory buildTrajectory(const RunConfig &cfg);

struct ModeRun {
    RenderMode mode;
    std::vector<FrameReport> reports;
    std::vector<FrameImage> images;
    TrafficSummary traffic;
};

struct RunResult {
    std::vector<ModeRun> modes;
    SimilarityReport similarity;
    std::vector<double> psnr; // reuse vs full_sort per frame, Both mode only
    std::optional<double> medianPsnr, minPsnr;
    std::optional<double> sortReductionPercent;
};

/// Renders the configured trajectory and writes images, frame reports, traffic
/// reports, the similarity report and (Both mode) the per-frame PSNR comparison to
/// cfg.outputDir. With dumpTables, per-frame assignments go to assignments/ and the
/// final reuse tables next to the reuse frames. When `keepImages` is false, images are not retained in the result.
RunResult run(const RunConfig &cfg, bool keepImages = false);

/// Per-frame tile assignments only (no sorting or rasterization).
std::vector<TileAssignments> computeAssignments(const Scene &scene, const Trajectory &trajectory, unsigned workers);

/// Per-tile assignments as tables (tile id = index), for the binary snapshot format.
std::vector<GaussianTable> assignmentsToTables(const TileAssignments &assignments);
/// Reads frame_0000.bin, frame_0001.bin, ... written by a run with dumpTables set.
std::vector<TileAssignments> loadAssignmentDump(const std::string &dir);

std::string toString(RunMode mode);
RunMode parseRunMode(const std::string &name);

} // namespace splatsort
