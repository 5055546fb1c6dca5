#pragma once

#include "splatsort/analysis.hpp"
#include "splatsort/pipeline.hpp"
#include "splatsort/scene.hpp"

#include <json.hpp>

#include <span>
#include <string>

namespace splatsort {

using Json = nlohmann::json;

inline constexpr int kJsonFormatVersion     = 1;
inline constexpr std::uint32_t kTableMagic  = 0x42545353; // "SSTB" little-endian
inline constexpr std::uint32_t kTableFormatVersion = 1;

// Versioned JSON fixtures. Readers throw Error on a missing/unsupported "version".
Json sceneToJson(const Scene &scene);
Scene sceneFromJson(const Json &j);
Json cameraToJson(const Camera &camera);
Camera cameraFromJson(const Json &j);
Json trajectoryToJson(const Trajectory &trajectory);
Trajectory trajectoryFromJson(const Json &j);
Json tablesToJson(std::span<const GaussianTable> tables);
std::vector<GaussianTable> tablesFromJson(const Json &j);

/// Binary table snapshot: magic, version, table count, then per table the tile id,
/// entry count and (id | valid << 31, depth key as float32) pairs, all little-endian u32.
std::string encodeTables(std::span<const GaussianTable> tables);
std::vector<GaussianTable> decodeTables(std::span<const std::byte> bytes);

Json ledgerToJson(const TrafficLedger &ledger);
Json summaryToJson(const TrafficSummary &summary);
Json frameReportToJson(const FrameReport &report);
Json similarityToJson(const SimilarityReport &report);

/// Per-frame time series, one row per (frame, stage): "frame,stage,read,write".
std::string trafficCsv(std::span<const TrafficLedger> frames);
/// Parses trafficCsv output back into per-frame ledgers.
std::vector<TrafficLedger> parseTrafficCsv(const std::string &csv);

/// PSNR as JSON: a number, or the string "inf" for identical images.
Json psnrToJson(double db);

/// 8-bit binary PPM (P6); values are clamped to [0, 1] and rounded.
std::string encodePpm(const FrameImage &image);
FrameImage decodePpm(std::span<const std::byte> bytes);

std::string readFile(const std::string &path);
void writeFile(const std::string &path, const std::string &data);

} // namespace splatsort
