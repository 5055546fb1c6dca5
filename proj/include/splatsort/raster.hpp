#pragma once

#include "splatsort/preprocess.hpp"
#include "splatsort/table.hpp"
#include "splatsort/traffic.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace splatsort {

inline constexpr double kAlphaCutoff      = 1.0 / 255.0;
inline constexpr double kAlphaCap         = 0.99;
inline constexpr double kTransmittanceEnd = 1e-4;

/// Splat opacity at a pixel sample: min(0.99, o * exp(-q/2)); values below 1/255 read as 0.
double evalAlpha(const Gaussian2D &g, const Eigen::Vector2d &pixel);

/// Smallest conic quadratic form q(p - mean) over the closed rectangle [x0,x1]x[y0,y1].
double minQuadraticOverRect(const Gaussian2D &g, double x0, double y0, double x1, double y1);

/// True iff the splat's alpha reaches 1/255 somewhere in the closed region spanned by
/// the pixel samples of the `size`x`size` block at (originX, originY). Never false
/// when a pixel of the block has alpha >= 1/255.
bool intersectSubtile(const Gaussian2D &g, int originX, int originY, int size = kSubtileSize);

using TileBitmap = std::uint64_t;

/// Bit (sy * 8 + sx) set iff the splat intersects subtile (sx, sy) of the tile at the origin.
TileBitmap buildBitmap(const Gaussian2D &g, int tileOriginX, int tileOriginY);

/// buildBitmap(...) != 0, stopping at the first hit.
bool tileContributes(const Gaussian2D &g, int tileOriginX, int tileOriginY);

struct FrameImage {
    int width  = 0;
    int height = 0;
    std::vector<float> rgb; // row-major, 3 floats per pixel, in [0, 1]

    FrameImage() = default;
    FrameImage(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 0.0f) {}

    float *pixel(int x, int y) { return &rgb[(static_cast<std::size_t>(y) * width + x) * 3]; }
    const float *pixel(int x, int y) const { return &rgb[(static_cast<std::size_t>(y) * width + x) * 3]; }
    bool operator==(const FrameImage &) const = default;
};

struct RasterOptions {
    Eigen::Vector3d background = Eigen::Vector3d::Zero();
};

/// Front-to-back blend of `order` (already filtered to the subtile) into the pixels of
/// the subtile at (originX, originY); pixels outside the image are skipped.
/// Returns the number of blended terms. Throws ContractError for an id missing from
/// `features`.
std::size_t blendSubtile(std::span<const TableEntry> order, const FeatureTable &features, int originX,
                         int originY, const RasterOptions &opts, FrameImage &image);

/// Depth refresh and validity for one table entry, produced while rasterizing.
struct EntryUpdate {
    GaussianId id = 0;
    float newDepth = 0.0f;
    bool valid     = true;
    bool operator==(const EntryUpdate &) const = default;
};

struct TileRasterResult {
    std::vector<EntryUpdate> updates; // one per table entry, in table order
    std::size_t blendedTerms = 0;
    std::size_t outgoing     = 0;     // entries flagged invalid
};

/// Rasterizes one tile into `image`: bitmaps on the fly, per-subtile filtering, the
/// cumulative-OR validity flag and the depth refresh for the next frame. Ledgers one
/// feature read per entry and, with `writeback`, one table write-back.
TileRasterResult rasterizeTile(const GaussianTable &table, const FeatureTable &features, const TileGrid &grid,
                               const RasterOptions &opts, bool writeback, const CostModel &cost,
                               TrafficLedger &ledger, FrameImage &image);

/// Overwrites depth keys and valid flags; the order is left for the next sort.
/// Throws ContractError when updates do not line up one-to-one with the entries.
GaussianTable applyUpdates(GaussianTable table, std::span<const EntryUpdate> updates);

} // namespace splatsort
