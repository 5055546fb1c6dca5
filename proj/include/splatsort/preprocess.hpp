#pragma once

#include "splatsort/scene.hpp"
#include "splatsort/table.hpp"
#include "splatsort/traffic.hpp"

#include <Eigen/Core>

#include <optional>
#include <unordered_set>
#include <vector>

namespace splatsort {

inline constexpr int kTileSize    = 64;
inline constexpr int kSubtileSize = 8;
inline constexpr int kSubtilesPerSide = kTileSize / kSubtileSize;

/// Coefficients of the inverse 2D covariance [[a, b], [b, c]].
struct Conic {
    double a = 1.0, b = 0.0, c = 1.0;
    bool operator==(const Conic &) const = default;
};

/// Per-frame projected splat consumed by rasterization.
struct Gaussian2D {
    GaussianId id = 0;
    Eigen::Vector2d mean2d = Eigen::Vector2d::Zero(); // pixels; pixel (i, j) samples (i + .5, j + .5)
    Conic conic;
    double depth = 0.0;
    Eigen::Vector3d color = Eigen::Vector3d::Zero();
    double opacity = 0.0;
    int radius = 1;

    float depthKey() const { return static_cast<float>(depth); }
    bool operator==(const Gaussian2D &) const = default;
};

/// Real SH basis (degree <= 3) applied per channel, offset by 0.5 and clamped to [0, 1].
/// Throws ContractError unless |viewDir| = 1 within 1e-6.
Eigen::Vector3d evalShColor(const std::array<Eigen::Vector3f, kShCoeffs> &sh, int degree,
                            const Eigen::Vector3d &viewDir);

/// Upper-left 2x2 of J W cov W^T J^T at camera-space point `pCam` (no dilation).
Eigen::Matrix2d projectCovariance(const Eigen::Matrix3d &covWorld, const Eigen::Vector3d &pCam,
                                  const Camera &camera);

/// Dilation added to the projected covariance before inversion, pixel^2.
inline constexpr double kCovarianceDilation = 0.3;

/// Projects a visible Gaussian. Returns nullopt when the dilated 2D covariance is
/// numerically singular. Throws ContractError when depth < near.
std::optional<Gaussian2D> projectGaussian(const Gaussian3D &g, const Camera &camera);

/// Ids kept by the frustum test: near <= depth <= far and the projected mean lies in
/// the image rectangle dilated by the projected 3-sigma radius.
std::vector<GaussianId> frustumCull(const Scene &scene, const Camera &camera);

struct ProjectionDiagnostics {
    std::size_t culled   = 0; // rejected by the frustum test
    std::size_t singular = 0; // dropped for a singular 2D covariance
    bool operator==(const ProjectionDiagnostics &) const = default;
};

/// frustumCull followed by projectGaussian for every kept splat, in id order.
std::vector<Gaussian2D> projectScene(const Scene &scene, const Camera &camera, unsigned workers,
                                     ProjectionDiagnostics *diag = nullptr);

class TileGrid {
  public:
    TileGrid(int width, int height);

    int width() const { return mWidth; }
    int height() const { return mHeight; }
    int tilesX() const { return mTilesX; }
    int tilesY() const { return mTilesY; }
    std::size_t tileCount() const { return static_cast<std::size_t>(mTilesX) * mTilesY; }
    int originX(TileId tile) const { return static_cast<int>(tile % mTilesX) * kTileSize; }
    int originY(TileId tile) const { return static_cast<int>(tile / mTilesX) * kTileSize; }

  private:
    int mWidth, mHeight, mTilesX, mTilesY;
};

/// Tiles (row-major ids, ascending) whose square intersects mean2d +/- radius.
std::vector<TileId> assignTiles(const Gaussian2D &g, const TileGrid &grid);

/// Projected features of the visible splats, keyed by id.
class FeatureTable {
  public:
    FeatureTable() = default;
    /// Throws ContractError on a duplicate id.
    explicit FeatureTable(std::vector<Gaussian2D> features);

    /// nullptr when `id` was not projected this frame.
    const Gaussian2D *find(GaussianId id) const;
    bool contains(GaussianId id) const { return find(id) != nullptr; }
    std::size_t size() const { return mFeatures.size(); }
    const std::vector<Gaussian2D> &features() const { return mFeatures; }

  private:
    std::vector<Gaussian2D> mFeatures;
    std::vector<std::int32_t> mSlot; // id -> index into mFeatures, -1 if absent
};

/// Builds the table and ledgers featureBytes per entry as preprocessing writes.
FeatureTable buildFeatureTable(std::vector<Gaussian2D> features, const CostModel &cost, TrafficLedger &ledger);

/// Per-tile (id, depth key) lists, ascending by id.
using TileAssignments = std::vector<std::vector<TableEntry>>;

/// Duplicates every projected splat into the tiles it overlaps. Candidates come from
/// assignTiles; a candidate is kept when its subtile bitmap for that tile is non-empty,
/// so every assignment contributes to at least one pixel of its tile.
TileAssignments binFeatures(const FeatureTable &features, const TileGrid &grid, unsigned workers);

/// Ids present (and valid) in each tile's Gaussian table after a frame's update.
class TileMembership {
  public:
    TileMembership() = default;
    explicit TileMembership(std::size_t tiles) : mTiles(tiles) {}

    std::size_t tileCount() const { return mTiles.size(); }
    bool contains(TileId tile, GaussianId id) const;
    std::size_t size(TileId tile) const { return mTiles.at(tile).size(); }
    /// Replaces a tile's set with the valid entries of `table`.
    void refresh(TileId tile, std::span<const TableEntry> table);

  private:
    std::vector<std::unordered_set<GaussianId>> mTiles;
};

struct IncomingTable {
    TileId tile = 0;
    std::vector<TableEntry> entries; // ascending by id
};

/// Entries assigned to a tile this frame that are not in its previous membership.
/// An empty membership (frame 0) makes every assignment incoming.
std::vector<IncomingTable> detectIncoming(const TileAssignments &assignments, const TileMembership &prev);

} // namespace splatsort
