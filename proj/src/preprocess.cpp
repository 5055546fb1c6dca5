#include "splatsort/preprocess.hpp"

#include "splatsort/raster.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace splatsort {

namespace {

constexpr double kShC0   = 0.28209479177387814;
constexpr double kShC1   = 0.4886025119029199;
constexpr double kShC2[] = {1.0925484305920792, -1.0925484305920792, 0.31539156525252005, -1.0925484305920792,
                            0.5462742152960396};
constexpr double kShC3[] = {-0.5900435899266435, 2.890611442640554, -0.4570457994644658, 0.3731763325901154,
                            -0.4570457994644658, 1.445305721320277,  -0.5900435899266435};

struct Projection {
    Eigen::Vector3d pCam;
    Eigen::Vector2d mean2d;
    Eigen::Matrix2d cov2d; // dilated
    int radius = 0;
    bool singular = false;
};

Projection
projectCore(const Gaussian3D &g, const Camera &camera) {
    Projection p;
    p.pCam           = camera.toCamera(g.mean.cast<double>());
    const double z   = p.pCam.z();
    p.mean2d         = {camera.fx * p.pCam.x() / z + camera.cx, camera.fy * p.pCam.y() / z + camera.cy};
    p.cov2d          = projectCovariance(activate(g).covariance, p.pCam, camera);
    p.cov2d(0, 0)   += kCovarianceDilation;
    p.cov2d(1, 1)   += kCovarianceDilation;
    const double det = p.cov2d.determinant();
    if (!(det > 0.0) || !std::isfinite(det)) {
        p.singular = true;
        return p;
    }
    const double mid    = 0.5 * (p.cov2d(0, 0) + p.cov2d(1, 1));
    const double lambda = mid + std::sqrt(std::max(0.0, mid * mid - det));
    p.radius            = static_cast<int>(std::ceil(3.0 * std::sqrt(lambda)));
    return p;
}

bool
depthInRange(double z, const Camera &camera) {
    return z >= camera.near && z <= camera.far;
}

bool
insideDilatedImage(const Projection &p, const Camera &camera) {
    const double r = p.radius;
    return p.mean2d.x() >= -r && p.mean2d.x() <= camera.width + r && p.mean2d.y() >= -r &&
           p.mean2d.y() <= camera.height + r;
}

Gaussian2D
finishProjection(const Gaussian3D &g, const Projection &p, const Camera &camera) {
    Gaussian2D out;
    out.id            = g.id;
    out.mean2d        = p.mean2d;
    const double det  = p.cov2d.determinant();
    out.conic         = {p.cov2d(1, 1) / det, -p.cov2d(0, 1) / det, p.cov2d(0, 0) / det};
    out.depth         = p.pCam.z();
    out.opacity       = sigmoid(g.opacityLogit);
    out.radius        = std::max(1, p.radius);
    const Eigen::Vector3d dir = (g.mean.cast<double>() - camera.center()).normalized();
    out.color         = evalShColor(g.sh, g.shDegree, dir);
    return out;
}

} // namespace

Eigen::Vector3d
evalShColor(const std::array<Eigen::Vector3f, kShCoeffs> &sh, int degree, const Eigen::Vector3d &viewDir) {
    require(std::abs(viewDir.norm() - 1.0) <= 1e-6, "evalShColor: view direction must be unit length");
    auto c = [&sh](int k) -> Eigen::Vector3d { return sh[k].cast<double>(); };
    Eigen::Vector3d result = kShC0 * c(0);
    if (degree > 0) {
        const double x = viewDir.x(), y = viewDir.y(), z = viewDir.z();
        result += -kShC1 * y * c(1) + kShC1 * z * c(2) - kShC1 * x * c(3);
        if (degree > 1) {
            const double xx = x * x, yy = y * y, zz = z * z;
            const double xy = x * y, yz = y * z, xz = x * z;
            result += kShC2[0] * xy * c(4) + kShC2[1] * yz * c(5) + kShC2[2] * (2.0 * zz - xx - yy) * c(6) +
                      kShC2[3] * xz * c(7) + kShC2[4] * (xx - yy) * c(8);
            if (degree > 2) {
                result += kShC3[0] * y * (3.0 * xx - yy) * c(9) + kShC3[1] * xy * z * c(10) +
                          kShC3[2] * y * (4.0 * zz - xx - yy) * c(11) +
                          kShC3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy) * c(12) +
                          kShC3[4] * x * (4.0 * zz - xx - yy) * c(13) + kShC3[5] * z * (xx - yy) * c(14) +
                          kShC3[6] * x * (xx - 3.0 * yy) * c(15);
            }
        }
    }
    for (int ch = 0; ch < 3; ++ch) {
        result[ch] = std::clamp(result[ch] + 0.5, 0.0, 1.0);
    }
    return result;
}

Eigen::Matrix2d
projectCovariance(const Eigen::Matrix3d &covWorld, const Eigen::Vector3d &pCam, const Camera &camera) {
    const double z = pCam.z();
    Eigen::Matrix<double, 2, 3> jac;
    jac << camera.fx / z, 0.0, -camera.fx * pCam.x() / (z * z), 0.0, camera.fy / z, -camera.fy * pCam.y() / (z * z);
    const Eigen::Matrix<double, 2, 3> t = jac * camera.rotation;
    Eigen::Matrix2d cov                 = t * covWorld * t.transpose();
    cov(1, 0)                           = cov(0, 1);
    return cov;
}

std::optional<Gaussian2D>
projectGaussian(const Gaussian3D &g, const Camera &camera) {
    const double z = camera.toCamera(g.mean.cast<double>()).z();
    require(z >= camera.near, "projectGaussian: splat " + std::to_string(g.id) + " lies in front of the near plane");
    const Projection p = projectCore(g, camera);
    if (p.singular) {
        return std::nullopt;
    }
    return finishProjection(g, p, camera);
}

std::vector<GaussianId>
frustumCull(const Scene &scene, const Camera &camera) {
    std::vector<GaussianId> kept;
    for (const auto &g : scene.gaussians) {
        const double z = camera.toCamera(g.mean.cast<double>()).z();
        if (!depthInRange(z, camera)) {
            continue;
        }
        const Projection p = projectCore(g, camera);
        if (p.singular || insideDilatedImage(p, camera)) {
            // singular splats pass the frustum; projection drops them afterwards
            kept.push_back(g.id);
        }
    }
    return kept;
}

std::vector<Gaussian2D>
projectScene(const Scene &scene, const Camera &camera, unsigned workers, ProjectionDiagnostics *diag) {
    enum class Outcome : std::uint8_t { Kept, Culled, Singular };
    const std::size_t n = scene.size();
    std::vector<Outcome> outcome(n, Outcome::Culled);
    std::vector<Gaussian2D> projected(n);
    parallelFor(n, workers, [&](std::size_t i) {
        const auto &g  = scene.gaussians[i];
        const double z = camera.toCamera(g.mean.cast<double>()).z();
        if (!depthInRange(z, camera)) {
            return;
        }
        const Projection p = projectCore(g, camera);
        if (p.singular) {
            outcome[i] = Outcome::Singular;
            return;
        }
        if (!insideDilatedImage(p, camera)) {
            return;
        }
        projected[i] = finishProjection(g, p, camera);
        outcome[i]   = Outcome::Kept;
    });

    std::vector<Gaussian2D> out;
    ProjectionDiagnostics d;
    for (std::size_t i = 0; i < n; ++i) {
        switch (outcome[i]) {
        case Outcome::Kept: out.push_back(projected[i]); break;
        case Outcome::Culled: ++d.culled; break;
        case Outcome::Singular: ++d.singular; break;
        }
    }
    if (diag) {
        *diag = d;
    }
    return out;
}

TileGrid::TileGrid(int width, int height)
    : mWidth(width), mHeight(height), mTilesX((width + kTileSize - 1) / kTileSize),
      mTilesY((height + kTileSize - 1) / kTileSize) {
    require(width > 0 && height > 0, "tile grid needs a positive resolution");
}

std::vector<TileId>
assignTiles(const Gaussian2D &g, const TileGrid &grid) {
    require(g.radius >= 1, "assignTiles: radius must be >= 1");
    const double r = g.radius;
    const int x0   = static_cast<int>(std::floor((g.mean2d.x() - r) / kTileSize));
    const int x1   = static_cast<int>(std::floor((g.mean2d.x() + r) / kTileSize));
    const int y0   = static_cast<int>(std::floor((g.mean2d.y() - r) / kTileSize));
    const int y1   = static_cast<int>(std::floor((g.mean2d.y() + r) / kTileSize));
    std::vector<TileId> tiles;
    for (int ty = std::max(0, y0); ty <= std::min(grid.tilesY() - 1, y1); ++ty) {
        for (int tx = std::max(0, x0); tx <= std::min(grid.tilesX() - 1, x1); ++tx) {
            tiles.push_back(static_cast<TileId>(ty * grid.tilesX() + tx));
        }
    }
    return tiles;
}

FeatureTable::FeatureTable(std::vector<Gaussian2D> features) : mFeatures(std::move(features)) {
    GaussianId maxId = 0;
    for (const auto &f : mFeatures) {
        maxId = std::max(maxId, f.id);
    }
    mSlot.assign(mFeatures.empty() ? 0 : static_cast<std::size_t>(maxId) + 1, -1);
    for (std::size_t i = 0; i < mFeatures.size(); ++i) {
        auto &slot = mSlot[mFeatures[i].id];
        require(slot < 0, "feature table: duplicate id " + std::to_string(mFeatures[i].id));
        slot = static_cast<std::int32_t>(i);
    }
}

const Gaussian2D *
FeatureTable::find(GaussianId id) const {
    if (id >= mSlot.size() || mSlot[id] < 0) {
        return nullptr;
    }
    return &mFeatures[static_cast<std::size_t>(mSlot[id])];
}

FeatureTable
buildFeatureTable(std::vector<Gaussian2D> features, const CostModel &cost, TrafficLedger &ledger) {
    FeatureTable table(std::move(features));
    ledger.record(Stage::Preprocess, 0, table.size() * cost.featureBytes);
    return table;
}

TileAssignments
binFeatures(const FeatureTable &features, const TileGrid &grid, unsigned workers) {
    const auto &list = features.features();
    std::vector<std::vector<TileId>> perFeature(list.size());
    parallelFor(list.size(), workers, [&](std::size_t i) {
        for (const TileId t : assignTiles(list[i], grid)) {
            if (tileContributes(list[i], grid.originX(t), grid.originY(t))) {
                perFeature[i].push_back(t);
            }
        }
    });
    // features are in id order, so each tile list comes out ascending by id
    std::vector<std::size_t> order(list.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&list](std::size_t a, std::size_t b) { return list[a].id < list[b].id; });

    TileAssignments out(grid.tileCount());
    for (const std::size_t i : order) {
        for (const TileId t : perFeature[i]) {
            out[t].push_back({list[i].id, list[i].depthKey(), true});
        }
    }
    return out;
}

bool
TileMembership::contains(TileId tile, GaussianId id) const {
    return tile < mTiles.size() && mTiles[tile].count(id) != 0;
}

void
TileMembership::refresh(TileId tile, std::span<const TableEntry> table) {
    auto &set = mTiles.at(tile);
    set.clear();
    for (const auto &e : table) {
        if (e.valid) {
            set.insert(e.id);
        }
    }
}

std::vector<IncomingTable>
detectIncoming(const TileAssignments &assignments, const TileMembership &prev) {
    std::vector<IncomingTable> out(assignments.size());
    for (std::size_t t = 0; t < assignments.size(); ++t) {
        out[t].tile = static_cast<TileId>(t);
        for (const auto &e : assignments[t]) {
            if (!prev.contains(static_cast<TileId>(t), e.id)) {
                out[t].entries.push_back(e);
            }
        }
        std::sort(out[t].entries.begin(), out[t].entries.end(),
                  [](const TableEntry &a, const TableEntry &b) { return a.id < b.id; });
    }
    return out;
}

} // namespace splatsort
