#include "splatsort/raster.hpp"

#include <cmath>
#include <limits>

namespace splatsort {

double
evalAlpha(const Gaussian2D &g, const Eigen::Vector2d &pixel) {
    const double dx    = pixel.x() - g.mean2d.x();
    const double dy    = pixel.y() - g.mean2d.y();
    const double power = -0.5 * (g.conic.a * dx * dx + g.conic.c * dy * dy) - g.conic.b * dx * dy;
    const double alpha = std::min(kAlphaCap, g.opacity * std::exp(power));
    return alpha < kAlphaCutoff ? 0.0 : alpha;
}

namespace {

double
quadratic(const Conic &k, double dx, double dy) {
    return k.a * dx * dx + 2.0 * k.b * dx * dy + k.c * dy * dy;
}

// min over dv in [lo, hi] of q with the other offset fixed at `fixed`;
// `lead` is the coefficient of dv^2 (a or c).
double
edgeMin(const Conic &k, double fixed, double lo, double hi, bool fixedIsX) {
    const double lead = fixedIsX ? k.c : k.a;
    const double dv   = std::clamp(-k.b * fixed / lead, lo, hi);
    return fixedIsX ? quadratic(k, fixed, dv) : quadratic(k, dv, fixed);
}

} // namespace

double
minQuadraticOverRect(const Gaussian2D &g, double x0, double y0, double x1, double y1) {
    const double mx = g.mean2d.x(), my = g.mean2d.y();
    if (mx >= x0 && mx <= x1 && my >= y0 && my <= y1) {
        return 0.0;
    }
    // convex form with its minimum outside the rectangle: the minimum lies on an edge
    const double dx0 = x0 - mx, dx1 = x1 - mx, dy0 = y0 - my, dy1 = y1 - my;
    double best      = edgeMin(g.conic, dx0, dy0, dy1, true);
    best             = std::min(best, edgeMin(g.conic, dx1, dy0, dy1, true));
    best             = std::min(best, edgeMin(g.conic, dy0, dx0, dx1, false));
    best             = std::min(best, edgeMin(g.conic, dy1, dx0, dx1, false));
    return std::max(0.0, best);
}

bool
intersectSubtile(const Gaussian2D &g, int originX, int originY, int size) {
    if (g.opacity < kAlphaCutoff) {
        return false;
    }
    const double qmin = minQuadraticOverRect(g, originX + 0.5, originY + 0.5, originX + size - 0.5, originY + size - 0.5);
    // slack keeps rounding in the per-pixel evaluation from producing a false negative
    const double peak = g.opacity * std::exp(-0.5 * qmin * (1.0 - 1e-9));
    return std::min(kAlphaCap, peak) >= kAlphaCutoff * (1.0 - 1e-9);
}

TileBitmap
buildBitmap(const Gaussian2D &g, int tileOriginX, int tileOriginY) {
    TileBitmap mask = 0;
    for (int sy = 0; sy < kSubtilesPerSide; ++sy) {
        for (int sx = 0; sx < kSubtilesPerSide; ++sx) {
            if (intersectSubtile(g, tileOriginX + sx * kSubtileSize, tileOriginY + sy * kSubtileSize)) {
                mask |= TileBitmap{1} << (sy * kSubtilesPerSide + sx);
            }
        }
    }
    return mask;
}

bool
tileContributes(const Gaussian2D &g, int tileOriginX, int tileOriginY) {
    for (int sy = 0; sy < kSubtilesPerSide; ++sy) {
        for (int sx = 0; sx < kSubtilesPerSide; ++sx) {
            if (intersectSubtile(g, tileOriginX + sx * kSubtileSize, tileOriginY + sy * kSubtileSize)) {
                return true;
            }
        }
    }
    return false;
}

namespace {

std::size_t
blendPixels(std::span<const Gaussian2D *const> splats, int originX, int originY, const RasterOptions &opts,
            FrameImage &image) {
    std::size_t terms = 0;
    const int xEnd    = std::min(originX + kSubtileSize, image.width);
    const int yEnd    = std::min(originY + kSubtileSize, image.height);
    for (int y = originY; y < yEnd; ++y) {
        for (int x = originX; x < xEnd; ++x) {
            const Eigen::Vector2d sample(x + 0.5, y + 0.5);
            double t = 1.0;
            Eigen::Vector3d c = Eigen::Vector3d::Zero();
            for (const Gaussian2D *g : splats) {
                const double alpha = evalAlpha(*g, sample);
                if (alpha == 0.0) {
                    continue;
                }
                c += g->color * (alpha * t);
                t *= 1.0 - alpha;
                ++terms;
                if (t < kTransmittanceEnd) {
                    break;
                }
            }
            c += opts.background * t;
            float *px = image.pixel(x, y);
            for (int ch = 0; ch < 3; ++ch) {
                px[ch] = static_cast<float>(c[ch]);
            }
        }
    }
    return terms;
}

} // namespace

std::size_t
blendSubtile(std::span<const TableEntry> order, const FeatureTable &features, int originX, int originY,
             const RasterOptions &opts, FrameImage &image) {
    std::vector<const Gaussian2D *> splats;
    splats.reserve(order.size());
    for (const auto &e : order) {
        const Gaussian2D *g = features.find(e.id);
        require(g != nullptr, "blendSubtile: id " + std::to_string(e.id) + " missing from the feature table");
        splats.push_back(g);
    }
    return blendPixels(splats, originX, originY, opts, image);
}

TileRasterResult
rasterizeTile(const GaussianTable &table, const FeatureTable &features, const TileGrid &grid,
              const RasterOptions &opts, bool writeback, const CostModel &cost, TrafficLedger &ledger,
              FrameImage &image) {
    const int ox = grid.originX(table.tile);
    const int oy = grid.originY(table.tile);

    TileRasterResult result;
    result.updates.reserve(table.entries.size());
    std::vector<const Gaussian2D *> splat(table.entries.size(), nullptr);
    std::vector<TileBitmap> masks(table.entries.size(), 0);
    for (std::size_t i = 0; i < table.entries.size(); ++i) {
        const auto &e = table.entries[i];
        splat[i]      = features.find(e.id);
        if (splat[i] == nullptr) {
            // culled this frame: carried with its old depth until the next merge drops it
            result.updates.push_back({e.id, e.depthKey, false});
        } else {
            masks[i] = buildBitmap(*splat[i], ox, oy);
            result.updates.push_back({e.id, splat[i]->depthKey(), masks[i] != 0});
        }
        if (!result.updates.back().valid) {
            ++result.outgoing;
        }
    }

    std::vector<const Gaussian2D *> filtered;
    filtered.reserve(table.entries.size());
    for (int s = 0; s < kSubtilesPerSide * kSubtilesPerSide; ++s) {
        const int sx = ox + (s % kSubtilesPerSide) * kSubtileSize;
        const int sy = oy + (s / kSubtilesPerSide) * kSubtileSize;
        if (sx >= image.width || sy >= image.height) {
            continue;
        }
        filtered.clear();
        const TileBitmap bit = TileBitmap{1} << s;
        for (std::size_t i = 0; i < masks.size(); ++i) {
            if (masks[i] & bit) {
                filtered.push_back(splat[i]);
            }
        }
        result.blendedTerms += blendPixels(filtered, sx, sy, opts, image);
    }

    const std::uint64_t n = table.entries.size();
    ledger.record(Stage::RasterFeatureRead, n * cost.featureBytes, 0);
    if (writeback) {
        ledger.record(Stage::RasterWriteback, 0, n * cost.entryBytes);
    }
    return result;
}

GaussianTable
applyUpdates(GaussianTable table, std::span<const EntryUpdate> updates) {
    require(updates.size() == table.entries.size(),
            "applyUpdates: " + std::to_string(updates.size()) + " updates for " +
                std::to_string(table.entries.size()) + " entries");
    for (std::size_t i = 0; i < updates.size(); ++i) {
        auto &e = table.entries[i];
        require(updates[i].id == e.id, "applyUpdates: update " + std::to_string(i) + " targets a different id");
        e.depthKey = updates[i].newDepth;
        e.valid    = updates[i].valid;
    }
    return table;
}

} // namespace splatsort
