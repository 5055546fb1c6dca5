#pragma once

#include "splatsort/raster.hpp"
#include "splatsort/sort.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace splatsort::testing {

using Rng = std::mt19937_64;

inline double
uniform(Rng &rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t
uniformIndex(Rng &rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// n entries with distinct ids drawn from [0, idSpace) and keys from a small integer
/// range so ties occur.
inline std::vector<TableEntry>
randomEntries(Rng &rng, std::size_t n, std::size_t idSpace = 0, int keyRange = 1000) {
    if (idSpace < n) idSpace = n * 4 + 16;
    std::vector<GaussianId> ids(idSpace);
    std::iota(ids.begin(), ids.end(), 0u);
    std::shuffle(ids.begin(), ids.end(), rng);
    std::vector<TableEntry> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = {ids[i], static_cast<float>(std::uniform_int_distribution<int>(0, keyRange)(rng)), true};
    }
    return out;
}

inline std::vector<TableEntry>
oracleSorted(std::vector<TableEntry> v) {
    std::sort(v.begin(), v.end(), [](const TableEntry &a, const TableEntry &b) {
        if (a.depthKey != b.depthKey) return a.depthKey < b.depthKey;
        return a.id < b.id;
    });
    return v;
}

inline Gaussian2D
makeSplat(GaussianId id, double mx, double my, Conic conic, double opacity, double depth = 1.0,
          Eigen::Vector3d color = Eigen::Vector3d(1, 1, 1)) {
    Gaussian2D g;
    g.id      = id;
    g.mean2d  = {mx, my};
    g.conic   = conic;
    g.opacity = opacity;
    g.depth   = depth;
    g.color   = color;
    const double det = conic.a * conic.c - conic.b * conic.b;
    // radius from the covariance (inverse conic)
    const double ca = conic.c / det, cc = conic.a / det, cb = -conic.b / det;
    const double mid = 0.5 * (ca + cc);
    const double lam = mid + std::sqrt(std::max(0.0, mid * mid - (ca * cc - cb * cb)));
    g.radius         = std::max(1, static_cast<int>(std::ceil(3.0 * std::sqrt(lam))));
    return g;
}

/// Random positive-definite conic with covariance eigenvalues in [sMin^2, sMax^2].
inline Conic
randomConic(Rng &rng, double sMin, double sMax) {
    const double s1 = uniform(rng, sMin, sMax), s2 = uniform(rng, sMin, sMax), th = uniform(rng, 0, M_PI);
    const double c = std::cos(th), s = std::sin(th);
    Eigen::Matrix2d r;
    r << c, -s, s, c;
    const Eigen::Matrix2d cov = r * Eigen::Vector2d(s1 * s1, s2 * s2).asDiagonal() * r.transpose();
    const Eigen::Matrix2d inv = cov.inverse();
    return {inv(0, 0), inv(0, 1), inv(1, 1)};
}

/// Per-pixel blend of every splat in `order` over the whole tile, no subtile filtering.
inline void
monolithicTile(const std::vector<Gaussian2D> &order, int ox, int oy, const RasterOptions &opts, FrameImage &image) {
    for (int y = oy; y < std::min(oy + kTileSize, image.height); ++y) {
        for (int x = ox; x < std::min(ox + kTileSize, image.width); ++x) {
            const Eigen::Vector2d p(x + 0.5, y + 0.5);
            double t = 1.0;
            Eigen::Vector3d c = Eigen::Vector3d::Zero();
            for (const auto &g : order) {
                const double a = evalAlpha(g, p);
                if (a == 0.0) continue;
                c += g.color * (a * t);
                t *= 1.0 - a;
                if (t < kTransmittanceEnd) break;
            }
            c += opts.background * t;
            for (int ch = 0; ch < 3; ++ch) image.pixel(x, y)[ch] = static_cast<float>(c[ch]);
        }
    }
}

/// Largest alpha over the pixel samples of a block, by brute force.
inline double
bruteMaxAlpha(const Gaussian2D &g, int ox, int oy, int size) {
    double best = 0.0;
    for (int y = oy; y < oy + size; ++y)
        for (int x = ox; x < ox + size; ++x) best = std::max(best, evalAlpha(g, {x + 0.5, y + 0.5}));
    return best;
}

} // namespace splatsort::testing
