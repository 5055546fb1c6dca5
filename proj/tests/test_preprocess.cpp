#include "support.hpp"

#include "splatsort/preprocess.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace splatsort;
using namespace splatsort::testing;

namespace {

Camera
axisCamera() {
    Camera c;
    c.fx = c.fy = 100.0;
    c.cx = c.cy = 50.0;
    c.width = c.height = 100;
    c.near             = 0.1;
    c.far              = 100.0;
    return c;
}

Gaussian3D
splatAt(Eigen::Vector3f mean, float scale = 0.1f) {
    Gaussian3D g;
    g.mean         = mean;
    g.logScale     = Eigen::Vector3f::Constant(std::log(scale));
    g.opacityLogit = 2.0f;
    return g;
}

Eigen::Vector2d
pinhole(const Camera &cam, const Eigen::Vector3d &world) {
    const auto p = cam.toCamera(world);
    return {cam.fx * p.x() / p.z() + cam.cx, cam.fy * p.y() / p.z() + cam.cy};
}

// Real SH written from the normalization constants, independent of the renderer's table.
double
shBasis(int k, const Eigen::Vector3d &d) {
    const double x = d.x(), y = d.y(), z = d.z(), pi = M_PI;
    switch (k) {
    case 0: return 0.5 * std::sqrt(1.0 / pi);
    case 1: return -std::sqrt(3.0 / (4 * pi)) * y;
    case 2: return std::sqrt(3.0 / (4 * pi)) * z;
    case 3: return -std::sqrt(3.0 / (4 * pi)) * x;
    case 4: return std::sqrt(15.0 / (4 * pi)) * x * y;
    case 5: return -std::sqrt(15.0 / (4 * pi)) * y * z;
    case 6: return std::sqrt(5.0 / (16 * pi)) * (3 * z * z - 1);
    case 7: return -std::sqrt(15.0 / (4 * pi)) * x * z;
    case 8: return std::sqrt(15.0 / (16 * pi)) * (x * x - y * y);
    case 9: return -std::sqrt(35.0 / (32 * pi)) * y * (3 * x * x - y * y);
    case 10: return std::sqrt(105.0 / (4 * pi)) * x * y * z;
    case 11: return -std::sqrt(21.0 / (32 * pi)) * y * (5 * z * z - 1);
    case 12: return std::sqrt(7.0 / (16 * pi)) * z * (5 * z * z - 3);
    case 13: return -std::sqrt(21.0 / (32 * pi)) * x * (5 * z * z - 1);
    case 14: return std::sqrt(105.0 / (16 * pi)) * z * (x * x - y * y);
    case 15: return -std::sqrt(35.0 / (32 * pi)) * x * (x * x - 3 * y * y);
    }
    return 0.0;
}

std::vector<TileId>
bruteTiles(const Gaussian2D &g, const TileGrid &grid) {
    std::vector<TileId> out;
    for (TileId t = 0; t < grid.tileCount(); ++t) {
        const double x0 = grid.originX(t), y0 = grid.originY(t);
        const bool hit  = g.mean2d.x() + g.radius >= x0 && g.mean2d.x() - g.radius < x0 + kTileSize &&
                         g.mean2d.y() + g.radius >= y0 && g.mean2d.y() - g.radius < y0 + kTileSize;
        if (hit) out.push_back(t);
    }
    return out;
}

} // namespace

TEST(FrustumCull, BehindCameraExcluded) {
    Scene s;
    s.gaussians.push_back(splatAt({0, 0, -5}));
    EXPECT_TRUE(frustumCull(s, axisCamera()).empty());
}

TEST(FrustumCull, CenterAtMidDepthIncluded) {
    Scene s;
    s.gaussians.push_back(splatAt({0, 0, 50.05f}));
    EXPECT_EQ(frustumCull(s, axisCamera()), (std::vector<GaussianId>{0}));
}

TEST(FrustumCull, WideSplatJustOutsideIncluded) {
    // mean lands at u = -1 px with a ~50 px radius
    Scene s;
    s.gaussians.push_back(splatAt({-0.51f, 0, 1.0f}, 0.166f));
    const auto cam = axisCamera();
    ASSERT_EQ(frustumCull(s, cam), (std::vector<GaussianId>{0}));
    const auto g = projectGaussian(s.gaussians[0], cam);
    ASSERT_TRUE(g);
    EXPECT_NEAR(g->mean2d.x(), -1.0, 1e-4);
    EXPECT_GE(g->radius, 50);
    // the dilation is justified: some pixel of the image sees the splat
    EXPECT_GE(bruteMaxAlpha(*g, 0, 0, 8), kAlphaCutoff);

    Scene far;
    far.gaussians.push_back(splatAt({-0.6f, 0, 1.0f}, 0.01f));
    EXPECT_TRUE(frustumCull(far, cam).empty());
}

TEST(FrustumCull, BeyondFarExcluded) {
    Scene s;
    s.gaussians.push_back(splatAt({0, 0, 150}));
    EXPECT_TRUE(frustumCull(s, axisCamera()).empty());
}

TEST(ProjectGaussian, OnAxisClosedForm) {
    const auto cam = axisCamera();
    const float s = 0.2f, z = 4.0f;
    const auto g  = projectGaussian(splatAt({0, 0, z}, s), cam);
    ASSERT_TRUE(g);
    EXPECT_NEAR(g->mean2d.x(), 50.0, 1e-9);
    EXPECT_NEAR(g->mean2d.y(), 50.0, 1e-9);
    const double var = std::pow(100.0 * s / z, 2) + 0.3;
    EXPECT_NEAR(g->conic.a, 1.0 / var, 1e-6);
    EXPECT_NEAR(g->conic.c, 1.0 / var, 1e-6);
    EXPECT_NEAR(g->conic.b, 0.0, 1e-9);
    EXPECT_EQ(g->radius, static_cast<int>(std::ceil(3.0 * std::sqrt(var))));
    EXPECT_DOUBLE_EQ(g->depth, z);
    EXPECT_NEAR(g->opacity, sigmoid(2.0), 1e-12);
}

TEST(ProjectGaussian, OffAxisMatchesNumericJacobian) {
    Rng rng(21);
    const auto traj = synthTrajectory(TrajectoryKind::Orbit, 8, 5.0, 4);
    const auto scene = synthScene(60, 6.0, 12);
    for (const auto &cam : traj.frames) {
        for (const auto &g : scene.gaussians) {
            const Eigen::Vector3d m = g.mean.cast<double>();
            Eigen::Matrix<double, 2, 3> jac;
            const double h = 1e-5;
            for (int k = 0; k < 3; ++k) {
                Eigen::Vector3d dp = Eigen::Vector3d::Zero();
                dp[k]              = h;
                jac.col(k)         = (pinhole(cam, m + dp) - pinhole(cam, m - dp)) / (2 * h);
            }
            const Eigen::Matrix2d want = jac * activate(g).covariance * jac.transpose();
            const Eigen::Matrix2d got  = projectCovariance(activate(g).covariance, cam.toCamera(m), cam);
            EXPECT_LE((got - want).norm(), 1e-4 * want.norm());
        }
    }
}

TEST(ProjectGaussian, InFrontOfNearRejected) {
    EXPECT_THROW(projectGaussian(splatAt({0, 0, 0.05f}), axisCamera()), ContractError);
}

TEST(ProjectScene, DiagnosticsAndOrder) {
    Scene s = synthScene(500, 10.0, 5);
    const auto cam = synthTrajectory(TrajectoryKind::Orbit, 1, 1.0, 0).frames[0];
    ProjectionDiagnostics d;
    const auto out  = projectScene(s, cam, 1, &d);
    const auto kept = frustumCull(s, cam);
    EXPECT_EQ(out.size() + d.culled + d.singular, s.size());
    EXPECT_EQ(out.size() + d.singular, kept.size());
    for (std::size_t i = 1; i < out.size(); ++i) EXPECT_LT(out[i - 1].id, out[i].id);
    EXPECT_EQ(projectScene(s, cam, 3), out);
}

TEST(EvalShColor, DegreeZero) {
    std::array<Eigen::Vector3f, kShCoeffs> sh{};
    const Eigen::Vector3d dir(0, 0, 1);
    EXPECT_TRUE(evalShColor(sh, 0, dir).isApprox(Eigen::Vector3d::Constant(0.5)));
    sh[0] = Eigen::Vector3f::Constant(1.7725f);
    EXPECT_TRUE(evalShColor(sh, 0, dir).isApprox(Eigen::Vector3d::Ones()));
    sh[0] = Eigen::Vector3f(0.5f, -0.5f, 0.0f);
    const auto c = evalShColor(sh, 0, dir);
    EXPECT_NEAR(c.x(), 0.28209479 * 0.5 + 0.5, 1e-7);
    EXPECT_NEAR(c.y(), 0.5 - 0.28209479 * 0.5, 1e-7);
}

TEST(EvalShColor, MatchesIndependentBasis) {
    Rng rng(17);
    for (int degree = 1; degree <= 3; ++degree) {
        for (int trial = 0; trial < 200; ++trial) {
            std::array<Eigen::Vector3f, kShCoeffs> sh{};
            for (auto &c : sh) c = Eigen::Vector3f(uniform(rng, -.3, .3), uniform(rng, -.3, .3), uniform(rng, -.3, .3));
            Eigen::Vector3d dir(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
            dir = trial == 0 ? Eigen::Vector3d(0, 0, 1) : dir.normalized();
            Eigen::Vector3d want = Eigen::Vector3d::Constant(0.5);
            for (int k = 0; k < (degree + 1) * (degree + 1); ++k) want += shBasis(k, dir) * sh[k].cast<double>();
            want = want.cwiseMax(0.0).cwiseMin(1.0);
            ASSERT_LE((evalShColor(sh, degree, dir) - want).cwiseAbs().maxCoeff(), 1e-7);
        }
    }
}

TEST(EvalShColor, NonUnitDirectionRejected) {
    std::array<Eigen::Vector3f, kShCoeffs> sh{};
    EXPECT_THROW(evalShColor(sh, 0, {0, 0, 2}), ContractError);
}

TEST(AssignTiles, Examples) {
    const TileGrid grid(128, 128);
    EXPECT_EQ(assignTiles(makeSplat(0, 30, 30, {1, 0, 1}, 1), grid), (std::vector<TileId>{0}));
    auto junction   = makeSplat(0, 64, 64, {1, 0, 1}, 1);
    junction.radius = 2;
    EXPECT_EQ(assignTiles(junction, grid), (std::vector<TileId>{0, 1, 2, 3}));
    auto g   = makeSplat(0, 60, 60, {1, 0, 1}, 1);
    g.radius = 10;
    EXPECT_EQ(assignTiles(g, grid), (std::vector<TileId>{0, 1, 2, 3}));
}

TEST(AssignTiles, MatchesBruteForce) {
    Rng rng(33);
    const TileGrid grid(300, 200); // partial tiles on both axes
    for (int n = 0; n < 1000; ++n) {
        auto g   = makeSplat(0, uniform(rng, -100, 400), uniform(rng, -100, 300), {1, 0, 1}, 1);
        g.radius = static_cast<int>(uniformIndex(rng, 1, 150));
        ASSERT_EQ(assignTiles(g, grid), bruteTiles(g, grid));
    }
}

TEST(FeatureTable, EmptyAndLedger) {
    TrafficLedger l;
    EXPECT_EQ(buildFeatureTable({}, {}, l).size(), 0u);
    EXPECT_EQ(l.totalBytes(), 0u);
    std::vector<Gaussian2D> ten;
    for (GaussianId i = 0; i < 10; ++i) ten.push_back(makeSplat(i * 3, 0, 0, {1, 0, 1}, 1));
    const auto t = buildFeatureTable(ten, {}, l);
    EXPECT_EQ(l.at(Stage::Preprocess), (StageBytes{0, 480}));
    EXPECT_EQ(t.find(1), nullptr);
    EXPECT_EQ(t.find(1000), nullptr);
    ASSERT_NE(t.find(27), nullptr);
    EXPECT_EQ(t.find(27)->id, 27u);
}

TEST(FeatureTable, DuplicateRejected) {
    EXPECT_THROW(FeatureTable({makeSplat(2, 0, 0, {1, 0, 1}, 1), makeSplat(2, 1, 1, {1, 0, 1}, 1)}), ContractError);
}

TEST(BinFeatures, RefinedSubsetOfAabb) {
    const auto scene = synthScene(2000, 10.0, 3);
    const auto cam   = synthTrajectory(TrajectoryKind::Orbit, 1, 1.0, 1, {.width = 200, .height = 150}).frames[0];
    TrafficLedger l;
    const auto features = buildFeatureTable(projectScene(scene, cam, 1), {}, l);
    const TileGrid grid(200, 150);
    const auto bins = binFeatures(features, grid, 2);
    ASSERT_EQ(bins.size(), grid.tileCount());
    std::size_t total = 0;
    for (TileId t = 0; t < bins.size(); ++t) {
        for (std::size_t i = 0; i < bins[t].size(); ++i) {
            const auto &e = bins[t][i];
            if (i > 0) ASSERT_LT(bins[t][i - 1].id, e.id);
            const auto *g = features.find(e.id);
            ASSERT_NE(g, nullptr);
            EXPECT_EQ(e.depthKey, g->depthKey());
            const auto aabb = assignTiles(*g, grid);
            EXPECT_TRUE(std::find(aabb.begin(), aabb.end(), t) != aabb.end());
            EXPECT_NE(buildBitmap(*g, grid.originX(t), grid.originY(t)), 0u);
        }
        total += bins[t].size();
    }
    EXPECT_GT(total, 0u);
    EXPECT_EQ(binFeatures(features, grid, 1), bins);
}

TEST(DetectIncoming, FrameZeroEverythingIncoming) {
    TileAssignments a{{{1, 1, true}, {4, 2, true}}, {{2, 0.5f, true}}};
    const auto in = detectIncoming(a, TileMembership(2));
    EXPECT_EQ(in[0].entries, a[0]);
    EXPECT_EQ(in[1].entries, a[1]);
}

TEST(DetectIncoming, SetDifference) {
    TileMembership prev(1);
    const std::vector<TableEntry> table{{10, 1, true}, {11, 2, true}, {99, 3, false}};
    prev.refresh(0, table);
    EXPECT_FALSE(prev.contains(0, 99));
    TileAssignments a{{{11, 1, true}, {12, 2, true}, {13, 3, true}}};
    const auto in = detectIncoming(a, prev);
    EXPECT_EQ(in[0].entries, (std::vector<TableEntry>{{12, 2, true}, {13, 3, true}}));
}

TEST(DetectIncoming, RandomMatchesSetOracle) {
    Rng rng(44);
    for (int trial = 0; trial < 200; ++trial) {
        TileMembership prev(3);
        TileAssignments a(3);
        for (TileId t = 0; t < 3; ++t) {
            auto old = randomEntries(rng, uniformIndex(rng, 0, 50), 120);
            prev.refresh(t, old);
            auto cur = randomEntries(rng, uniformIndex(rng, 0, 50), 120);
            std::sort(cur.begin(), cur.end(), [](auto &x, auto &y) { return x.id < y.id; });
            a[t] = cur;
        }
        const auto in = detectIncoming(a, prev);
        for (TileId t = 0; t < 3; ++t) {
            std::vector<TableEntry> want;
            for (const auto &e : a[t])
                if (!prev.contains(t, e.id)) want.push_back(e);
            ASSERT_EQ(in[t].entries, want);
            for (const auto &e : in[t].entries) ASSERT_FALSE(prev.contains(t, e.id));
        }
    }
}
