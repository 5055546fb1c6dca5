#include "splatsort/io.hpp"
#include "splatsort/scene.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace splatsort;

TEST(Activate, IdentityGivesUnitCovariance) {
    Gaussian3D g;
    const auto a = activate(g);
    EXPECT_DOUBLE_EQ(a.opacity, 0.5);
    EXPECT_TRUE(a.scales.isApprox(Eigen::Vector3d::Ones()));
    EXPECT_LT((a.covariance - Eigen::Matrix3d::Identity()).norm(), 1e-12);
}

TEST(Activate, OpacitySaturates) {
    Gaussian3D g;
    g.opacityLogit = 20.0f;
    EXPECT_GT(activate(g).opacity, 1.0 - 1e-8);
}

TEST(Activate, EigenvaluesAreSquaredScales) {
    std::mt19937_64 rng(4);
    std::normal_distribution<float> n01;
    for (int trial = 0; trial < 50; ++trial) {
        Gaussian3D g;
        g.rotation = {n01(rng), n01(rng), n01(rng), n01(rng)};
        g.logScale = {0.0f, std::log(2.0f), std::log(3.0f)};
        const auto a = activate(g);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(a.covariance);
        EXPECT_NEAR(es.eigenvalues()[0], 1.0, 1e-5);
        EXPECT_NEAR(es.eigenvalues()[1], 4.0, 1e-5);
        EXPECT_NEAR(es.eigenvalues()[2], 9.0, 1e-5);
        EXPECT_LT((a.covariance - a.covariance.transpose()).norm(), 1e-12);
    }
}

TEST(Activate, ZeroQuaternionRejected) {
    Gaussian3D g;
    g.rotation = Eigen::Vector4f::Zero();
    EXPECT_THROW(activate(g), ContractError);
}

TEST(Activate, CovariancePositiveDefinite) {
    const auto scene = synthScene(200, 10.0, 3);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n01;
    for (const auto &g : scene.gaussians) {
        const auto a = activate(g);
        for (int k = 0; k < 100; ++k) {
            const Eigen::Vector3d x(n01(rng), n01(rng), n01(rng));
            ASSERT_GT(x.dot(a.covariance * x), 0.0);
        }
    }
}

TEST(SynthScene, EmptyScene) {
    EXPECT_TRUE(synthScene(0, 10.0, 1).gaussians.empty());
}

TEST(SynthScene, Deterministic) {
    EXPECT_EQ(sceneToJson(synthScene(300, 5.0, 42)).dump(), sceneToJson(synthScene(300, 5.0, 42)).dump());
    EXPECT_FALSE(synthScene(300, 5.0, 42) == synthScene(300, 5.0, 43));
}

TEST(SynthScene, InvariantSweep) {
    const auto scene = synthScene(1000, 10.0, 7);
    ASSERT_EQ(scene.size(), 1000u);
    EXPECT_NO_THROW(scene.validate());
    for (const auto &g : scene.gaussians) {
        EXPECT_NEAR(g.rotation.cast<double>().norm(), 1.0, 1e-6);
        EXPECT_TRUE((activate(g).scales.array() > 0.0).all());
        EXPECT_GE(g.opacityLogit, -2.0f);
        EXPECT_LE(g.opacityLogit, 4.0f);
        EXPECT_LE(g.mean.cwiseAbs().maxCoeff(), 5.0f);
        EXPECT_EQ(g.shDegree, 0);
    }
}

TEST(Scene, ValidateRequiresDenseIds) {
    auto scene = synthScene(3, 1.0, 1);
    scene.gaussians[1].id = 5;
    EXPECT_THROW(scene.validate(), ContractError);
}

TEST(SynthTrajectory, SingleFrame) {
    EXPECT_EQ(synthTrajectory(TrajectoryKind::Orbit, 1, 1.0, 0).frames.size(), 1u);
}

TEST(SynthTrajectory, ZeroFramesRejected) {
    EXPECT_THROW(synthTrajectory(TrajectoryKind::Orbit, 0, 1.0, 0), ContractError);
}

TEST(SynthTrajectory, SpeedSubsamplesBasePath) {
    for (const auto kind : {TrajectoryKind::Orbit, TrajectoryKind::Dolly}) {
        const auto slow = synthTrajectory(kind, 60, 1.0, 3);
        const auto fast = synthTrajectory(kind, 30, 2.0, 3);
        for (std::size_t i = 0; i < 30; ++i) {
            EXPECT_EQ(fast.frames[i], slow.frames[2 * i]);
        }
    }
}

TEST(SynthTrajectory, OrbitStepIsConstant) {
    const auto traj = synthTrajectory(TrajectoryKind::Orbit, 60, 1.0, 9);
    auto angle      = [](const Eigen::Vector3d &a, const Eigen::Vector3d &b) {
        return std::acos(std::clamp(a.normalized().dot(b.normalized()), -1.0, 1.0));
    };
    const double first = angle(traj.frames[0].center(), traj.frames[1].center());
    for (std::size_t i = 1; i + 1 < traj.frames.size(); ++i) {
        EXPECT_NEAR(angle(traj.frames[i].center(), traj.frames[i + 1].center()), first, 1e-9);
    }
}

TEST(SynthTrajectory, StaticRepeatsPose) {
    const auto traj = synthTrajectory(TrajectoryKind::Static, 5, 1.0, 1);
    for (const auto &cam : traj.frames) EXPECT_EQ(cam, traj.frames[0]);
}

TEST(SynthTrajectory, CamerasLookAtOrigin) {
    for (const auto &cam : synthTrajectory(TrajectoryKind::Orbit, 10, 4.0, 2).frames) {
        EXPECT_NO_THROW(cam.validate());
        const auto p = cam.toCamera(Eigen::Vector3d::Zero());
        EXPECT_NEAR(p.x(), 0.0, 1e-9);
        EXPECT_NEAR(p.y(), 0.0, 1e-9);
        EXPECT_GT(p.z(), 0.0);
    }
}

TEST(TrajectoryKind, ParseRoundTrip) {
    for (const auto k : {TrajectoryKind::Orbit, TrajectoryKind::Dolly, TrajectoryKind::Static}) {
        EXPECT_EQ(parseTrajectoryKind(toString(k)), k);
    }
    EXPECT_THROW(parseTrajectoryKind("spiral"), Error);
}
