#pragma once

#include "splatsort/common.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <vector>

namespace splatsort {

constexpr int kShCoeffs = 16; // degree <= 3

/// One trained splat as stored on disk. Quaternion order is (w, x, y, z).
struct Gaussian3D {
    GaussianId id = 0;
    Eigen::Vector3f mean = Eigen::Vector3f::Zero();
    Eigen::Vector3f logScale = Eigen::Vector3f::Zero();
    Eigen::Vector4f rotation{1.0f, 0.0f, 0.0f, 0.0f};
    float opacityLogit = 0.0f;
    /// sh[k] is the RGB triplet of basis function k; sh[0] is the DC term.
    std::array<Eigen::Vector3f, kShCoeffs> sh{};
    /// Highest SH degree carrying data (0..3).
    int shDegree = 0;

    bool operator==(const Gaussian3D &) const = default;
};

struct ActivatedGaussian {
    double opacity = 0.0;
    Eigen::Vector3d scales = Eigen::Vector3d::Ones();
    Eigen::Matrix3d covariance = Eigen::Matrix3d::Identity();
};

/// o = sigmoid(logit), S = diag(exp(logScale)), cov = R S S^T R^T.
/// Throws ContractError for a zero-norm quaternion.
ActivatedGaussian activate(const Gaussian3D &g);

double sigmoid(double x);

Eigen::Matrix3d quaternionToRotation(const Eigen::Vector4d &wxyz);

struct Camera {
    double fx = 1.0, fy = 1.0, cx = 0.0, cy = 0.0;
    int width = 0, height = 0;
    /// x_cam = rotation * x_world + translation; camera looks down +z, y points down.
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
    double near = 0.01, far = 1000.0;

    Eigen::Vector3d center() const { return -rotation.transpose() * translation; }
    Eigen::Vector3d toCamera(const Eigen::Vector3d &world) const { return rotation * world + translation; }

    /// Throws ContractError when intrinsics, depth bounds or rotation are invalid.
    void validate() const;

    bool operator==(const Camera &) const = default;
};

/// Pinhole camera at `eye` looking at `target`, +y world up.
Camera lookAt(const Eigen::Vector3d &eye, const Eigen::Vector3d &target, int width, int height,
              double fovYRadians, double near, double far);

struct Trajectory {
    std::vector<Camera> frames;
    double speedMultiplier = 1.0;

    void validate() const;
};

struct Scene {
    std::vector<Gaussian3D> gaussians;

    std::size_t size() const { return gaussians.size(); }
    /// Throws ContractError unless ids are exactly 0..N-1 in order.
    void validate() const;

    bool operator==(const Scene &) const = default;
};

/// Deterministic synthetic scene: means uniform in [-extent/2, extent/2]^3.
Scene synthScene(std::size_t n, double extent, std::uint64_t seed);

enum class TrajectoryKind { Orbit, Dolly, Static };

struct TrajectoryOptions {
    int width = 512;
    int height = 512;
    double fovY = 0.8;                 // radians
    double radius = 20.0;              // orbit radius / dolly start distance
    double elevation = 0.35;           // radians above the horizontal plane
    double stepRadians = 0.5 * 3.14159265358979323846 / 180.0; // base orbit step per frame
    double dollyStep = 0.05;           // base dolly advance per frame, world units
    double near = 0.2;
    double far = 200.0;
};

/// Pose i of the result is pose round(i * speedMultiplier) of the base path.
/// The seed only rotates the starting azimuth. Throws ContractError if frames == 0.
Trajectory synthTrajectory(TrajectoryKind kind, std::size_t frames, double speedMultiplier,
                           std::uint64_t seed, const TrajectoryOptions &opts = {});

TrajectoryKind parseTrajectoryKind(const std::string &name);
std::string toString(TrajectoryKind kind);

} // namespace splatsort
