#include "splatsort/scene.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <random>

namespace splatsort {

double
sigmoid(double x) {
    return 1.0 / (1.0 + std::exp(-x));
}

Eigen::Matrix3d
quaternionToRotation(const Eigen::Vector4d &wxyz) {
    const double norm = wxyz.norm();
    require(norm > 0.0 && std::isfinite(norm), "quaternion has zero norm");
    const Eigen::Vector4d q = wxyz / norm;
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    Eigen::Matrix3d r;
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
        2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
        2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return r;
}

ActivatedGaussian
activate(const Gaussian3D &g) {
    ActivatedGaussian a;
    a.opacity = sigmoid(g.opacityLogit);
    a.scales  = g.logScale.cast<double>().array().exp().matrix();
    const Eigen::Matrix3d r = quaternionToRotation(g.rotation.cast<double>());
    const Eigen::Matrix3d m = r * a.scales.asDiagonal();
    a.covariance = m * m.transpose();
    // exact symmetry so downstream eigen-solves see a symmetric matrix
    a.covariance = 0.5 * (a.covariance + a.covariance.transpose()).eval();
    return a;
}

void
Camera::validate() const {
    require(fx > 0.0 && fy > 0.0, "camera focal lengths must be positive");
    require(near > 0.0 && near < far, "camera requires 0 < near < far");
    require(width > 0 && height > 0, "camera resolution must be positive");
    const double err = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).norm();
    require(err < 1e-5, "camera rotation is not orthonormal");
}

Camera
lookAt(const Eigen::Vector3d &eye, const Eigen::Vector3d &target, int width, int height,
       double fovYRadians, double near, double far) {
    const Eigen::Vector3d forward = (target - eye).normalized();
    Eigen::Vector3d right         = forward.cross(Eigen::Vector3d::UnitY());
    if (right.norm() < 1e-12) {
        right = Eigen::Vector3d::UnitX();
    }
    right.normalize();
    const Eigen::Vector3d down = forward.cross(right);

    Camera cam;
    cam.rotation.row(0) = right.transpose();
    cam.rotation.row(1) = down.transpose();
    cam.rotation.row(2) = forward.transpose();
    cam.translation     = -cam.rotation * eye;
    cam.width           = width;
    cam.height          = height;
    cam.fy              = 0.5 * height / std::tan(0.5 * fovYRadians);
    cam.fx              = cam.fy;
    cam.cx              = 0.5 * width;
    cam.cy              = 0.5 * height;
    cam.near            = near;
    cam.far             = far;
    return cam;
}

void
Trajectory::validate() const {
    require(!frames.empty(), "trajectory has no frames");
    require(speedMultiplier > 0.0, "speed multiplier must be positive");
    for (const auto &cam : frames) {
        cam.validate();
        require(cam.width == frames.front().width && cam.height == frames.front().height,
                "trajectory frames differ in resolution");
    }
}

void
Scene::validate() const {
    for (std::size_t i = 0; i < gaussians.size(); ++i) {
        require(gaussians[i].id == i, "scene ids must be dense and in order");
    }
}

Scene
synthScene(std::size_t n, double extent, std::uint64_t seed) {
    // Explicit generator arithmetic: distribution objects are not portable across
    // standard libraries, and scenes must be bit-identical everywhere.
    std::mt19937_64 rng(seed);
    auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    auto normal  = [&] {
        const double u1 = std::max(uniform(), 1e-300);
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    };

    static constexpr std::array<std::array<float, 3>, 8> kPalette{{
        {0.90f, 0.30f, 0.25f}, {0.25f, 0.65f, 0.90f}, {0.95f, 0.80f, 0.30f}, {0.35f, 0.80f, 0.40f},
        {0.70f, 0.45f, 0.85f}, {0.95f, 0.55f, 0.20f}, {0.85f, 0.85f, 0.85f}, {0.20f, 0.30f, 0.45f},
    }};
    constexpr double kY00 = 0.28209479177387814;

    const double baseLogScale = std::log(0.006 * extent);
    Scene scene;
    scene.gaussians.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto &g = scene.gaussians[i];
        g.id    = static_cast<GaussianId>(i);
        for (int k = 0; k < 3; ++k) {
            g.mean[k] = static_cast<float>((uniform() - 0.5) * extent);
        }
        for (int k = 0; k < 3; ++k) {
            g.logScale[k] = static_cast<float>(baseLogScale + 0.45 * normal());
        }
        Eigen::Vector4d q;
        do {
            q = Eigen::Vector4d(normal(), normal(), normal(), normal());
        } while (q.norm() < 1e-6);
        q.normalize();
        g.rotation     = q.cast<float>();
        g.opacityLogit = static_cast<float>(-2.0 + 6.0 * uniform());

        const auto &base  = kPalette[rng() % kPalette.size()];
        const double tint = 0.85 + 0.3 * uniform();
        for (int c = 0; c < 3; ++c) {
            const double target = std::clamp(base[c] * tint, 0.0, 1.0);
            g.sh[0][c]           = static_cast<float>((target - 0.5) / kY00);
        }
        g.shDegree = 0;
    }
    return scene;
}

namespace {

Camera
basePose(TrajectoryKind kind, double baseIndex, double azimuth0, const TrajectoryOptions &o) {
    const Eigen::Vector3d target = Eigen::Vector3d::Zero();
    double azimuth               = azimuth0;
    double distance              = o.radius;
    switch (kind) {
    case TrajectoryKind::Orbit: azimuth += o.stepRadians * baseIndex; break;
    case TrajectoryKind::Dolly: distance = std::max(o.radius - o.dollyStep * baseIndex, 2.0 * o.near); break;
    case TrajectoryKind::Static: break;
    }
    const Eigen::Vector3d eye(distance * std::cos(o.elevation) * std::cos(azimuth),
                              -distance * std::sin(o.elevation),
                              distance * std::cos(o.elevation) * std::sin(azimuth));
    return lookAt(eye, target, o.width, o.height, o.fovY, o.near, o.far);
}

} // namespace

Trajectory
synthTrajectory(TrajectoryKind kind, std::size_t frames, double speedMultiplier, std::uint64_t seed,
                const TrajectoryOptions &opts) {
    require(frames >= 1, "trajectory needs at least one frame");
    require(speedMultiplier > 0.0, "speed multiplier must be positive");
    std::mt19937_64 rng(seed);
    const double azimuth0 = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 * 3.14159265358979323846;

    Trajectory traj;
    traj.speedMultiplier = speedMultiplier;
    traj.frames.reserve(frames);
    for (std::size_t i = 0; i < frames; ++i) {
        const double baseIndex = std::round(static_cast<double>(i) * speedMultiplier);
        traj.frames.push_back(basePose(kind, baseIndex, azimuth0, opts));
    }
    return traj;
}

TrajectoryKind
parseTrajectoryKind(const std::string &name) {
    if (name == "orbit") return TrajectoryKind::Orbit;
    if (name == "dolly") return TrajectoryKind::Dolly;
    if (name == "static") return TrajectoryKind::Static;
    throw Error("unknown trajectory kind '" + name + "' (expected orbit, dolly or static)");
}

std::string
toString(TrajectoryKind kind) {
    switch (kind) {
    case TrajectoryKind::Orbit: return "orbit";
    case TrajectoryKind::Dolly: return "dolly";
    case TrajectoryKind::Static: return "static";
    }
    return "orbit";
}

} // namespace splatsort
