#include "splatsort/ply.hpp"
#include "splatsort/scene.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <random>

using namespace splatsort;

namespace {

const char *kFields[] = {"x",       "y",       "z",       "f_dc_0",  "f_dc_1",  "f_dc_2", "opacity",
                         "scale_0", "scale_1", "scale_2", "rot_0",   "rot_1",   "rot_2",  "rot_3"};

// Independent writer: header text plus raw float32 rows.
std::string
handWrittenPly(const std::vector<std::array<float, 14>> &rows, const std::string &extraProps = "",
               std::size_t extraBytes = 0) {
    std::string out = "ply\nformat binary_little_endian 1.0\ncomment test fixture\nelement vertex " +
                      std::to_string(rows.size()) + "\n";
    for (const char *f : kFields) out += std::string("property float ") + f + "\n";
    out += extraProps;
    out += "end_header\n";
    for (const auto &r : rows) {
        out.append(reinterpret_cast<const char *>(r.data()), sizeof(float) * r.size());
        out.append(extraBytes, '\x7f');
    }
    return out;
}

std::span<const std::byte>
bytesOf(const std::string &s) {
    return std::as_bytes(std::span(s.data(), s.size()));
}

std::array<float, 14>
row(float x, float y, float z) {
    return {x, y, z, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0};
}

} // namespace

TEST(LoadPly, ZeroVertices) {
    EXPECT_TRUE(loadPly(bytesOf(handWrittenPly({}))).gaussians.empty());
}

TEST(LoadPly, DefaultVertexActivates) {
    const auto scene = loadPly(bytesOf(handWrittenPly({row(0, 0, 0)})));
    ASSERT_EQ(scene.size(), 1u);
    const auto a = activate(scene.gaussians[0]);
    EXPECT_DOUBLE_EQ(a.opacity, 0.5);
    EXPECT_TRUE(a.scales.isApprox(Eigen::Vector3d::Ones()));
    EXPECT_TRUE(a.covariance.isApprox(Eigen::Matrix3d::Identity()));
}

TEST(LoadPly, ThreeVerticesBitExact) {
    const std::vector<std::array<float, 14>> rows{row(0.1f, -2.5f, 3e-7f), row(1e20f, 7.0f, -0.0f),
                                                  row(3.14159f, 2.71828f, 1.41421f)};
    const auto scene = loadPly(bytesOf(handWrittenPly(rows)));
    ASSERT_EQ(scene.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(scene.gaussians[i].id, i);
        for (int k = 0; k < 3; ++k) {
            EXPECT_EQ(std::memcmp(&scene.gaussians[i].mean[k], &rows[i][k], 4), 0);
        }
    }
}

TEST(LoadPly, ExtraPropertiesSkipped) {
    const auto data  = handWrittenPly({row(1, 2, 3), row(4, 5, 6)}, "property float nx\nproperty uchar flag\n", 5);
    const auto scene = loadPly(bytesOf(data));
    ASSERT_EQ(scene.size(), 2u);
    EXPECT_EQ(scene.gaussians[1].mean, Eigen::Vector3f(4, 5, 6));
}

TEST(LoadPly, TruncatedPayloadReportsOffset) {
    auto data = handWrittenPly({row(1, 2, 3), row(4, 5, 6)});
    data.resize(data.size() - 10);
    try {
        loadPly(bytesOf(data));
        FAIL() << "expected PlyError";
    } catch (const PlyError &e) {
        EXPECT_EQ(e.offset(), data.size());
        EXPECT_FALSE(e.field().empty());
    }
}

TEST(LoadPly, MissingFieldNamed) {
    std::string data = handWrittenPly({row(1, 2, 3)});
    const auto pos   = data.find("property float opacity\n");
    data.erase(pos, std::strlen("property float opacity\n"));
    try {
        loadPly(bytesOf(data));
        FAIL() << "expected PlyError";
    } catch (const PlyError &e) {
        EXPECT_EQ(e.field(), "opacity");
    }
}

TEST(LoadPly, AsciiAndBadMagicRejected) {
    EXPECT_THROW(loadPly(bytesOf(std::string("ply\nformat ascii 1.0\nend_header\n"))), PlyError);
    EXPECT_THROW(loadPly(bytesOf(std::string("plx\n"))), PlyError);
    EXPECT_THROW(loadPly(bytesOf(std::string("ply\nformat binary_little_endian 1.0\n"))), PlyError);
}

TEST(LoadPly, BadRestCountRejected) {
    auto data = handWrittenPly({}, "property float f_rest_0\nproperty float f_rest_1\n");
    EXPECT_THROW(loadPly(bytesOf(data)), PlyError);
}

TEST(SavePly, RoundTripDegreeZero) {
    const auto scene = synthScene(257, 10.0, 11);
    EXPECT_EQ(loadPly(bytesOf(savePly(scene))), scene);
}

TEST(SavePly, RoundTripHigherDegree) {
    auto scene = synthScene(20, 4.0, 2);
    std::mt19937 rng(1);
    std::uniform_real_distribution<float> u(-1, 1);
    for (auto &g : scene.gaussians) {
        g.shDegree = 3;
        for (int k = 1; k < kShCoeffs; ++k) g.sh[k] = {u(rng), u(rng), u(rng)};
    }
    const auto text = savePly(scene);
    EXPECT_NE(text.find("f_rest_44"), std::string::npos);
    EXPECT_EQ(loadPly(bytesOf(text)), scene);
}
