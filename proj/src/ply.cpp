#include "splatsort/ply.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>

namespace splatsort {

PlyError::PlyError(const std::string &what, std::size_t offset, std::string field)
    : Error("ply: " + what + " at byte " + std::to_string(offset) +
            (field.empty() ? std::string() : " (field '" + field + "')")),
      mOffset(offset), mField(std::move(field)) {}

namespace {

enum class ScalarType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

std::optional<ScalarType>
parseScalarType(const std::string &s) {
    static const std::map<std::string, ScalarType> kTypes{
        {"char", ScalarType::Int8},     {"int8", ScalarType::Int8},       {"uchar", ScalarType::UInt8},
        {"uint8", ScalarType::UInt8},   {"short", ScalarType::Int16},     {"int16", ScalarType::Int16},
        {"ushort", ScalarType::UInt16}, {"uint16", ScalarType::UInt16},   {"int", ScalarType::Int32},
        {"int32", ScalarType::Int32},   {"uint", ScalarType::UInt32},     {"uint32", ScalarType::UInt32},
        {"float", ScalarType::Float32}, {"float32", ScalarType::Float32}, {"double", ScalarType::Float64},
        {"float64", ScalarType::Float64},
    };
    const auto it = kTypes.find(s);
    if (it == kTypes.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::size_t
scalarSize(ScalarType t) {
    switch (t) {
    case ScalarType::Int8:
    case ScalarType::UInt8: return 1;
    case ScalarType::Int16:
    case ScalarType::UInt16: return 2;
    case ScalarType::Int32:
    case ScalarType::UInt32:
    case ScalarType::Float32: return 4;
    case ScalarType::Float64: return 8;
    }
    return 0;
}

template <typename U>
U
readLE(const std::byte *p) {
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        v |= static_cast<U>(std::to_integer<unsigned>(p[i])) << (8 * i);
    }
    return v;
}

double
readScalar(ScalarType t, const std::byte *p) {
    switch (t) {
    case ScalarType::Int8: return static_cast<std::int8_t>(readLE<std::uint8_t>(p));
    case ScalarType::UInt8: return readLE<std::uint8_t>(p);
    case ScalarType::Int16: return static_cast<std::int16_t>(readLE<std::uint16_t>(p));
    case ScalarType::UInt16: return readLE<std::uint16_t>(p);
    case ScalarType::Int32: return static_cast<std::int32_t>(readLE<std::uint32_t>(p));
    case ScalarType::UInt32: return readLE<std::uint32_t>(p);
    case ScalarType::Float32: return std::bit_cast<float>(readLE<std::uint32_t>(p));
    case ScalarType::Float64: return std::bit_cast<double>(readLE<std::uint64_t>(p));
    }
    return 0.0;
}

// Float32 fields are decoded without a round trip through double so that NaN
// payloads survive bit-exactly.
float
readFloat(ScalarType t, const std::byte *p) {
    if (t == ScalarType::Float32) {
        return std::bit_cast<float>(readLE<std::uint32_t>(p));
    }
    return static_cast<float>(readScalar(t, p));
}

void
appendFloatLE(std::string &out, float v) {
    const auto u = std::bit_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<char>((u >> (8 * i)) & 0xffu));
    }
}

struct Property {
    std::string name;
    ScalarType type;
    std::size_t offset; // within one element record
};

struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<Property> props;
    std::size_t stride = 0;
};

std::size_t
restCountForDegree(int degree) {
    return static_cast<std::size_t>(3 * ((degree + 1) * (degree + 1) - 1));
}

} // namespace

Scene
loadPly(std::span<const std::byte> bytes) {
    std::size_t pos = 0;
    std::size_t lineStart = 0;
    auto nextLine = [&]() -> std::string {
        lineStart = pos;
        std::string line;
        while (pos < bytes.size() && bytes[pos] != std::byte{'\n'}) {
            line.push_back(static_cast<char>(bytes[pos]));
            ++pos;
        }
        if (pos >= bytes.size()) {
            throw PlyError("header not terminated by end_header", lineStart, "");
        }
        ++pos; // '\n'
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        return line;
    };

    if (nextLine() != "ply") {
        throw PlyError("missing 'ply' magic", 0, "ply");
    }
    std::vector<Element> elements;
    bool sawFormat = false;
    for (;;) {
        const std::string line = nextLine();
        std::istringstream in(line);
        std::string keyword;
        in >> keyword;
        if (keyword.empty() || keyword == "comment" || keyword == "obj_info") {
            continue;
        }
        if (keyword == "end_header") {
            break;
        }
        if (keyword == "format") {
            std::string fmt, version;
            in >> fmt >> version;
            if (fmt != "binary_little_endian") {
                throw PlyError("unsupported format '" + fmt + "'", lineStart, "format");
            }
            sawFormat = true;
        } else if (keyword == "element") {
            Element e;
            long long count = -1;
            in >> e.name >> count;
            if (e.name.empty() || count < 0 || in.fail()) {
                throw PlyError("malformed element line '" + line + "'", lineStart, "element");
            }
            e.count = static_cast<std::size_t>(count);
            elements.push_back(std::move(e));
        } else if (keyword == "property") {
            if (elements.empty()) {
                throw PlyError("property before any element", lineStart, "property");
            }
            std::string typeName, name;
            in >> typeName >> name;
            if (typeName == "list") {
                throw PlyError("list properties are not supported", lineStart, name);
            }
            const auto type = parseScalarType(typeName);
            if (!type || name.empty()) {
                throw PlyError("malformed property line '" + line + "'", lineStart, name);
            }
            auto &e = elements.back();
            e.props.push_back({name, *type, e.stride});
            e.stride += scalarSize(*type);
        } else {
            throw PlyError("unknown header keyword '" + keyword + "'", lineStart, keyword);
        }
    }
    if (!sawFormat) {
        throw PlyError("missing format line", pos, "format");
    }

    std::size_t dataPos = pos;
    Scene scene;
    bool sawVertex      = false;
    for (const auto &e : elements) {
        if (e.name != "vertex") {
            if (e.stride * e.count > bytes.size() - dataPos) {
                throw PlyError("truncated payload in element '" + e.name + "'", bytes.size(), e.name);
            }
            dataPos += e.stride * e.count;
            continue;
        }
        sawVertex = true;

        std::map<std::string, const Property *> byName;
        for (const auto &p : e.props) {
            byName[p.name] = &p;
        }
        auto field = [&](const std::string &name) -> const Property & {
            const auto it = byName.find(name);
            if (it == byName.end()) {
                throw PlyError("missing vertex property", pos, name);
            }
            return *it->second;
        };
        std::size_t restCount = 0;
        while (byName.count("f_rest_" + std::to_string(restCount))) {
            ++restCount;
        }
        int degree = -1;
        for (int d = 0; d <= 3; ++d) {
            if (restCountForDegree(d) == restCount) {
                degree = d;
            }
        }
        if (degree < 0) {
            throw PlyError("f_rest count " + std::to_string(restCount) + " matches no SH degree", pos,
                           "f_rest_" + std::to_string(restCount));
        }
        const std::size_t perChannel = restCount / 3;

        const Property *px = &field("x"), *py = &field("y"), *pz = &field("z");
        const Property *dc[3]    = {&field("f_dc_0"), &field("f_dc_1"), &field("f_dc_2")};
        const Property *opacity  = &field("opacity");
        const Property *scale[3] = {&field("scale_0"), &field("scale_1"), &field("scale_2")};
        const Property *rot[4]   = {&field("rot_0"), &field("rot_1"), &field("rot_2"), &field("rot_3")};
        std::vector<const Property *> rest(restCount);
        for (std::size_t i = 0; i < restCount; ++i) {
            rest[i] = &field("f_rest_" + std::to_string(i));
        }

        scene.gaussians.resize(e.count);
        for (std::size_t v = 0; v < e.count; ++v) {
            const std::size_t recordStart = dataPos + v * e.stride;
            if (e.stride > bytes.size() - std::min(recordStart, bytes.size())) {
                // report the first property that does not fit
                std::string missing = e.props.empty() ? "" : e.props.front().name;
                for (const auto &p : e.props) {
                    if (recordStart + p.offset + scalarSize(p.type) > bytes.size()) {
                        missing = p.name;
                        break;
                    }
                }
                throw PlyError("truncated payload in vertex " + std::to_string(v), bytes.size(), missing);
            }
            const std::byte *rec = bytes.data() + recordStart;
            auto get             = [&](const Property *p) { return readFloat(p->type, rec + p->offset); };

            auto &g        = scene.gaussians[v];
            g.id           = static_cast<GaussianId>(v);
            g.mean         = {get(px), get(py), get(pz)};
            g.opacityLogit = get(opacity);
            g.logScale     = {get(scale[0]), get(scale[1]), get(scale[2])};
            g.rotation     = {get(rot[0]), get(rot[1]), get(rot[2]), get(rot[3])};
            g.shDegree     = degree;
            for (int c = 0; c < 3; ++c) {
                g.sh[0][c] = get(dc[c]);
                for (std::size_t k = 1; k <= perChannel; ++k) {
                    g.sh[k][c] = get(rest[c * perChannel + (k - 1)]);
                }
            }
        }
        dataPos += e.stride * e.count;
    }
    if (!sawVertex) {
        throw PlyError("no vertex element", pos, "vertex");
    }
    return scene;
}

Scene
loadPlyFile(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open '" + path + "'");
    }
    const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return loadPly(std::as_bytes(std::span(data.data(), data.size())));
}

std::string
savePly(const Scene &scene) {
    int degree = 0;
    for (const auto &g : scene.gaussians) {
        degree = std::max(degree, g.shDegree);
    }
    const std::size_t restCount  = restCountForDegree(degree);
    const std::size_t perChannel = restCount / 3;

    std::string out = "ply\nformat binary_little_endian 1.0\nelement vertex " +
                      std::to_string(scene.gaussians.size()) + "\n";
    auto prop = [&out](const std::string &name) { out += "property float " + name + "\n"; };
    prop("x");
    prop("y");
    prop("z");
    for (int c = 0; c < 3; ++c) prop("f_dc_" + std::to_string(c));
    for (std::size_t i = 0; i < restCount; ++i) prop("f_rest_" + std::to_string(i));
    prop("opacity");
    for (int c = 0; c < 3; ++c) prop("scale_" + std::to_string(c));
    for (int c = 0; c < 4; ++c) prop("rot_" + std::to_string(c));
    out += "end_header\n";

    for (const auto &g : scene.gaussians) {
        for (int k = 0; k < 3; ++k) appendFloatLE(out, g.mean[k]);
        for (int c = 0; c < 3; ++c) appendFloatLE(out, g.sh[0][c]);
        for (int c = 0; c < 3; ++c) {
            for (std::size_t k = 1; k <= perChannel; ++k) appendFloatLE(out, g.sh[k][c]);
        }
        appendFloatLE(out, g.opacityLogit);
        for (int k = 0; k < 3; ++k) appendFloatLE(out, g.logScale[k]);
        for (int k = 0; k < 4; ++k) appendFloatLE(out, g.rotation[k]);
    }
    return out;
}

void
savePlyFile(const Scene &scene, const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write '" + path + "'");
    }
    const std::string data = savePly(scene);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

} // namespace splatsort
