#include "splatsort/io.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

namespace splatsort {

namespace {

void
checkVersion(const Json &j, const char *what) {
    if (!j.is_object() || !j.contains("version")) {
        throw Error(std::string(what) + " JSON has no version field");
    }
    if (j.at("version").get<int>() != kJsonFormatVersion) {
        throw Error(std::string(what) + " JSON version " + j.at("version").dump() + " is not supported");
    }
}

template <typename Vec>
Json
vecToJson(const Vec &v) {
    Json arr = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        arr.push_back(v[i]);
    }
    return arr;
}

template <typename Vec>
void
vecFromJson(const Json &arr, Vec &v) {
    if (!arr.is_array() || arr.size() != static_cast<std::size_t>(v.size())) {
        throw Error("expected an array of " + std::to_string(v.size()) + " numbers");
    }
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v[i] = arr[static_cast<std::size_t>(i)].get<typename Vec::Scalar>();
    }
}

void
appendU32(std::string &out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }
}

std::uint32_t
readU32(std::span<const std::byte> bytes, std::size_t &pos) {
    if (bytes.size() - std::min(pos, bytes.size()) < 4) {
        throw Error("table snapshot truncated at byte " + std::to_string(pos));
    }
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(std::to_integer<unsigned>(bytes[pos + i])) << (8 * i);
    }
    pos += 4;
    return v;
}

constexpr std::uint32_t kValidBit = 0x80000000u;

} // namespace

Json
sceneToJson(const Scene &scene) {
    Json gs = Json::array();
    for (const auto &g : scene.gaussians) {
        Json sh = Json::array();
        for (const auto &c : g.sh) {
            sh.push_back(vecToJson(c));
        }
        gs.push_back({{"id", g.id},
                      {"mean", vecToJson(g.mean)},
                      {"log_scale", vecToJson(g.logScale)},
                      {"rotation", vecToJson(g.rotation)},
                      {"opacity_logit", g.opacityLogit},
                      {"sh_degree", g.shDegree},
                      {"sh", sh}});
    }
    return {{"version", kJsonFormatVersion}, {"kind", "scene"}, {"gaussians", gs}};
}

Scene
sceneFromJson(const Json &j) {
    checkVersion(j, "scene");
    Scene scene;
    for (const auto &jg : j.at("gaussians")) {
        Gaussian3D g;
        g.id = jg.at("id").get<GaussianId>();
        vecFromJson(jg.at("mean"), g.mean);
        vecFromJson(jg.at("log_scale"), g.logScale);
        vecFromJson(jg.at("rotation"), g.rotation);
        g.opacityLogit = jg.at("opacity_logit").get<float>();
        g.shDegree     = jg.at("sh_degree").get<int>();
        const auto &sh = jg.at("sh");
        if (sh.size() != kShCoeffs) {
            throw Error("scene JSON: sh must hold 16 triplets");
        }
        for (std::size_t k = 0; k < kShCoeffs; ++k) {
            vecFromJson(sh[k], g.sh[k]);
        }
        scene.gaussians.push_back(g);
    }
    scene.validate();
    return scene;
}

Json
cameraToJson(const Camera &c) {
    Json rot = Json::array();
    for (int r = 0; r < 3; ++r) {
        rot.push_back(vecToJson(Eigen::Vector3d(c.rotation.row(r).transpose())));
    }
    return {{"fx", c.fx},         {"fy", c.fy},       {"cx", c.cx},     {"cy", c.cy},
            {"width", c.width},   {"height", c.height}, {"rotation", rot}, {"translation", vecToJson(c.translation)},
            {"near", c.near},     {"far", c.far}};
}

Camera
cameraFromJson(const Json &j) {
    Camera c;
    c.fx     = j.at("fx").get<double>();
    c.fy     = j.at("fy").get<double>();
    c.cx     = j.at("cx").get<double>();
    c.cy     = j.at("cy").get<double>();
    c.width  = j.at("width").get<int>();
    c.height = j.at("height").get<int>();
    for (int r = 0; r < 3; ++r) {
        Eigen::Vector3d row;
        vecFromJson(j.at("rotation").at(static_cast<std::size_t>(r)), row);
        c.rotation.row(r) = row.transpose();
    }
    vecFromJson(j.at("translation"), c.translation);
    c.near = j.at("near").get<double>();
    c.far  = j.at("far").get<double>();
    return c;
}

Json
trajectoryToJson(const Trajectory &t) {
    Json frames = Json::array();
    for (const auto &c : t.frames) {
        frames.push_back(cameraToJson(c));
    }
    return {{"version", kJsonFormatVersion}, {"kind", "trajectory"}, {"speed_multiplier", t.speedMultiplier},
            {"frames", frames}};
}

Trajectory
trajectoryFromJson(const Json &j) {
    checkVersion(j, "trajectory");
    Trajectory t;
    t.speedMultiplier = j.at("speed_multiplier").get<double>();
    for (const auto &c : j.at("frames")) {
        t.frames.push_back(cameraFromJson(c));
    }
    t.validate();
    return t;
}

Json
tablesToJson(std::span<const GaussianTable> tables) {
    Json arr = Json::array();
    for (const auto &t : tables) {
        Json entries = Json::array();
        for (const auto &e : t.entries) {
            entries.push_back({e.id, e.depthKey, e.valid});
        }
        arr.push_back({{"tile", t.tile}, {"sorted_frame", t.sortedFrame}, {"entries", entries}});
    }
    return {{"version", kJsonFormatVersion}, {"kind", "gaussian_tables"}, {"tables", arr}};
}

std::vector<GaussianTable>
tablesFromJson(const Json &j) {
    checkVersion(j, "table snapshot");
    std::vector<GaussianTable> out;
    for (const auto &jt : j.at("tables")) {
        GaussianTable t;
        t.tile        = jt.at("tile").get<TileId>();
        t.sortedFrame = jt.value("sorted_frame", std::int64_t{-1});
        for (const auto &je : jt.at("entries")) {
            t.entries.push_back({je.at(0).get<GaussianId>(), je.at(1).get<float>(), je.at(2).get<bool>()});
        }
        out.push_back(std::move(t));
    }
    return out;
}

std::string
encodeTables(std::span<const GaussianTable> tables) {
    std::string out;
    appendU32(out, kTableMagic);
    appendU32(out, kTableFormatVersion);
    appendU32(out, static_cast<std::uint32_t>(tables.size()));
    for (const auto &t : tables) {
        appendU32(out, t.tile);
        appendU32(out, static_cast<std::uint32_t>(t.entries.size()));
        for (const auto &e : t.entries) {
            require(e.id < kValidBit, "table snapshot: id " + std::to_string(e.id) + " does not fit in 31 bits");
            appendU32(out, e.id | (e.valid ? kValidBit : 0u));
            appendU32(out, std::bit_cast<std::uint32_t>(e.depthKey));
        }
    }
    return out;
}

std::vector<GaussianTable>
decodeTables(std::span<const std::byte> bytes) {
    std::size_t pos = 0;
    if (readU32(bytes, pos) != kTableMagic) {
        throw Error("table snapshot: bad magic");
    }
    if (const auto v = readU32(bytes, pos); v != kTableFormatVersion) {
        throw Error("table snapshot: unsupported version " + std::to_string(v));
    }
    const auto count = readU32(bytes, pos);
    std::vector<GaussianTable> out;
    for (std::uint32_t i = 0; i < count; ++i) {
        GaussianTable t;
        t.tile         = readU32(bytes, pos);
        const auto len = readU32(bytes, pos);
        t.entries.reserve(std::min<std::size_t>(len, bytes.size() / 8));
        for (std::uint32_t k = 0; k < len; ++k) {
            const auto word = readU32(bytes, pos);
            const auto key  = std::bit_cast<float>(readU32(bytes, pos));
            t.entries.push_back({word & ~kValidBit, key, (word & kValidBit) != 0});
        }
        out.push_back(std::move(t));
    }
    if (pos != bytes.size()) {
        throw Error("table snapshot: trailing bytes after table " + std::to_string(count));
    }
    return out;
}

Json
ledgerToJson(const TrafficLedger &ledger) {
    Json j = Json::object();
    for (const auto s : kAllStages) {
        j[toString(s)] = {{"read", ledger.at(s).read}, {"write", ledger.at(s).write}};
    }
    j["sort_total"] = ledger.sortBytes();
    j["total"]      = ledger.totalBytes();
    return j;
}

Json
summaryToJson(const TrafficSummary &s) {
    Json stages = Json::object();
    for (std::size_t i = 0; i < kStageCount; ++i) {
        stages[toString(kAllStages[i])] = {{"read", s.totals[i].read},
                                           {"write", s.totals[i].write},
                                           {"per_frame_average", s.perFrameAverage[i]}};
    }
    return {{"frames", s.frames},         {"stages", stages},         {"sort_bytes", s.sortBytes},
            {"total_bytes", s.totalBytes}, {"sort_share", s.sortShare}};
}

namespace {

Json
percentilesToJson(const std::optional<Percentiles> &p) {
    if (!p) {
        return nullptr;
    }
    return {{"p90", p->p90}, {"p95", p->p95}, {"p99", p->p99}};
}

} // namespace

Json
frameReportToJson(const FrameReport &r) {
    auto sum = [](const auto &v) {
        std::uint64_t s = 0;
        for (const auto x : v) s += x;
        return s;
    };
    return {{"frame", r.frameIndex},
            {"mode", toString(r.mode)},
            {"bootstrap", r.bootstrap},
            {"visible", r.visible},
            {"culled", r.diagnostics.culled},
            {"singular_dropped", r.diagnostics.singular},
            {"incoming_total", sum(r.incoming)},
            {"outgoing_total", sum(r.outgoing)},
            {"tiles_out_of_order", r.tilesOutOfOrder},
            {"blended_terms", r.blendedTerms},
            {"traffic", ledgerToJson(r.traffic)},
            {"tiles",
             {{"reused_entries", r.reusedEntries},
              {"reorder_bytes", r.reorderBytes},
              {"incoming", r.incoming},
              {"outgoing", r.outgoing},
              {"entries", r.tableEntries}}}};
}

Json
similarityToJson(const SimilarityReport &report) {
    Json frames = Json::array();
    for (const auto &fs : report.frames) {
        Json retention = Json::array();
        for (const auto &r : fs.retention) {
            retention.push_back(r ? Json(*r) : Json(nullptr));
        }
        frames.push_back({{"frame", fs.frameIndex},
                          {"retention", retention},
                          {"empty_prev_tiles", fs.emptyPrevTiles},
                          {"displacement", percentilesToJson(fs.displacement)}});
    }
    Json cdf = Json::array();
    for (std::size_t k = 0; k < kCdfBins; ++k) {
        cdf.push_back({{"x", static_cast<double>(k) / static_cast<double>(kCdfBins - 1)}, {"p", report.retentionCdf[k]}});
    }
    return {{"version", kJsonFormatVersion},
            {"displacement_definition", "nearest-rank percentiles of |rank_cur - rank_prev| over ids shared by "
                                        "consecutive frames, ranks among shared ids only"},
            {"retention_definition", "|prev ∩ cur| / |prev| per tile; tiles with an empty previous set are counted "
                                     "in empty_prev_tiles and reported as null"},
            {"retention_samples", report.retentionSamples},
            {"retention_cdf", cdf},
            {"displacement", percentilesToJson(report.displacement)},
            {"frames", frames}};
}

std::string
trafficCsv(std::span<const TrafficLedger> frames) {
    std::ostringstream out;
    out << "frame,stage,read,write\n";
    for (std::size_t f = 0; f < frames.size(); ++f) {
        for (const auto s : kAllStages) {
            out << f << ',' << toString(s) << ',' << frames[f].at(s).read << ',' << frames[f].at(s).write << '\n';
        }
    }
    return out.str();
}

std::vector<TrafficLedger>
parseTrafficCsv(const std::string &csv) {
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    if (line != "frame,stage,read,write") {
        throw Error("traffic CSV: unexpected header '" + line + "'");
    }
    std::vector<TrafficLedger> frames;
    std::size_t lineNo = 1;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty()) {
            continue;
        }
        std::istringstream row(line);
        std::string frame, stage, read, write;
        if (!std::getline(row, frame, ',') || !std::getline(row, stage, ',') || !std::getline(row, read, ',') ||
            !std::getline(row, write)) {
            throw Error("traffic CSV: malformed line " + std::to_string(lineNo));
        }
        try {
            const auto f = static_cast<std::size_t>(std::stoull(frame));
            if (f >= frames.size()) {
                frames.resize(f + 1);
            }
            frames[f].record(parseStage(stage), std::stoull(read), std::stoull(write));
        } catch (const std::logic_error &) {
            throw Error("traffic CSV: bad number on line " + std::to_string(lineNo));
        }
    }
    return frames;
}

Json
psnrToJson(double db) {
    if (std::isinf(db)) {
        return "inf";
    }
    return db;
}

std::string
encodePpm(const FrameImage &image) {
    std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    out.reserve(out.size() + image.rgb.size());
    for (const float v : image.rgb) {
        const double c = std::clamp(static_cast<double>(v), 0.0, 1.0);
        out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(c * 255.0))));
    }
    return out;
}

FrameImage
decodePpm(std::span<const std::byte> bytes) {
    std::size_t pos = 0;
    auto token      = [&]() -> std::string {
        std::string t;
        while (pos < bytes.size()) {
            const char ch = static_cast<char>(bytes[pos]);
            if (ch == '#') {
                while (pos < bytes.size() && static_cast<char>(bytes[pos]) != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(ch))) {
                ++pos;
            } else {
                break;
            }
        }
        while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(static_cast<char>(bytes[pos])))) {
            t.push_back(static_cast<char>(bytes[pos++]));
        }
        return t;
    };
    if (token() != "P6") {
        throw Error("ppm: not a binary P6 file");
    }
    int w = 0, h = 0, maxv = 0;
    try {
        w    = std::stoi(token());
        h    = std::stoi(token());
        maxv = std::stoi(token());
    } catch (const std::logic_error &) {
        throw Error("ppm: malformed header");
    }
    if (w <= 0 || h <= 0 || maxv != 255) {
        throw Error("ppm: only 8-bit images with positive size are supported");
    }
    ++pos; // single whitespace before the raster
    FrameImage img(w, h);
    if (bytes.size() < pos + img.rgb.size()) {
        throw Error("ppm: truncated raster");
    }
    for (std::size_t i = 0; i < img.rgb.size(); ++i) {
        img.rgb[i] = static_cast<float>(std::to_integer<unsigned>(bytes[pos + i]) / 255.0);
    }
    return img;
}

std::string
readFile(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open '" + path + "'");
    }
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void
writeFile(const std::string &path, const std::string &data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write '" + path + "'");
    }
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) {
        throw Error("write failed for '" + path + "'");
    }
}

} // namespace splatsort
