#include "splatsort/analysis.hpp"
#include "splatsort/io.hpp"
#include "splatsort/ply.hpp"
#include "splatsort/runner.hpp"
#include "splatsort/sort.hpp"

#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace splatsort;

namespace {

using EntryTuple = std::tuple<GaussianId, float, bool>;

std::vector<TableEntry>
toEntries(const std::vector<EntryTuple> &v) {
    std::vector<TableEntry> out;
    out.reserve(v.size());
    for (const auto &[id, depth, valid] : v) out.push_back({id, depth, valid});
    return out;
}

std::vector<EntryTuple>
fromEntries(const std::vector<TableEntry> &v) {
    std::vector<EntryTuple> out;
    out.reserve(v.size());
    for (const auto &e : v) out.emplace_back(e.id, e.depthKey, e.valid);
    return out;
}

py::dict
ledgerDict(const TrafficLedger &ledger) {
    py::dict d;
    for (const auto stage : kAllStages) {
        d[py::str(toString(stage))] = py::make_tuple(ledger.at(stage).read, ledger.at(stage).write);
    }
    return d;
}

FrameImage
toImage(const py::array_t<float, py::array::c_style | py::array::forcecast> &a) {
    require(a.ndim() == 3 && a.shape(2) == 3, "image must have shape (height, width, 3)");
    FrameImage img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
    std::copy(a.data(), a.data() + a.size(), img.rgb.begin());
    return img;
}

py::array_t<float>
fromImage(const FrameImage &img) {
    py::array_t<float> a({img.height, img.width, 3});
    std::copy(img.rgb.begin(), img.rgb.end(), a.mutable_data());
    return a;
}

Json
resultJson(const RunResult &res) {
    Json j;
    for (const auto &m : res.modes) j["traffic"][toString(m.mode)] = summaryToJson(m.traffic);
    j["similarity"] = similarityToJson(res.similarity);
    Json psnr       = Json::array();
    for (const double db : res.psnr) psnr.push_back(psnrToJson(db));
    j["psnr_db"]                = psnr;
    j["median_psnr_db"]         = res.medianPsnr ? psnrToJson(*res.medianPsnr) : Json();
    j["min_psnr_db"]            = res.minPsnr ? psnrToJson(*res.minPsnr) : Json();
    j["sort_reduction_percent"] = res.sortReductionPercent ? Json(*res.sortReductionPercent) : Json();
    return j;
}

} // namespace

PYBIND11_MODULE(_splatsort, m) {
    auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ContractError>(m, "ContractError", error);

    py::class_<Scene>(m, "Scene")
        .def("__len__", &Scene::size)
        .def("to_json", [](const Scene &s) { return sceneToJson(s).dump(); })
        .def_static("from_json", [](const std::string &s) { return sceneFromJson(Json::parse(s)); })
        .def(py::self == py::self);

    m.def("synth_scene", &synthScene, py::arg("n"), py::arg("extent") = 10.0, py::arg("seed") = 7);
    m.def("load_ply", &loadPlyFile, py::arg("path"));
    m.def("save_ply", &savePlyFile, py::arg("scene"), py::arg("path"));

    m.def(
        "run_json",
        [](const std::string &config) {
            const auto cfg = runConfigFromJson(Json::parse(config));
            py::gil_scoped_release release;
            return resultJson(run(cfg)).dump();
        },
        py::arg("config"));

    m.def("psnr", [](py::array_t<float> a, py::array_t<float> b) { return psnr(toImage(a), toImage(b)); });
    m.def("read_ppm", [](const std::string &path) {
        const auto data = readFile(path);
        return fromImage(decodePpm(std::as_bytes(std::span(data.data(), data.size()))));
    });

    m.def(
        "chunk_boundaries",
        [](std::size_t length, std::size_t chunk, std::int64_t frameIndex) {
            std::vector<std::pair<std::size_t, std::size_t>> out;
            for (const auto &r : chunkBoundaries(length, chunk, frameParity(frameIndex)))
                out.emplace_back(r.start, r.end);
            return out;
        },
        py::arg("length"), py::arg("chunk"), py::arg("frame_index"));

    m.def(
        "dynamic_partial_sort",
        [](const std::vector<EntryTuple> &entries, std::int64_t frameIndex, std::size_t capacity, std::size_t sub) {
            GaussianTable t;
            t.entries = toEntries(entries);
            TrafficLedger ledger;
            const auto out = dynamicPartialSort(std::move(t), frameIndex, {capacity, sub}, {}, ledger);
            return py::make_tuple(fromEntries(out.entries), ledgerDict(ledger));
        },
        py::arg("entries"), py::arg("frame_index"), py::arg("capacity") = 256, py::arg("sub") = 16);

    m.def(
        "merge_update",
        [](const std::vector<EntryTuple> &reused, const std::vector<EntryTuple> &incoming, std::int64_t frameIndex) {
            GaussianTable t;
            t.entries = toEntries(reused);
            TrafficLedger ledger;
            const auto sorted = sortIncoming(toEntries(incoming), {}, {}, ledger);
            const auto out    = mergeUpdate(t, sorted, frameIndex, {}, ledger);
            return py::make_tuple(fromEntries(out.entries), ledgerDict(ledger));
        },
        py::arg("reused"), py::arg("incoming"), py::arg("frame_index"));

    m.def(
        "baseline_sort_traffic", [](std::uint64_t n) { return baselineSortTraffic(n); }, py::arg("n"));
    m.def("retention_fraction", [](const std::vector<GaussianId> &prev, const std::vector<GaussianId> &cur) {
        return retentionFraction(prev, cur);
    });
    m.def("rank_displacements", [](const std::vector<GaussianId> &prev, const std::vector<GaussianId> &cur) {
        return rankDisplacements(prev, cur);
    });
    m.def("nearest_rank", &nearestRank, py::arg("samples"), py::arg("percent"));
}
